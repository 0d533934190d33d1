"""fuzzctl: a knowledge-based situational fuzzy control engine with a
controlled-language dialog front end and a simulated organizational unit."""

__version__ = "0.1.0"

from .errors import FuzzctlError
from .kb import (
    KnowledgeBase,
    load_knowledge_base,
    load_packaged_kb,
    serialize_knowledge_base,
    validate_knowledge_base,
)

__all__ = [
    "FuzzctlError",
    "KnowledgeBase",
    "load_knowledge_base",
    "load_packaged_kb",
    "serialize_knowledge_base",
    "validate_knowledge_base",
    "__version__",
]
