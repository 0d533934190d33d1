"""Exception types shared across the engine."""


class FuzzctlError(Exception):
    """Base class for every error raised by this package."""


# -- knowledge base ----------------------------------------------------------

class SchemaError(FuzzctlError):
    """KB document is malformed (bad JSON, missing keys, wrong shapes)."""


class IntegrityError(FuzzctlError):
    """KB document references something that does not exist, or violates
    a structural invariant that makes the KB unusable."""

    def __init__(self, message: str, offending_id: str | None = None):
        super().__init__(message)
        self.offending_id = offending_id


class DomainError(FuzzctlError):
    """Numeric argument outside its admissible interval."""


# -- inference kernel --------------------------------------------------------

class UniverseMismatch(FuzzctlError):
    """Two fuzzy sets do not live on the same universe."""


class DimensionMismatch(FuzzctlError):
    """Relation matrix shape does not fit its universes."""


class UnknownVariable(FuzzctlError):
    def __init__(self, name: str):
        super().__init__(f"unknown variable: {name}")
        self.name = name


class RangeError(FuzzctlError):
    """Crisp value outside the universe it should be fuzzified on."""


# -- situational control -----------------------------------------------------

class EmptyLibrary(FuzzctlError):
    """Situation library has no entries to match against."""


class UnknownAct(FuzzctlError):
    def __init__(self, act_id: str):
        super().__init__(f"unknown elementary act: {act_id}")
        self.act_id = act_id


class BelowThreshold(FuzzctlError):
    """Act trigger conformity fell below the applicability threshold."""

    def __init__(self, conformity: float, threshold: float):
        super().__init__(f"conformity {conformity} below threshold {threshold}")
        self.conformity = conformity
        self.threshold = threshold


class NoApplicableSituation(FuzzctlError):
    """No elementary act conforms to the current situation."""


class UnknownDecision(FuzzctlError):
    def __init__(self, decision_id: str):
        super().__init__(f"unknown decision: {decision_id}")
        self.decision_id = decision_id


# -- reasoning / planning ----------------------------------------------------

class EmptyEvidence(FuzzctlError):
    """Evidence combination needs at least one bundle."""


class NoAlternatives(FuzzctlError):
    """Decision requested over an empty alternative sequence."""


class PlanningStalled(FuzzctlError):
    """Rollout ran out of alternatives before reaching the horizon."""

    def __init__(self, partial_plan):
        super().__init__(f"planning stalled after {len(partial_plan.steps)} steps")
        self.partial_plan = partial_plan


# -- linguistic processor ----------------------------------------------------

class UnsupportedLanguage(FuzzctlError):
    def __init__(self, language: str):
        super().__init__(f"unsupported language: {language}")
        self.language = language


class LexicalGap(FuzzctlError):
    """Utterance contains surface forms absent from the lexicon."""

    def __init__(self, unknown_words):
        super().__init__("unknown words: " + ", ".join(unknown_words))
        self.unknown_words = list(unknown_words)


class Ambiguous(FuzzctlError):
    """More than one sense survived both disambiguation filters."""

    def __init__(self, surface: str, senses):
        super().__init__(f"ambiguous surface form: {surface}")
        self.surface = surface
        self.senses = list(senses)


class NoParse(FuzzctlError):
    """No grammar production matches the utterance."""


class MissingSurfaceForm(FuzzctlError):
    def __init__(self, concept_id: str, language: str):
        super().__init__(f"concept {concept_id} has no surface form in {language}")
        self.concept_id = concept_id
        self.language = language


# -- plant / service ---------------------------------------------------------

class UnknownKB(FuzzctlError):
    def __init__(self, kb_id: str):
        super().__init__(f"unknown knowledge base: {kb_id}")
        self.kb_id = kb_id


class UnknownSession(FuzzctlError):
    def __init__(self, session_id: str):
        super().__init__(f"unknown session: {session_id}")
        self.session_id = session_id
