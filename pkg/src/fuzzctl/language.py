"""Controlled-language interpreter and synthesizer over the KB lexicon.

The grammar is a fixed set of productions per language (keyword tables
localized, slots filled from the dictionary). Parsing stages: tokenize,
lexical lookup, grammatical extraction (template match), disambiguation,
concept identification. Synthesis always goes from concepts to surface
forms in the requested language, never text to text.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

from .errors import (
    Ambiguous,
    LexicalGap,
    MissingSurfaceForm,
    NoParse,
    UnsupportedLanguage,
)
from .kb import DictionaryEntry, KnowledgeBase, Sense

_TOKEN_RE = re.compile(r"\w+", re.UNICODE)
_IDENT_RE = re.compile(r"^d_[a-z0-9_]+$")

LAST_DECISION = "$last"


@dataclass(frozen=True)
class Token:
    surface: str
    position: int
    language: str


class DialogActKind(Enum):
    ASSERT = "ASSERT"
    QUERY = "QUERY"
    WHY = "WHY"
    DECIDE = "DECIDE"
    PLAN = "PLAN"
    COMMAND = "COMMAND"


@dataclass
class DialogAct:
    kind: DialogActKind
    arguments: dict[str, str]
    confidence: float
    language: str

    def same_meaning(self, other: "DialogAct") -> bool:
        """Concept-level equality: kind and arguments, language aside."""
        return self.kind == other.kind and self.arguments == other.arguments


# ---------------------------------------------------------------------------
# grammar tables
# ---------------------------------------------------------------------------

class Slot(Enum):
    VAR = "variable"
    TERM = "term"
    ACT = "act"
    DECID = "decision"
    NUM = "horizon"


@dataclass(frozen=True)
class Production:
    kind: DialogActKind
    elements: tuple  # literal keyword strings and Slot members
    fixed_arguments: tuple[tuple[str, str], ...] = ()


_EN = {
    "aliases": {},
    "productions": (
        Production(DialogActKind.ASSERT, ("set", Slot.VAR, "to", Slot.TERM)),
        Production(DialogActKind.QUERY, ("what", "is", Slot.VAR)),
        Production(DialogActKind.WHY, ("why", "last", "decision"),
                   (("decision", LAST_DECISION),)),
        Production(DialogActKind.WHY, ("why", Slot.DECID)),
        Production(DialogActKind.DECIDE, ("decide",)),
        Production(DialogActKind.DECIDE, ("what", "should", "i", "do")),
        Production(DialogActKind.PLAN, ("plan", Slot.NUM, "steps")),
        Production(DialogActKind.COMMAND, ("apply", Slot.ACT)),
    ),
    "usage": "set <variable> to <term> | what is <variable> | decide | "
             "plan <n> steps | why last decision | apply <act>",
}

_ES = {
    "aliases": {"cual": "cuál", "que": "qué", "ultima": "última", "decision": "decisión"},
    "productions": (
        Production(DialogActKind.ASSERT, ("pon", Slot.VAR, "a", Slot.TERM)),
        Production(DialogActKind.QUERY, ("cuál", "es", Slot.VAR)),
        Production(DialogActKind.WHY, ("por", "qué", "última", "decisión"),
                   (("decision", LAST_DECISION),)),
        Production(DialogActKind.WHY, ("por", "qué", Slot.DECID)),
        Production(DialogActKind.DECIDE, ("decide",)),
        Production(DialogActKind.DECIDE, ("qué", "debo", "hacer")),
        Production(DialogActKind.PLAN, ("planifica", Slot.NUM, "pasos")),
        Production(DialogActKind.COMMAND, ("aplica", Slot.ACT)),
    ),
    "usage": "pon <variable> a <término> | cuál es <variable> | decide | "
             "planifica <n> pasos | por qué última decisión | aplica <acto>",
}

GRAMMARS: dict[str, dict] = {"en": _EN, "es": _ES}


def _grammar(language: str) -> dict:
    try:
        return GRAMMARS[language]
    except KeyError:
        raise UnsupportedLanguage(language) from None


def _keywords(language: str) -> set[str]:
    grammar = _grammar(language)
    words = set(grammar["aliases"])
    for production in grammar["productions"]:
        words.update(e for e in production.elements if isinstance(e, str))
    return words


def grammar_usage(language: str) -> str:
    return _grammar(language)["usage"]


# ---------------------------------------------------------------------------
# lexicon view over the KB dictionary
# ---------------------------------------------------------------------------

class Lexicon:
    def __init__(self, kb: KnowledgeBase):
        self.kb = kb
        self._by_surface: dict[tuple[str, str], DictionaryEntry] = {}
        self._by_concept: dict[tuple[str, str], str] = {}
        for entry in kb.dictionary:
            self._by_surface.setdefault((entry.language, entry.surface_form), entry)
            for sense in entry.senses:
                self._by_concept.setdefault((entry.language, sense.concept_id),
                                            entry.surface_form)

    def entry(self, language: str, surface: str) -> DictionaryEntry | None:
        return self._by_surface.get((language, surface))

    def surface_for(self, concept_id: str, language: str) -> str:
        surface = self._by_concept.get((language, concept_id))
        if surface is None:
            raise MissingSurfaceForm(concept_id, language)
        return surface


# ---------------------------------------------------------------------------
# pipeline stages
# ---------------------------------------------------------------------------

def supported_languages(kb: KnowledgeBase) -> tuple[str, ...]:
    return tuple(lang for lang in kb.languages() if lang in GRAMMARS)


def tokenize(utterance: str, language: str, kb: KnowledgeBase) -> list[Token]:
    """Lowercase, split on whitespace and punctuation, keep word characters."""
    if language not in kb.languages() or language not in GRAMMARS:
        raise UnsupportedLanguage(language)
    surfaces = _TOKEN_RE.findall(utterance.lower())
    return [Token(s, i, language) for i, s in enumerate(surfaces)]


@dataclass
class TokenAnalysis:
    token: Token
    category: str  # keyword | number | entry | ident | unknown
    keyword: str | None = None
    senses: tuple[Sense, ...] = ()


def lexical_lookup(tokens: Sequence[Token], language: str, kb: KnowledgeBase
                   ) -> list[TokenAnalysis]:
    """Classify each token: grammar keyword, number, dictionary entry with
    its candidate senses, or a raw identifier. Unknown content tokens raise
    LexicalGap listing every offending surface form."""
    lexicon = Lexicon(kb)
    grammar = _grammar(language)
    keywords = _keywords(language)
    analyses: list[TokenAnalysis] = []
    unknown: list[str] = []
    for token in tokens:
        surface = grammar["aliases"].get(token.surface, token.surface)
        if surface in keywords:
            analyses.append(TokenAnalysis(token, "keyword", keyword=surface))
        elif token.surface.isdigit():
            analyses.append(TokenAnalysis(token, "number"))
        elif (entry := lexicon.entry(language, token.surface)) is not None:
            analyses.append(TokenAnalysis(token, "entry", senses=tuple(entry.senses)))
        elif _IDENT_RE.match(token.surface):
            analyses.append(TokenAnalysis(token, "ident"))
        else:
            analyses.append(TokenAnalysis(token, "unknown"))
            unknown.append(token.surface)
    if unknown:
        raise LexicalGap(unknown)
    return analyses


@dataclass
class ParseContext:
    """Session-side facts the parser needs: the thematic domain currently
    in force for prior disambiguation."""

    active_domain: str


def _slot_compatible(sense: Sense, slot: Slot, kb: KnowledgeBase) -> bool:
    if slot is Slot.VAR:
        return kb.has_variable(sense.concept_id)
    if slot is Slot.TERM:
        return sense.concept_id in kb.term_labels()
    if slot is Slot.ACT:
        return kb.has_act(sense.concept_id)
    return False


def disambiguate(candidates: Sequence[Sense], context: ParseContext, slot: Slot,
                 kb: KnowledgeBase, surface: str = "") -> tuple[Sense, float]:
    """Resolve a token's sense: first by the active thematic domain, then by
    grammatical slot compatibility.

    Confidence is 1.0 when the domain filter (or a unique sense) settles
    it, 0.8 when only the slot filter does; anything still ambiguous is an
    error the dialog loop turns into a clarification question.
    """
    if len(candidates) == 1:
        return candidates[0], 1.0
    by_domain = [s for s in candidates if s.domain == context.active_domain]
    if len(by_domain) == 1:
        return by_domain[0], 1.0
    pool = by_domain if by_domain else list(candidates)
    by_slot = [s for s in pool if _slot_compatible(s, slot, kb)]
    if len(by_slot) == 1:
        return by_slot[0], 0.8
    raise Ambiguous(surface, by_slot if by_slot else pool)


def _match_production(production: Production, analyses: Sequence[TokenAnalysis]
                      ) -> dict[Slot, TokenAnalysis] | None:
    if len(production.elements) != len(analyses):
        return None
    slots: dict[Slot, TokenAnalysis] = {}
    for element, analysis in zip(production.elements, analyses):
        if isinstance(element, str):
            if analysis.category != "keyword" or analysis.keyword != element:
                return None
        elif element is Slot.NUM:
            if analysis.category != "number":
                return None
            slots[element] = analysis
        elif element is Slot.DECID:
            if analysis.category != "ident":
                return None
            slots[element] = analysis
        else:
            if analysis.category != "entry":
                return None
            slots[element] = analysis
    return slots


def parse_utterance(utterance: str, language: str, kb: KnowledgeBase,
                    context: ParseContext | None = None) -> DialogAct:
    """Full pipeline from raw text to a dialog act whose arguments are
    concept ids, never surface forms."""
    if context is None:
        context = ParseContext(kb.default_domain())
    tokens = tokenize(utterance, language, kb)
    if not tokens:
        raise NoParse("empty utterance")
    analyses = lexical_lookup(tokens, language, kb)
    for production in _grammar(language)["productions"]:
        slots = _match_production(production, analyses)
        if slots is None:
            continue
        arguments = dict(production.fixed_arguments)
        confidence = 1.0
        ok = True
        for slot, analysis in slots.items():
            if slot is Slot.NUM:
                arguments[slot.value] = analysis.token.surface
                continue
            if slot is Slot.DECID:
                arguments[slot.value] = analysis.token.surface
                continue
            sense, slot_confidence = disambiguate(
                analysis.senses, context, slot, kb, analysis.token.surface)
            if not _slot_compatible(sense, slot, kb):
                ok = False
                break
            arguments[slot.value] = sense.concept_id
            confidence = min(confidence, slot_confidence)
        if not ok:
            continue
        return DialogAct(production.kind, arguments, confidence, language)
    raise NoParse(f"no production matches: {utterance!r}")


# ---------------------------------------------------------------------------
# synthesis
# ---------------------------------------------------------------------------

def render_act(act: DialogAct, language: str, kb: KnowledgeBase) -> str:
    """Canonical utterance for a dialog act (the echo form); parsing the
    result yields an act with the same kind and arguments."""
    lex = Lexicon(kb)
    if language not in GRAMMARS or language not in kb.languages():
        raise UnsupportedLanguage(language)
    args = act.arguments
    if act.kind is DialogActKind.ASSERT:
        words = {"en": "set {v} to {t}", "es": "pon {v} a {t}"}[language]
        return words.format(v=lex.surface_for(args["variable"], language),
                            t=lex.surface_for(args["term"], language))
    if act.kind is DialogActKind.QUERY:
        words = {"en": "what is {v}", "es": "cuál es {v}"}[language]
        return words.format(v=lex.surface_for(args["variable"], language))
    if act.kind is DialogActKind.WHY:
        target = args.get("decision", LAST_DECISION)
        if target == LAST_DECISION:
            return {"en": "why last decision", "es": "por qué última decisión"}[language]
        return {"en": "why {d}", "es": "por qué {d}"}[language].format(d=target)
    if act.kind is DialogActKind.DECIDE:
        return "decide"
    if act.kind is DialogActKind.PLAN:
        words = {"en": "plan {n} steps", "es": "planifica {n} pasos"}[language]
        return words.format(n=args["horizon"])
    if act.kind is DialogActKind.COMMAND:
        words = {"en": "apply {a}", "es": "aplica {a}"}[language]
        return words.format(a=lex.surface_for(args["act"], language))
    raise ValueError(f"unknown act kind: {act.kind}")


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


_CLARIFICATION_TEMPLATES = {
    "en": {
        "lexical_gap": "i do not know the words: {words}. try: {usage}",
        "ambiguous": "{surface} is ambiguous here; it could mean: {concepts}. "
                     "please rephrase",
        "no_parse": "i could not parse that. try: {usage}",
        "term_mismatch": "{term} is not a term of {variable}",
        "no_value": "no current value is known for {variable}",
        "below_threshold": "act conformity {conformity} is below threshold {threshold}; "
                           "not applied",
        "no_applicable": "no elementary act conforms to the current situation",
        "unknown_decision": "i have no decision named {decision}",
        "no_decision_yet": "no decision has been made in this session yet",
        "unknown_act": "i have no act named {act}",
        "horizon_too_large": "plan horizon is capped at {max} steps",
        "planning_stalled": "planning stalled after {steps} steps: no applicable act",
    },
    "es": {
        "lexical_gap": "no conozco las palabras: {words}. prueba: {usage}",
        "ambiguous": "{surface} es ambigua aquí; podría significar: {concepts}. "
                     "por favor reformula",
        "no_parse": "no he podido analizar eso. prueba: {usage}",
        "term_mismatch": "{term} no es un término de {variable}",
        "no_value": "no se conoce ningún valor actual de {variable}",
        "below_threshold": "la conformidad {conformity} está por debajo del umbral "
                           "{threshold}; no se aplica",
        "no_applicable": "ningún acto elemental conforma con la situación actual",
        "unknown_decision": "no tengo ninguna decisión llamada {decision}",
        "no_decision_yet": "todavía no se ha tomado ninguna decisión en esta sesión",
        "unknown_act": "no tengo ningún acto llamado {act}",
        "horizon_too_large": "el horizonte del plan está limitado a {max} pasos",
        "planning_stalled": "la planificación se detuvo tras {steps} pasos: "
                            "ningún acto aplicable",
    },
}

_RESPONSE_TEMPLATES = {
    "en": {
        "ack": "ok: {variable} is now {term}",
        "answer": "{variable} is {best} (degree {degree}); crisp value {value}{unit}",
        "decision": "decision {decision_id}: apply {act} (score {score}); impacts: {impacts}",
        "plan": "plan over {horizon} steps: {steps}",
        "plan_empty": "plan over 0 steps: empty",
        "explanation": "explanation for {decision_id}:\n{lines}",
        "applied": "applied {act} (conformity {conformity}); state now {state}",
        "clarification": "clarification: {detail}",
        "error": "error {code}: {detail}",
    },
    "es": {
        "ack": "vale: {variable} ahora es {term}",
        "answer": "{variable} es {best} (grado {degree}); valor nítido {value}{unit}",
        "decision": "decisión {decision_id}: aplicar {act} (puntuación {score}); "
                    "impactos: {impacts}",
        "plan": "plan de {horizon} pasos: {steps}",
        "plan_empty": "plan de 0 pasos: vacío",
        "explanation": "explicación de {decision_id}:\n{lines}",
        "applied": "aplicado {act} (conformidad {conformity}); estado ahora {state}",
        "clarification": "aclaración: {detail}",
        "error": "error {code}: {detail}",
    },
}


def clarification_detail(code: str, language: str, **slots) -> str:
    templates = _CLARIFICATION_TEMPLATES.get(language)
    if templates is None:
        raise UnsupportedLanguage(language)
    template = templates[code]
    if "{usage}" in template:
        slots.setdefault("usage", grammar_usage(language))
    return template.format(**{k: _fmt(v) for k, v in slots.items()})


def synthesize(response: Mapping, language: str, kb: KnowledgeBase) -> str:
    """Deterministic template realization of a structured response; every
    concept id is rendered with its surface form in the target language."""
    if language not in GRAMMARS or language not in kb.languages():
        raise UnsupportedLanguage(language)
    lex = Lexicon(kb)
    templates = _RESPONSE_TEMPLATES[language]
    kind = response["kind"]
    if kind == "ack":
        return templates["ack"].format(
            variable=lex.surface_for(response["variable"], language),
            term=lex.surface_for(response["term"], language))
    if kind == "answer":
        unit = response.get("unit", "")
        return templates["answer"].format(
            variable=lex.surface_for(response["variable"], language),
            best=lex.surface_for(response["best"], language),
            degree=_fmt(response["degree"]),
            value=_fmt(response["value"]),
            unit=f" {unit}" if unit else "")
    if kind == "decision":
        return templates["decision"].format(
            decision_id=response["decision_id"],
            act=lex.surface_for(response["act"], language),
            score=_fmt(response["score"]),
            impacts=response["impacts"])
    if kind == "plan":
        steps = response.get("steps", [])
        if not steps:
            return templates["plan_empty"]
        rendered = "; ".join(
            f"{i + 1}. {s['decision_id']} ({_fmt(s['score'])})"
            for i, s in enumerate(steps))
        return templates["plan"].format(horizon=response["horizon"], steps=rendered)
    if kind == "explanation":
        return templates["explanation"].format(
            decision_id=response["decision_id"],
            lines="\n".join(response["lines"]))
    if kind == "applied":
        return templates["applied"].format(
            act=lex.surface_for(response["act"], language),
            conformity=_fmt(response["conformity"]),
            state=json.dumps(response["state"], sort_keys=True))
    if kind == "clarification":
        return templates["clarification"].format(detail=response["detail"])
    if kind == "error":
        return templates["error"].format(
            code=response.get("code", "internal"), detail=response.get("detail", ""))
    raise ValueError(f"unknown response kind: {kind}")
