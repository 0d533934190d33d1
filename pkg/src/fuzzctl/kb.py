"""Knowledge base core: universes, fuzzy sets, linguistic variables, rules,
situations, elementary acts, the multilingual dictionary and the plant
schema, together with document loading, validation and serialization.

A knowledge base is an immutable snapshot: load it once, share it freely.
Every mutation path goes through a fresh document load.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Mapping

import jsonschema

from .errors import DomainError, IntegrityError, SchemaError

KB_FORMAT_VERSION = "1"


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Universe:
    """Ordered discrete domain of definition for fuzzy sets.

    Points are strictly increasing; membership grids are evaluated on
    exactly these points, which keeps every downstream computation a
    finite enumeration.
    """

    id: str
    points: tuple[float, ...]
    unit_label: str = ""

    @property
    def midpoint(self) -> float:
        return (self.points[0] + self.points[-1]) / 2.0


@dataclass(frozen=True)
class FuzzySet:
    """Membership grid aligned with a universe, degrees in [0, 1]."""

    universe: Universe
    memberships: tuple[float, ...]

    @property
    def height(self) -> float:
        return max(self.memberships)

    def support(self) -> tuple[float, ...]:
        return tuple(p for p, m in zip(self.universe.points, self.memberships) if m > 0.0)


def alpha_cut(fset: FuzzySet, alpha: float) -> tuple[float, ...]:
    """Universe points whose membership is at least ``alpha``.

    ``alpha`` must lie in (0, 1]; the result preserves universe order.
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must be in (0, 1], got {alpha}")
    return tuple(p for p, m in zip(fset.universe.points, fset.memberships) if m >= alpha)


def crisp_from_alpha_cut(fset: FuzzySet, alpha: float) -> FuzzySet:
    """Characteristic function (0/1 memberships) of the alpha cut."""
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must be in (0, 1], got {alpha}")
    return FuzzySet(fset.universe, tuple(1.0 if m >= alpha else 0.0 for m in fset.memberships))


@dataclass
class LinguisticVariable:
    """Named variable whose values are verbal terms, each a fuzzy set.

    Facets carry free-form annotations (morphological, behavioural,
    psychological and similar aspects); the engine treats them as opaque.
    """

    name: str
    universe: Universe
    terms: dict[str, FuzzySet]
    facets: dict[str, str] = field(default_factory=dict)


class RepresentationLevel(Enum):
    RX_CODES = "RX_CODES"
    USC = "USC"
    SEMANTIC_FRAMES = "SEMANTIC_FRAMES"


@dataclass(frozen=True)
class Proposition:
    """(variable, term) pair used in rule antecedents and consequents."""

    variable: str
    term: str


@dataclass(frozen=True)
class Binding:
    """Stored reference value a premise must conform to for a rule to fire."""

    variable: str
    term: str


@dataclass(frozen=True)
class Rule:
    id: str
    level: RepresentationLevel
    antecedent: tuple[Proposition, ...]
    consequent: Proposition
    bindings: tuple[Binding, ...] = ()


@dataclass
class Situation:
    """Fuzzy assignment over a set of variables describing a state."""

    id: str
    assignments: dict[str, FuzzySet]
    level: RepresentationLevel = RepresentationLevel.SEMANTIC_FRAMES
    annotation: str = ""


@dataclass(frozen=True)
class ImpactRule:
    """Effect a decision has on one plant variable: a signed delta or an
    absolute set-value (exactly one of the two)."""

    target_variable: str
    delta: float | None = None
    set_value: float | None = None
    description: str = ""

    def __post_init__(self):
        if (self.delta is None) == (self.set_value is None):
            raise SchemaError(
                f"impact on {self.target_variable} needs exactly one of delta / set_value")


@dataclass
class ElementaryAct:
    """Situational transition: when the trigger situation conforms,
    move to the target situation and apply the impact rules.

    The x / u / w maps record the observed input, control and disturbance
    vectors attached to the transition; they are carried as data and
    stamped into annotations, never interpreted by the matcher.
    """

    id: str
    trigger: str
    target: str
    impacts: tuple[ImpactRule, ...]
    x: dict[str, float] = field(default_factory=dict)
    u: dict[str, float] = field(default_factory=dict)
    w: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class Sense:
    concept_id: str
    domain: str


@dataclass
class DictionaryEntry:
    surface_form: str
    language: str
    concept_id: str
    grammar: dict[str, str] = field(default_factory=dict)
    senses: tuple[Sense, ...] = ()


@dataclass
class EstimateMap:
    """Ordered verbal labels paired with their numeric membership grids.

    Supports switching between verbal and numeric ratings: a label maps to
    its grid, a numeric reading maps back to the best-fitting label.
    """

    verbal_labels: tuple[str, ...]
    numeric_grid: dict[str, FuzzySet]

    def __post_init__(self):
        if set(self.verbal_labels) != set(self.numeric_grid) or \
                len(set(self.verbal_labels)) != len(self.verbal_labels):
            raise DomainError("estimate map labels and grid entries must be a bijection")

    @classmethod
    def from_variable(cls, variable: LinguisticVariable) -> "EstimateMap":
        return cls(tuple(variable.terms), dict(variable.terms))

    def best_label(self, degrees: Mapping[str, float]) -> str:
        """Label with the highest degree; ties resolve to the earlier label."""
        best = self.verbal_labels[0]
        for label in self.verbal_labels:
            if degrees.get(label, 0.0) > degrees.get(best, 0.0):
                best = label
        return best


@dataclass(frozen=True)
class StateVariable:
    name: str
    minimum: float
    maximum: float
    initial: float


@dataclass(frozen=True)
class SetpointBand:
    variable: str
    low: float
    high: float


@dataclass
class PlantSchema:
    """Shape of the controlled unit: bounded state variables, the control
    inputs impacts may target, and how plant readings map onto linguistic
    variables (linguistic name -> plant variable name)."""

    state: tuple[StateVariable, ...]
    controls: tuple[str, ...]
    stock_variable: str
    inflow_variable: str
    drain_variable: str
    readings: dict[str, str]
    setpoint: SetpointBand | None = None

    def state_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.state)

    def bounds(self, name: str) -> tuple[float, float]:
        for v in self.state:
            if v.name == name:
                return (v.minimum, v.maximum)
        raise KeyError(name)


@dataclass
class FullSituation:
    """Situation plus the concrete environment state it was read from."""

    situation: Situation
    environment: "EnvironmentState"
    timestamp: int = 0

    def __post_init__(self):
        if self.timestamp < 0:
            raise DomainError("timestamp must be non-negative")


@dataclass
class KnowledgeBase:
    version: str
    universes: tuple[Universe, ...]
    variables: tuple[LinguisticVariable, ...]
    rules: tuple[Rule, ...]
    situations: tuple[Situation, ...]
    elementary_acts: tuple[ElementaryAct, ...]
    dictionary: tuple[DictionaryEntry, ...]
    plant_schema: PlantSchema

    def __post_init__(self):
        self._universe_index = _first_wins({}, ((u.id, u) for u in self.universes))
        self._variable_index = _first_wins({}, ((v.name, v) for v in self.variables))
        self._rule_index = _first_wins({}, ((r.id, r) for r in self.rules))
        self._situation_index = _first_wins({}, ((s.id, s) for s in self.situations))
        self._act_index = _first_wins({}, ((a.id, a) for a in self.elementary_acts))

    # lookup helpers (first occurrence wins; duplicates are a validation issue)

    def universe(self, universe_id: str) -> Universe:
        return self._universe_index[universe_id]

    def variable(self, name: str) -> LinguisticVariable:
        return self._variable_index[name]

    def has_variable(self, name: str) -> bool:
        return name in self._variable_index

    def rule(self, rule_id: str) -> Rule:
        return self._rule_index[rule_id]

    def situation(self, situation_id: str) -> Situation:
        return self._situation_index[situation_id]

    def act(self, act_id: str) -> ElementaryAct:
        return self._act_index[act_id]

    def has_act(self, act_id: str) -> bool:
        return act_id in self._act_index

    def term_set(self, variable: str, term: str) -> FuzzySet:
        return self.variable(variable).terms[term]

    def term_labels(self) -> set[str]:
        labels: set[str] = set()
        for v in self.variables:
            labels.update(v.terms)
        return labels

    def languages(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for entry in self.dictionary:
            seen.setdefault(entry.language, None)
        return tuple(seen)

    def domains(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for entry in self.dictionary:
            for sense in entry.senses:
                seen.setdefault(sense.domain, None)
        return tuple(seen)

    def default_domain(self) -> str:
        """Active thematic domain a fresh session starts in: the first
        domain (sorted) attached to a concept that names a KB variable."""
        candidates = sorted(
            sense.domain
            for entry in self.dictionary
            for sense in entry.senses
            if sense.concept_id in self._variable_index)
        if candidates:
            return candidates[0]
        doms = sorted(self.domains())
        return doms[0] if doms else "default"


def _first_wins(index, pairs):
    for key, value in pairs:
        index.setdefault(key, value)
    return index


# ---------------------------------------------------------------------------
# membership shapes
# ---------------------------------------------------------------------------

def sample_triangle(points: tuple[float, ...], a: float, b: float, c: float) -> tuple[float, ...]:
    """Evaluate a triangular membership (feet a, c, peak b) on a point grid.

    a == b or b == c produce shoulder shapes with a vertical edge.
    """
    mu = []
    for x in points:
        if x < a or x > c:
            mu.append(0.0)
            continue
        left = 1.0 if b == a else (x - a) / (b - a)
        right = 1.0 if c == b else (c - x) / (c - b)
        mu.append(max(0.0, min(left, right, 1.0)))
    return tuple(mu)


def membership_from_spec(universe: Universe, spec: Mapping) -> FuzzySet:
    """Build a fuzzy set from its authored JSON form.

    ``{"shape": "tri", "params": [a, b, c]}`` samples a triangle onto the
    grid; ``{"shape": "points", "mu": [...]}`` takes the grid verbatim.
    """
    shape = spec.get("shape")
    if shape == "tri":
        params = spec.get("params", [])
        if len(params) != 3:
            raise SchemaError(f"tri shape needs 3 params, got {params!r}")
        a, b, c = params
        if not a <= b <= c:
            raise SchemaError(f"tri params must be ordered a <= b <= c, got {params!r}")
        return FuzzySet(universe, sample_triangle(universe.points, a, b, c))
    if shape == "points":
        mu = spec.get("mu")
        if not isinstance(mu, list):
            raise SchemaError("points shape needs a mu list")
        return FuzzySet(universe, tuple(float(m) for m in mu))
    raise SchemaError(f"unknown membership shape: {shape!r}")


# ---------------------------------------------------------------------------
# document loading
# ---------------------------------------------------------------------------

def _document_schema() -> dict:
    text = resources.files("fuzzctl.data").joinpath("kb.schema.json").read_text("utf-8")
    return json.loads(text)


def load_knowledge_base(document, strict: bool = True) -> KnowledgeBase:
    """Parse, link and validate a KB document.

    Accepts a JSON string / bytes or an already-parsed mapping. Raises
    SchemaError for malformed documents and IntegrityError when linking
    fails or (under strict, the default) a typed invariant is violated;
    strict=False returns the linked KB so callers can inspect the full
    validation report themselves.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(document, Mapping):
        raise SchemaError("KB document must be a JSON object")
    try:
        jsonschema.validate(document, _document_schema())
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"document does not match KB schema: {exc.message}") from exc

    universes = tuple(
        Universe(u["id"], tuple(float(p) for p in u["points"]), u.get("unit", ""))
        for u in document["universes"])
    universe_index: dict[str, Universe] = {}
    for u in universes:
        universe_index.setdefault(u.id, u)

    variables = []
    for v in document["variables"]:
        uid = v["universe"]
        if uid not in universe_index:
            raise IntegrityError(f"variable {v['name']} references unknown universe {uid}", uid)
        universe = universe_index[uid]
        terms = {label: membership_from_spec(universe, spec) for label, spec in v["terms"].items()}
        variables.append(LinguisticVariable(v["name"], universe, terms, dict(v.get("facets", {}))))
    variable_index: dict[str, LinguisticVariable] = {}
    for v in variables:
        variable_index.setdefault(v.name, v)

    def proposition(raw, where: str) -> Proposition:
        name, term = raw["variable"], raw["term"]
        if name not in variable_index:
            raise IntegrityError(f"{where} references unknown variable {name}", name)
        if term not in variable_index[name].terms:
            raise IntegrityError(f"{where} references unknown term {name}.{term}", term)
        return Proposition(name, term)

    rules = []
    for r in document["rules"]:
        where = f"rule {r['id']}"
        rules.append(Rule(
            id=r["id"],
            level=RepresentationLevel(r.get("level", "SEMANTIC_FRAMES")),
            antecedent=tuple(proposition(p, where) for p in r["if"]),
            consequent=proposition(r["then"], where),
            bindings=tuple(
                Binding(proposition(b, where + " binding").variable, b["term"])
                for b in r.get("bindings", [])),
        ))

    def assignment_set(name: str, spec, where: str) -> FuzzySet:
        if name not in variable_index:
            raise IntegrityError(f"{where} assigns unknown variable {name}", name)
        variable = variable_index[name]
        if "term" in spec:
            term = spec["term"]
            if term not in variable.terms:
                raise IntegrityError(f"{where} references unknown term {name}.{term}", term)
            return variable.terms[term]
        return membership_from_spec(variable.universe, spec)

    situations = []
    for s in document["situations"]:
        where = f"situation {s['id']}"
        situations.append(Situation(
            id=s["id"],
            assignments={
                name: assignment_set(name, spec, where)
                for name, spec in s["assignments"].items()},
            level=RepresentationLevel(s.get("level", "SEMANTIC_FRAMES")),
            annotation=s.get("annotation", ""),
        ))
    situation_ids = {s.id for s in situations}

    acts = []
    for a in document["acts"]:
        for key in ("trigger", "target"):
            if a[key] not in situation_ids:
                raise IntegrityError(f"act {a['id']} references unknown situation {a[key]}", a[key])
        acts.append(ElementaryAct(
            id=a["id"],
            trigger=a["trigger"],
            target=a["target"],
            impacts=tuple(
                ImpactRule(
                    target_variable=i["variable"],
                    delta=i.get("delta"),
                    set_value=i.get("set"),
                    description=i.get("description", ""))
                for i in a.get("impacts", [])),
            x={k: float(v) for k, v in a.get("x", {}).items()},
            u={k: float(v) for k, v in a.get("u", {}).items()},
            w={k: float(v) for k, v in a.get("w", {}).items()},
        ))

    dictionary = tuple(
        DictionaryEntry(
            surface_form=e["surface"],
            language=e["language"],
            concept_id=e["concept"],
            grammar=dict(e.get("grammar", {})),
            senses=tuple(Sense(s["concept"], s["domain"]) for s in e["senses"]),
        )
        for e in document["dictionary"])

    p = document["plant"]
    plant = PlantSchema(
        state=tuple(
            StateVariable(v["name"], float(v["min"]), float(v["max"]), float(v["initial"]))
            for v in p["state"]),
        controls=tuple(p.get("controls", [])),
        stock_variable=p["stock_variable"],
        inflow_variable=p["inflow_variable"],
        drain_variable=p["drain_variable"],
        readings=dict(p.get("readings", {})),
        setpoint=SetpointBand(
            p["setpoint"]["variable"], float(p["setpoint"]["low"]), float(p["setpoint"]["high"]))
        if "setpoint" in p else None,
    )

    kb = KnowledgeBase(
        version=str(document["version"]),
        universes=universes,
        variables=tuple(variables),
        rules=tuple(rules),
        situations=tuple(situations),
        elementary_acts=tuple(acts),
        dictionary=dictionary,
        plant_schema=plant,
    )
    if strict:
        report = validate_knowledge_base(kb)
        if report.entries:
            first = report.entries[0]
            raise IntegrityError(f"{first.location}: {first.message}")
    return kb


def load_packaged_kb(name: str) -> KnowledgeBase:
    """Load one of the knowledge bases shipped with the package
    (``inventory`` or ``commute``)."""
    text = resources.files("fuzzctl.data").joinpath(f"{name}.kb.json").read_text("utf-8")
    return load_knowledge_base(text)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _set_to_spec(fset: FuzzySet) -> dict:
    return {"shape": "points", "mu": list(fset.memberships)}


def serialize_knowledge_base(kb: KnowledgeBase) -> dict:
    """Canonical document form: every membership emitted as explicit grid
    points, so load(serialize(kb)) reproduces kb structurally."""
    return {
        "version": kb.version,
        "universes": [
            {"id": u.id, "points": list(u.points), "unit": u.unit_label}
            for u in kb.universes],
        "variables": [
            {
                "name": v.name,
                "universe": v.universe.id,
                "terms": {label: _set_to_spec(s) for label, s in v.terms.items()},
                "facets": dict(v.facets),
            }
            for v in kb.variables],
        "rules": [
            {
                "id": r.id,
                "level": r.level.value,
                "if": [{"variable": p.variable, "term": p.term} for p in r.antecedent],
                "then": {"variable": r.consequent.variable, "term": r.consequent.term},
                "bindings": [{"variable": b.variable, "term": b.term} for b in r.bindings],
            }
            for r in kb.rules],
        "situations": [
            {
                "id": s.id,
                "level": s.level.value,
                "annotation": s.annotation,
                "assignments": {name: _set_to_spec(fs) for name, fs in s.assignments.items()},
            }
            for s in kb.situations],
        "acts": [
            {
                "id": a.id,
                "trigger": a.trigger,
                "target": a.target,
                "impacts": [
                    {
                        "variable": i.target_variable,
                        **({"delta": i.delta} if i.delta is not None else {"set": i.set_value}),
                        "description": i.description,
                    }
                    for i in a.impacts],
                "x": dict(a.x), "u": dict(a.u), "w": dict(a.w),
            }
            for a in kb.elementary_acts],
        "dictionary": [
            {
                "surface": e.surface_form,
                "language": e.language,
                "concept": e.concept_id,
                "grammar": dict(e.grammar),
                "senses": [{"concept": s.concept_id, "domain": s.domain} for s in e.senses],
            }
            for e in kb.dictionary],
        "plant": {
            "state": [
                {"name": v.name, "min": v.minimum, "max": v.maximum, "initial": v.initial}
                for v in kb.plant_schema.state],
            "controls": list(kb.plant_schema.controls),
            "stock_variable": kb.plant_schema.stock_variable,
            "inflow_variable": kb.plant_schema.inflow_variable,
            "drain_variable": kb.plant_schema.drain_variable,
            "readings": dict(kb.plant_schema.readings),
            **({"setpoint": {
                "variable": kb.plant_schema.setpoint.variable,
                "low": kb.plant_schema.setpoint.low,
                "high": kb.plant_schema.setpoint.high,
            }} if kb.plant_schema.setpoint else {}),
        },
    }


def kb_to_json(kb: KnowledgeBase) -> str:
    return json.dumps(serialize_knowledge_base(kb), ensure_ascii=False, indent=2)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationIssue:
    location: str
    message: str


@dataclass
class ValidationReport:
    """Invariant violations (entries) and advisory notes (warnings).

    The report is empty (valid KB) exactly when ``entries`` is empty;
    warnings never reject a KB.
    """

    entries: list[ValidationIssue] = field(default_factory=list)
    warnings: list[ValidationIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.entries


def validate_knowledge_base(kb: KnowledgeBase) -> ValidationReport:
    """Check every typed invariant; violations become report entries."""
    report = ValidationReport()
    entry = report.entries.append
    warn = report.warnings.append

    def check_duplicates(label, ids):
        seen = set()
        for i in ids:
            if i in seen:
                entry(ValidationIssue(f"{label}[{i}]", f"duplicate id {i}"))
            seen.add(i)

    check_duplicates("universes", (u.id for u in kb.universes))
    check_duplicates("variables", (v.name for v in kb.variables))
    check_duplicates("rules", (r.id for r in kb.rules))
    check_duplicates("situations", (s.id for s in kb.situations))
    check_duplicates("acts", (a.id for a in kb.elementary_acts))

    for u in kb.universes:
        loc = f"universes[{u.id}]"
        if len(u.points) < 1:
            entry(ValidationIssue(loc, "universe must have at least one point"))
        if any(b <= a for a, b in zip(u.points, u.points[1:])):
            entry(ValidationIssue(loc, "points must be strictly increasing"))

    def check_set(fset: FuzzySet, universe: Universe, loc: str):
        if fset.universe.id != universe.id:
            entry(ValidationIssue(loc, f"set lives on universe {fset.universe.id}, expected {universe.id}"))
        if len(fset.memberships) != len(universe.points):
            entry(ValidationIssue(loc, "membership grid length does not match universe"))
        for m in fset.memberships:
            if not 0.0 <= m <= 1.0:
                entry(ValidationIssue(loc, f"membership out of [0,1]: {m}"))
                break

    for v in kb.variables:
        loc = f"variables[{v.name}]"
        if not v.terms:
            entry(ValidationIssue(loc, "variable must define at least one term"))
        for label, fset in v.terms.items():
            check_set(fset, v.universe, f"{loc}.terms[{label}]")
            if fset.memberships and fset.height < 1.0:
                warn(ValidationIssue(f"{loc}.terms[{label}]", f"set is not normalized (height {fset.height})"))

    def check_proposition(p: Proposition, loc: str):
        if not kb.has_variable(p.variable):
            entry(ValidationIssue(loc, f"unknown variable {p.variable}"))
        elif p.term not in kb.variable(p.variable).terms:
            entry(ValidationIssue(loc, f"unknown term {p.variable}.{p.term}"))

    for r in kb.rules:
        loc = f"rules[{r.id}]"
        if not r.antecedent:
            entry(ValidationIssue(loc, "antecedent must be non-empty"))
        for p in r.antecedent:
            check_proposition(p, f"{loc}.antecedent")
        check_proposition(r.consequent, f"{loc}.consequent")
        for b in r.bindings:
            check_proposition(Proposition(b.variable, b.term), f"{loc}.bindings")

    for s in kb.situations:
        loc = f"situations[{s.id}]"
        if not s.assignments:
            entry(ValidationIssue(loc, "assignments must be non-empty"))
        for name, fset in s.assignments.items():
            if not kb.has_variable(name):
                entry(ValidationIssue(loc, f"unknown variable {name}"))
            else:
                check_set(fset, kb.variable(name).universe, f"{loc}.assignments[{name}]")

    situation_ids = {s.id for s in kb.situations}
    plant_vars = set(kb.plant_schema.state_names()) | set(kb.plant_schema.controls)
    for a in kb.elementary_acts:
        loc = f"acts[{a.id}]"
        if a.trigger not in situation_ids:
            entry(ValidationIssue(loc, f"unknown trigger situation {a.trigger}"))
        if a.target not in situation_ids:
            entry(ValidationIssue(loc, f"unknown target situation {a.target}"))
        for i in a.impacts:
            if i.target_variable not in plant_vars:
                entry(ValidationIssue(loc, f"impact targets unknown plant variable {i.target_variable}"))

    for idx, e in enumerate(kb.dictionary):
        loc = f"dictionary[{idx}]"
        if not e.surface_form:
            entry(ValidationIssue(loc, "surface form must be non-empty"))
        if not e.senses:
            entry(ValidationIssue(loc, "entry needs at least one sense"))

    schema = kb.plant_schema
    for v in schema.state:
        loc = f"plant.state[{v.name}]"
        if v.minimum > v.maximum:
            entry(ValidationIssue(loc, "min exceeds max"))
        if not v.minimum <= v.initial <= v.maximum:
            entry(ValidationIssue(loc, "initial value outside bounds"))
    state_names = set(schema.state_names())
    if schema.stock_variable not in state_names:
        entry(ValidationIssue("plant", f"stock variable {schema.stock_variable} not in state"))
    if schema.drain_variable not in state_names:
        entry(ValidationIssue("plant", f"drain variable {schema.drain_variable} not in state"))
    if schema.inflow_variable not in schema.controls:
        entry(ValidationIssue("plant", f"inflow variable {schema.inflow_variable} not in controls"))
    for lvar, pvar in schema.readings.items():
        if not kb.has_variable(lvar):
            entry(ValidationIssue("plant.readings", f"unknown linguistic variable {lvar}"))
        if pvar not in state_names:
            entry(ValidationIssue("plant.readings", f"unknown plant variable {pvar}"))
    if schema.setpoint and schema.setpoint.variable not in state_names:
        entry(ValidationIssue("plant.setpoint", f"unknown plant variable {schema.setpoint.variable}"))

    return report
