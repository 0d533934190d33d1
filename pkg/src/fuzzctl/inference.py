"""Fuzzy inference kernel: possibility measures, max-min composition,
rule-set inference over premise vectors, fuzzification and defuzzification.

Everything here is a pure function of its arguments. Conjunction is min,
disjunction is max, and conformity between an observed and a stored value
is the sup-min possibility degree; no other connectives are used.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    DimensionMismatch,
    RangeError,
    UniverseMismatch,
    UnknownVariable,
)
from .kb import (
    FuzzySet,
    KnowledgeBase,
    LinguisticVariable,
    RepresentationLevel,
    Rule,
    Universe,
)

# Premise vector: the observed values of the input variables, one fuzzy set
# per variable name.
PremiseVector = Mapping[str, FuzzySet]


def _require_same_universe(a: FuzzySet, b: FuzzySet):
    if a.universe.id != b.universe.id or len(a.memberships) != len(b.memberships):
        raise UniverseMismatch(
            f"sets live on different universes: {a.universe.id} vs {b.universe.id}")


def possibility(a: FuzzySet, b: FuzzySet) -> float:
    """Degree to which two fuzzy values on one universe are compatible:
    the supremum over the universe of the pointwise minimum."""
    _require_same_universe(a, b)
    return max(min(x, y) for x, y in zip(a.memberships, b.memberships))


@dataclass(frozen=True)
class FuzzyRelation:
    """Matrix of membership degrees linking a source universe to a target
    universe; row count |source|, column count |target|."""

    source: Universe
    target: Universe
    matrix: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.matrix) != len(self.source.points):
            raise DimensionMismatch(
                f"relation has {len(self.matrix)} rows, source universe has "
                f"{len(self.source.points)} points")
        for row in self.matrix:
            if len(row) != len(self.target.points):
                raise DimensionMismatch(
                    f"relation row has {len(row)} columns, target universe has "
                    f"{len(self.target.points)} points")

    @classmethod
    def identity(cls, universe: Universe) -> "FuzzyRelation":
        n = len(universe.points)
        return cls(universe, universe,
                   tuple(tuple(1.0 if i == j else 0.0 for j in range(n)) for i in range(n)))


def compose_relation(input_set: FuzzySet, relation: FuzzyRelation) -> FuzzySet:
    """Max-min composition of a fuzzy set with a fuzzy relation:
    output(y) = max over x of min(input(x), relation(x, y))."""
    if input_set.universe.id != relation.source.id or \
            len(input_set.memberships) != len(relation.matrix):
        raise DimensionMismatch(
            f"input lives on {input_set.universe.id}, relation expects {relation.source.id}")
    mu = input_set.memberships
    out = tuple(
        max(min(mu[i], relation.matrix[i][j]) for i in range(len(mu)))
        for j in range(len(relation.target.points)))
    return FuzzySet(relation.target, out)


def compose_relations(first: FuzzyRelation, second: FuzzyRelation) -> FuzzyRelation:
    """Max-min product of two relations (first, then second)."""
    if first.target.id != second.source.id:
        raise DimensionMismatch(
            f"relations do not chain: {first.target.id} vs {second.source.id}")
    rows = len(first.source.points)
    mid = len(first.target.points)
    cols = len(second.target.points)
    matrix = tuple(
        tuple(
            max(min(first.matrix[i][k], second.matrix[k][j]) for k in range(mid))
            for j in range(cols))
        for i in range(rows))
    return FuzzyRelation(first.source, second.target, matrix)


@dataclass
class InferenceResult:
    """Output fuzzy set per consequent variable, plus how strongly each
    rule fired and which rule variables were defaulted because the premise
    vector did not constrain them."""

    output: dict[str, FuzzySet]
    rule_activations: dict[str, float]
    defaulted: dict[str, tuple[str, ...]] = field(default_factory=dict)
    level: RepresentationLevel | None = None


def rule_activation(rule: Rule, premises: PremiseVector, kb: KnowledgeBase
                    ) -> tuple[float, tuple[str, ...]]:
    """Firing degree of one rule against a premise vector.

    Each antecedent conjunct contributes the possibility of the premise
    against the stored term; each binding contributes the possibility of
    its stored reference value against the current premise. A variable the
    premise vector does not constrain contributes 1 and is reported back.
    """
    degree = 1.0
    defaulted: dict[str, None] = {}
    for prop in rule.antecedent:
        observed = premises.get(prop.variable)
        if observed is None:
            defaulted.setdefault(prop.variable)
            continue
        degree = min(degree, possibility(observed, kb.term_set(prop.variable, prop.term)))
    for binding in rule.bindings:
        observed = premises.get(binding.variable)
        if observed is None:
            defaulted.setdefault(binding.variable)
            continue
        degree = min(degree, possibility(kb.term_set(binding.variable, binding.term), observed))
    return degree, tuple(defaulted)


def infer(premises: PremiseVector, kb: KnowledgeBase,
          level: RepresentationLevel | None = None,
          rules: Iterable[Rule] | None = None) -> InferenceResult:
    """Run the compositional inference over a rule set.

    Per rule: activation = min over antecedent conjuncts of the premise /
    term possibility, min-ed with every binding conformity. Per consequent
    variable: output membership = pointwise max over rules of
    min(activation, consequent term membership).
    """
    for name, fset in premises.items():
        if not kb.has_variable(name):
            raise UnknownVariable(name)
        variable = kb.variable(name)
        if fset.universe.id != variable.universe.id or \
                len(fset.memberships) != len(variable.universe.points):
            raise UniverseMismatch(
                f"premise for {name} does not live on universe {variable.universe.id}")

    selected = list(rules) if rules is not None else [
        r for r in kb.rules if level is None or r.level == level]

    activations: dict[str, float] = {}
    defaulted: dict[str, tuple[str, ...]] = {}
    output: dict[str, list[float]] = {}
    for rule in selected:
        degree, missing = rule_activation(rule, premises, kb)
        activations[rule.id] = degree
        if missing:
            defaulted[rule.id] = missing
        consequent_var = kb.variable(rule.consequent.variable)
        term = consequent_var.terms[rule.consequent.term]
        acc = output.setdefault(
            rule.consequent.variable, [0.0] * len(consequent_var.universe.points))
        for i, m in enumerate(term.memberships):
            acc[i] = max(acc[i], min(degree, m))

    return InferenceResult(
        output={
            name: FuzzySet(kb.variable(name).universe, tuple(mu))
            for name, mu in output.items()},
        rule_activations=activations,
        defaulted=defaulted,
        level=level,
    )


@dataclass
class Fuzzified:
    """Crisp reading lifted onto the grid: a singleton set at the nearest
    point plus each term's membership at that point."""

    singleton: FuzzySet
    degrees: dict[str, float]
    point: float


def fuzzify(value: float, variable: LinguisticVariable) -> Fuzzified:
    """Snap a crisp value to the nearest universe point (ties go to the
    lower point) and read every term's membership there."""
    points = variable.universe.points
    if not points[0] <= value <= points[-1]:
        raise RangeError(
            f"value {value} outside universe {variable.universe.id} "
            f"[{points[0]}, {points[-1]}]")
    index = 0
    for i, p in enumerate(points):
        if abs(p - value) < abs(points[index] - value):
            index = i
    mu = tuple(1.0 if i == index else 0.0 for i in range(len(points)))
    degrees = {label: fset.memberships[index] for label, fset in variable.terms.items()}
    return Fuzzified(FuzzySet(variable.universe, mu), degrees, points[index])


@dataclass(frozen=True)
class DefuzzResult:
    value: float
    degenerate: bool = False


def defuzzify(fset: FuzzySet, method: str = "centroid") -> DefuzzResult:
    """Collapse a fuzzy set to a crisp value.

    centroid: sum(x * mu) / sum(mu); an all-zero set falls back to the
    universe midpoint and is flagged degenerate. max_of_maxima: midpoint
    of the first and last points attaining the maximal membership.
    """
    points = fset.universe.points
    mu = fset.memberships
    if method == "centroid":
        total = sum(mu)
        if total == 0.0:
            return DefuzzResult(fset.universe.midpoint, degenerate=True)
        return DefuzzResult(sum(p * m for p, m in zip(points, mu)) / total)
    if method == "max_of_maxima":
        top = max(mu)
        at_top = [p for p, m in zip(points, mu) if m == top]
        return DefuzzResult((at_top[0] + at_top[-1]) / 2.0, degenerate=(top == 0.0))
    raise ValueError(f"unknown defuzzification method: {method}")
