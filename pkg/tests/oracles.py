"""Independent brute-force reference implementations.

Everything here recomputes results straight from the defining formulas with
plain loops, sharing no code path with the engine, so the suite can pin
expected values against an implementation that cannot share the engine's
bugs.
"""

from __future__ import annotations

import random

from fuzzctl.kb import (
    Binding,
    FuzzySet,
    KnowledgeBase,
    LinguisticVariable,
    PlantSchema,
    Proposition,
    RepresentationLevel,
    Rule,
    StateVariable,
    Universe,
)


def possibility_brute(mu_a, mu_b) -> float:
    best = 0.0
    for x, y in zip(mu_a, mu_b):
        m = x if x < y else y
        if m > best:
            best = m
    return best


def compose_brute(mu_in, matrix, n_out) -> list[float]:
    out = []
    for j in range(n_out):
        best = 0.0
        for i in range(len(mu_in)):
            m = mu_in[i] if mu_in[i] < matrix[i][j] else matrix[i][j]
            if m > best:
                best = m
        out.append(best)
    return out


def infer_brute(kb: KnowledgeBase, premises, level=None) -> dict[str, list[float]]:
    """Point-by-point max-of-min evaluation of the whole rule set, without
    factoring out per-rule activations."""
    rules = [r for r in kb.rules if level is None or r.level == level]
    out: dict[str, list[float]] = {}
    for rule in rules:
        var = kb.variable(rule.consequent.variable)
        out.setdefault(rule.consequent.variable, [0.0] * len(var.universe.points))
    for name, acc in out.items():
        var = kb.variable(name)
        for j in range(len(var.universe.points)):
            best = 0.0
            for rule in rules:
                if rule.consequent.variable != name:
                    continue
                degree = var.terms[rule.consequent.term].memberships[j]
                for prop in rule.antecedent:
                    observed = premises.get(prop.variable)
                    if observed is None:
                        continue
                    stored = kb.term_set(prop.variable, prop.term).memberships
                    degree = min(degree, possibility_brute(observed.memberships, stored))
                for binding in rule.bindings:
                    observed = premises.get(binding.variable)
                    if observed is None:
                        continue
                    stored = kb.term_set(binding.variable, binding.term).memberships
                    degree = min(degree, possibility_brute(stored, observed.memberships))
                if degree > best:
                    best = degree
            acc[j] = best
    return out


def combine_brute(bundles) -> float:
    best = 0.0
    for b in bundles:
        m = min(b.mu_d, b.mu_t, b.mu_phi, b.conformity)
        if m > best:
            best = m
    return best


def merge_brute(assignment_maps) -> dict[str, list[float]]:
    """Pointwise max across situation assignment maps (variable -> mu)."""
    merged: dict[str, list[float]] = {}
    for assignments in assignment_maps:
        for name, mu in assignments.items():
            if name in merged:
                merged[name] = [max(a, b) for a, b in zip(merged[name], mu)]
            else:
                merged[name] = list(mu)
    return merged


# ---------------------------------------------------------------------------
# random instance generator (small, enumerable KBs)
# ---------------------------------------------------------------------------

def _minimal_plant() -> PlantSchema:
    return PlantSchema(
        state=(StateVariable("s", 0.0, 1.0, 0.0),),
        controls=("c",),
        stock_variable="s",
        inflow_variable="c",
        drain_variable="s",
        readings={},
    )


def random_kb(rng: random.Random, max_vars=4, max_rules=6, max_points=6,
              max_terms=3) -> KnowledgeBase:
    n_vars = rng.randint(1, max_vars)
    universes, variables = [], []
    for i in range(n_vars):
        n_points = rng.randint(1, max_points)
        start = round(rng.uniform(-10, 10), 3)
        points = [start]
        for _ in range(n_points - 1):
            points.append(round(points[-1] + rng.uniform(0.5, 5.0), 3))
        universe = Universe(f"u{i}", tuple(points), "x")
        terms = {
            f"t{j}": FuzzySet(universe, tuple(rng.random() for _ in points))
            for j in range(rng.randint(1, max_terms))}
        universes.append(universe)
        variables.append(LinguisticVariable(f"v{i}", universe, terms))
    rules = []
    for k in range(rng.randint(1, max_rules)):
        ante_vars = rng.sample(range(n_vars), rng.randint(1, min(3, n_vars)))
        antecedent = tuple(
            Proposition(f"v{i}", rng.choice(sorted(variables[i].terms)))
            for i in ante_vars)
        cons = rng.randrange(n_vars)
        consequent = Proposition(f"v{cons}", rng.choice(sorted(variables[cons].terms)))
        bindings = ()
        if rng.random() < 0.4:
            b = rng.randrange(n_vars)
            bindings = (Binding(f"v{b}", rng.choice(sorted(variables[b].terms))),)
        rules.append(Rule(f"r{k}", rng.choice(list(RepresentationLevel)),
                          antecedent, consequent, bindings))
    return KnowledgeBase(
        version="1",
        universes=tuple(universes),
        variables=tuple(variables),
        rules=tuple(rules),
        situations=(),
        elementary_acts=(),
        dictionary=(),
        plant_schema=_minimal_plant(),
    )


def random_premises(rng: random.Random, kb: KnowledgeBase, keep_probability=0.8):
    premises = {}
    for variable in kb.variables:
        if rng.random() < keep_probability:
            premises[variable.name] = FuzzySet(
                variable.universe,
                tuple(rng.random() for _ in variable.universe.points))
    return premises


def random_fuzzy_pair(rng: random.Random, max_points=8):
    n = rng.randint(1, max_points)
    points = tuple(float(i) for i in range(n))
    universe = Universe(f"ru{n}", points, "")
    a = FuzzySet(universe, tuple(rng.random() for _ in points))
    b = FuzzySet(universe, tuple(rng.random() for _ in points))
    return a, b


def random_situational_kb(rng: random.Random):
    """Small act library plus a random current situation, for exercising
    generalization: impacts are drawn from a tiny pool so groups merge."""
    from fuzzctl.kb import ElementaryAct, ImpactRule, Situation

    n_vars = rng.randint(1, 2)
    universes, variables = [], []
    for i in range(n_vars):
        n_points = rng.randint(2, 5)
        universe = Universe(f"u{i}", tuple(float(p) for p in range(n_points)), "")
        universes.append(universe)
        variables.append(LinguisticVariable(
            f"v{i}", universe,
            {"t0": FuzzySet(universe, tuple(rng.random() for _ in range(n_points)))}))

    def random_situation(sid):
        chosen = rng.sample(range(n_vars), rng.randint(1, n_vars))
        return Situation(sid, {
            f"v{i}": FuzzySet(universes[i],
                              tuple(rng.random() for _ in universes[i].points))
            for i in chosen})

    situations = [random_situation(f"sit_{j}") for j in range(rng.randint(3, 8))]
    impact_pool = (
        (ImpactRule("c", delta=1.0),),
        (ImpactRule("c", delta=2.0),),
        (ImpactRule("s", delta=1.0),),
    )
    acts = [
        ElementaryAct(
            f"act_{k}",
            rng.choice(situations).id,
            rng.choice(situations).id,
            rng.choice(impact_pool))
        for k in range(rng.randint(2, 5))]
    kb = KnowledgeBase(
        version="1",
        universes=tuple(universes),
        variables=tuple(variables),
        rules=(),
        situations=tuple(situations),
        elementary_acts=tuple(acts),
        dictionary=(),
        plant_schema=_minimal_plant(),
    )
    current = random_situation("now")
    return kb, current
