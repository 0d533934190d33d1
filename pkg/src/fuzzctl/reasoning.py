"""Evidence combination, alternative enumeration, decision selection and
greedy multi-step planning over the plant model.

An alternative's combined score is the disjunction (max) over its evidence
bundles of the conjunction (min) of the four estimate components: dialog,
generalization, control conformity, and the alpha-cut-relative premise
conformity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyEvidence, NoAlternatives, PlanningStalled
from .inference import possibility
from .kb import (
    ElementaryAct,
    FullSituation,
    FuzzySet,
    KnowledgeBase,
    Situation,
    crisp_from_alpha_cut,
)
from .plant import EnvironmentState, full_situation_from_state, step_plant
from .situations import (
    ActGroup,
    Decision,
    ExplanationTrace,
    TraceStep,
    conformity,
    group_acts,
    merge_targets,
    rank_acts,
    impacts_text,
)

WISDOM = "wisdom"
INTUITION = "intuition"
POLICIES = (WISDOM, INTUITION)


@dataclass(frozen=True)
class EvidenceBundle:
    """One supporting disjunct: dialog, generalization and control-process
    estimates plus the conformity of the observed premises."""

    mu_d: float
    mu_t: float
    mu_phi: float
    conformity: float


def combine_evidence(bundles: Sequence[EvidenceBundle]) -> float:
    """Max over bundles of the min of the four components."""
    if not bundles:
        raise EmptyEvidence("need at least one evidence bundle")
    return max(min(b.mu_d, b.mu_t, b.mu_phi, b.conformity) for b in bundles)


@dataclass
class Alternative:
    decision: Decision
    evidence: tuple[EvidenceBundle, ...]
    combined_score: float
    merged_target: Situation
    member_conformities: dict[str, float]
    trace: ExplanationTrace


@dataclass
class PlanStep:
    decision: Decision
    situation: Situation
    state: EnvironmentState


@dataclass
class Plan:
    steps: tuple[PlanStep, ...]
    horizon: int


def _binding_conformity(current: Situation, act: ElementaryAct, kb: KnowledgeBase,
                        theta: float) -> float:
    """Premise conformity against the alpha cut of the stored trigger values.

    Each shared trigger variable contributes the possibility of the current
    assignment against the crisp alpha cut (alpha = theta) of the stored
    one; theta <= 0 degrades to the support cut.
    """
    alpha = theta if 0.0 < theta <= 1.0 else None
    trigger = kb.situation(act.trigger)
    degree = 1.0
    for name, stored in trigger.assignments.items():
        observed = current.assignments.get(name)
        if observed is None:
            continue
        if alpha is None:
            cut = FuzzySet(stored.universe,
                           tuple(1.0 if m > 0.0 else 0.0 for m in stored.memberships))
        else:
            cut = crisp_from_alpha_cut(stored, alpha)
        degree = min(degree, possibility(observed, cut))
    return degree


def _alternative_from_group(group: ActGroup, current: Situation, kb: KnowledgeBase,
                            mu_d: float, theta: float,
                            all_ranked: Sequence[tuple[ElementaryAct, float]]) -> Alternative:
    mu_t = group.score
    bundles = tuple(
        EvidenceBundle(
            mu_d=mu_d,
            mu_t=mu_t,
            mu_phi=group.conformities[act.id],
            conformity=_binding_conformity(current, act, kb, theta))
        for act in sorted(group.acts, key=lambda a: a.id))
    combined = combine_evidence(bundles)
    target = merge_targets(group, kb)
    decision = Decision(
        id=group.decision_id,
        act_ref=group.best_act.id,
        score=combined,
        impacts=group.impacts,
        rationale_trace="tr_" + group.decision_id,
    )
    steps = [
        TraceStep("situation-match", act.id, score,
                  f"situation {current.id} vs trigger {act.trigger} of {act.id}")
        for act, score in all_ranked]
    for act in sorted(group.acts, key=lambda a: a.id):
        steps.append(TraceStep(
            "act-application", act.id, group.conformities[act.id],
            f"act {act.id} applicable: target {act.target}, impacts {impacts_text(act.impacts)}"))
    members = ", ".join(
        f"{a.id} degree={group.conformities[a.id]!r}"
        for a in sorted(group.acts, key=lambda a: (-group.conformities[a.id], a.id)))
    steps.append(TraceStep(
        "evidence-combination", decision.id, combined,
        f"decision {decision.id}: combined evidence over [{members}] gives {combined!r}"))
    trace = ExplanationTrace(
        id=decision.rationale_trace,
        steps=steps,
        final_decision_ref=decision.id,
        context_situation=current,
        threshold=theta,
    )
    return Alternative(decision, bundles, combined, target, dict(group.conformities), trace)


def enumerate_alternatives(full: FullSituation, kb: KnowledgeBase,
                           mu_d: float = 1.0, theta: float = 0.5) -> list[Alternative]:
    """One alternative per act group, every group included (threshold 0 for
    inclusion; theta only shapes the alpha-cut conformity component).

    mu_d is the parse confidence of the dialog turn that asked for the
    decision, 1.0 for system-initiated cycles. Sorted by combined score
    descending, then decision id ascending.
    """
    ranked = rank_acts(full.situation, kb)
    groups = group_acts(ranked)
    alternatives = [
        _alternative_from_group(g, full.situation, kb, mu_d, theta, ranked)
        for g in groups]
    alternatives.sort(key=lambda a: (-a.combined_score, a.decision.id))
    return alternatives


def decide(alternatives: Sequence[Alternative]) -> Decision:
    """Pick the alternative with maximal combined score; ties resolve to
    the ascending decision id. Permutation-invariant."""
    if not alternatives:
        raise NoAlternatives("no alternatives to decide over")
    best = min(alternatives, key=lambda a: (-a.combined_score, a.decision.id))
    return best.decision


def best_match_alternative(full: FullSituation, kb: KnowledgeBase,
                           mu_d: float = 1.0, theta: float = 0.5) -> Alternative | None:
    """The single best situation match as a lone alternative, skipping the
    merge across act groups entirely."""
    ranked = rank_acts(full.situation, kb)
    if not ranked:
        return None
    act, score = ranked[0]
    lone = ActGroup(("solo", act.id), [act], {act.id: score}, act.impacts)
    return _alternative_from_group(lone, full.situation, kb, mu_d, theta, ranked)


def alternatives_for_policy(full: FullSituation, kb: KnowledgeBase, policy: str,
                            mu_d: float = 1.0, theta: float = 0.5) -> list[Alternative]:
    """wisdom reasons over the whole archive of act groups; intuition
    commits to the single closest situation match."""
    if policy == INTUITION:
        single = best_match_alternative(full, kb, mu_d, theta)
        return [single] if single is not None else []
    if policy == WISDOM:
        return enumerate_alternatives(full, kb, mu_d, theta)
    raise ValueError(f"unknown policy: {policy}")


def chosen_alternative(alternatives: Sequence[Alternative], decision: Decision) -> Alternative:
    return next(a for a in alternatives if a.decision.id == decision.id)


def plan(full: FullSituation, horizon: int, kb: KnowledgeBase,
         theta: float = 0.5, policy: str = WISDOM) -> Plan:
    """Greedy rollout: enumerate, decide, push the impacts through the
    plant with zero disturbance, repeat. Horizon 0 is an empty plan;
    running out of alternatives raises PlanningStalled carrying the
    partial plan."""
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    steps: list[PlanStep] = []
    state = full.environment.copy()
    current = full
    for k in range(horizon):
        alternatives = alternatives_for_policy(current, kb, policy, mu_d=1.0, theta=theta)
        try:
            decision = decide(alternatives)
        except NoAlternatives as exc:
            raise PlanningStalled(Plan(tuple(steps), len(steps))) from exc
        state = step_plant(state, decision.impacts, {}, kb.plant_schema)
        predicted = full_situation_from_state(kb, state, f"plan_{k + 1}")
        steps.append(PlanStep(decision, predicted.situation, state.copy()))
        current = predicted
    return Plan(tuple(steps), horizon)
