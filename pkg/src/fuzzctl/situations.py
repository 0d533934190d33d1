"""Situational control: matching the current situation against the library,
applying elementary acts, generalizing conforming acts into one covering
decision, and explaining a decision by replaying its trace in reverse.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    BelowThreshold,
    EmptyLibrary,
    NoApplicableSituation,
    UnknownAct,
    UnknownDecision,
)
from .inference import possibility
from .kb import (
    ElementaryAct,
    FullSituation,
    FuzzySet,
    ImpactRule,
    KnowledgeBase,
    RepresentationLevel,
    Situation,
)


@dataclass
class SituationMatch:
    situation_ref: str
    score: float
    per_variable: dict[str, float]


@dataclass
class TraceStep:
    kind: str  # situation-match | rule-activation | act-application | evidence-combination
    reference: str
    degree: float
    text: str


@dataclass
class ExplanationTrace:
    """Forward record of how a decision came to be; explanation replays it
    newest-first. Carries the inputs needed to rerun the generalization."""

    id: str
    steps: list[TraceStep]
    final_decision_ref: str
    context_situation: Situation | None = None
    threshold: float | None = None


@dataclass
class Decision:
    id: str
    act_ref: str
    score: float
    impacts: tuple[ImpactRule, ...]
    rationale_trace: str


def conformity(current: Situation, stored: Situation) -> SituationMatch | None:
    """Per-variable possibility between two situations over their shared
    variables; None when they share nothing (no evidence either way)."""
    per_variable = {
        name: possibility(current.assignments[name], stored.assignments[name])
        for name in current.assignments
        if name in stored.assignments
    }
    if not per_variable:
        return None
    return SituationMatch(stored.id, min(per_variable.values()), per_variable)


def match_situations(current: Situation, library: Sequence[Situation]) -> list[SituationMatch]:
    """Rank library situations by conformity to the current one.

    Only situations sharing at least one variable are ranked; order is
    score descending, then situation id ascending.
    """
    if not library:
        raise EmptyLibrary("situation library is empty")
    matches = [m for s in library if (m := conformity(current, s)) is not None]
    matches.sort(key=lambda m: (-m.score, m.situation_ref))
    return matches


def _format_vector(vector: Mapping[str, float]) -> str:
    return json.dumps(dict(sorted(vector.items())), sort_keys=True)


def impacts_text(impacts: Iterable[ImpactRule]) -> str:
    parts = []
    for i in impacts:
        if i.delta is not None:
            parts.append(f"{i.target_variable}{i.delta:+g}")
        else:
            parts.append(f"{i.target_variable}:={i.set_value:g}")
    return ", ".join(parts) if parts else "none"


@dataclass
class ActApplication:
    target: Situation
    impacts: tuple[ImpactRule, ...]
    conformity: float


def apply_act(full: FullSituation, act: ElementaryAct, kb: KnowledgeBase,
              threshold: float) -> ActApplication:
    """Fire an elementary act if its trigger conforms to the current
    situation at least to the threshold.

    The returned target situation carries the act's control and
    disturbance vectors stamped into its annotation.
    """
    if not kb.has_act(act.id):
        raise UnknownAct(act.id)
    match = conformity(full.situation, kb.situation(act.trigger))
    degree = match.score if match is not None else 0.0
    if degree < threshold:
        raise BelowThreshold(degree, threshold)
    target = kb.situation(act.target)
    stamped = (target.annotation + " " if target.annotation else "") + \
        f"u={_format_vector(act.u)} w={_format_vector(act.w)}"
    return ActApplication(
        target=Situation(target.id, dict(target.assignments), target.level, stamped),
        impacts=act.impacts,
        conformity=degree,
    )


# ---------------------------------------------------------------------------
# generalization and explanation
# ---------------------------------------------------------------------------

@dataclass
class ActGroup:
    """Acts sharing identical impact lists, merged into one alternative."""

    key: tuple
    acts: list[ElementaryAct]
    conformities: dict[str, float]
    impacts: tuple[ImpactRule, ...]

    @property
    def score(self) -> float:
        return max(self.conformities.values())

    @property
    def best_act(self) -> ElementaryAct:
        top = self.score
        best_id = min(a.id for a in self.acts if self.conformities[a.id] == top)
        return next(a for a in self.acts if a.id == best_id)

    @property
    def decision_id(self) -> str:
        return "d_" + self.best_act.id


def _impact_key(impacts: Iterable[ImpactRule]) -> tuple:
    return tuple(sorted(
        (i.target_variable, "delta" if i.delta is not None else "set",
         i.delta if i.delta is not None else i.set_value)
        for i in impacts))


def rank_acts(current: Situation, kb: KnowledgeBase) -> list[tuple[ElementaryAct, float]]:
    """All acts whose trigger shares at least one variable with the current
    situation, ranked by trigger conformity (desc), then id (asc)."""
    ranked = []
    for act in kb.elementary_acts:
        match = conformity(current, kb.situation(act.trigger))
        if match is not None:
            ranked.append((act, match.score))
    ranked.sort(key=lambda pair: (-pair[1], pair[0].id))
    return ranked


def group_acts(ranked: Sequence[tuple[ElementaryAct, float]]) -> list[ActGroup]:
    """Group ranked acts by identical impacts, order by score desc / id asc."""
    groups: dict[tuple, ActGroup] = {}
    for act, score in ranked:
        key = _impact_key(act.impacts)
        group = groups.get(key)
        if group is None:
            groups[key] = ActGroup(key, [act], {act.id: score}, act.impacts)
        else:
            group.acts.append(act)
            group.conformities[act.id] = score
    ordered = list(groups.values())
    ordered.sort(key=lambda g: (-g.score, g.decision_id))
    return ordered


def merge_targets(group: ActGroup, kb: KnowledgeBase) -> Situation:
    """Pointwise maximum (fuzzy union) of the group's target situations;
    the generalized situation covers every merged instance."""
    targets = [kb.situation(a.target) for a in sorted(group.acts, key=lambda a: a.id)]
    if len(targets) == 1:
        t = targets[0]
        return Situation(t.id, dict(t.assignments), t.level, t.annotation)
    merged: dict[str, FuzzySet] = {}
    for target in targets:
        for name, fset in target.assignments.items():
            if name in merged:
                merged[name] = FuzzySet(
                    fset.universe,
                    tuple(max(a, b) for a, b in zip(merged[name].memberships, fset.memberships)))
            else:
                merged[name] = fset
    level = kb.situation(group.best_act.target).level
    merged_id = "q_" + "_and_".join(t.id for t in targets)
    return Situation(merged_id, merged, level, "generalized from " + ", ".join(t.id for t in targets))


@dataclass
class GeneralizationResult:
    target: Situation
    decision: Decision
    trace: ExplanationTrace


def generalize(current: Situation, kb: KnowledgeBase, threshold: float) -> GeneralizationResult:
    """Find the covering target situation and decision for the current one.

    Ranks every elementary act by trigger conformity, keeps those at or
    above the threshold, merges the targets of acts sharing identical
    impacts by pointwise maximum, and returns the highest-scoring group as
    the decision. The trace records every match, the applications of the
    surviving acts, and the winning combination, in that order.
    """
    if not kb.elementary_acts:
        raise NoApplicableSituation("knowledge base has no elementary acts")
    ranked = rank_acts(current, kb)
    steps = [
        TraceStep(
            "situation-match", act.id, score,
            f"situation {current.id} vs trigger {act.trigger} of {act.id}")
        for act, score in ranked]
    surviving = [(act, score) for act, score in ranked if score >= threshold]
    if not surviving:
        raise NoApplicableSituation(
            f"no act conformity reached threshold {threshold}")
    for act, score in surviving:
        steps.append(TraceStep(
            "act-application", act.id, score,
            f"act {act.id} applicable: target {act.target}, impacts {impacts_text(act.impacts)}"))
    groups = group_acts(surviving)
    winner = groups[0]
    target = merge_targets(winner, kb)
    decision = Decision(
        id=winner.decision_id,
        act_ref=winner.best_act.id,
        score=winner.score,
        impacts=winner.impacts,
        rationale_trace="tr_" + winner.decision_id,
    )
    members = ", ".join(
        f"{a.id} degree={v!r}"
        for a, v in sorted(((a, winner.conformities[a.id]) for a in winner.acts),
                           key=lambda pair: (-pair[1], pair[0].id)))
    steps.append(TraceStep(
        "evidence-combination", decision.id, decision.score,
        f"decision {decision.id}: merged target {target.id} from [{members}], "
        f"impacts {impacts_text(winner.impacts)}"))
    trace = ExplanationTrace(
        id=decision.rationale_trace,
        steps=steps,
        final_decision_ref=decision.id,
        context_situation=current,
        threshold=threshold,
    )
    return GeneralizationResult(target, decision, trace)


def render_trace(trace: ExplanationTrace) -> list[str]:
    """Human-readable replay of the trace in reverse order (final decision
    first, raw matches last); the line format is stable across runs."""
    lines = []
    for n, step in enumerate(reversed(trace.steps), start=1):
        lines.append(
            f"step {n}: {step.kind} {step.reference} degree={step.degree!r} — {step.text}")
    return lines


@dataclass
class DecisionRecord:
    decision: Decision
    trace: ExplanationTrace


def explain(decision_id: str, log: Mapping[str, DecisionRecord]) -> list[str]:
    """Render the stored trace of a past decision, newest step first."""
    record = log.get(decision_id)
    if record is None:
        raise UnknownDecision(decision_id)
    return render_trace(record.trace)
