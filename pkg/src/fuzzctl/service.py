"""Session-oriented service layer: dialog turns over pinned KB snapshots,
durable decision traces, closed-loop streaming, and the HTTP/WebSocket app.

Sessions are isolated and deterministic: identical (kb, seed, policy,
theta, utterance sequence) reproduce identical responses, which is what
makes session logs replayable.
"""

from __future__ import annotations

import asyncio
import hashlib
import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping

from fastapi import FastAPI, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from .errors import (
    Ambiguous,
    BelowThreshold,
    FuzzctlError,
    LexicalGap,
    NoAlternatives,
    NoApplicableSituation,
    NoParse,
    PlanningStalled,
    UnknownDecision,
    UnknownKB,
    UnknownSession,
    UnsupportedLanguage,
)
from .inference import defuzzify, fuzzify, possibility
from .kb import (
    EstimateMap,
    FullSituation,
    FuzzySet,
    KnowledgeBase,
    RepresentationLevel,
    Situation,
    load_knowledge_base,
    serialize_knowledge_base,
)
from .language import (
    DialogAct,
    DialogActKind,
    ParseContext,
    clarification_detail,
    parse_utterance,
    synthesize,
)
from .loop import TickRecord, iter_closed_loop
from .plant import DisturbanceProfile, EnvironmentState, initial_state, step_plant
from .reasoning import (
    POLICIES,
    alternatives_for_policy,
    chosen_alternative,
    decide,
    plan,
)
from .situations import DecisionRecord, apply_act, explain, impacts_text

MAX_PLAN_HORIZON = 100


@dataclass
class TurnResponse:
    kind: str  # answer | decision | plan | explanation | clarification | error
    payload: dict
    text: str
    mu_d: float

    def to_dict(self) -> dict:
        return {"kind": self.kind, "payload": self.payload,
                "text": self.text, "mu_d": self.mu_d}


class KBRegistry:
    """Loaded knowledge bases by id; replace is whole-document and
    copy-on-write, existing sessions keep their pinned snapshot."""

    def __init__(self):
        self._kbs: dict[str, KnowledgeBase] = {}
        self._lock = threading.Lock()

    def register(self, document, kb_id: str | None = None) -> str:
        kb = load_knowledge_base(document)
        if kb_id is None:
            canonical = json.dumps(serialize_knowledge_base(kb), sort_keys=True)
            kb_id = "kb_" + hashlib.sha256(canonical.encode()).hexdigest()[:12]
        with self._lock:
            self._kbs[kb_id] = kb
        return kb_id

    def add(self, kb_id: str, kb: KnowledgeBase):
        with self._lock:
            self._kbs[kb_id] = kb

    def get(self, kb_id: str) -> KnowledgeBase:
        with self._lock:
            kb = self._kbs.get(kb_id)
        if kb is None:
            raise UnknownKB(kb_id)
        return kb

    def ids(self) -> list[str]:
        with self._lock:
            return sorted(self._kbs)


@dataclass
class Session:
    id: str
    kb_id: str
    kb: KnowledgeBase
    language: str
    policy: str
    theta: float
    domain: str
    seed: int
    state: EnvironmentState
    disturbance: DisturbanceProfile
    premises: dict[str, FuzzySet] = field(default_factory=dict)
    history: list[dict] = field(default_factory=list)
    decisions: dict[str, DecisionRecord] = field(default_factory=dict)
    last_decision: str | None = None
    turn_count: int = 0
    lock: threading.RLock = field(default_factory=threading.RLock)
    log_path: Path | None = None


def _disturbance_from_spec(spec: Mapping | None, seed: int) -> DisturbanceProfile:
    if not spec:
        return DisturbanceProfile.zero(seed)
    return DisturbanceProfile(
        sequences={k: tuple(v) for k, v in spec.get("sequences", {}).items()},
        seed=int(spec.get("seed", seed)),
        uniform={k: (float(v[0]), float(v[1])) for k, v in spec.get("uniform", {}).items()},
    )


class SessionManager:
    def __init__(self, registry: KBRegistry | None = None, log_dir: str | Path | None = None):
        self.registry = registry or KBRegistry()
        self.log_dir = Path(log_dir) if log_dir else None
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    # -- session lifecycle --------------------------------------------------

    def create_session(self, kb_id: str, language: str = "en", policy: str = "wisdom",
                       theta: float = 0.5, seed: int = 0,
                       domain: str | None = None,
                       disturbance: Mapping | None = None,
                       session_id: str | None = None) -> str:
        kb = self.registry.get(kb_id)
        if language not in kb.languages():
            raise UnsupportedLanguage(language)
        if policy not in POLICIES:
            raise ValueError(f"unknown policy: {policy}")
        if not 0.0 <= theta <= 1.0:
            raise ValueError(f"theta must be in [0, 1], got {theta}")
        session = Session(
            id=session_id or uuid.uuid4().hex,
            kb_id=kb_id,
            kb=kb,
            language=language,
            policy=policy,
            theta=theta,
            domain=domain or kb.default_domain(),
            seed=seed,
            state=initial_state(kb.plant_schema),
            disturbance=_disturbance_from_spec(disturbance, seed),
        )
        if self.log_dir:
            self.log_dir.mkdir(parents=True, exist_ok=True)
            session.log_path = self.log_dir / f"{session.id}.jsonl"
            self._log(session, {
                "type": "session", "kb_id": kb_id, "language": language,
                "policy": policy, "theta": theta, "seed": seed,
                "domain": session.domain, "disturbance": dict(disturbance or {})})
        with self._lock:
            self._sessions[session.id] = session
        return session.id

    def _get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSession(session_id)
        return session

    def _log(self, session: Session, record: dict):
        if session.log_path is None:
            return
        with session.log_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")

    # -- dialog -------------------------------------------------------------

    def dialog_turn(self, session_id: str, utterance: str) -> TurnResponse:
        session = self._get(session_id)
        with session.lock:
            act, response = self._turn(session, utterance)
            session.history.append({
                "utterance": utterance,
                "act": ({"kind": act.kind.value, "arguments": act.arguments,
                         "confidence": act.confidence} if act else None),
                "kind": response.kind,
                "text": response.text,
            })
            session.turn_count += 1
            self._log(session, {
                "type": "turn", "utterance": utterance, "response": response.to_dict()})
            return response

    def _turn(self, session: Session, utterance: str) -> tuple[DialogAct | None, TurnResponse]:
        try:
            act = parse_utterance(
                utterance, session.language, session.kb,
                ParseContext(session.domain))
        except LexicalGap as exc:
            return None, self._clarify(session, "lexical_gap", 0.0,
                                       words=", ".join(exc.unknown_words))
        except Ambiguous as exc:
            concepts = ", ".join(sorted(s.concept_id for s in exc.senses))
            return None, self._clarify(session, "ambiguous", 0.0,
                                       surface=exc.surface, concepts=concepts)
        except (NoParse, UnsupportedLanguage):
            return None, self._clarify(session, "no_parse", 0.0)
        try:
            return act, self._execute(session, act)
        except FuzzctlError as exc:
            detail = str(exc)
            text = synthesize({"kind": "clarification", "detail": detail},
                              session.language, session.kb)
            return act, TurnResponse("clarification", {"code": type(exc).__name__,
                                                       "detail": detail}, text, act.confidence)

    def _clarify(self, session: Session, code: str, mu_d: float, **slots) -> TurnResponse:
        detail = clarification_detail(code, session.language, **slots)
        text = synthesize({"kind": "clarification", "detail": detail},
                          session.language, session.kb)
        return TurnResponse("clarification", {"code": code, **slots}, text, mu_d)

    def _current_full_situation(self, session: Session) -> FullSituation:
        """Plant readings fuzzified, overridden by asserted premises."""
        kb = session.kb
        assignments: dict[str, FuzzySet] = {}
        for lvar, pvar in kb.plant_schema.readings.items():
            assignments[lvar] = fuzzify(
                session.state.variables[pvar], kb.variable(lvar)).singleton
        assignments.update(session.premises)
        situation = Situation(
            id=f"now_{session.turn_count}",
            assignments=assignments,
            level=RepresentationLevel.SEMANTIC_FRAMES,
            annotation="dialog state",
        )
        return FullSituation(situation, session.state, session.state.tick)

    def _execute(self, session: Session, act: DialogAct) -> TurnResponse:
        kb = session.kb
        handler = {
            DialogActKind.ASSERT: self._do_assert,
            DialogActKind.QUERY: self._do_query,
            DialogActKind.DECIDE: self._do_decide,
            DialogActKind.WHY: self._do_why,
            DialogActKind.PLAN: self._do_plan,
            DialogActKind.COMMAND: self._do_command,
        }[act.kind]
        return handler(session, act)

    def _do_assert(self, session: Session, act: DialogAct) -> TurnResponse:
        kb = session.kb
        variable = act.arguments["variable"]
        term = act.arguments["term"]
        if term not in kb.variable(variable).terms:
            return self._clarify(session, "term_mismatch", act.confidence,
                                 term=term, variable=variable)
        session.premises[variable] = kb.term_set(variable, term)
        payload = {"variable": variable, "term": term}
        text = synthesize({"kind": "ack", **payload}, session.language, kb)
        return TurnResponse("answer", payload, text, act.confidence)

    def _do_query(self, session: Session, act: DialogAct) -> TurnResponse:
        kb = session.kb
        name = act.arguments["variable"]
        variable = kb.variable(name)
        if name in session.premises:
            fset = session.premises[name]
        elif name in kb.plant_schema.readings:
            reading = session.state.variables[kb.plant_schema.readings[name]]
            fset = fuzzify(reading, variable).singleton
        else:
            return self._clarify(session, "no_value", act.confidence, variable=name)
        degrees = {label: possibility(fset, tset) for label, tset in variable.terms.items()}
        crisp = defuzzify(fset, "centroid")
        best = EstimateMap.from_variable(variable).best_label(degrees)
        payload = {
            "variable": name, "degrees": degrees, "value": crisp.value,
            "degenerate": crisp.degenerate, "best": best,
            "unit": variable.universe.unit_label,
        }
        text = synthesize({
            "kind": "answer", "variable": name, "best": best,
            "degree": degrees[best], "value": crisp.value,
            "unit": variable.universe.unit_label}, session.language, kb)
        return TurnResponse("answer", payload, text, act.confidence)

    def _do_decide(self, session: Session, act: DialogAct) -> TurnResponse:
        kb = session.kb
        full = self._current_full_situation(session)
        alternatives = alternatives_for_policy(
            full, kb, session.policy, mu_d=act.confidence, theta=session.theta)
        try:
            decision = decide(alternatives)
        except NoAlternatives:
            return self._clarify(session, "no_applicable", act.confidence)
        alternative = chosen_alternative(alternatives, decision)
        session.decisions[decision.id] = DecisionRecord(decision, alternative.trace)
        session.last_decision = decision.id
        payload = {
            "decision_id": decision.id,
            "act": decision.act_ref,
            "score": decision.score,
            "impacts": [_impact_to_dict(i) for i in decision.impacts],
            "policy": session.policy,
            "theta": session.theta,
            "target": alternative.merged_target.id,
        }
        text = synthesize({
            "kind": "decision", "decision_id": decision.id, "act": decision.act_ref,
            "score": decision.score, "impacts": impacts_text(decision.impacts)},
            session.language, kb)
        return TurnResponse("decision", payload, text, act.confidence)

    def _do_why(self, session: Session, act: DialogAct) -> TurnResponse:
        kb = session.kb
        target = act.arguments.get("decision", "$last")
        if target == "$last":
            if session.last_decision is None:
                return self._clarify(session, "no_decision_yet", act.confidence)
            target = session.last_decision
        try:
            lines = explain(target, session.decisions)
        except UnknownDecision:
            return self._clarify(session, "unknown_decision", act.confidence,
                                 decision=target)
        payload = {"decision_id": target, "lines": lines}
        text = synthesize({"kind": "explanation", **payload}, session.language, kb)
        return TurnResponse("explanation", payload, text, act.confidence)

    def _do_plan(self, session: Session, act: DialogAct) -> TurnResponse:
        kb = session.kb
        horizon = int(act.arguments["horizon"])
        if horizon > MAX_PLAN_HORIZON:
            return self._clarify(session, "horizon_too_large", act.confidence,
                                 max=MAX_PLAN_HORIZON)
        full = self._current_full_situation(session)
        try:
            result = plan(full, horizon, kb, theta=session.theta, policy=session.policy)
        except PlanningStalled as exc:
            return self._clarify(session, "planning_stalled", act.confidence,
                                 steps=len(exc.partial_plan.steps))
        steps = [
            {"decision_id": s.decision.id, "score": s.decision.score,
             "state": dict(s.state.variables), "situation": s.situation.id}
            for s in result.steps]
        payload = {"horizon": result.horizon, "steps": steps}
        text = synthesize({"kind": "plan", **payload}, session.language, kb)
        return TurnResponse("plan", payload, text, act.confidence)

    def _do_command(self, session: Session, act: DialogAct) -> TurnResponse:
        kb = session.kb
        act_id = act.arguments["act"]
        elementary = kb.act(act_id)
        full = self._current_full_situation(session)
        try:
            applied = apply_act(full, elementary, kb, session.theta)
        except BelowThreshold as exc:
            return self._clarify(session, "below_threshold", act.confidence,
                                 conformity=exc.conformity, threshold=exc.threshold)
        session.state = step_plant(session.state, applied.impacts, {}, kb.plant_schema)
        payload = {
            "act": act_id,
            "conformity": applied.conformity,
            "target": applied.target.id,
            "state": dict(session.state.variables),
            "tick": session.state.tick,
        }
        text = synthesize({
            "kind": "applied", "act": act_id, "conformity": applied.conformity,
            "state": dict(session.state.variables)}, session.language, kb)
        return TurnResponse("answer", payload, text, act.confidence)

    # -- state / streaming ---------------------------------------------------

    def get_state(self, session_id: str) -> dict:
        session = self._get(session_id)
        with session.lock:
            full = self._current_full_situation(session)
            return {
                "session_id": session.id,
                "kb_id": session.kb_id,
                "language": session.language,
                "policy": session.policy,
                "theta": session.theta,
                "domain": session.domain,
                "plant_state": {**session.state.variables, "tick": session.state.tick},
                "situation": {
                    name: list(fs.memberships)
                    for name, fs in full.situation.assignments.items()},
                "premises": {
                    name: list(fs.memberships)
                    for name, fs in session.premises.items()},
                "last_decision": session.last_decision,
                "history_length": len(session.history),
                "setpoint": (
                    {"variable": session.kb.plant_schema.setpoint.variable,
                     "low": session.kb.plant_schema.setpoint.low,
                     "high": session.kb.plant_schema.setpoint.high}
                    if session.kb.plant_schema.setpoint else None),
            }

    def explanation(self, session_id: str, decision_id: str) -> dict:
        session = self._get(session_id)
        with session.lock:
            lines = explain(decision_id, session.decisions)
        return {"decision_id": decision_id, "lines": lines}

    def update_settings(self, session_id: str, theta: float | None = None,
                        policy: str | None = None) -> dict:
        session = self._get(session_id)
        with session.lock:
            if theta is not None:
                if not 0.0 <= theta <= 1.0:
                    raise ValueError(f"theta must be in [0, 1], got {theta}")
                session.theta = theta
            if policy is not None:
                if policy not in POLICIES:
                    raise ValueError(f"unknown policy: {policy}")
                session.policy = policy
            return {"theta": session.theta, "policy": session.policy}

    def stream_ticks(self, session_id: str, steps: int) -> Iterator[dict]:
        """Advance the session's simulator, yielding one record per tick and
        a terminal summary record."""
        session = self._get(session_id)
        with session.lock:
            count = 0
            iterator = iter_closed_loop(
                session.kb, session.state, steps, session.disturbance,
                session.policy, session.theta, session.decisions)
            first = True
            for record in iterator:
                session.state = EnvironmentState(dict(record.state), record.tick)
                if first:
                    first = False  # initial state row is not part of the stream
                    continue
                if record.decision_id:
                    session.last_decision = record.decision_id
                count += 1
                tick = _tick_to_dict(record, session)
                self._log(session, {"type": "tick", **tick})
                yield tick
            yield {
                "kind": "summary", "ticks": count,
                "tick": session.state.tick,
                "final_state": dict(session.state.variables),
            }

    def session_ids(self) -> list[str]:
        with self._lock:
            return sorted(self._sessions)


def _impact_to_dict(impact) -> dict:
    out = {"variable": impact.target_variable, "description": impact.description}
    if impact.delta is not None:
        out["delta"] = impact.delta
    else:
        out["set"] = impact.set_value
    return out


def _tick_to_dict(record: TickRecord, session: Session) -> dict:
    return {
        "kind": "tick",
        "tick": record.tick,
        "state": dict(record.state),
        "decision_id": record.decision_id,
        "score": record.score,
        "situation_id": record.situation_id,
        "theta": session.theta,
        "policy": session.policy,
    }


def replay_session_log(manager: SessionManager, path: str | Path,
                       session_id: str | None = None) -> tuple[str, list[TurnResponse]]:
    """Rebuild a session from its append-only log by re-feeding the recorded
    utterances into a fresh session with the same parameters. Determinism
    makes the replayed responses identical to the logged ones."""
    lines = [json.loads(line) for line in Path(path).read_text("utf-8").splitlines() if line]
    head = lines[0]
    if head.get("type") != "session":
        raise ValueError("log does not start with a session record")
    new_id = manager.create_session(
        kb_id=head["kb_id"], language=head["language"], policy=head["policy"],
        theta=head["theta"], seed=head["seed"], domain=head.get("domain"),
        disturbance=head.get("disturbance") or None, session_id=session_id)
    responses = []
    for record in lines[1:]:
        if record["type"] == "turn":
            responses.append(manager.dialog_turn(new_id, record["utterance"]))
        elif record["type"] == "tick":
            # ticks replay through the simulator, one step per logged tick
            for _ in manager.stream_ticks(new_id, 1):
                pass
    return new_id, responses


# ---------------------------------------------------------------------------
# HTTP / WebSocket app
# ---------------------------------------------------------------------------

def build_app(manager: SessionManager | None = None, frontend_dir: str | Path | None = None):
    app = FastAPI(title="fuzzctl service", version="0.1.0")
    mgr = manager or SessionManager()
    app.state.manager = mgr

    def error_body(code: str, detail: str, clarification: str | None = None) -> dict:
        body = {"error": code, "detail": detail}
        if clarification is not None:
            body["clarification"] = clarification
        return body

    NOT_FOUND = (UnknownKB, UnknownSession, UnknownDecision)

    @app.exception_handler(FuzzctlError)
    async def fuzzctl_error_handler(_request: Request, exc: FuzzctlError):
        status = 404 if isinstance(exc, NOT_FOUND) else 400
        return JSONResponse(status_code=status,
                            content=error_body(type(exc).__name__, str(exc)))

    @app.exception_handler(ValueError)
    async def value_error_handler(_request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content=error_body("ValueError", str(exc)))

    @app.post("/kbs")
    async def upload_kb(request: Request, kb_id: str | None = None):
        document = await request.json()
        new_id = mgr.registry.register(document, kb_id)
        kb = mgr.registry.get(new_id)
        return {"kb_id": new_id, "version": kb.version,
                "kb": serialize_knowledge_base(kb)}

    @app.post("/sessions")
    async def create_session(request: Request):
        body = await request.json()
        session_id = mgr.create_session(
            kb_id=body["kb_id"],
            language=body.get("language", "en"),
            policy=body.get("policy", "wisdom"),
            theta=float(body.get("theta", 0.5)),
            seed=int(body.get("seed", 0)),
            domain=body.get("domain"),
            disturbance=body.get("disturbance"),
        )
        return {"session_id": session_id}

    @app.post("/sessions/{session_id}/turns")
    async def post_turn(session_id: str, request: Request):
        body = await request.json()
        response = mgr.dialog_turn(session_id, str(body.get("utterance", "")))
        return response.to_dict()

    @app.get("/sessions/{session_id}/state")
    async def get_state(session_id: str):
        return mgr.get_state(session_id)

    @app.get("/sessions/{session_id}/decisions/{decision_id}/explanation")
    async def get_explanation(session_id: str, decision_id: str):
        return mgr.explanation(session_id, decision_id)

    @app.websocket("/sessions/{session_id}/ticks")
    async def ticks_channel(websocket: WebSocket, session_id: str,
                            steps: int = 0, interval_ms: int = 0):
        await websocket.accept()
        inbox: asyncio.Queue = asyncio.Queue()

        async def reader():
            try:
                while True:
                    inbox.put_nowait(await websocket.receive_text())
            except WebSocketDisconnect:
                inbox.put_nowait(None)
            except Exception:
                inbox.put_nowait(None)

        reader_task = asyncio.create_task(reader())
        paused = False
        stopped = False

        async def handle(raw: str | None) -> bool:
            """Returns False when the channel should shut down."""
            nonlocal paused, stopped
            if raw is None:
                return False
            try:
                message = json.loads(raw)
            except json.JSONDecodeError:
                await websocket.send_json({"kind": "error", "detail": "bad command"})
                return True
            cmd = message.get("cmd")
            if cmd == "pause":
                paused = True
                await websocket.send_json({"kind": "paused"})
            elif cmd == "resume":
                paused = False
                await websocket.send_json({"kind": "resumed"})
            elif cmd == "stop":
                stopped = True
            elif cmd == "utterance":
                response = mgr.dialog_turn(session_id, str(message.get("text", "")))
                await websocket.send_json({"kind": "turn", "response": response.to_dict()})
            elif cmd == "set":
                settings = mgr.update_settings(
                    session_id,
                    theta=message.get("theta"),
                    policy=message.get("policy"))
                await websocket.send_json({"kind": "settings", **settings})
            else:
                await websocket.send_json({"kind": "error", "detail": f"unknown cmd {cmd}"})
            return True

        try:
            stream = mgr.stream_ticks(session_id, steps)
            emitted_summary = False
            while not emitted_summary and not stopped:
                # give queued control frames a chance to land, then drain
                await asyncio.sleep(interval_ms / 1000.0 if interval_ms else 0)
                while not inbox.empty() or paused:
                    if not await handle(await inbox.get()):
                        return
                    if stopped:
                        break
                if stopped:
                    break
                record = next(stream, None)
                if record is None:
                    break
                await websocket.send_json(record)
                emitted_summary = record.get("kind") == "summary"
            if stopped and not emitted_summary:
                state = mgr.get_state(session_id)
                await websocket.send_json({
                    "kind": "summary", "ticks": None,
                    "tick": state["plant_state"]["tick"],
                    "final_state": {k: v for k, v in state["plant_state"].items()
                                    if k != "tick"}})
            await websocket.close()
        except WebSocketDisconnect:
            pass
        finally:
            reader_task.cancel()

    if frontend_dir and Path(frontend_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="console")

    return app
