// Console view state and the pure model builders behind every panel.
//
// Invariant enforced by the contract tests: no fuzzy math happens here.
// Plot curves, gauge values and overlays are copied verbatim from service
// payloads; this module only selects and arranges them.

import type {
  KbDocument,
  KbUploadResult,
  StateSnapshot,
  TickRecord,
  TurnResponse,
} from "./types.js";

export interface TranscriptEntry {
  role: "user" | "engine";
  text: string;
  kind?: TurnResponse["kind"];
  payload?: Record<string, unknown>;
  muD?: number;
}

export interface TermCurve {
  label: string;
  values: number[];
}

export interface MembershipPlotModel {
  variable: string;
  unit: string;
  points: number[];
  curves: TermCurve[];
  overlay: number[] | null;
  overlaySource: "premise" | "situation" | null;
}

export interface GaugeModel {
  name: string;
  value: number;
  min: number;
  max: number;
  band: { low: number; high: number } | null;
}

export interface PlanRow {
  index: number;
  decisionId: string;
  score: number;
  state: Record<string, number>;
}

export class ConsoleViewState {
  transcript: TranscriptEntry[] = [];
  kbId: string | null = null;
  kb: KbDocument | null = null;
  sessionId: string | null = null;
  snapshot: StateSnapshot | null = null;
  selectedVariable: string | null = null;
  language = "en";
  ticks: TickRecord[] = [];

  attachKb(result: KbUploadResult): void {
    this.kbId = result.kb_id;
    this.kb = result.kb;
    if (!this.selectedVariable && result.kb.variables.length > 0) {
      this.selectedVariable = result.kb.variables[0].name;
    }
  }

  startSession(sessionId: string, language: string): void {
    this.sessionId = sessionId;
    this.language = language;
    this.transcript = [];
    this.ticks = [];
    this.snapshot = null;
  }

  appendUserTurn(utterance: string): void {
    this.transcript.push({ role: "user", text: utterance });
  }

  appendResponse(response: TurnResponse): void {
    this.transcript.push({
      role: "engine",
      text: response.text,
      kind: response.kind,
      payload: response.payload,
      muD: response.mu_d,
    });
  }

  dropLastUserTurn(): void {
    const last = this.transcript[this.transcript.length - 1];
    if (last && last.role === "user") {
      this.transcript.pop();
    }
  }

  userTurnCount(): number {
    return this.transcript.filter((entry) => entry.role === "user").length;
  }

  applySnapshot(snapshot: StateSnapshot): void {
    this.snapshot = snapshot;
  }

  appendTick(record: TickRecord): void {
    this.ticks.push(record);
  }

  lastTick(): TickRecord | null {
    return this.ticks.length > 0 ? this.ticks[this.ticks.length - 1] : null;
  }

  variableNames(): string[] {
    return this.kb ? this.kb.variables.map((v) => v.name) : [];
  }

  // One curve per term over the exact universe grid; the overlay is the
  // asserted premise for the variable when present, else the current
  // situation assignment. All values straight from payloads.
  membershipPlotModel(variable: string): MembershipPlotModel | null {
    if (!this.kb) return null;
    const spec = this.kb.variables.find((v) => v.name === variable);
    if (!spec) return null;
    const universe = this.kb.universes.find((u) => u.id === spec.universe);
    if (!universe) return null;
    const curves: TermCurve[] = Object.entries(spec.terms).map(([label, term]) => ({
      label,
      values: term.mu ? [...term.mu] : [],
    }));
    let overlay: number[] | null = null;
    let overlaySource: MembershipPlotModel["overlaySource"] = null;
    const premises = this.snapshot?.premises ?? {};
    const situation = this.snapshot?.situation ?? {};
    if (premises[variable]) {
      overlay = [...premises[variable]];
      overlaySource = "premise";
    } else if (situation[variable]) {
      overlay = [...situation[variable]];
      overlaySource = "situation";
    }
    return {
      variable,
      unit: universe.unit,
      points: [...universe.points],
      curves,
      overlay,
      overlaySource,
    };
  }

  gaugeModels(): GaugeModel[] {
    if (!this.kb || !this.snapshot) return [];
    const setpoint = this.snapshot.setpoint;
    return this.kb.plant.state.map((entry) => ({
      name: entry.name,
      value: this.snapshot!.plant_state[entry.name],
      min: entry.min,
      max: entry.max,
      band:
        setpoint && setpoint.variable === entry.name
          ? { low: setpoint.low, high: setpoint.high }
          : null,
    }));
  }

  planRows(response: TurnResponse): PlanRow[] {
    if (response.kind !== "plan") return [];
    const steps = (response.payload.steps ?? []) as {
      decision_id: string;
      score: number;
      state: Record<string, number>;
    }[];
    return steps.map((step, index) => ({
      index: index + 1,
      decisionId: step.decision_id,
      score: step.score,
      state: step.state,
    }));
  }
}
