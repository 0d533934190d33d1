// Payload shapes of the fuzzctl service API. The console never derives
// numbers of its own: everything rendered comes from these payloads.

export interface MembershipSpec {
  shape: string;
  mu?: number[];
  params?: number[];
}

export interface KbVariable {
  name: string;
  universe: string;
  terms: Record<string, MembershipSpec>;
  facets?: Record<string, string>;
}

export interface KbUniverse {
  id: string;
  points: number[];
  unit: string;
}

export interface KbDocument {
  version: string;
  universes: KbUniverse[];
  variables: KbVariable[];
  rules: unknown[];
  situations: unknown[];
  acts: { id: string }[];
  dictionary: unknown[];
  plant: {
    state: { name: string; min: number; max: number; initial: number }[];
    setpoint?: { variable: string; low: number; high: number };
    readings?: Record<string, string>;
  };
}

export interface KbUploadResult {
  kb_id: string;
  version: string;
  kb: KbDocument;
}

export interface TurnResponse {
  kind: "answer" | "decision" | "plan" | "explanation" | "clarification" | "error";
  payload: Record<string, unknown>;
  text: string;
  mu_d: number;
}

export interface StateSnapshot {
  session_id: string;
  kb_id: string;
  language: string;
  policy: string;
  theta: number;
  domain: string;
  plant_state: Record<string, number>;
  situation: Record<string, number[]>;
  premises: Record<string, number[]>;
  last_decision: string | null;
  history_length: number;
  setpoint: { variable: string; low: number; high: number } | null;
}

export interface ExplanationPayload {
  decision_id: string;
  lines: string[];
}

export interface TickRecord {
  kind: "tick";
  tick: number;
  state: Record<string, number>;
  decision_id: string;
  score: number | null;
  situation_id: string;
  theta: number;
  policy: string;
}

export interface SummaryRecord {
  kind: "summary";
  ticks: number | null;
  tick: number;
  final_state: Record<string, number>;
}

export interface TurnFrame {
  kind: "turn";
  response: TurnResponse;
}

export type ChannelFrame =
  | TickRecord
  | SummaryRecord
  | TurnFrame
  | { kind: "paused" }
  | { kind: "resumed" }
  | { kind: "settings"; theta: number; policy: string }
  | { kind: "error"; detail: string };

export interface SessionRequest {
  kb_id: string;
  language?: string;
  policy?: string;
  theta?: number;
  seed?: number;
  domain?: string;
}
