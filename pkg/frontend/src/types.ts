// Payload shapes of the workbench HTTP API (see docs/api.md).

export type Component = "KB" | "LOGIC" | "VARIABLES";

export const COMPONENTS: Component[] = ["KB", "LOGIC", "VARIABLES"];

export interface Project {
  id: string;
  name: string;
  description: string;
  template: string;
  owner: string;
  created_at: number;
}

export interface RepresentationView {
  version_index: number;
  components: Record<Component, string>;
}

export interface DiffSpan {
  kind: "ADDED" | "REMOVED" | "UNCHANGED";
  tokens: string[];
}

export interface ElementChange {
  component: Component;
  old_ref: string | number | null;
  new_ref: string | number | null;
  spans: DiffSpan[];
}

export interface DevResponse {
  comprehension: string;
  change_summary: string;
  new_version_index: number;
  delta: ElementChange[];
  findings: {
    kind: string;
    resolution: string;
    rule_ordinals: number[];
    explanation: string;
    rewrites: Record<string, string>;
  }[];
}

export interface VersionInfo {
  index: number;
  provenance: string;
  event_id: string | null;
  created_at: number;
}

export interface SessionInfo {
  session_id: string;
  project_id: string;
  version_index: number;
  history: [string, string][];
  variable_state: Record<string, string>;
  started_at: number;
}

export interface TestReply {
  reply: string;
  variable_state: Record<string, string>;
}

export interface Progress {
  request_id: string;
  stage: string;
  ordinal: number;
}

export interface Grammar {
  logic_line: string;
  variable_line: string;
  kb_head_line: string;
  document_headers: Record<Component, string>;
}

export type EventKind =
  | "DEV_MSG" | "DEV_RESP" | "TEST_MSG" | "TEST_RESP"
  | "REP_EDIT" | "REP_CLICK" | "RESTART" | "VERSION_SELECT";
