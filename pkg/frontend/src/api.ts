// Typed client for the workbench API, including SSE-over-fetch streaming.

import type {
  Component,
  DevResponse,
  EventKind,
  Grammar,
  Progress,
  Project,
  RepresentationView,
  SessionInfo,
  TestReply,
  VersionInfo,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`${status}: ${detail}`);
  }
}

type FetchLike = typeof fetch;

async function errorOf(res: Response): Promise<ApiError> {
  let detail = res.statusText;
  try {
    const body = await res.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(res.status, detail);
}

/** Parses an SSE body: forwards progress events, resolves with the result. */
export async function readEventStream<T>(
  res: Response,
  onProgress: (p: Progress) => void,
): Promise<T> {
  if (!res.ok || !res.body) throw await errorOf(res);
  const reader = res.body.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  let result: T | null = null;
  let finished = false;
  let error: ApiError | null = null;

  const dispatch = (block: string) => {
    let event = "message";
    let data = "";
    for (const line of block.split("\n")) {
      if (line.startsWith("event: ")) event = line.slice(7);
      else if (line.startsWith("data: ")) data += line.slice(6);
    }
    if (!data) return;
    const payload = JSON.parse(data);
    if (event === "progress") onProgress(payload as Progress);
    else if (event === "result") {
      result = payload as T;
      finished = true;
    } else if (event === "error") {
      error = new ApiError(payload.status ?? 502, payload.detail ?? "stream error");
    }
  };

  for (;;) {
    const { done, value } = await reader.read();
    if (done) break;
    buffer += decoder.decode(value, { stream: true });
    let cut;
    while ((cut = buffer.indexOf("\n\n")) >= 0) {
      dispatch(buffer.slice(0, cut));
      buffer = buffer.slice(cut + 2);
    }
  }
  if (buffer.trim()) dispatch(buffer);
  if (error) throw error;
  if (!finished || result === null) {
    throw new ApiError(502, "stream ended without a result");
  }
  return result;
}

export class Api {
  constructor(
    private base: string = "",
    private fetchImpl: FetchLike = globalThis.fetch.bind(globalThis),
  ) {}

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(this.base + path, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    if (!res.ok) throw await errorOf(res);
    return (await res.json()) as T;
  }

  private async stream<T>(
    path: string,
    body: unknown,
    onProgress: (p: Progress) => void,
  ): Promise<T> {
    const res = await this.fetchImpl(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return readEventStream<T>(res, onProgress);
  }

  listProjects(): Promise<Project[]> {
    return this.json("/projects");
  }

  createProject(template: string, name: string, description = ""): Promise<Project> {
    return this.json("/projects", {
      method: "POST",
      body: JSON.stringify({ template, name, description }),
    });
  }

  templates(): Promise<{ name: string; description: string }[]> {
    return this.json("/templates");
  }

  grammar(): Promise<Grammar> {
    return this.json("/grammar");
  }

  representation(projectId: string): Promise<RepresentationView> {
    return this.json(`/projects/${projectId}/representation`);
  }

  versions(projectId: string): Promise<VersionInfo[]> {
    return this.json(`/projects/${projectId}/versions`);
  }

  utter(
    projectId: string,
    text: string,
    onProgress: (p: Progress) => void,
  ): Promise<DevResponse> {
    return this.stream(`/projects/${projectId}/utterances`, { text }, onProgress);
  }

  directEdit(projectId: string, component: Component, text: string): Promise<DevResponse> {
    return this.json(`/projects/${projectId}/representation/${component.toLowerCase()}`, {
      method: "PUT",
      body: JSON.stringify({ text }),
    });
  }

  checkout(projectId: string, index: number): Promise<RepresentationView> {
    return this.json(`/projects/${projectId}/versions/${index}/checkout`, {
      method: "POST",
      body: "{}",
    });
  }

  startSession(projectId: string, versionIndex?: number): Promise<SessionInfo> {
    return this.json(`/projects/${projectId}/sessions`, {
      method: "POST",
      body: JSON.stringify({ version_index: versionIndex ?? null }),
    });
  }

  sendMessage(
    sessionId: string,
    text: string,
    onProgress: (p: Progress) => void,
  ): Promise<TestReply> {
    return this.stream(`/sessions/${sessionId}/messages`, { text }, onProgress);
  }

  restart(sessionId: string): Promise<SessionInfo> {
    return this.json(`/sessions/${sessionId}/restart`, { method: "POST", body: "{}" });
  }

  logEvent(projectId: string, kind: EventKind, payload: string): Promise<{ event_id: string }> {
    return this.json("/events", {
      method: "POST",
      body: JSON.stringify({ project_id: projectId, kind, payload }),
    });
  }
}
