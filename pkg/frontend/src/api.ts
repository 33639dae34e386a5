/**
 * Thin client for the scene service.
 *
 * All geometry arrives from the server; this module only moves JSON.
 * Responses carry a monotone sequence number so a slow request that
 * resolves after a newer one has been applied is discarded, and each
 * control group keeps at most one request in flight (the previous one
 * is aborted when a new one is issued).
 */

export interface SceneRing {
  label: string;
  kind: "points" | "lines";
  shift: number;
  elements: number[][];
}

export interface SceneConic {
  id: string;
  role: string;
  matrix6: number[];
}

export interface SceneAudit {
  point_degrees: Record<string, number>;
  line_degrees: Record<string, number>;
  extra_incidences: unknown[];
  max_residual: number;
  verdict: string;
  expected_degree: number;
}

export interface SceneDoc {
  backend: string;
  m: number;
  symbol?: string;
  conics: SceneConic[];
  rings: SceneRing[];
  audit: SceneAudit;
  closure_residual: number;
}

export interface ServiceError {
  code: string;
  step: string;
  message: string;
}

export interface SceneRequest {
  symbol: string;
  axes: [number, number];
  winding: number;
  t0: number;
  lambda?: number;
}

export interface SymbolValidation {
  valid: boolean;
  symbol?: string;
  m?: number;
  k?: number;
  pairs?: number[][];
  trivial?: boolean;
  code?: string;
  message?: string;
}

export type SceneResult =
  | { kind: "scene"; seq: number; scene: SceneDoc; lambda?: number }
  | { kind: "error"; seq: number; error: ServiceError }
  | { kind: "stale"; seq: number }
  | { kind: "aborted"; seq: number };

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export class SequencedClient {
  private seq = 0;
  private applied = 0;
  private inflight = new Map<string, AbortController>();

  constructor(
    private base: string,
    private fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  /** Sequence number of the most recently applied response. */
  get appliedSeq(): number {
    return this.applied;
  }

  async postScene(
    body: SceneRequest,
    group = "scene",
  ): Promise<SceneResult> {
    const seq = ++this.seq;
    this.inflight.get(group)?.abort();
    const controller = new AbortController();
    this.inflight.set(group, controller);
    let response: Response;
    try {
      response = await this.fetchFn(`${this.base}/api/scene`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
        signal: controller.signal,
      });
    } catch (err) {
      if (controller.signal.aborted) return { kind: "aborted", seq };
      return {
        kind: "error",
        seq,
        error: { code: "NetworkError", step: "fetch", message: String(err) },
      };
    }
    if (seq < this.applied) return { kind: "stale", seq };
    this.applied = seq;
    if (response.status === 200) {
      const header = response.headers.get("X-Lambda");
      return {
        kind: "scene",
        seq,
        scene: (await response.json()) as SceneDoc,
        lambda: header === null ? undefined : Number(header),
      };
    }
    return {
      kind: "error",
      seq,
      error: (await response.json()) as ServiceError,
    };
  }

  async validateSymbol(symbol: string): Promise<SymbolValidation> {
    const url = `${this.base}/api/symbol/validate?symbol=${encodeURIComponent(symbol)}`;
    try {
      const response = await this.fetchFn(url);
      return (await response.json()) as SymbolValidation;
    } catch (err) {
      return { valid: false, code: "NetworkError", message: String(err) };
    }
  }
}
