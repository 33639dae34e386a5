import { describe, expect, it } from "vitest";
import { SequencedClient } from "../src/api.js";
import type { FetchLike, SceneRequest } from "../src/api.js";

const REQUEST: SceneRequest = {
  symbol: "7#(3,1;2,3;1,2)",
  axes: [4, 1],
  winding: 1,
  t0: 0.3,
};

function sceneResponse(t0: number): Response {
  return new Response(
    JSON.stringify({
      backend: "f64",
      m: 7,
      conics: [],
      rings: [],
      audit: { verdict: "proper-(n4)" },
      closure_residual: t0,
    }),
    { status: 200, headers: { "X-Lambda": "0.5" } },
  );
}

describe("SequencedClient", () => {
  it("returns scenes with the solved lambda header", async () => {
    const client = new SequencedClient("", async () => sceneResponse(0.1));
    const result = await client.postScene(REQUEST);
    expect(result.kind).toBe("scene");
    if (result.kind === "scene") {
      expect(result.lambda).toBe(0.5);
      expect(result.scene.m).toBe(7);
    }
  });

  it("discards a slow response that resolves after a newer one", async () => {
    const resolvers: Array<(r: Response) => void> = [];
    const fetchFn: FetchLike = () =>
      new Promise((resolve) => resolvers.push(resolve));
    const client = new SequencedClient("", fetchFn);
    const first = client.postScene(REQUEST, "nogroup1");
    const second = client.postScene(REQUEST, "nogroup2");
    resolvers[1](sceneResponse(0.2));
    const secondResult = await second;
    expect(secondResult.kind).toBe("scene");
    resolvers[0](sceneResponse(0.1));
    const firstResult = await first;
    expect(firstResult.kind).toBe("stale");
    expect(client.appliedSeq).toBe(2);
  });

  it("aborts the previous in-flight request of the same group", async () => {
    const seen: AbortSignal[] = [];
    const fetchFn: FetchLike = (_url, init) =>
      new Promise((resolve, reject) => {
        const signal = init?.signal as AbortSignal;
        seen.push(signal);
        signal.addEventListener("abort", () =>
          reject(new DOMException("aborted", "AbortError")),
        );
        if (seen.length === 2) resolve(sceneResponse(0.2));
      });
    const client = new SequencedClient("", fetchFn);
    const first = client.postScene(REQUEST);
    const second = client.postScene(REQUEST);
    expect(seen[0].aborted).toBe(true);
    expect((await first).kind).toBe("aborted");
    expect((await second).kind).toBe("scene");
  });

  it("maps non-200 bodies to structured errors", async () => {
    const fetchFn: FetchLike = async () =>
      new Response(
        JSON.stringify({
          code: "LetterOutOfRange",
          step: "parse_symbol",
          message: "letter 4",
        }),
        { status: 422 },
      );
    const client = new SequencedClient("", fetchFn);
    const result = await client.postScene(REQUEST);
    expect(result.kind).toBe("error");
    if (result.kind === "error") {
      expect(result.error.code).toBe("LetterOutOfRange");
    }
  });

  it("turns network failures into NetworkError, never throws", async () => {
    const client = new SequencedClient("", async () => {
      throw new TypeError("connection refused");
    });
    const result = await client.postScene(REQUEST);
    expect(result.kind).toBe("error");
    const validation = await client.validateSymbol("7#(3,1;2,3;1,2)");
    expect(validation.valid).toBe(false);
    expect(validation.code).toBe("NetworkError");
  });

  it("validateSymbol passes the parser verdict through", async () => {
    const client = new SequencedClient(
      "",
      async () =>
        new Response(
          JSON.stringify({ valid: false, code: "AdjacentRepeat" }),
        ),
    );
    const verdict = await client.validateSymbol("9#(3,3;1,2)");
    expect(verdict.code).toBe("AdjacentRepeat");
  });
});
