// Shared test plumbing: canned JSON responses and a routed fake fetch.

import type { FetchLike } from "../src/api.js";

export function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

export type RouteHandler = (call: RecordedCall) => Response;

/**
 * Fake fetch that dispatches on "METHOD path" (query string stripped for
 * matching but preserved in the recorded call).
 */
export function routedFetch(routes: Record<string, RouteHandler>): {
  fetch: FetchLike;
  calls: RecordedCall[];
} {
  const calls: RecordedCall[] = [];
  const fetchImpl: FetchLike = async (input, init) => {
    const method = init?.method ?? "GET";
    const call: RecordedCall = {
      url: input,
      method,
      body: typeof init?.body === "string" ? JSON.parse(init.body) : null,
    };
    calls.push(call);
    const path = input.split("?")[0] as string;
    const handler = routes[`${method} ${path}`];
    if (handler === undefined) {
      return jsonResponse(404, { error: `no route for ${method} ${path}` });
    }
    return handler(call);
  };
  return { fetch: fetchImpl, calls };
}

/** Drain chained microtasks from resolved fake-fetch promises. */
export async function flushAsync(rounds = 12): Promise<void> {
  for (let i = 0; i < rounds; i++) await Promise.resolve();
}
