/* Shared test plumbing: a fetch-shaped transport over node:http (so tests
 * never depend on the DOM environment's network stack), a recording
 * wrapper for network-capture assertions, and a polling waitFor. */

import * as http from "node:http";
import type { FetchLike, ResponseLike } from "../src/api.js";

export const nodeFetch: FetchLike = (url, init) =>
  new Promise<ResponseLike>((resolve, reject) => {
    const req = http.request(
      url,
      { method: init.method, headers: init.headers },
      (res) => {
        const chunks: Buffer[] = [];
        res.on("data", (chunk: Buffer) => chunks.push(chunk));
        res.on("end", () => {
          const body = Buffer.concat(chunks).toString("utf-8");
          const status = res.statusCode ?? 0;
          resolve({
            ok: status >= 200 && status < 300,
            status,
            json: () => Promise.resolve(JSON.parse(body || "null")),
          });
        });
      },
    );
    req.on("error", reject);
    if (init.body !== undefined) {
      req.write(init.body);
    }
    req.end();
  });

/* Wraps a transport and keeps every requested URL for later inspection. */
export function recordingFetch(inner: FetchLike): {
  fetchFn: FetchLike;
  requests: { method: string; url: string }[];
} {
  const requests: { method: string; url: string }[] = [];
  const fetchFn: FetchLike = (url, init) => {
    requests.push({ method: init.method, url });
    return inner(url, init);
  };
  return { fetchFn, requests };
}

export async function waitFor<T>(
  probe: () => T | null | undefined | false,
  what: string,
  timeoutMs = 20_000,
  stepMs = 50,
): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const got = probe();
    if (got) {
      return got;
    }
    if (Date.now() > deadline) {
      throw new Error(`timed out waiting for ${what}`);
    }
    await new Promise((r) => setTimeout(r, stepMs));
  }
}

export function sleep(ms: number): Promise<void> {
  return new Promise((r) => setTimeout(r, ms));
}
