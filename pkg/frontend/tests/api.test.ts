import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("api client", () => {
  it("sends If-Match on mutations", async () => {
    const fetchMock = vi.fn(async () =>
      jsonResponse({ id: "s", revision: 1, layer_id: "L1", digests: { image: "x", mask: null, edges: null, colors: null } }),
    );
    const client = new ApiClient("http://svc", fetchMock as unknown as typeof fetch);
    await client.addLayer("s", { kind: "color" }, 0);
    const [url, init] = fetchMock.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe("http://svc/sessions/s/layers");
    expect(init.method).toBe("POST");
    expect((init.headers as Record<string, string>)["If-Match"]).toBe("0");
  });

  it("maps 409 to ApiError with status", async () => {
    const fetchMock = vi.fn(async () => jsonResponse({ detail: "expected revision 0" }, 409));
    const client = new ApiClient("", fetchMock as unknown as typeof fetch);
    await expect(client.deleteLayer("s", "L1", 0)).rejects.toSatisfy(
      (err: unknown) => err instanceof ApiError && err.status === 409,
    );
  });

  it("hits the documented endpoints", async () => {
    const fetchMock = vi.fn(async () => jsonResponse({}));
    const client = new ApiClient("", fetchMock as unknown as typeof fetch);
    await client.health();
    await client.getSession("abc");
    await client.composite("abc");
    await client.generate("abc", 7, 20);
    await client.exportSession("abc");
    const urls = (fetchMock.mock.calls as unknown as [string][]).map((call) => call[0]);
    expect(urls).toEqual([
      "/healthz",
      "/sessions/abc",
      "/sessions/abc/composite",
      "/sessions/abc/generate",
      "/sessions/abc/export",
    ]);
  });
});
