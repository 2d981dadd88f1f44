import { describe, expect, it, vi } from "vitest";

import { MAX_UPLOAD_BYTES, uploadSceneImage } from "../src/upload";

const PNG_MAGIC = [0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a];

function fakeFile(bytes: number[], sizeOverride?: number) {
  const buf = new Uint8Array(bytes).buffer;
  return {
    size: sizeOverride ?? bytes.length,
    arrayBuffer: () => Promise.resolve(buf),
  };
}

function pngFile(): ReturnType<typeof fakeFile> {
  return fakeFile([...PNG_MAGIC, 1, 2, 3, 4]);
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("uploadSceneImage", () => {
  it("rejects oversize files before any request", async () => {
    const fetchFn = vi.fn();
    const result = await uploadSceneImage(
      fakeFile(PNG_MAGIC, MAX_UPLOAD_BYTES + 1),
      "",
      fetchFn,
    );
    expect(result.ok).toBe(false);
    if (!result.ok) {
      expect(result.sent).toBe(false);
      expect(result.error).toContain("2 MB");
    }
    expect(fetchFn).not.toHaveBeenCalled();
  });

  it("rejects non-PNG bytes before any request", async () => {
    const fetchFn = vi.fn();
    for (const file of [fakeFile([0xff, 0xd8, 0xff, 0, 0, 0, 0, 0]), fakeFile([1, 2])]) {
      const result = await uploadSceneImage(file, "", fetchFn);
      expect(result.ok).toBe(false);
      if (!result.ok) {
        expect(result.sent).toBe(false);
        expect(result.error).toBe("Not a PNG file");
      }
    }
    expect(fetchFn).not.toHaveBeenCalled();
  });

  it("posts the raw bytes and reads back the key", async () => {
    const fetchFn = vi.fn(async (url: RequestInfo | URL, init?: RequestInit) => {
      expect(String(url)).toBe("/api/scene-image");
      expect(init?.method).toBe("POST");
      expect((init?.headers as Record<string, string>)["content-type"]).toBe(
        "image/png",
      );
      expect((init?.body as Uint8Array).length).toBe(PNG_MAGIC.length + 4);
      return jsonResponse(200, {
        dominant: [40, 60, 220],
        key: { tonic: 11, mode: "major", name: "B Major" },
        changed: true,
      });
    });
    const result = await uploadSceneImage(pngFile(), "", fetchFn as typeof fetch);
    expect(result).toEqual({ ok: true, keyName: "B Major", changed: true });
    expect(fetchFn).toHaveBeenCalledTimes(1);
  });

  it("prefixes the base URL when given one", async () => {
    const fetchFn = vi.fn(async (url: RequestInfo | URL) => {
      expect(String(url)).toBe("http://127.0.0.1:8000/api/scene-image");
      return jsonResponse(200, {
        dominant: [0, 0, 0],
        key: { tonic: 0, mode: "minor", name: "C Minor" },
        changed: false,
      });
    });
    const result = await uploadSceneImage(
      pngFile(),
      "http://127.0.0.1:8000",
      fetchFn as typeof fetch,
    );
    expect(result).toEqual({ ok: true, keyName: "C Minor", changed: false });
  });

  it("maps 429 to a rate-limit explanation", async () => {
    const fetchFn = vi.fn(async () =>
      jsonResponse(429, { detail: "scene capture rate limited" }),
    );
    const result = await uploadSceneImage(pngFile(), "", fetchFn as typeof fetch);
    expect(result.ok).toBe(false);
    if (!result.ok) {
      expect(result.sent).toBe(true);
      expect(result.error).toContain("rate-limited");
    }
  });

  it("surfaces the server detail on other errors", async () => {
    const fetchFn = vi.fn(async () =>
      jsonResponse(422, { detail: "not a decodable image" }),
    );
    const result = await uploadSceneImage(pngFile(), "", fetchFn as typeof fetch);
    expect(result.ok).toBe(false);
    if (!result.ok) {
      expect(result.sent).toBe(true);
      expect(result.error).toBe("not a decodable image");
    }
  });

  it("falls back to the status code on a non-JSON error body", async () => {
    const fetchFn = vi.fn(
      async () => new Response("boom", { status: 500 }),
    );
    const result = await uploadSceneImage(pngFile(), "", fetchFn as typeof fetch);
    expect(result.ok).toBe(false);
    if (!result.ok) {
      expect(result.error).toBe("server said 500");
    }
  });

  it("reports a thrown fetch as a failed send", async () => {
    const fetchFn = vi.fn(async () => {
      throw new Error("connection refused");
    });
    const result = await uploadSceneImage(pngFile(), "", fetchFn as typeof fetch);
    expect(result.ok).toBe(false);
    if (!result.ok) {
      expect(result.sent).toBe(true);
      expect(result.error).toContain("connection refused");
    }
  });
});
