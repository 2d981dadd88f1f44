// Scene image upload: the file-picker stand-in for a camera frame.
// Size and PNG signature are checked before anything leaves the
// browser; a bad file never produces a request. The key display itself
// updates from the /mr4mr/key frame on the bridge, not from this
// response, so it stays in lockstep with what the engine actually did.

export const MAX_UPLOAD_BYTES = 2 * 1024 * 1024;

const PNG_MAGIC = [0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a];

export interface UploadOk {
  ok: true;
  keyName: string;
  changed: boolean;
}

export interface UploadFailed {
  ok: false;
  error: string;
  sent: boolean; // whether a request went out at all
}

export type UploadResult = UploadOk | UploadFailed;

export interface FileLike {
  size: number;
  arrayBuffer(): Promise<ArrayBuffer>;
}

export async function uploadSceneImage(
  file: FileLike,
  baseUrl = "",
  fetchFn: typeof fetch = fetch,
): Promise<UploadResult> {
  if (file.size > MAX_UPLOAD_BYTES) {
    return { ok: false, error: "Image is larger than 2 MB", sent: false };
  }
  const bytes = new Uint8Array(await file.arrayBuffer());
  if (bytes.length < PNG_MAGIC.length || !PNG_MAGIC.every((b, i) => bytes[i] === b)) {
    return { ok: false, error: "Not a PNG file", sent: false };
  }

  let response: Response;
  try {
    response = await fetchFn(`${baseUrl}/api/scene-image`, {
      method: "POST",
      headers: { "content-type": "image/png" },
      body: bytes,
    });
  } catch (err) {
    return { ok: false, error: `Upload failed: ${err}`, sent: true };
  }
  if (response.status === 429) {
    return {
      ok: false,
      error: "Scene captures are rate-limited; try again in a moment",
      sent: true,
    };
  }
  if (!response.ok) {
    let detail = `server said ${response.status}`;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    return { ok: false, error: detail, sent: true };
  }
  const body = (await response.json()) as {
    key: { name: string };
    changed: boolean;
  };
  return { ok: true, keyName: body.key.name, changed: body.changed };
}
