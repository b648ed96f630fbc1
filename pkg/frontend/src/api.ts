/** Thin fetch wrappers around the service endpoints.
 *
 * All calls use relative URLs so the bundle works wherever the service
 * mounts it.  Failures are converted into `ApiError` with a message fit
 * for direct display; callers never have to inspect a Response object.
 */

import type {
  ClassifyRequest,
  ClassifyResponse,
  DemoText,
  SchemaDocument,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number | null;

  constructor(message: string, status: number | null = null) {
    super(message);
    this.name = "ApiError";
    this.status = status;
  }
}

export interface Api {
  getSchema(): Promise<SchemaDocument>;
  getDemo(id: string): Promise<DemoText>;
  classify(request: ClassifyRequest, signal?: AbortSignal): Promise<ClassifyResponse>;
}

async function describeFailure(response: Response): Promise<string> {
  if (response.status === 401) {
    return "authentication failed: check the API token";
  }
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") {
      return body.detail;
    }
  } catch {
    // Non-JSON error bodies fall through to the generic message.
  }
  return `request failed with status ${response.status}`;
}

async function requestJson<T>(
  fetchImpl: typeof fetch,
  url: string,
  init: RequestInit,
): Promise<T> {
  let response: Response;
  try {
    response = await fetchImpl(url, init);
  } catch (error) {
    if (error instanceof DOMException && error.name === "AbortError") {
      throw error;
    }
    throw new ApiError("network error: is the analysis service running?");
  }
  if (!response.ok) {
    throw new ApiError(await describeFailure(response), response.status);
  }
  return (await response.json()) as T;
}

/* The token comes from a form field, so it is re-read on every call
 * rather than captured once at construction time. */
export function makeApi(
  fetchImpl: typeof fetch,
  getToken?: () => string | undefined,
): Api {
  const headers = (json: boolean): Record<string, string> => {
    const out: Record<string, string> = {};
    if (json) {
      out["Content-Type"] = "application/json";
    }
    const token = getToken?.();
    if (token) {
      out["Authorization"] = `Bearer ${token}`;
    }
    return out;
  };
  return {
    getSchema: () =>
      requestJson<SchemaDocument>(fetchImpl, "schema", { headers: headers(false) }),
    getDemo: (id: string) =>
      requestJson<DemoText>(fetchImpl, `demo/${encodeURIComponent(id)}`, {
        headers: headers(false),
      }),
    classify: (request: ClassifyRequest, signal?: AbortSignal) =>
      requestJson<ClassifyResponse>(fetchImpl, "classify", {
        method: "POST",
        headers: headers(true),
        body: JSON.stringify(request),
        signal,
      }),
  };
}
