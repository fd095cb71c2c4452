// Typed HTTP client for the /v1 API.

import type {
  EntityCatalog,
  HealthInfo,
  OverlayDoc,
  ServiceClient,
  WhatIfRequest,
  WhatIfResponse,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly validIds: string[] | undefined;

  constructor(status: number, code: string, message: string, validIds?: string[]) {
    super(message);
    this.status = status;
    this.code = code;
    this.validIds = validIds;
  }
}

async function parseError(resp: Response): Promise<never> {
  let code = "http_error";
  let message = `${resp.status} ${resp.statusText}`;
  let validIds: string[] | undefined;
  try {
    const body = await resp.json();
    const detail = body?.detail;
    if (detail && typeof detail === "object") {
      code = detail.code ?? code;
      message = detail.message ?? message;
      validIds = detail.valid_ids;
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(resp.status, code, message, validIds);
}

export class HttpClient implements ServiceClient {
  constructor(private readonly baseUrl: string) {}

  private async get<T>(path: string, params?: Record<string, string>): Promise<T> {
    const url = new URL(this.baseUrl + path, window.location.href);
    for (const [key, value] of Object.entries(params ?? {})) {
      url.searchParams.set(key, value);
    }
    const resp = await fetch(url.toString());
    if (!resp.ok) await parseError(resp);
    return resp.json() as Promise<T>;
  }

  health(): Promise<HealthInfo> {
    return this.get("/v1/health");
  }

  entities(): Promise<EntityCatalog> {
    return this.get("/v1/entities");
  }

  async whatif(request: WhatIfRequest): Promise<WhatIfResponse> {
    const resp = await fetch(this.baseUrl + "/v1/whatif", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    });
    if (!resp.ok) await parseError(resp);
    return resp.json() as Promise<WhatIfResponse>;
  }

  overlay(entityIds: string[], opts?: { replications?: number; seed?: number }):
      Promise<OverlayDoc> {
    const params: Record<string, string> = { entities: entityIds.join(",") };
    if (opts?.replications !== undefined) {
      params.replications = String(opts.replications);
    }
    if (opts?.seed !== undefined) params.seed = String(opts.seed);
    return this.get("/v1/overlay", params);
  }
}
