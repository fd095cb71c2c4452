// Wire types for the panelfit /v1 API. The UI renders these verbatim and
// never derives new distance values from them.

export type Method = "barycenter" | "sapv";
export type MethodFlag = Method | "both";

export interface HealthInfo {
  status: string;
  version: string;
  entities: number;
  journals: number;
  map_loaded: boolean;
}

export interface EntityInfo {
  entity_id: string;
  kind: "research_group" | "panel_member" | "panel" | "department";
  label: string;
  member_ids: string[];
  publications: number;
  journals: number;
}

export interface EntityCatalog {
  entities: EntityInfo[];
}

export interface CellJson {
  d: number;
  ci: [number, number] | null;
  is_shortest: boolean | null;
  overlaps_shortest: boolean | null;
}

export interface TableJson {
  method: Method;
  panel_id: string;
  member_ids: string[];
  department_id: string;
  group_ids: string[];
  has_ci: boolean;
  cells: Record<string, Record<string, CellJson>>;
}

export interface FitSummaryJson {
  avg_shortest: number;
  sd_shortest: number;
  per_group_shortest: Record<string, { members: string[]; distance: number }>;
}

export interface MethodResult {
  table: TableJson;
  fit_summary: FitSummaryJson;
}

export interface BootstrapParams {
  replications?: number;
  confidence?: number;
  seed?: number;
}

export interface WhatIfRequest {
  panel_member_ids: string[];
  group_ids: string[];
  method: MethodFlag;
  bootstrap: BootstrapParams | null;
}

export interface WhatIfResponse {
  methods: Partial<Record<Method, MethodResult>>;
  seed: number | null;
  bootstrap: { replications: number; confidence: number; seed: number } | null;
}

export interface EllipseJson {
  center: [number, number];
  semi_axes: [number, number];
  rotation: number;
  coverage_count: number;
  level: number;
}

export interface OverlayEntity {
  entity_id: string;
  label: string;
  total: number;
  barycenter: [number, number];
  ellipse: EllipseJson | null;
}

export interface OverlayNode {
  journal_id: number;
  title: string;
  x: number;
  y: number;
  sizes: Record<string, number>;
}

export interface OverlayDoc {
  schema: string;
  layout_run: string;
  entities: OverlayEntity[];
  nodes: OverlayNode[];
}

export interface ApiErrorDetail {
  code: string;
  message: string;
  valid_ids?: string[];
}

// Everything the UI talks to implements this surface; the HTTP client and
// the mock fixture are interchangeable.
export interface ServiceClient {
  health(): Promise<HealthInfo>;
  entities(): Promise<EntityCatalog>;
  whatif(request: WhatIfRequest): Promise<WhatIfResponse>;
  overlay(entityIds: string[], opts?: { replications?: number; seed?: number }):
    Promise<OverlayDoc>;
}
