// In-memory service fixture. Lets the UI develop and test without the
// backend; implements the same surface with fixed, deterministic numbers.

import type {
  CellJson,
  EntityCatalog,
  HealthInfo,
  Method,
  MethodResult,
  OverlayDoc,
  ServiceClient,
  TableJson,
  WhatIfRequest,
  WhatIfResponse,
} from "./types.js";

const MEMBERS = ["EXP-1", "EXP-2", "EXP-3", "EXP-4"];
const GROUPS = ["GRP-A", "GRP-B", "GRP-C"];

const LABELS: Record<string, string> = {
  "EXP-1": "Reviewer One",
  "EXP-2": "Reviewer Two",
  "EXP-3": "Reviewer Three",
  "EXP-4": "Reviewer Four",
  "GRP-A": "Coastal Ecology",
  "GRP-B": "Estuarine Processes",
  "GRP-C": "Hydrology",
  PANEL: "Expert Panel",
  DEPT: "All groups",
};

// member x group distances per method; values carry >3 decimals so the
// display-rounding behavior is exercised.
const DISTANCES: Record<Method, Record<string, Record<string, number>>> = {
  barycenter: {
    "EXP-1": { "GRP-A": 0.0634, "GRP-B": 0.7214, "GRP-C": 3.0512 },
    "EXP-2": { "GRP-A": 0.9341, "GRP-B": 0.1282, "GRP-C": 2.3324 },
    "EXP-3": { "GRP-A": 3.0013, "GRP-B": 1.3663, "GRP-C": 0.0621 },
    "EXP-4": { "GRP-A": 3.0958, "GRP-B": 1.4664, "GRP-C": 0.1473 },
  },
  sapv: {
    "EXP-1": { "GRP-A": 0.0123, "GRP-B": 0.0714, "GRP-C": 0.1512 },
    "EXP-2": { "GRP-A": 0.0934, "GRP-B": 0.0128, "GRP-C": 0.1332 },
    "EXP-3": { "GRP-A": 0.1501, "GRP-B": 0.0966, "GRP-C": 0.0062 },
    "EXP-4": { "GRP-A": 0.1595, "GRP-B": 0.0986, "GRP-C": 0.0147 },
  },
};

// EXP-3 publishes in a single journal in this fixture; its resamples are
// all identical, hence zero-width intervals.
const ZERO_WIDTH_MEMBER = "EXP-3";

function ciFor(member: string, d: number): [number, number] {
  if (member === ZERO_WIDTH_MEMBER) return [d, d];
  return [d * 0.88, d * 1.13];
}

function overlap(a: [number, number], b: [number, number]): boolean {
  return a[0] <= b[1] && b[0] <= a[1];
}

function buildTable(method: Method, members: string[], groups: string[],
                    withCi: boolean): TableJson {
  const base = DISTANCES[method];
  const panelId = sameSet(members, MEMBERS)
    ? "PANEL" : `panel[${[...members].sort().join("+")}]`;
  const deptId = sameSet(groups, GROUPS)
    ? "DEPT" : `groups[${[...groups].sort().join("+")}]`;

  const cells: Record<string, Record<string, CellJson>> = {};
  const cell = (d: number, member?: string): CellJson => ({
    d,
    ci: withCi && member !== undefined ? ciFor(member, d)
      : withCi ? [d * 0.93, d * 1.07] : null,
    is_shortest: null,
    overlaps_shortest: null,
  });

  for (const m of members) {
    cells[m] = {};
    const row = base[m]!;
    const deptValue = groups.reduce((acc, g) => acc + row[g]!, 0) / groups.length;
    cells[m][deptId] = cell(deptValue, m);
    for (const g of groups) cells[m][g] = cell(row[g]!, m);
  }
  cells[panelId] = {};
  const panelOf = (g: string) =>
    0.95 * Math.min(...members.map((m) => base[m]![g]!));
  cells[panelId][deptId] = cell(
    groups.reduce((acc, g) => acc + panelOf(g), 0) / groups.length
  );
  for (const g of groups) cells[panelId][g] = cell(panelOf(g));

  for (const g of groups) {
    const dmin = Math.min(...members.map((m) => cells[m]![g]!.d));
    const shortest = members.filter((m) => cells[m]![g]!.d === dmin);
    const shortestCis = shortest
      .map((m) => cells[m]![g]!.ci)
      .filter((c): c is [number, number] => c !== null);
    for (const m of members) {
      const c = cells[m]![g]!;
      if (shortest.includes(m)) {
        c.is_shortest = true;
        c.overlaps_shortest = false;
      } else {
        c.is_shortest = false;
        c.overlaps_shortest = withCi && c.ci !== null
          ? shortestCis.some((s) => overlap(c.ci!, s))
          : false;
      }
    }
  }
  return {
    method,
    panel_id: panelId,
    member_ids: members,
    department_id: deptId,
    group_ids: groups,
    has_ci: withCi,
    cells,
  };
}

function sameSet(a: string[], b: string[]): boolean {
  return a.length === b.length && [...a].sort().join() === [...b].sort().join();
}

function fitOf(table: TableJson): MethodResult["fit_summary"] {
  const perGroup: Record<string, { members: string[]; distance: number }> = {};
  const minima: number[] = [];
  for (const g of table.group_ids) {
    const dmin = Math.min(...table.member_ids.map((m) => table.cells[m]![g]!.d));
    perGroup[g] = {
      members: table.member_ids.filter((m) => table.cells[m]![g]!.d === dmin),
      distance: dmin,
    };
    minima.push(dmin);
  }
  const avg = minima.reduce((a, v) => a + v, 0) / minima.length;
  const sd = Math.sqrt(
    minima.reduce((a, v) => a + (v - avg) ** 2, 0) / minima.length
  );
  return { avg_shortest: avg, sd_shortest: sd, per_group_shortest: perGroup };
}

const JOURNALS: Array<[string, number, number]> = [
  ["Journal of Coastal Ecology", 0.05, 0.12],
  ["Marine Systems Letters", 0.42, -0.08],
  ["Estuarine Reports", 0.31, 0.44],
  ["Applied Hydrology Quarterly", 2.35, 1.88],
  ["Water Resource Notes", 2.71, 2.22],
  ["Groundwater Annals", 2.18, 2.45],
];

const NODE_SIZES: Record<string, Record<number, number>> = {
  "GRP-A": { 0: 2, 1: 2, 2: 1 },
  "GRP-B": { 2: 2, 3: 1, 4: 1 },
  "GRP-C": { 3: 1, 4: 2, 5: 2 },
  "EXP-1": { 0: 2, 1: 1, 2: 1 },
  "EXP-2": { 1: 1, 2: 1, 3: 1, 0: 1 },
  "EXP-3": { 3: 1 },
  "EXP-4": { 5: 2, 4: 1 },
  PANEL: { 0: 3, 1: 2, 2: 2, 3: 2, 4: 1, 5: 2 },
  DEPT: { 0: 2, 1: 2, 2: 3, 3: 2, 4: 3, 5: 2 },
};

const BARYCENTERS: Record<string, [number, number]> = {
  "GRP-A": [0.25, 0.1],
  "GRP-B": [1.02, 0.92],
  "GRP-C": [2.44, 2.2],
  "EXP-1": [0.21, 0.1],
  "EXP-2": [0.78, 0.59],
  "EXP-3": [2.35, 1.88],
  "EXP-4": [2.39, 2.37],
  PANEL: [1.14, 0.98],
  DEPT: [1.23, 1.07],
};

export class MockService implements ServiceClient {
  // request log and optional manual gating, for tests
  readonly calls: Array<{ kind: string; payload: unknown }> = [];
  deferred = false;
  private waiters: Array<() => void> = [];

  release(): void {
    const pending = this.waiters;
    this.waiters = [];
    for (const resolve of pending) resolve();
  }

  private gate(): Promise<void> {
    if (!this.deferred) return Promise.resolve();
    return new Promise((resolve) => this.waiters.push(resolve));
  }

  async health(): Promise<HealthInfo> {
    this.calls.push({ kind: "health", payload: null });
    return {
      status: "ok", version: "mock", entities: 9, journals: JOURNALS.length,
      map_loaded: true,
    };
  }

  async entities(): Promise<EntityCatalog> {
    this.calls.push({ kind: "entities", payload: null });
    const atomic = [...MEMBERS, ...GROUPS].map((id) => ({
      entity_id: id,
      kind: (MEMBERS.includes(id) ? "panel_member" : "research_group") as
        "panel_member" | "research_group",
      label: LABELS[id] ?? id,
      member_ids: [],
      publications: Object.values(NODE_SIZES[id] ?? {}).reduce((a, v) => a + v, 0),
      journals: Object.keys(NODE_SIZES[id] ?? {}).length,
    }));
    return {
      entities: [
        ...atomic,
        {
          entity_id: "PANEL", kind: "panel", label: LABELS.PANEL!,
          member_ids: [...MEMBERS], publications: 12, journals: 6,
        },
        {
          entity_id: "DEPT", kind: "department", label: LABELS.DEPT!,
          member_ids: [...GROUPS], publications: 14, journals: 6,
        },
      ],
    };
  }

  async whatif(request: WhatIfRequest): Promise<WhatIfResponse> {
    this.calls.push({ kind: "whatif", payload: request });
    await this.gate();
    for (const id of request.panel_member_ids) {
      if (!MEMBERS.includes(id)) {
        throw Object.assign(new Error(`entity '${id}' does not exist`),
                            { status: 404, code: "unknown_entity" });
      }
    }
    const methods: Partial<Record<Method, MethodResult>> =
      {};
    const list: Method[] = request.method === "both"
      ? ["barycenter", "sapv"] : [request.method];
    for (const method of list) {
      const table = buildTable(method, request.panel_member_ids,
                               request.group_ids, request.bootstrap !== null);
      methods[method] = { table, fit_summary: fitOf(table) };
    }
    const seed = request.bootstrap?.seed ?? 1729;
    return {
      methods,
      seed: request.bootstrap ? seed : null,
      bootstrap: request.bootstrap
        ? {
            replications: request.bootstrap.replications ?? 1000,
            confidence: request.bootstrap.confidence ?? 0.95,
            seed,
          }
        : null,
    };
  }

  async overlay(entityIds: string[]): Promise<OverlayDoc> {
    this.calls.push({ kind: "overlay", payload: entityIds });
    await this.gate();
    const entities = entityIds.map((id) => ({
      entity_id: id,
      label: LABELS[id] ?? id,
      total: Object.values(NODE_SIZES[id] ?? {}).reduce((a, v) => a + v, 0),
      barycenter: BARYCENTERS[id] ?? ([0, 0] as [number, number]),
      // single-journal entities have a degenerate (zero-size) ellipse
      ellipse: id === "EXP-3"
        ? {
            center: BARYCENTERS[id]!, semi_axes: [0, 0] as [number, number],
            rotation: 0, coverage_count: 1000, level: 0.95,
          }
        : {
            center: BARYCENTERS[id] ?? ([0, 0] as [number, number]),
            semi_axes: [0.35, 0.18] as [number, number],
            rotation: 0.6,
            coverage_count: 950,
            level: 0.95,
          },
    }));
    const nodes = JOURNALS.map(([title, x, y], jid) => {
      const sizes: Record<string, number> = {};
      for (const id of entityIds) {
        const m = NODE_SIZES[id]?.[jid];
        if (m) sizes[id] = m;
      }
      return { journal_id: jid, title, x, y, sizes };
    }).filter((n) => Object.keys(n.sizes).length > 0);
    return { schema: "panelfit-overlay/1", layout_run: "mock-run", entities, nodes };
  }
}

export const MOCK_MEMBERS = MEMBERS;
export const MOCK_GROUPS = GROUPS;
