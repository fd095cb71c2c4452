// App assembly: one page with composition controls, the distance table,
// one CI chart per selected group (via a group picker), and the overlay
// map. All three views re-render from the same session state; a member
// swap is one what-if request, and overlay layers only toggle visibility.

import { HttpClient } from "./api.js";
import { renderControls, showToast } from "./controls.js";
import { renderCiPlot } from "./ciplot.js";
import { MockService } from "./mock.js";
import { renderOverlayMap } from "./overlay.js";
import { WhatIfController, type SessionState } from "./state.js";
import { renderDistanceTable } from "./table.js";
import type { EntityCatalog, Method, ServiceClient } from "./types.js";

export interface AppHandles {
  controller: WhatIfController;
  render: () => void;
}

export async function startApp(
  root: HTMLElement, client: ServiceClient,
): Promise<AppHandles> {
  root.replaceChildren();
  const controlsEl = section(root, "controls");
  const tableEl = section(root, "table-view");
  const plotEl = section(root, "ci-view");
  const mapEl = section(root, "map-view");
  const toastEl = section(root, "toasts");

  const catalog = await client.entities();
  const labels = new Map(catalog.entities.map((e) => [e.entity_id, e.label]));
  const members = catalog.entities
    .filter((e) => e.kind === "panel")
    .flatMap((e) => e.member_ids);
  const groups = catalog.entities
    .filter((e) => e.kind === "department")
    .flatMap((e) => e.member_ids);

  const state: SessionState = {
    members,
    groups,
    method: "both",
    bootstrap: false,
    seed: 1729,
    lastResponse: null,
    overlayDoc: null,
  };

  let selectedGroup: string | null = null;
  let activeMethod: Method = "barycenter";

  const render = () => {
    const response = state.lastResponse;
    if (response) {
      const method: Method = response.methods[activeMethod]
        ? activeMethod
        : (Object.keys(response.methods)[0] as Method);
      const result = response.methods[method];
      if (result) {
        renderDistanceTable(tableEl, result, labels);
        const group = selectedGroup && result.table.group_ids.includes(selectedGroup)
          ? selectedGroup
          : result.table.group_ids[0];
        if (group) {
          selectedGroup = group;
          renderGroupPicker(plotEl, result.table.group_ids, group, labels, (g) => {
            selectedGroup = g;
            render();
          });
          const plotBody = document.createElement("div");
          plotBody.className = "ci-plot-body";
          renderCiPlot(plotBody, result.table, group, labels);
          plotEl.appendChild(plotBody);
          const requestButton = plotBody.querySelector("button.request-bootstrap");
          requestButton?.addEventListener("click", () => {
            controller.update({ bootstrap: true });
          });
        }
      }
    }
    if (state.overlayDoc) {
      const visible = new Set<string>([...state.members, ...state.groups]);
      // union layers stay visible only while they match the corpus sets
      for (const entity of state.overlayDoc.entities) {
        if (entity.entity_id === "PANEL" || entity.entity_id === "DEPT") {
          const original = catalog.entities.find(
            (e) => e.entity_id === entity.entity_id
          );
          const current = entity.entity_id === "PANEL" ? state.members : state.groups;
          if (original && sameSet(original.member_ids, current)) {
            visible.add(entity.entity_id);
          }
        }
      }
      renderOverlayMap(mapEl, state.overlayDoc, visible);
    }
  };

  const controller = new WhatIfController(client, state, {
    onResponse: () => render(),
    onError: (message, retry) => showToast(toastEl, message, retry),
  });

  renderControls(controlsEl, catalog, controller);
  await controller.refresh();
  await controller.loadOverlay([
    ...members, ...groups,
    ...catalog.entities.filter((e) => e.kind === "panel" || e.kind === "department")
      .map((e) => e.entity_id),
  ]);
  return { controller, render };
}

function sameSet(a: string[], b: string[]): boolean {
  return a.length === b.length && [...a].sort().join() === [...b].sort().join();
}

function section(root: HTMLElement, klass: string): HTMLElement {
  const el = document.createElement("section");
  el.className = klass;
  root.appendChild(el);
  return el;
}

function renderGroupPicker(
  container: HTMLElement,
  groupIds: string[],
  selected: string,
  labels: Map<string, string>,
  onPick: (group: string) => void,
): void {
  container.replaceChildren();
  const picker = document.createElement("div");
  picker.className = "group-tabs";
  for (const group of groupIds) {
    const button = document.createElement("button");
    button.textContent = labels.get(group) ?? group;
    button.dataset.group = group;
    if (group === selected) button.classList.add("active");
    button.addEventListener("click", () => onPick(group));
    picker.appendChild(button);
  }
  container.appendChild(picker);
}

// Browser entry point: ?mock=1 runs against the bundled fixture, otherwise
// the service at ?api=... (default: same host, port 8080).
declare const process: unknown;
if (typeof document !== "undefined" && typeof process === "undefined") {
  const params = new URLSearchParams(window.location.search);
  const client: ServiceClient = params.get("mock")
    ? new MockService()
    : new HttpClient(params.get("api") ?? `http://${window.location.hostname}:8080`);
  const root = document.getElementById("app");
  if (root) {
    void startApp(root, client).catch((err) => {
      root.textContent = `failed to start: ${err}`;
    });
  }
}

export type { EntityCatalog };
