// Distance table view: panel and members as rows, department and groups
// as columns. Per group the shortest member's cell is emphasized; cells
// whose CI overlaps the shortest one's are styled as viable alternatives.

import { formatDistance } from "./format.js";
import type { MethodResult } from "./types.js";

export function renderDistanceTable(
  container: HTMLElement,
  result: MethodResult,
  labels: Map<string, string>,
): void {
  const { table } = result;
  const name = (id: string) => labels.get(id) ?? id;
  container.replaceChildren();

  const el = document.createElement("table");
  el.className = "distance-table";

  const thead = document.createElement("thead");
  const head = document.createElement("tr");
  head.appendChild(document.createElement("th"));
  for (const col of [table.department_id, ...table.group_ids]) {
    const th = document.createElement("th");
    th.textContent = name(col);
    th.dataset.column = col;
    head.appendChild(th);
  }
  thead.appendChild(head);
  el.appendChild(thead);

  const body = document.createElement("tbody");
  const rows = [table.panel_id, ...table.member_ids];
  for (const rowId of rows) {
    const tr = document.createElement("tr");
    tr.dataset.row = rowId;
    if (rowId === table.panel_id) tr.classList.add("panel-row");
    const th = document.createElement("th");
    th.textContent = name(rowId);
    tr.appendChild(th);
    for (const colId of [table.department_id, ...table.group_ids]) {
      const cell = table.cells[rowId]?.[colId];
      const td = document.createElement("td");
      td.dataset.row = rowId;
      td.dataset.column = colId;
      tr.appendChild(td);
      if (!cell) continue;
      td.textContent = formatDistance(cell.d);
      if (cell.is_shortest) td.classList.add("shortest");
      if (cell.overlaps_shortest) td.classList.add("overlaps");
      if (cell.ci) {
        td.title = `CI [${formatDistance(cell.ci[0])}, ${formatDistance(cell.ci[1])}]`;
      }
    }
    body.appendChild(tr);
  }
  el.appendChild(body);
  container.appendChild(el);

  const fit = result.fit_summary;
  const summary = document.createElement("p");
  summary.className = "fit-summary";
  summary.textContent =
    `Average shortest distances is ${formatDistance(fit.avg_shortest)} ` +
    `(SD ${formatDistance(fit.sd_shortest)})`;
  container.appendChild(summary);
}
