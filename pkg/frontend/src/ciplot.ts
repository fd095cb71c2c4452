// Per-group interval chart: one bar per panel member, ordered by distance
// ascending, each showing its CI; the shortest member's interval is drawn
// as a highlighted band across the chart. Zero-width intervals render as
// a point marker. Without bootstrap data, a control to request it.

import { formatDistance } from "./format.js";
import type { TableJson } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 420;
const ROW = 26;
const PAD_X = 140;
const PAD_RIGHT = 60;

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K, attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, v);
  return el;
}

export function renderCiPlot(
  container: HTMLElement,
  table: TableJson,
  groupId: string,
  labels: Map<string, string>,
): void {
  container.replaceChildren();
  if (!table.has_ci) {
    const note = document.createElement("div");
    note.className = "ci-missing";
    const button = document.createElement("button");
    button.className = "request-bootstrap";
    button.textContent = "Compute confidence intervals";
    note.appendChild(button);
    container.appendChild(note);
    return;
  }

  const members = [...table.member_ids].sort(
    (a, b) => table.cells[a]![groupId]!.d - table.cells[b]![groupId]!.d,
  );
  const cells = members.map((m) => table.cells[m]![groupId]!);
  const lows = cells.map((c) => c.ci![0]);
  const highs = cells.map((c) => c.ci![1]);
  const lo = Math.min(...lows);
  const hi = Math.max(...highs);
  const span = hi - lo;
  const x = (d: number) =>
    span === 0 ? PAD_X + (WIDTH - PAD_X - PAD_RIGHT) / 2
      : PAD_X + ((d - lo) / span) * (WIDTH - PAD_X - PAD_RIGHT);

  const height = members.length * ROW + 12;
  const svg = svgEl("svg", {
    class: "ci-plot",
    viewBox: `0 0 ${WIDTH} ${height}`,
    width: String(WIDTH),
    height: String(height),
  });

  // highlighted band spanning the shortest member's interval
  const shortestId = members.find((m) => table.cells[m]![groupId]!.is_shortest);
  if (shortestId) {
    const ci = table.cells[shortestId]![groupId]!.ci!;
    const band = svgEl("rect", {
      class: "shortest-band",
      x: String(x(ci[0])),
      y: "0",
      width: String(Math.max(x(ci[1]) - x(ci[0]), 1)),
      height: String(height),
    });
    band.dataset.lo = String(ci[0]);
    band.dataset.hi = String(ci[1]);
    svg.appendChild(band);
  }

  members.forEach((member, i) => {
    const cell = table.cells[member]![groupId]!;
    const cy = i * ROW + ROW / 2 + 6;
    const g = svgEl("g", { class: "ci-bar" });
    g.dataset.member = member;
    if (cell.is_shortest) g.classList.add("shortest");

    const label = svgEl("text", {
      x: "4", y: String(cy + 4), class: "member-label",
    });
    label.textContent = labels.get(member) ?? member;
    g.appendChild(label);

    const [ciLo, ciHi] = cell.ci!;
    if (ciHi > ciLo) {
      g.appendChild(svgEl("line", {
        class: "ci-line",
        x1: String(x(ciLo)), x2: String(x(ciHi)),
        y1: String(cy), y2: String(cy),
      }));
    }
    const marker = svgEl("circle", {
      class: ciHi === ciLo ? "ci-point" : "ci-mid",
      cx: String(x(cell.d)), cy: String(cy), r: ciHi === ciLo ? "5" : "3.5",
    });
    g.appendChild(marker);

    const value = svgEl("text", {
      x: String(WIDTH - PAD_RIGHT + 8), y: String(cy + 4), class: "value-label",
    });
    value.textContent = formatDistance(cell.d);
    g.appendChild(value);

    const tip = document.createElementNS(SVG_NS, "title");
    tip.textContent =
      `${labels.get(member) ?? member}: ${formatDistance(cell.d)} ` +
      `CI [${formatDistance(ciLo)}, ${formatDistance(ciHi)}]`;
    g.appendChild(tip);
    svg.appendChild(g);
  });

  container.appendChild(svg);
}
