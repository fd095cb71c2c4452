// Overlay map view: journal nodes sized by each entity's publication
// counts, barycenter markers, and coverage ellipse outlines, with pan and
// zoom. Each entity renders into its own layer so toggling one entity
// hides exactly that layer; nothing is refetched on visibility changes.

import type { OverlayDoc } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const VIEW = 640;

const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
  "#8c564b", "#17becf", "#e377c2", "#7f7f7f", "#bcbd22",
];

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K, attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, v);
  return el;
}

export function entityColor(index: number): string {
  return PALETTE[index % PALETTE.length]!;
}

export function renderOverlayMap(
  container: HTMLElement,
  doc: OverlayDoc,
  visible: Set<string>,
): void {
  container.replaceChildren();

  const xs = [...doc.nodes.map((n) => n.x), ...doc.entities.map((e) => e.barycenter[0])];
  const ys = [...doc.nodes.map((n) => n.y), ...doc.entities.map((e) => e.barycenter[1])];
  const minX = Math.min(...xs, 0);
  const maxX = Math.max(...xs, 1);
  const minY = Math.min(...ys, 0);
  const maxY = Math.max(...ys, 1);
  const span = Math.max(maxX - minX, maxY - minY) || 1;
  const scale = (VIEW * 0.84) / span;
  const px = (x: number) => (x - minX) * scale + VIEW * 0.08;
  const py = (y: number) => VIEW - ((y - minY) * scale + VIEW * 0.08);

  const svg = svgEl("svg", {
    class: "overlay-map",
    viewBox: `0 0 ${VIEW} ${VIEW}`,
    width: String(VIEW),
    height: String(VIEW),
  });
  const world = svgEl("g", { class: "world" });
  svg.appendChild(world);

  const base = svgEl("g", { class: "journal-base" });
  for (const node of doc.nodes) {
    const dot = svgEl("circle", {
      class: "journal-dot",
      cx: String(px(node.x)), cy: String(py(node.y)), r: "2.5",
    });
    const tip = document.createElementNS(SVG_NS, "title");
    tip.textContent = node.title;
    dot.appendChild(tip);
    base.appendChild(dot);
  }
  world.appendChild(base);

  doc.entities.forEach((entity, index) => {
    const layer = svgEl("g", { class: "entity-layer" });
    layer.dataset.entity = entity.entity_id;
    const color = entityColor(index);
    layer.setAttribute("stroke", color);
    layer.setAttribute("fill", color);
    if (!visible.has(entity.entity_id)) layer.setAttribute("display", "none");

    for (const node of doc.nodes) {
      const size = node.sizes[entity.entity_id];
      if (!size) continue;
      const circle = svgEl("circle", {
        class: "journal-node",
        cx: String(px(node.x)),
        cy: String(py(node.y)),
        r: String(3 + 2.5 * Math.sqrt(size)),
        "fill-opacity": "0.35",
      });
      const tip = document.createElementNS(SVG_NS, "title");
      tip.textContent = `${node.title}: ${size} (${entity.label})`;
      circle.appendChild(tip);
      layer.appendChild(circle);
    }

    const [bx, by] = entity.barycenter;
    const marker = svgEl("path", {
      class: "barycenter-marker",
      d: `M ${px(bx)} ${py(by) - 7} l 6 7 l -6 7 l -6 -7 z`,
      "stroke-width": "1.5",
    });
    const markerTip = document.createElementNS(SVG_NS, "title");
    markerTip.textContent = entity.label;
    marker.appendChild(markerTip);
    layer.appendChild(marker);

    const ellipse = entity.ellipse;
    if (ellipse && ellipse.semi_axes[0] > 0) {
      const [ex, ey] = ellipse.center;
      const degrees = (-ellipse.rotation * 180) / Math.PI;
      layer.appendChild(svgEl("ellipse", {
        class: "ellipse-outline",
        cx: "0", cy: "0",
        rx: String(ellipse.semi_axes[0] * scale),
        ry: String(Math.max(ellipse.semi_axes[1] * scale, 0.5)),
        transform: `translate(${px(ex)} ${py(ey)}) rotate(${degrees})`,
        fill: "none",
        "stroke-width": "1.5",
      }));
    }
    world.appendChild(layer);
  });

  attachPanZoom(svg, world);
  container.appendChild(svg);
}

function attachPanZoom(svg: SVGSVGElement, world: SVGGElement): void {
  let zoom = 1;
  let tx = 0;
  let ty = 0;
  let dragging = false;
  let lastX = 0;
  let lastY = 0;

  const apply = () => {
    world.setAttribute("transform", `translate(${tx} ${ty}) scale(${zoom})`);
    svg.dataset.zoom = String(zoom);
  };

  svg.addEventListener("wheel", (event) => {
    event.preventDefault();
    const factor = event.deltaY < 0 ? 1.15 : 1 / 1.15;
    zoom = Math.min(Math.max(zoom * factor, 0.2), 40);
    apply();
  });
  svg.addEventListener("pointerdown", (event) => {
    dragging = true;
    lastX = event.clientX;
    lastY = event.clientY;
  });
  svg.addEventListener("pointermove", (event) => {
    if (!dragging) return;
    tx += event.clientX - lastX;
    ty += event.clientY - lastY;
    lastX = event.clientX;
    lastY = event.clientY;
    apply();
  });
  const stop = () => { dragging = false; };
  svg.addEventListener("pointerup", stop);
  svg.addEventListener("pointerleave", stop);
  apply();
}
