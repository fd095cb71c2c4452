// Composition controls: member/group checkboxes, method picker, bootstrap
// toggle. Every change funnels into the controller (which coalesces the
// resulting requests).

import type { WhatIfController } from "./state.js";
import type { EntityCatalog, MethodFlag } from "./types.js";

export function renderControls(
  container: HTMLElement,
  catalog: EntityCatalog,
  controller: WhatIfController,
): void {
  container.replaceChildren();
  const state = controller.state;

  const memberBox = document.createElement("fieldset");
  memberBox.className = "member-picker";
  const memberLegend = document.createElement("legend");
  memberLegend.textContent = "Panel members";
  memberBox.appendChild(memberLegend);
  for (const entity of catalog.entities) {
    if (entity.kind !== "panel_member") continue;
    memberBox.appendChild(checkbox(
      entity.entity_id,
      `${entity.label} (${entity.publications} pubs, ${entity.journals} journals)`,
      state.members.includes(entity.entity_id),
      (id, checked) => {
        const members = checked
          ? [...state.members, id]
          : state.members.filter((m) => m !== id);
        controller.update({ members });
      },
    ));
  }
  container.appendChild(memberBox);

  const groupBox = document.createElement("fieldset");
  groupBox.className = "group-picker";
  const groupLegend = document.createElement("legend");
  groupLegend.textContent = "Research groups";
  groupBox.appendChild(groupLegend);
  for (const entity of catalog.entities) {
    if (entity.kind !== "research_group") continue;
    groupBox.appendChild(checkbox(
      entity.entity_id,
      `${entity.label} (${entity.publications} pubs)`,
      state.groups.includes(entity.entity_id),
      (id, checked) => {
        const groups = checked
          ? [...state.groups, id]
          : state.groups.filter((g) => g !== id);
        controller.update({ groups });
      },
    ));
  }
  container.appendChild(groupBox);

  const options = document.createElement("div");
  options.className = "option-row";

  const methodSelect = document.createElement("select");
  methodSelect.className = "method-select";
  for (const value of ["both", "barycenter", "sapv"]) {
    const opt = document.createElement("option");
    opt.value = value;
    opt.textContent = value;
    if (value === state.method) opt.selected = true;
    methodSelect.appendChild(opt);
  }
  methodSelect.addEventListener("change", () => {
    controller.update({ method: methodSelect.value as MethodFlag });
  });
  options.appendChild(methodSelect);

  const bootstrapLabel = document.createElement("label");
  bootstrapLabel.className = "bootstrap-toggle";
  const bootstrapInput = document.createElement("input");
  bootstrapInput.type = "checkbox";
  bootstrapInput.checked = state.bootstrap;
  bootstrapInput.addEventListener("change", () => {
    controller.update({ bootstrap: bootstrapInput.checked });
  });
  bootstrapLabel.append(bootstrapInput, " bootstrap confidence intervals");
  options.appendChild(bootstrapLabel);

  container.appendChild(options);
}

function checkbox(
  id: string,
  text: string,
  checked: boolean,
  onToggle: (id: string, checked: boolean) => void,
): HTMLLabelElement {
  const label = document.createElement("label");
  label.className = "entity-toggle";
  const input = document.createElement("input");
  input.type = "checkbox";
  input.value = id;
  input.checked = checked;
  input.addEventListener("change", () => onToggle(id, input.checked));
  label.append(input, ` ${text}`);
  return label;
}

/** Non-blocking error toast with a retry action; never clears the views. */
export function showToast(container: HTMLElement, message: string,
                          retry: () => void): void {
  const toast = document.createElement("div");
  toast.className = "toast";
  const text = document.createElement("span");
  text.textContent = message;
  const button = document.createElement("button");
  button.textContent = "retry";
  button.addEventListener("click", () => {
    toast.remove();
    retry();
  });
  const dismiss = document.createElement("button");
  dismiss.textContent = "dismiss";
  dismiss.addEventListener("click", () => toast.remove());
  toast.append(text, button, dismiss);
  container.appendChild(toast);
}
