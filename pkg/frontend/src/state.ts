// Session state and the what-if request controller.
//
// Every composition change funnels through the controller, which keeps at
// most one request in flight: changes made while waiting collapse into a
// single follow-up request, and a response is rendered only if it belongs
// to the latest request issued. The UI holds no derived numbers; state is
// the selection plus the last responses.

import type {
  MethodFlag,
  OverlayDoc,
  ServiceClient,
  WhatIfResponse,
} from "./types.js";

export interface SessionState {
  members: string[];
  groups: string[];
  method: MethodFlag;
  bootstrap: boolean;
  seed: number;
  lastResponse: WhatIfResponse | null;
  overlayDoc: OverlayDoc | null;
}

export interface ControllerHooks {
  onResponse: (state: SessionState) => void;
  onError: (message: string, retry: () => void) => void;
}

export class WhatIfController {
  private version = 0;  // bumped on every selection change
  private inFlight = false;
  private dirty = false;

  constructor(
    private readonly client: ServiceClient,
    readonly state: SessionState,
    private readonly hooks: ControllerHooks,
  ) {}

  /** Apply a selection change and schedule (exactly one) request; a
   * response is rendered only if no newer change superseded it. */
  update(patch: Partial<Pick<SessionState, "members" | "groups" | "method"
                             | "bootstrap" | "seed">>): void {
    Object.assign(this.state, patch);
    this.version += 1;
    void this.refresh();
  }

  async refresh(): Promise<void> {
    if (this.state.members.length === 0 || this.state.groups.length === 0) {
      this.hooks.onError("select at least one panel member and one group",
                         () => this.refresh());
      return;
    }
    if (this.inFlight) {
      this.dirty = true;  // coalesce: one follow-up covers all queued changes
      return;
    }
    this.inFlight = true;
    const ticket = this.version;
    try {
      const response = await this.client.whatif({
        panel_member_ids: [...this.state.members],
        group_ids: [...this.state.groups],
        method: this.state.method,
        bootstrap: this.state.bootstrap ? { seed: this.state.seed } : null,
      });
      if (ticket === this.version) {
        this.state.lastResponse = response;
        this.hooks.onResponse(this.state);
      }
    } catch (err) {
      if (ticket === this.version) {
        const message = err instanceof Error ? err.message : String(err);
        this.hooks.onError(message, () => this.refresh());
      }
    } finally {
      this.inFlight = false;
      if (this.dirty) {
        this.dirty = false;
        void this.refresh();
      }
    }
  }

  /** Fetch overlay data once (startup or explicit refresh); swaps only
   * toggle layer visibility and never refetch. */
  async loadOverlay(entityIds: string[]): Promise<void> {
    try {
      this.state.overlayDoc = await this.client.overlay(entityIds);
      this.hooks.onResponse(this.state);
    } catch (err) {
      const message = err instanceof Error ? err.message : String(err);
      this.hooks.onError(message, () => this.loadOverlay(entityIds));
    }
  }
}
