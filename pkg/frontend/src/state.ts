/** Client-side state machine.
 *
 * The UI is a pure function of `UiState`; every mutation funnels through
 * `AppState` so renders never observe a half-updated snapshot.  At most
 * one classification request is in flight: submitting again aborts the
 * previous request, and a stale response can never overwrite a newer one.
 */

import type { Api } from "./api.js";
import { ApiError } from "./api.js";
import type { ClassifyRequest, ClassifyResponse } from "./types.js";

export type Status = "idle" | "loading" | "done" | "error";

export interface UiState {
  status: Status;
  response: ClassifyResponse | null;
  selectedChunk: number | null;
  error: string | null;
}

export type Listener = (state: UiState) => void;

export class AppState {
  private state: UiState = {
    status: "idle",
    response: null,
    selectedChunk: null,
    error: null,
  };
  private listeners: Listener[] = [];
  private inflight: AbortController | null = null;

  constructor(private readonly api: Api) {}

  get current(): UiState {
    return this.state;
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private update(patch: Partial<UiState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  selectChunk(index: number | null): void {
    this.update({ selectedChunk: index });
  }

  async classify(request: ClassifyRequest): Promise<void> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    this.update({ status: "loading", error: null });
    try {
      const response = await this.api.classify(request, controller.signal);
      if (this.inflight !== controller) {
        return;
      }
      this.inflight = null;
      this.update({ status: "done", response, selectedChunk: null });
    } catch (error) {
      if (controller.signal.aborted || this.inflight !== controller) {
        return;
      }
      this.inflight = null;
      const message =
        error instanceof ApiError ? error.message : "unexpected error during classification";
      this.update({ status: "error", error: message });
    }
  }
}
