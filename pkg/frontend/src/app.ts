// Session controller. One Studio drives one tab: at most one live session
// at a time, every screen rebuilt from the latest server snapshot. Clicks
// and choices are posted to the service and the response replaces local
// state wholesale; there is no optimistic update to roll back.

import { ApiError, StudioApi } from "./api";
import type { Condition, SessionSnapshot } from "./api";
import { extendRoute, initialView, matchCity } from "./state";
import type { ViewState } from "./state";
import { renderApp, renderStudyDone } from "./views";
import type { Handlers } from "./views";

export interface StudioOptions {
  /** Per-study toggle: fetch and show the report screen after each choice. */
  showFeedback: boolean;
}

export class Studio {
  state: ViewState | null = null;
  private last: Promise<void> = Promise.resolve();

  constructor(
    readonly api: StudioApi,
    readonly root: HTMLElement,
    readonly options: StudioOptions = { showFeedback: true },
  ) {}

  /** Wait for the in-flight server exchange, if any. Used by tests. */
  settled(): Promise<void> {
    return this.last;
  }

  get snapshot(): SessionSnapshot | null {
    return this.state?.snapshot ?? null;
  }

  async startSession(env: string, condition: Condition, seed?: number): Promise<void> {
    const doc = await this.api.envDoc(env);
    const snapshot = await this.api.createSession(env, condition, seed);
    this.state = initialView(snapshot, doc, this.options.showFeedback);
    this.render();
  }

  async startStudy(
    condition: Condition,
    tasks: string[],
    trialsPerBlock: number,
    seed?: number,
  ): Promise<void> {
    const study = await this.api.createStudy(condition, tasks, trialsPerBlock, seed);
    await this.advanceStudy(study.id);
  }

  private async advanceStudy(studyId: string): Promise<void> {
    const next = await this.api.nextTrial(studyId);
    const study = await this.api.getStudy(studyId);
    if (next.done || next.session === null) {
      this.state = null;
      renderStudyDone(this.root, study.total);
      return;
    }
    const doc = await this.api.envDoc(next.session.env);
    this.state = initialView(next.session, doc, this.options.showFeedback, study);
    this.render();
  }

  // -- handlers ------------------------------------------------------------

  private readonly handlers: Handlers = {
    clickCell: (node) => this.submit(() => this.reveal(node)),
    revealCity: (name) => {
      const state = this.state;
      if (!state || state.busy) return;
      const match = matchCity(state, name);
      if ("error" in match) {
        state.error = match.error;
        this.render();
        return;
      }
      this.submit(() => this.reveal(match.node));
    },
    stageStep: (node) => {
      const state = this.state;
      if (!state || state.busy) return;
      const extended = extendRoute(state.env, state.pending, node);
      if (extended === null) {
        const from =
          state.pending.length === 0
            ? state.env.start
            : state.pending[state.pending.length - 1];
        state.error = `No road from ${state.env.labels[from] ?? from} to ${
          state.env.labels[node] ?? node
        }.`;
      } else {
        state.pending = extended;
        state.error = null;
      }
      this.render();
    },
    stagePlan: (chain) => {
      const state = this.state;
      if (!state || state.busy) return;
      state.pending = [...chain];
      state.error = null;
      this.render();
    },
    clearPending: () => {
      const state = this.state;
      if (!state || state.busy) return;
      state.pending = [];
      state.error = null;
      this.render();
    },
    submitChoice: () => this.submit(() => this.choose()),
    endTrial: () => this.submit(() => this.choose()),
    nextTrial: () => {
      const state = this.state;
      if (!state?.study || state.busy) return;
      const studyId = state.study.id;
      this.last = this.advanceStudy(studyId).catch((err: unknown) => {
        if (this.state) {
          this.state.error =
            err instanceof ApiError ? err.detail : "The session service is unreachable. Try again.";
          this.render();
        }
      });
    },
  };

  private async reveal(node: string): Promise<void> {
    const state = this.state!;
    state.snapshot = await this.api.click(state.snapshot.id, node);
  }

  private async choose(): Promise<void> {
    const state = this.state!;
    state.snapshot = await this.api.choose(state.snapshot.id, state.pending);
    state.pending = [];
    if (state.showFeedback) {
      state.report = await this.api.report(state.snapshot.id);
    } else if (state.study) {
      const studyId = state.study.id;
      this.last = this.last.then(() => this.advanceStudy(studyId));
    }
  }

  /**
   * Run one server exchange. The busy flag drops every input until the
   * response lands; a rejection becomes the inline error and the previous
   * snapshot stays on screen untouched.
   */
  private submit(op: () => Promise<void>): void {
    const state = this.state;
    if (!state || state.busy) return;
    state.busy = true;
    state.error = null;
    this.render();
    this.last = op()
      .catch((err: unknown) => {
        if (err instanceof ApiError) {
          state.error = err.detail;
        } else {
          state.error = "The session service is unreachable. Try again.";
        }
      })
      .finally(() => {
        state.busy = false;
        if (this.state === state) this.render();
      });
  }

  private render(): void {
    if (this.state) renderApp(this.root, this.state, this.handlers);
  }
}
