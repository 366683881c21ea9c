/** Application controller: navigation, fetching, rendering, live updates.
 *
 * Pure with respect to the DOM: every view is produced as a VNode and
 * handed to `onRender`. The browser entry point materializes it;
 * tests walk it directly.
 */

import { ApiError, type ApiClient } from "./api.js";
import { LiveFeed, type EventSourceFactory, type FeedStatus } from "./live.js";
import {
  renderOverview,
  renderScene,
  SceneSchemaError,
  type NavHandlers,
} from "./render.js";
import { OVERVIEW, statesEqual, stateToHash, type ViewState } from "./state.js";
import type { VerdictEnvelope } from "./types.js";
import { h, type VNode } from "./vdom.js";

export interface AppOptions {
  api: ApiClient;
  onRender?: (vnode: VNode, state: ViewState) => void;
  onHashChange?: (hash: string) => void;
  onToast?: (message: string) => void;
  eventSourceFactory?: EventSourceFactory;
  reconnectDelayMs?: number;
}

export class App {
  readonly api: ApiClient;
  state: ViewState = OVERVIEW;
  vnode: VNode | null = null;
  errorPanel: string | null = null;
  toastMessage: string | null = null;
  feedStatus: FeedStatus = "closed";
  live: LiveFeed | null = null;
  readonly hiddenColors = new Set<string>();

  private readonly stack: ViewState[] = [];
  private readonly options: AppOptions;
  private transition: Promise<void> = Promise.resolve();

  constructor(options: AppOptions) {
    this.api = options.api;
    this.options = options;
  }

  /** Resolves when all queued navigations and refreshes have applied. */
  settled(): Promise<void> {
    return this.transition;
  }

  private nav(): NavHandlers {
    return {
      toGroup: (groupId) => this.navigate({ level: "group", groupId }),
      toForm: (formId, requestId) => this.navigate({ level: "form", formId, requestId }),
      toControl: (formId, requestId, order) =>
        this.navigate({ level: "control", formId, requestId, order }),
    };
  }

  private async buildView(state: ViewState): Promise<VNode> {
    switch (state.level) {
      case "overview":
        return renderOverview(await this.api.overview(), this.nav());
      case "group":
        return renderScene(await this.api.groupScene(state.groupId), this.nav(), {
          hiddenColors: this.hiddenColors,
        });
      case "form":
        return renderScene(await this.api.formScene(state.formId, state.requestId), this.nav());
      case "control":
        return renderScene(
          await this.api.controlScene(state.formId, state.requestId, state.order),
          this.nav(),
        );
    }
  }

  navigate(state: ViewState, push = true): Promise<void> {
    this.transition = this.transition.then(() => this.apply(state, push));
    return this.transition;
  }

  private async apply(state: ViewState, push: boolean): Promise<void> {
    try {
      const vnode = await this.buildView(state);
      if (push && !statesEqual(this.state, state)) {
        this.stack.push(this.state);
      }
      this.state = state;
      this.vnode = vnode;
      this.errorPanel = null;
      this.options.onHashChange?.(stateToHash(state));
      this.options.onRender?.(vnode, state);
    } catch (error) {
      if (error instanceof ApiError && error.isNotFound) {
        // stale id (evicted event or replaced structure): stay put
        this.toastMessage = error.message;
        this.options.onToast?.(error.message);
        return;
      }
      if (error instanceof SceneSchemaError) {
        this.errorPanel = error.message;
        const panel = h("div", { class: "error-panel" }, [error.message]);
        this.options.onRender?.(
          this.vnode ? h("div", {}, [panel, this.vnode]) : panel,
          this.state,
        );
        return;
      }
      throw error;
    }
  }

  /** Re-fetch and re-render the current level (live update path). */
  refresh(): Promise<void> {
    return this.navigate(this.state, false);
  }

  up(): Promise<void> {
    if (this.stack.length > 0) {
      const previous = this.stack.pop() as ViewState;
      return this.navigate(previous, false);
    }
    if (this.state.level !== "overview") {
      return this.navigate(OVERVIEW, false);
    }
    return this.settled(); // already at the top: no-op
  }

  handleKey(key: string): void {
    if (key === "Escape") {
      void this.up();
    }
  }

  /** Client-side filter: hide/show glyphs of one status color. */
  toggleColor(color: string): Promise<void> {
    if (this.hiddenColors.has(color)) {
      this.hiddenColors.delete(color);
    } else {
      this.hiddenColors.add(color);
    }
    return this.refresh();
  }

  private onVerdict(envelope: VerdictEnvelope): void {
    const state = this.state;
    if (state.level === "overview") {
      void this.refresh();
    } else if (state.level === "group" && envelope.group_id === state.groupId) {
      void this.refresh();
    }
  }

  startLive(): void {
    if (this.live) return;
    this.live = new LiveFeed(this.api.streamUrl(), {
      factory: this.options.eventSourceFactory,
      reconnectDelayMs: this.options.reconnectDelayMs,
      onEvent: (envelope) => this.onVerdict(envelope),
      onStatus: (status) => {
        this.feedStatus = status;
      },
    });
    this.live.connect();
  }

  pauseLive(): void {
    this.live?.pause();
  }

  resumeLive(): void {
    this.live?.resume();
  }

  stopLive(): void {
    this.live?.close();
    this.live = null;
  }
}
