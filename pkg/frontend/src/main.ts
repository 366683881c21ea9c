/** Browser entry point: wires the controller to the real DOM. */

import { App } from "./app.js";
import { HttpApiClient } from "./api.js";
import { hashToState } from "./state.js";
import { toDom } from "./vdom.js";

function apiBase(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? "";
}

function start(): void {
  const root = document.getElementById("view");
  const status = document.getElementById("feed-status");
  const toast = document.getElementById("toast");
  if (!root || !status || !toast) throw new Error("missing UI shell elements");

  let toastTimer: ReturnType<typeof setTimeout> | undefined;
  const app = new App({
    api: new HttpApiClient(apiBase()),
    onRender: (vnode) => {
      root.replaceChildren(toDom(vnode, document));
    },
    onHashChange: (hash) => {
      if (window.location.hash !== hash) {
        history.pushState(null, "", hash);
      }
    },
    onToast: (message) => {
      toast.textContent = message;
      toast.classList.add("visible");
      clearTimeout(toastTimer);
      toastTimer = setTimeout(() => toast.classList.remove("visible"), 4000);
    },
  });

  const syncFeedStatus = setInterval(() => {
    status.textContent = app.feedStatus;
    status.dataset["state"] = app.feedStatus;
  }, 500);
  window.addEventListener("beforeunload", () => clearInterval(syncFeedStatus));

  window.addEventListener("keydown", (event) => app.handleKey(event.key));
  window.addEventListener("hashchange", () => {
    void app.navigate(hashToState(window.location.hash), false);
  });
  window.addEventListener("popstate", () => {
    void app.navigate(hashToState(window.location.hash), false);
  });

  const pauseButton = document.getElementById("pause");
  pauseButton?.addEventListener("click", () => {
    if (app.live?.paused) {
      app.resumeLive();
      pauseButton.textContent = "pause";
    } else {
      app.pauseLive();
      pauseButton.textContent = "resume";
    }
  });
  const upButton = document.getElementById("up");
  upButton?.addEventListener("click", () => void app.up());

  app.startLive();
  void app.navigate(hashToState(window.location.hash), false);
}

start();
