/** Browser entry point: wire URL parameters to the app. */

import { ApiClient } from "./api.js";
import { SessionController } from "./state.js";
import { AnnotationApp } from "./ui.js";

function fail(root: HTMLElement, message: string): void {
  const box = document.createElement("div");
  box.className = "startup-error";
  box.textContent = message;
  root.appendChild(box);
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  const params = new URLSearchParams(window.location.search);
  const session = params.get("session");
  const server = params.get("server") ?? window.location.origin;
  if (!session) {
    fail(root, "Missing ?session=<annotator id> in the URL.");
    return;
  }
  const api = new ApiClient(server);
  const controller = new SessionController(api, session);
  try {
    await new AnnotationApp(root, controller, api).init();
  } catch (error) {
    fail(root, `Could not reach the annotation service: ${String(error)}`);
  }
}

void boot();
