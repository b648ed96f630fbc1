/** Browser entry point. */

import { makeApi } from "./api.js";
import { bootstrap } from "./app.js";

const tokenField = document.getElementById("token-input") as HTMLInputElement | null;
const api = makeApi(
  window.fetch.bind(window),
  () => tokenField?.value.trim() || undefined,
);

void bootstrap(document, api).catch((error: unknown) => {
  const status = document.getElementById("status-line");
  if (status !== null) {
    status.textContent = error instanceof Error ? error.message : "startup failed";
    status.classList.add("error");
  }
});
