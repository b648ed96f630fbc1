/** Page wiring: connects the controls, the state machine, and the panels.
 *
 * `bootstrap` is the only entry point.  It takes the document and an Api
 * so tests can drive the full page against a stubbed transport.  The
 * client refuses to run against a service publishing a report schema
 * version it was not written for; that check happens before any control
 * is armed.
 */

import type { Api } from "./api.js";
import { ApiError } from "./api.js";
import { findPanels, renderResults } from "./render.js";
import { AppState } from "./state.js";
import type { UiState } from "./state.js";

export const SUPPORTED_REPORT_VERSION = "1";

export const DEMOS: ReadonlyArray<{ id: string; label: string }> = [
  { id: "christmas-carol", label: "A Christmas Carol" },
  { id: "looking-glass", label: "Through the Looking-Glass" },
  { id: "iliad", label: "The Iliad" },
];

const DEFAULT_STAGES = ["KS2", "KS3", "KS4", "KS5"];

function requireElement<T extends Element>(root: Document, selector: string): T {
  const node = root.querySelector(selector);
  if (node === null) {
    throw new Error(`required element ${selector} is missing`);
  }
  return node as T;
}

export interface App {
  state: AppState;
  stages: string[];
}

export async function bootstrap(root: Document, api: Api): Promise<App> {
  const textInput = requireElement<HTMLTextAreaElement>(root, "#text-input");
  const fileInput = requireElement<HTMLInputElement>(root, "#file-input");
  const classifyButton = requireElement<HTMLButtonElement>(root, "#classify-button");
  const demoBar = requireElement<HTMLElement>(root, "#demo-buttons");
  const statusLine = requireElement<HTMLElement>(root, "#status-line");
  const results = requireElement<HTMLElement>(root, "#results");
  const engineNote = requireElement<HTMLElement>(root, "#engine-note");
  const panels = findPanels(root);

  const state = new AppState(api);
  let stages = DEFAULT_STAGES;

  const setStatus = (text: string, isError: boolean): void => {
    statusLine.textContent = text;
    statusLine.classList.toggle("error", isError);
  };

  const repaint = (snapshot: UiState): void => {
    switch (snapshot.status) {
      case "idle":
        setStatus("", false);
        break;
      case "loading":
        setStatus("analyzing...", false);
        break;
      case "error":
        setStatus(snapshot.error ?? "classification failed", true);
        break;
      case "done": {
        const timing = snapshot.response?.timing_ms;
        setStatus(timing === undefined ? "done" : `done in ${Math.round(timing)} ms`, false);
        break;
      }
    }
    if (snapshot.response === null) {
      results.hidden = true;
      return;
    }
    results.hidden = false;
    renderResults(panels, snapshot.response, stages, snapshot.selectedChunk, (index) =>
      state.selectChunk(index),
    );
  };
  state.subscribe(repaint);

  let schemaOk = false;
  try {
    const schema = await api.getSchema();
    const published = schema.properties.report_version?.const;
    if (published === SUPPORTED_REPORT_VERSION) {
      schemaOk = true;
      stages = schema.properties.distribution?.required ?? DEFAULT_STAGES;
      engineNote.textContent = `report schema v${published}`;
    } else {
      setStatus(
        `this client reads report schema v${SUPPORTED_REPORT_VERSION}; ` +
          `the service publishes v${published ?? "unknown"}`,
        true,
      );
    }
  } catch (error) {
    const message = error instanceof ApiError ? error.message : "failed to load /schema";
    setStatus(message, true);
  }
  classifyButton.disabled = !schemaOk;

  for (const demo of DEMOS) {
    const button = root.createElement("button");
    button.type = "button";
    button.textContent = demo.label;
    button.setAttribute("data-demo", demo.id);
    button.addEventListener("click", () => {
      void api
        .getDemo(demo.id)
        .then((payload) => {
          textInput.value = payload.text;
          setStatus(`loaded demo: ${demo.label}`, false);
        })
        .catch((error: unknown) => {
          const message =
            error instanceof ApiError ? error.message : `failed to load ${demo.label}`;
          setStatus(message, true);
        });
    });
    demoBar.appendChild(button);
  }

  fileInput.addEventListener("change", () => {
    const file = fileInput.files?.[0];
    if (file === undefined) {
      return;
    }
    void file
      .text()
      .then((content) => {
        textInput.value = content;
        setStatus(`loaded file: ${file.name}`, false);
      })
      .catch(() => setStatus(`could not read ${file.name}`, true));
  });

  classifyButton.addEventListener("click", () => {
    const text = textInput.value.trim();
    if (text === "") {
      setStatus("enter or load some text first", true);
      return;
    }
    void state.classify({ text });
  });

  return { state, stages };
}
