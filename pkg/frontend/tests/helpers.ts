/** Shared scaffolding: mounts the real page shell into jsdom and provides
 * fixture-backed Api stubs.  The response fixture is a stored service
 * reply for the Dickens demo text split into six chunks. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { Api } from "../src/api.js";
import type { ClassifyResponse, DemoText, SchemaDocument } from "../src/types.js";

const HERE = dirname(fileURLToPath(import.meta.url));

function loadJson<T>(name: string): T {
  return JSON.parse(readFileSync(join(HERE, "fixtures", name), "utf8")) as T;
}

export function fixtureResponse(): ClassifyResponse {
  return loadJson<ClassifyResponse>("classify_response.json");
}

export function fixtureSchema(): SchemaDocument {
  return loadJson<SchemaDocument>("schema.json");
}

export function fixtureStages(): string[] {
  const stages = fixtureSchema().properties.distribution?.required;
  if (stages === undefined) {
    throw new Error("schema fixture lost its stage list");
  }
  return stages;
}

/** Injects the body of index.html into the jsdom document. */
export function mountPage(): void {
  const html = readFileSync(join(HERE, "..", "index.html"), "utf8");
  const start = html.indexOf("<body>") + "<body>".length;
  const end = html.indexOf("</body>");
  document.body.innerHTML = html.slice(start, end);
}

export function stubApi(overrides: Partial<Api> = {}): Api {
  return {
    getSchema: () => Promise.resolve(fixtureSchema()),
    getDemo: (id: string): Promise<DemoText> =>
      Promise.resolve({ id, text: `demo passage for ${id}` }),
    classify: () => Promise.resolve(fixtureResponse()),
    ...overrides,
  };
}
