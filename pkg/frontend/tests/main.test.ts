import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { mountApp } from "../src/main.js";
import { jsonResponse } from "./helpers.js";

describe("mountApp", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  function mount() {
    const root = document.createElement("div");
    document.body.appendChild(root);
    const api = new ApiClient(async () => jsonResponse(404, { error: "x" }));
    return { root, app: mountApp(root, api) };
  }

  it("starts on the dashboard tab", () => {
    const { root } = mount();
    expect((root.querySelector("#pane-dashboard") as HTMLElement).hidden).toBe(false);
    expect((root.querySelector("#pane-curation") as HTMLElement).hidden).toBe(true);
    expect(
      root.querySelector("#tab-dashboard")?.classList.contains("active"),
    ).toBe(true);
  });

  it("switches panes when a tab is clicked", () => {
    const { root } = mount();
    (root.querySelector("#tab-curation") as HTMLButtonElement).click();
    expect((root.querySelector("#pane-dashboard") as HTMLElement).hidden).toBe(true);
    expect((root.querySelector("#pane-curation") as HTMLElement).hidden).toBe(false);

    (root.querySelector("#tab-dashboard") as HTMLButtonElement).click();
    expect((root.querySelector("#pane-dashboard") as HTMLElement).hidden).toBe(false);
  });
});
