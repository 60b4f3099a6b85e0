import { ApiClient } from "./api.js";
import { CurationView } from "./curation.js";
import { DashboardView } from "./dashboard.js";

export function mountApp(root: HTMLElement, api: ApiClient): {
  dashboard: DashboardView;
  curation: CurationView;
  showTab: (tab: "dashboard" | "curation") => void;
} {
  const doc = root.ownerDocument;
  root.innerHTML = "";

  const nav = doc.createElement("nav");
  nav.className = "tabs";
  const dashboardTab = doc.createElement("button");
  dashboardTab.id = "tab-dashboard";
  dashboardTab.textContent = "Trends";
  const curationTab = doc.createElement("button");
  curationTab.id = "tab-curation";
  curationTab.textContent = "Curation";
  nav.appendChild(dashboardTab);
  nav.appendChild(curationTab);
  root.appendChild(nav);

  const dashboardPane = doc.createElement("section");
  dashboardPane.id = "pane-dashboard";
  const curationPane = doc.createElement("section");
  curationPane.id = "pane-curation";
  root.appendChild(dashboardPane);
  root.appendChild(curationPane);

  const dashboard = new DashboardView(api, dashboardPane);
  const curation = new CurationView(api, curationPane);

  const showTab = (tab: "dashboard" | "curation"): void => {
    const onDashboard = tab === "dashboard";
    dashboardPane.hidden = !onDashboard;
    curationPane.hidden = onDashboard;
    dashboardTab.classList.toggle("active", onDashboard);
    curationTab.classList.toggle("active", !onDashboard);
  };
  dashboardTab.addEventListener("click", () => showTab("dashboard"));
  curationTab.addEventListener("click", () => showTab("curation"));
  showTab("dashboard");

  return { dashboard, curation, showTab };
}

// browser entry; tests import mountApp and drive it with a mocked client
if (typeof document !== "undefined" && document.getElementById("app")) {
  const api = new ApiClient();
  const app = mountApp(document.getElementById("app") as HTMLElement, api);
  void app.dashboard.load();
  void app.curation.load();
}
