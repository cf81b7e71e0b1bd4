// Entry point: pick (or create) a project and mount the builder.

import { Api } from "./api.js";
import { BuilderView } from "./panes.js";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");
  const api = new Api("");

  const projects = await api.listProjects();
  const project =
    projects[projects.length - 1] ??
    (await api.createProject("quiz", "studio project"));

  document.title = `chatwright studio - ${project.name}`;
  const view = new BuilderView(api, project, root);
  await view.load();
}

boot().catch((err) => {
  const root = document.getElementById("app");
  if (root) {
    root.textContent = `failed to start: ${err instanceof Error ? err.message : err}`;
  }
});
