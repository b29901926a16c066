// Browser entry point: fetch the deployment config, build the client, boot.
import { ApiClient, loadConfig } from "./api.js";
import { Dashboard } from "./app.js";
import { toElement } from "./vdom.js";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (root === null) throw new Error("missing #app element");
  try {
    const config = await loadConfig();
    const dashboard = new Dashboard(new ApiClient(config), (tree) => {
      root.replaceChildren(toElement(tree, document));
    });
    await dashboard.start();
  } catch (err) {
    root.textContent = `failed to start: ${err instanceof Error ? err.message : String(err)}`;
  }
}

void boot();
