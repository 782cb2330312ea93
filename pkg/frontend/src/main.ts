import { ApiClient } from "./api.js";
import { createChatApp } from "./app.js";
import { loadConfig } from "./config.js";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount node");
  const config = await loadConfig();
  createChatApp(root, new ApiClient(config.baseUrl));
}

void boot();
