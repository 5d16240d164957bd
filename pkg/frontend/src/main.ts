import { ApiClient } from "./api.js";
import { Controller } from "./controller.js";

// Base URL precedence: ?api=… query parameter, then a global set by the
// hosting page, then the CLI's default serve address.
function baseUrl(): string | undefined {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  if (fromQuery) return fromQuery;
  const fromGlobal = (window as { AUDITNET_API_URL?: string }).AUDITNET_API_URL;
  return fromGlobal;
}

const root = document.getElementById("app");
if (root) {
  const controller = new Controller(root, new ApiClient({ baseUrl: baseUrl() }));
  void controller.mount();
}
