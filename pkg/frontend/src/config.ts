// Base-URL resolution, in priority order:
//   1. window.QIMRAG_CONFIG set by an inline script (build-time injection)
//   2. ./config.json next to the page (runtime deployment config)
//   3. the local development default

export interface AppConfig {
  baseUrl: string;
}

declare global {
  interface Window {
    QIMRAG_CONFIG?: Partial<AppConfig>;
  }
}

export const DEFAULT_BASE_URL = "http://127.0.0.1:8000";

type FetchLike = (input: string) => Promise<Response>;

export async function loadConfig(
  fetchFn: FetchLike = (input) => fetch(input),
): Promise<AppConfig> {
  const injected = window.QIMRAG_CONFIG?.baseUrl;
  if (typeof injected === "string" && injected) {
    return { baseUrl: stripSlash(injected) };
  }
  try {
    const response = await fetchFn("./config.json");
    if (response.ok) {
      const body = await response.json();
      if (typeof body?.baseUrl === "string" && body.baseUrl) {
        return { baseUrl: stripSlash(body.baseUrl) };
      }
    }
  } catch {
    // no config file served; fall through to the default
  }
  return { baseUrl: DEFAULT_BASE_URL };
}

function stripSlash(url: string): string {
  return url.endsWith("/") ? url.slice(0, -1) : url;
}
