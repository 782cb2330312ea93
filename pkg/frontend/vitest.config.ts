import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    // the e2e spec boots the real python service; give it room
    testTimeout: 30000,
    hookTimeout: 30000,
  },
});
