import { defineConfig } from "vitest/config";

// Dev server proxies API and replay-stream traffic to the pod server
// (start it with `memorypod serve --port 8080`).
export default defineConfig({
  server: {
    proxy: {
      "/pods": {
        target: "http://127.0.0.1:8080",
        ws: true,
      },
    },
  },
  test: {
    environment: "jsdom",
  },
});
