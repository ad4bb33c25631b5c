import { defineConfig } from "vite";

// Proxy API calls to a locally running `forge serve` so the dev page can
// stay same-origin. Override the target with FORGE_API when the service
// runs elsewhere.
export default defineConfig({
  server: {
    proxy: {
      "/api": process.env.FORGE_API ?? "http://127.0.0.1:8000",
    },
  },
});
