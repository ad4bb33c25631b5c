import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
    // The end-to-end test boots the Python service and waits for a report,
    // which runs 200 policy simulations server-side.
    testTimeout: 30_000,
    hookTimeout: 30_000,
  },
});
