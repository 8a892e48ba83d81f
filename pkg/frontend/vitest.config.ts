import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    include: ["tests/**/*.test.ts"],
    // the integration test boots a real service process
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
