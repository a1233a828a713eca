import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // the integration test drives a real control service end to end
    testTimeout: 120_000,
    hookTimeout: 60_000,
    pool: "forks",
  },
});
