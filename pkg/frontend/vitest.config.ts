import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // the e2e test boots the real backend, which takes a few seconds
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
