import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // The integration suite boots the real annotation service.
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
