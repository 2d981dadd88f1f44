import { defineConfig } from "vitest/config";

// base "./" so the bundle works mounted at /ui/ by the engine's serve
// command as well as from a bare file server
export default defineConfig({
  base: "./",
  build: { outDir: "dist" },
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
  },
});
