import assert from "node:assert/strict";
import { test } from "node:test";

import { SessionGallery, diffConfigs } from "../src/gallery.js";
import type { JobStatus } from "../src/types.js";

function job(id: string, config: Record<string, unknown>, status: JobStatus["status"] = "done", error: string | null = null): JobStatus {
  return {
    id,
    status,
    error,
    baseline: false,
    progress: { iter: 3, total_iters: 3, losses: null },
    loss_history: [
      { iter: 0, content: 0, style_term: 2, total: 2000 },
      { iter: 3, content: 1, style_term: 0.5, total: 500 },
    ],
    config,
  };
}

test("gallery keeps every run with its config", () => {
  const g = new SessionGallery();
  g.addFromJob(job("a", { sigma: 0.275 }));
  g.addFromJob(job("b", { sigma: 0.3 }));
  assert.equal(g.list().length, 2);
  assert.deepEqual(g.jobIds(), ["a", "b"]);
  assert.equal(g.get("a")?.label, "run 1");
});

test("two runs differing only in sigma diff to exactly that key", () => {
  const g = new SessionGallery();
  g.addFromJob(job("a", { sigma: 0.275, iterations: 300, weights: { beta: 1e4 } }));
  g.addFromJob(job("b", { sigma: 0.3, iterations: 300, weights: { beta: 1e4 } }));
  const diff = g.compare("a", "b");
  assert.deepEqual(Object.keys(diff), ["sigma"]);
  assert.deepEqual(diff.sigma, { a: 0.275, b: 0.3 });
});

test("nested config differences use dotted paths", () => {
  const diff = diffConfigs(
    { weights: { alpha: 1, beta: 1e4 } },
    { weights: { alpha: 1, beta: 100 } },
  );
  assert.deepEqual(Object.keys(diff), ["weights.beta"]);
});

test("cancelled runs are labeled cancelled with losses retained", () => {
  const g = new SessionGallery();
  const entry = g.addFromJob(job("c", { sigma: 0.275 }, "failed", "cancelled"));
  assert.equal(entry.status, "cancelled");
  assert.equal(entry.losses.length, 2);
});

test("failed runs keep their failure reason", () => {
  const g = new SessionGallery();
  const entry = g.addFromJob(job("d", {}, "failed", "palette error"));
  assert.equal(entry.status, "failed");
  assert.equal(entry.error, "palette error");
});

test("comparing unknown runs is an error", () => {
  const g = new SessionGallery();
  g.addFromJob(job("a", {}));
  assert.throws(() => g.compare("a", "zzz"), /gallery/);
});
