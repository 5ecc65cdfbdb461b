import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { handleKey } from "../src/keyboard.js";
import { ReviewStore } from "../src/state.js";
import { FakeServer, makeCandidates } from "./fakeServer.js";

function setup(n: number): { server: FakeServer; store: ReviewStore } {
  const server = new FakeServer(makeCandidates(n));
  const api = new ApiClient("http://review.test", server.fetch);
  return { server, store: new ReviewStore(api, "alice") };
}

describe("keyboard review", () => {
  it("digits 1-5 rate the focused candidate", async () => {
    const { server, store } = setup(2);
    await store.reload();
    expect(await handleKey("3", store)).toBe(true);
    expect(server.ratings[0]).toMatchObject({ candidate_id: "cand-000", code: 3 });
  });

  it("j/k and arrows navigate, s skips, other keys are ignored", async () => {
    const { store } = setup(4);
    await store.reload();
    await handleKey("j", store);
    expect(store.focusIndex).toBe(1);
    await handleKey("ArrowDown", store);
    expect(store.focusIndex).toBe(2);
    await handleKey("k", store);
    expect(store.focusIndex).toBe(1);
    await handleKey("ArrowUp", store);
    expect(store.focusIndex).toBe(0);
    await handleKey("s", store);
    expect(store.views[0].review.kind).toBe("skipped");
    expect(await handleKey("x", store)).toBe(false);
  });

  it("a full keyboard pass over 20 candidates persists all 20 ratings", async () => {
    const { server, store } = setup(20);
    await store.reload();
    for (let i = 0; i < 20; i++) {
      const key = String((i % 5) + 1);
      expect(await handleKey(key, store)).toBe(true);
    }
    // zero loss: every confirmed rating is on the server, one per candidate
    expect(server.ratings).toHaveLength(20);
    const ratedIds = new Set(server.ratings.map((r) => r.candidate_id));
    expect(ratedIds.size).toBe(20);
    expect(store.ratedCount).toBe(20);
    expect(store.progress()).toBe("20 of 20");
    const summary = await new ApiClient("http://review.test", server.fetch).getSummary();
    expect(summary.rated).toBe(20);
    expect(Object.values(summary.totals).reduce((a, b) => a + b, 0)).toBe(20);
  });
});
