import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ReviewStore } from "../src/state.js";
import { FakeServer, makeCandidates } from "./fakeServer.js";

function setup(n = 5): { server: FakeServer; store: ReviewStore } {
  const server = new FakeServer(makeCandidates(n));
  const api = new ApiClient("http://review.test", server.fetch);
  return { server, store: new ReviewStore(api, "alice") };
}

describe("ReviewStore", () => {
  it("loads candidates sorted as served and reports progress", async () => {
    const { store } = setup(5);
    await store.reload();
    expect(store.views).toHaveLength(5);
    expect(store.progress()).toBe("0 of 5");
    expect(store.focused?.candidate.id).toBe("cand-000");
  });

  it("shows an empty state for an empty candidate set", async () => {
    const { store } = setup(0);
    await store.reload();
    expect(store.views).toHaveLength(0);
    expect(store.focused).toBeNull();
    expect(store.progress()).toBe("0 of 0");
  });

  it("rating persists to the server and advances focus", async () => {
    const { server, store } = setup(3);
    await store.reload();
    const ok = await store.rate(2);
    expect(ok).toBe(true);
    expect(server.ratings).toHaveLength(1);
    expect(server.ratings[0]).toMatchObject({ candidate_id: "cand-000", code: 2, reviewer: "alice" });
    expect(store.focusIndex).toBe(1);
    expect(store.progress()).toBe("1 of 3");
  });

  it("rolls back the optimistic update when the POST fails", async () => {
    const { server, store } = setup(3);
    await store.reload();
    server.failNextRating = true;
    const ok = await store.rate(1);
    expect(ok).toBe(false);
    expect(store.views[0].review.kind).toBe("unrated");
    expect(store.error).toBe("internal error");
    expect(server.ratings).toHaveLength(0);
  });

  it("reload reconverges to server truth", async () => {
    const { server, store } = setup(3);
    await store.reload();
    await store.rate(4);
    const fresh = new ReviewStore(new ApiClient("http://review.test", server.fetch), "alice");
    await fresh.reload();
    expect(fresh.views[0].review).toEqual({ kind: "rated", code: 4 });
    expect(fresh.ratedCount).toBe(1);
  });

  it("disease filter narrows the queue", async () => {
    const { store } = setup(6);
    await store.setDiseaseFilter("Disease_1");
    expect(store.views).toHaveLength(2);
    expect(store.views.every((v) => v.candidate.disease_label === "Disease_1")).toBe(true);
    await store.setDiseaseFilter(null);
    expect(store.views).toHaveLength(6);
  });

  it("skip marks the candidate without a server call", async () => {
    const { server, store } = setup(3);
    await store.reload();
    store.skip();
    expect(store.views[0].review.kind).toBe("skipped");
    expect(store.focusIndex).toBe(1);
    expect(server.ratings).toHaveLength(0);
  });

  it("surfaces connectivity errors without dropping state", async () => {
    const { store } = setup(2);
    await store.reload();
    const broken = new ReviewStore(
      new ApiClient("http://review.test", () => Promise.reject(new Error("connection refused"))),
      "alice",
    );
    await broken.reload();
    expect(broken.error).toBe("connection refused");
  });
});
