// Session store for the review queue. UI state is a pure projection of the
// server plus in-flight optimistic deltas; reload() always reconverges to
// server truth. Ratings are applied optimistically and rolled back when the
// POST fails, so a confirmed rating is always retrievable from the server.

import { ApiClient, Candidate } from "./api.js";

export type LocalReview =
  | { kind: "unrated" }
  | { kind: "rated"; code: number }
  | { kind: "skipped" };

export interface CandidateView {
  candidate: Candidate;
  review: LocalReview;
}

export type Listener = () => void;

export class ReviewStore {
  views: CandidateView[] = [];
  codes: Record<string, string> = {};
  focusIndex = 0;
  diseaseFilter: string | null = null;
  error: string | null = null;
  reviewer: string;

  private listeners: Listener[] = [];

  constructor(private api: ApiClient, reviewer: string) {
    this.reviewer = reviewer;
  }

  subscribe(fn: Listener): void {
    this.listeners.push(fn);
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  async reload(): Promise<void> {
    try {
      const [listing, codes] = await Promise.all([
        this.api.listCandidates(this.diseaseFilter ? { disease: this.diseaseFilter } : undefined),
        this.api.getCodes(),
      ]);
      this.codes = codes;
      this.views = listing.candidates.map((candidate) => ({
        candidate,
        review: candidate.status === "rated"
          ? { kind: "rated", code: candidate.codes[candidate.codes.length - 1] }
          : { kind: "unrated" },
      }));
      this.focusIndex = Math.min(this.focusIndex, Math.max(0, this.views.length - 1));
      this.error = null;
    } catch (err) {
      this.error = err instanceof Error ? err.message : String(err);
    }
    this.notify();
  }

  get focused(): CandidateView | null {
    return this.views[this.focusIndex] ?? null;
  }

  get ratedCount(): number {
    return this.views.filter((v) => v.review.kind === "rated").length;
  }

  progress(): string {
    return `${this.ratedCount} of ${this.views.length}`;
  }

  setDiseaseFilter(disease: string | null): Promise<void> {
    this.diseaseFilter = disease;
    this.focusIndex = 0;
    return this.reload();
  }

  next(): void {
    if (this.focusIndex < this.views.length - 1) {
      this.focusIndex += 1;
      this.notify();
    }
  }

  prev(): void {
    if (this.focusIndex > 0) {
      this.focusIndex -= 1;
      this.notify();
    }
  }

  private advanceToUnrated(): void {
    for (let i = this.focusIndex + 1; i < this.views.length; i++) {
      if (this.views[i].review.kind === "unrated") {
        this.focusIndex = i;
        return;
      }
    }
    if (this.focusIndex < this.views.length - 1) this.focusIndex += 1;
  }

  skip(): void {
    const view = this.focused;
    if (!view) return;
    if (view.review.kind === "unrated") view.review = { kind: "skipped" };
    this.advanceToUnrated();
    this.notify();
  }

  async rate(code: number): Promise<boolean> {
    const view = this.focused;
    if (!view || code < 1 || code > 5) return false;
    const previous = view.review;
    view.review = { kind: "rated", code };
    this.advanceToUnrated();
    this.notify();
    try {
      await this.api.postRating(view.candidate.id, code, this.reviewer);
      this.error = null;
      return true;
    } catch (err) {
      view.review = previous;
      this.error = err instanceof Error ? err.message : String(err);
      this.notify();
      return false;
    }
  }
}
