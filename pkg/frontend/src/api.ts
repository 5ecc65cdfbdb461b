// Typed client for the review service. All UI state flows through this
// module; nothing else in the app talks to the network.

export interface Candidate {
  id: string;
  rule_id: string;
  factor_id: string;
  disease_label: string;
  score: number;
  support: number;
  evaluation_count: number;
  status: "rated" | "unrated";
  codes: number[];
}

export interface CandidateList {
  candidates: Candidate[];
  total: number;
}

export interface Rating {
  candidate_id: string;
  code: number;
  reviewer: string;
  comment: string;
  timestamp: number;
}

export interface Summary {
  per_disease: Record<string, Record<string, number>>;
  totals: Record<string, number>;
  rated: number;
  codes: Record<string, string>;
}

export interface ApplyResult {
  changelog: ChangelogEntry[];
  added: number;
}

export interface ChangelogEntry {
  candidate_id: string;
  rule_id: string;
  factor_id: string;
  applied: boolean;
  code: number;
  reviewer: string;
  note?: string;
}

export interface GraphStats {
  node_count: number;
  edge_count: number;
  avg_degree: number;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = await resp.json();
        if (typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  listCandidates(filters?: { status?: string; disease?: string }): Promise<CandidateList> {
    const params = new URLSearchParams();
    if (filters?.status) params.set("status", filters.status);
    if (filters?.disease) params.set("disease", filters.disease);
    const query = params.toString();
    return this.request<CandidateList>("/candidates" + (query ? "?" + query : ""));
  }

  getCandidate(id: string): Promise<Candidate> {
    return this.request<Candidate>("/candidates/" + encodeURIComponent(id));
  }

  postRating(candidateId: string, code: number, reviewer: string, comment = ""): Promise<Rating> {
    return this.request<Rating>("/ratings", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ candidate_id: candidateId, code, reviewer, comment }),
    });
  }

  getSummary(): Promise<Summary> {
    return this.request<Summary>("/summary");
  }

  getCodes(): Promise<Record<string, string>> {
    return this.request<Record<string, string>>("/codes");
  }

  apply(acceptCodes: number[] = [1]): Promise<ApplyResult> {
    return this.request<ApplyResult>("/apply", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ accept_codes: acceptCodes }),
    });
  }

  graphStats(): Promise<GraphStats> {
    return this.request<GraphStats>("/graph/stats");
  }
}
