/* Typed client for the factledger REST API.
 *
 * Every request goes through the ROUTES table below, so the full network
 * surface of the app is auditable (and tested) in one place. The client
 * keeps exactly one piece of state: the bearer token. Vote verdicts and
 * rationales pass straight through to the server and are never stored
 * here; until the reveal, the ledger is the only holder of that data.
 */

export type Verdict = "True" | "False" | "Partial";
export type NewsStatus = "under_analysis" | "labeled";
export type Role = "checker" | "curator";

export interface CueMatch {
  cue_id: string;
  category: string;
  weight: number;
  start: number;
  text: string;
}

export interface ScoreReport {
  score: number;
  matches: CueMatch[];
  explanation: string;
}

export interface NewsView {
  news_id: string;
  content_format: string;
  content_b64: string;
  created_at: string | null;
  author: string | null;
  platform: string | null;
  excerpt: string;
  seq: number;
  status: NewsStatus;
  score: ScoreReport | null;
  vote_count: number;
  register_tx: string;
  verdict?: Verdict;
  finalize_tx?: string;
}

export interface Participant {
  checker_id: string;
  verdict: Verdict;
  aligned: boolean;
  weight: number;
}

export interface Exclusion {
  checker_id: string;
  reason: string;
}

export interface ConsensusView {
  news_id: string;
  verdict: Verdict;
  mode: string;
  quorum: number;
  tally: Record<Verdict, number>;
  participants: Participant[];
  excluded: Exclusion[];
  finalize_tx: string;
}

export interface NewsDetail extends NewsView {
  register_block: number | null;
  last_update_block: number;
  label_block?: number;
  consensus?: ConsensusView;
  external_match: unknown | null;
}

export interface VoteView {
  news_id: string;
  checker_id: string;
  commitment: string;
  revealed: boolean;
  cast_tx: string;
  cast_block: number | null;
  verdict?: Verdict;
  rationale?: string;
  salt_hex?: string;
}

export interface CheckerView {
  checker_id: string;
  display_name: string;
  role: Role;
  org: string;
  credibility: number;
  active: boolean;
  flagged: boolean;
  token_balance: number;
}

export interface NotificationItem {
  news_id: string;
  excerpt: string;
  score: number | null;
  vote_count: number;
  seq: number;
}

export interface DashboardSummary {
  total_news: number;
  total_on_chain: number;
  ai_evaluated: number;
  awaiting_evaluation: number;
  suspicious_open: number;
  verdicts: Record<Verdict, number>;
  tokens_minted: number;
  chain_height: number;
}

/* Location of a committed transaction, echoed by every mutating call. */
export interface TxReceipt {
  tx_id: string;
  block_height: number;
  tx_index: number;
}

export interface LoginResponse {
  token: string;
  checker: CheckerView;
}

export interface RegisterResponse extends TxReceipt {
  news_id: string;
  status: NewsStatus;
  duplicate?: boolean;
}

export interface CastVoteResponse extends TxReceipt {
  news_id: string;
  checker_id: string;
  commitment: string;
  vote_count: number;
  finalized: boolean;
  verdict: Verdict | null;
}

export interface FinalizeResponse extends TxReceipt {
  news_id: string;
  finalized: boolean;
  verdict: Verdict;
}

export interface CheckerMutationResponse extends TxReceipt {
  checker_id: string;
  [key: string]: unknown;
}

export interface BlockTx {
  tx_id: string;
  operation: string;
  submitter: string;
  validity: string;
  [key: string]: unknown;
}

export interface BlockView {
  height: number;
  prev_hash: string;
  timestamp_ms: number;
  block_hash: string;
  tx_list: BlockTx[];
}

export interface VerifyResult {
  ok: boolean;
  blocks_checked: number;
  first_bad_height: number | null;
  reason: string | null;
}

export interface HealthResponse {
  status: string;
  chain_height: number;
}

export interface RewardsResponse {
  total: number;
  reward_per_aligned_vote: number;
}

/* The complete network surface. Each entry is "METHOD /v1/path"; path
 * parameters use {name} placeholders filled by call(). Tests assert that
 * no request ever leaves the client on a path outside this table. */
export const ROUTES = {
  health: "GET /v1/health",
  login: "POST /v1/login",
  registerNews: "POST /v1/news",
  listNews: "GET /v1/news",
  suspicious: "GET /v1/news/suspicious",
  checkNews: "GET /v1/check-news/{news_id}",
  votesFor: "GET /v1/news/{news_id}/votes",
  castVote: "POST /v1/news/{news_id}/votes",
  finalize: "POST /v1/news/{news_id}/finalize",
  classificationOrder: "GET /v1/news/{news_id}/classification-order",
  notifications: "GET /v1/notifications",
  listCheckers: "GET /v1/fact-checkers",
  createChecker: "POST /v1/fact-checkers",
  getChecker: "GET /v1/fact-checkers/{checker_id}",
  updateChecker: "PATCH /v1/fact-checkers/{checker_id}",
  deactivateChecker: "DELETE /v1/fact-checkers/{checker_id}",
  dashboard: "GET /v1/dashboard",
  rewardsTotal: "GET /v1/rewards/total",
  block: "GET /v1/blocks/{height}",
  verifyChain: "GET /v1/chain/verify",
} as const;

export type RouteName = keyof typeof ROUTES;

/* Minimal structural view of fetch, so tests can substitute a plain
 * node:http transport or a recording stub without pulling in DOM types. */
export interface ResponseLike {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init: { method: string; headers: Record<string, string>; body?: string },
) => Promise<ResponseLike>;

/* A failed API call. `code` is the server's error code, verbatim. */
export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
    readonly details: Record<string, unknown> = {},
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export function buildPath(
  template: string,
  params: Record<string, string | number> = {},
): string {
  return template.replace(/\{(\w+)\}/g, (_m, name: string) => {
    const value = params[name];
    if (value === undefined) {
      throw new Error(`missing path parameter: ${name}`);
    }
    return encodeURIComponent(String(value));
  });
}

export interface ApiClientOptions {
  baseUrl?: string;
  fetchFn?: FetchLike;
}

export class ApiClient {
  private baseUrl: string;
  private fetchFn: FetchLike;
  private token: string | null = null;

  constructor(options: ApiClientOptions = {}) {
    this.baseUrl = (options.baseUrl ?? "").replace(/\/+$/, "");
    this.fetchFn =
      options.fetchFn ?? ((url, init) => globalThis.fetch(url, init));
  }

  get authenticated(): boolean {
    return this.token !== null;
  }

  setToken(token: string | null): void {
    this.token = token;
  }

  private async call<T>(
    route: RouteName,
    params: Record<string, string | number> = {},
    body?: unknown,
  ): Promise<T> {
    const [method, template] = ROUTES[route].split(" ", 2);
    const path = buildPath(template, params);
    const headers: Record<string, string> = {};
    if (this.token) {
      headers["Authorization"] = `Bearer ${this.token}`;
    }
    const init: { method: string; headers: Record<string, string>; body?: string } =
      { method, headers };
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    const payload = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      const err = (payload.error ?? {}) as Record<string, unknown>;
      throw new ApiError(
        String(err.code ?? "UNKNOWN_ERROR"),
        String(err.message ?? `request failed with status ${response.status}`),
        response.status,
        (err.details as Record<string, unknown>) ?? {},
      );
    }
    return payload as T;
  }

  // --- session ---------------------------------------------------------------

  async login(username: string, credential: string): Promise<LoginResponse> {
    const out = await this.call<LoginResponse>("login", {}, { username, credential });
    this.token = out.token;
    return out;
  }

  logout(): void {
    this.token = null;
  }

  // --- public reads ------------------------------------------------------------

  health(): Promise<HealthResponse> {
    return this.call("health");
  }

  checkNews(newsId: string): Promise<NewsDetail> {
    return this.call("checkNews", { news_id: newsId });
  }

  suspicious(): Promise<{ news: NewsView[]; threshold: number }> {
    return this.call("suspicious");
  }

  dashboard(): Promise<DashboardSummary> {
    return this.call("dashboard");
  }

  block(height: number): Promise<BlockView> {
    return this.call("block", { height });
  }

  verifyChain(): Promise<VerifyResult> {
    return this.call("verifyChain");
  }

  // --- checker reads -----------------------------------------------------------

  listNews(): Promise<{ news: NewsView[] }> {
    return this.call("listNews");
  }

  votesFor(newsId: string): Promise<{ votes: VoteView[] }> {
    return this.call("votesFor", { news_id: newsId });
  }

  notifications(): Promise<{ notifications: NotificationItem[] }> {
    return this.call("notifications");
  }

  listCheckers(): Promise<{ checkers: CheckerView[] }> {
    return this.call("listCheckers");
  }

  getChecker(checkerId: string): Promise<CheckerView> {
    return this.call("getChecker", { checker_id: checkerId });
  }

  rewardsTotal(): Promise<RewardsResponse> {
    return this.call("rewardsTotal");
  }

  classificationOrder(
    newsId: string,
  ): Promise<{ orders: { news_id: string; checker_id: string }[] }> {
    return this.call("classificationOrder", { news_id: newsId });
  }

  // --- mutations ---------------------------------------------------------------

  registerNews(content: string, meta: {
    author?: string; platform?: string; created_at?: string;
  } = {}): Promise<RegisterResponse> {
    return this.call("registerNews", {}, { content, ...meta });
  }

  /* Sends the vote and forgets it: the arguments are not retained. */
  castVote(
    newsId: string,
    verdict: Verdict,
    rationale: string,
  ): Promise<CastVoteResponse> {
    return this.call("castVote", { news_id: newsId }, { verdict, rationale });
  }

  finalize(newsId: string): Promise<FinalizeResponse> {
    return this.call("finalize", { news_id: newsId });
  }

  createChecker(body: {
    checker_id: string;
    display_name: string;
    credential: string;
    role?: Role;
  }): Promise<CheckerMutationResponse> {
    return this.call("createChecker", {}, body);
  }

  updateChecker(
    checkerId: string,
    patch: { display_name?: string; credential?: string },
  ): Promise<CheckerMutationResponse> {
    return this.call("updateChecker", { checker_id: checkerId }, patch);
  }

  deactivateChecker(checkerId: string): Promise<CheckerMutationResponse> {
    return this.call("deactivateChecker", { checker_id: checkerId });
  }
}
