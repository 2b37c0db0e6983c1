/* Pure view-model helpers: everything here maps API data to plain values
 * the renderers can print. No DOM, no network, no state. */

import {
  ApiError,
  ConsensusView,
  NewsDetail,
  NotificationItem,
  NewsView,
  ScoreReport,
  TxReceipt,
  Verdict,
  VoteView,
} from "./api.js";

export const VERDICTS: readonly Verdict[] = ["True", "False", "Partial"];

/* Human wording per API error code; the code itself is always shown
 * verbatim next to it. */
const HUMAN_TEXT: Record<string, string> = {
  AUTH_FAILED: "wrong username or credential",
  INACTIVE_CHECKER: "this account has been deactivated",
  NOT_AUTHORIZED: "your role does not allow this action",
  UNKNOWN_CHECKER: "no such fact-checker",
  CHECKER_EXISTS: "that fact-checker id is already taken",
  NOT_FOUND: "no such news item",
  BAD_REQUEST: "the request was malformed",
  EMPTY_CONTENT: "the content must not be empty",
  ALREADY_VOTED: "you have already voted on this item",
  UNKNOWN_VERDICT: "verdict must be True, False or Partial",
  QUORUM_NOT_REACHED: "not enough usable votes to finalize yet",
  COMMITMENT_MISMATCH: "the reveal does not match the sealed commitment",
  NEWS_ALREADY_LABELED: "consensus has already been reached",
};

export function errorText(err: unknown): string {
  if (err instanceof ApiError) {
    const human = HUMAN_TEXT[err.code];
    return human ? `${err.code}: ${human}` : `${err.code}: ${err.message}`;
  }
  if (err instanceof Error) {
    return `request failed: ${err.message}`;
  }
  return "request failed";
}

export function shortId(id: string, keep = 10): string {
  return id.length <= keep ? id : `${id.slice(0, keep)}…`;
}

export function fmtScore(score: number | null | undefined): string {
  return score === null || score === undefined ? "n/a" : score.toFixed(3);
}

export function fmtCredibility(value: number): string {
  return value.toFixed(3);
}

/* "suspicious" is a strict greater-than comparison, mirroring the server. */
export function isHot(score: number | null | undefined, threshold: number): boolean {
  return score !== null && score !== undefined && score > threshold;
}

export function statusLabel(news: Pick<NewsView, "status" | "verdict">): string {
  if (news.status === "labeled") {
    return `labeled: ${news.verdict}`;
  }
  return "under analysis";
}

/* Every mutating action surfaces its transaction id and block height. */
export function txReceiptText(receipt: TxReceipt): string {
  return `committed: tx ${receipt.tx_id} in block ${receipt.block_height}`;
}

export function blockRoute(height: number): string {
  return `#/block/${height}`;
}

export function newsRoute(newsId: string): string {
  return `#/news/${newsId}`;
}

export interface FormState {
  disabled: boolean;
  reason: string | null;
}

/* The verdict form locks as soon as this checker has voted or the item
 * has been labeled; votes are sealed, so there is nothing to edit. */
export function verdictFormState(
  detail: Pick<NewsDetail, "status">,
  myVote: VoteView | undefined,
): FormState {
  if (detail.status === "labeled") {
    return { disabled: true, reason: "consensus reached; voting is closed" };
  }
  if (myVote) {
    return {
      disabled: true,
      reason: "you have already voted; your vote stays sealed until the reveal",
    };
  }
  return { disabled: false, reason: null };
}

export interface ExplanationLine {
  category: string;
  text: string;
  detail: string;
}

/* One line per matched cue, for the explanation panel. */
export function explanationLines(report: ScoreReport): ExplanationLine[] {
  return report.matches.map((m) => ({
    category: m.category,
    text: m.text,
    detail: `"${m.text}" at offset ${m.start} (${m.category}, weight ${m.weight})`,
  }));
}

export interface TallyRow {
  verdict: Verdict;
  total: number;
  winner: boolean;
}

/* Reveal-view rows, heaviest first; the winner comes from the consensus
 * record rather than being recomputed here. */
export function tallyRows(consensus: ConsensusView): TallyRow[] {
  const rows = VERDICTS.map((verdict) => ({
    verdict,
    total: consensus.tally[verdict] ?? 0,
    winner: verdict === consensus.verdict,
  }));
  rows.sort((a, b) => b.total - a.total);
  return rows;
}

export interface QueueEntry {
  news_id: string;
  excerpt: string;
  score: number | null;
  vote_count: number;
  hot: boolean;
}

/* The vote queue merges personal notifications with the public
 * suspicious list; items present in both appear once, queue order first. */
export function queueEntries(
  notifications: NotificationItem[],
  suspicious: NewsView[],
  threshold: number,
): QueueEntry[] {
  const seen = new Set<string>();
  const out: QueueEntry[] = [];
  for (const n of notifications) {
    seen.add(n.news_id);
    out.push({
      news_id: n.news_id,
      excerpt: n.excerpt,
      score: n.score,
      vote_count: n.vote_count,
      hot: isHot(n.score, threshold),
    });
  }
  for (const s of suspicious) {
    if (seen.has(s.news_id)) {
      continue;
    }
    out.push({
      news_id: s.news_id,
      excerpt: s.excerpt,
      score: s.score ? s.score.score : null,
      vote_count: s.vote_count,
      hot: true,
    });
  }
  return out;
}

export interface Route {
  name: "login" | "queue" | "news" | "admin" | "overview" | "block";
  id?: string;
  height?: number;
}

export function parseRoute(hash: string): Route {
  const parts = hash.replace(/^#\/?/, "").split("/").filter((p) => p.length > 0);
  if (parts.length === 0) {
    return { name: "queue" };
  }
  switch (parts[0]) {
    case "login":
      return { name: "login" };
    case "queue":
      return { name: "queue" };
    case "news":
      return parts[1] ? { name: "news", id: parts[1] } : { name: "queue" };
    case "block": {
      const height = Number(parts[1]);
      return Number.isInteger(height) && height >= 0
        ? { name: "block", height }
        : { name: "overview" };
    }
    case "admin":
      return { name: "admin" };
    case "overview":
      return { name: "overview" };
    default:
      return { name: "queue" };
  }
}
