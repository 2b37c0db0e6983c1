import { describe, expect, it } from "vitest";
import { ApiError, ConsensusView, NotificationItem, NewsView, VoteView } from "../src/api.js";
import {
  errorText,
  explanationLines,
  fmtScore,
  isHot,
  parseRoute,
  queueEntries,
  shortId,
  statusLabel,
  tallyRows,
  txReceiptText,
  verdictFormState,
} from "../src/views.js";

const consensus: ConsensusView = {
  news_id: "n".repeat(64),
  verdict: "False",
  mode: "simple",
  quorum: 3,
  tally: { True: 1, False: 2, Partial: 0 },
  participants: [
    { checker_id: "alice", verdict: "False", aligned: true, weight: 1 },
    { checker_id: "bob", verdict: "False", aligned: true, weight: 1 },
    { checker_id: "carol", verdict: "True", aligned: false, weight: 1 },
  ],
  excluded: [],
  finalize_tx: "f".repeat(64),
};

function vote(checkerId: string): VoteView {
  return {
    news_id: "n".repeat(64),
    checker_id: checkerId,
    commitment: "c".repeat(64),
    revealed: false,
    cast_tx: "t".repeat(64),
    cast_block: 5,
  };
}

describe("verdict form state", () => {
  it("is open while unlabeled and not yet voted", () => {
    expect(verdictFormState({ status: "under_analysis" }, undefined))
      .toEqual({ disabled: false, reason: null });
  });

  it("locks once this checker has voted", () => {
    const state = verdictFormState({ status: "under_analysis" }, vote("me"));
    expect(state.disabled).toBe(true);
    expect(state.reason).toContain("already voted");
  });

  it("locks once the item is labeled", () => {
    const state = verdictFormState({ status: "labeled" }, undefined);
    expect(state.disabled).toBe(true);
    expect(state.reason).toContain("consensus reached");
  });
});

describe("tally rows", () => {
  it("orders by weight and marks the recorded winner", () => {
    const rows = tallyRows(consensus);
    expect(rows.map((r) => r.verdict)).toEqual(["False", "True", "Partial"]);
    expect(rows[0].winner).toBe(true);
    expect(rows[1].winner).toBe(false);
    expect(rows[0].total).toBe(2);
  });

  it("tolerates a tally with a missing verdict key", () => {
    const partial = { ...consensus, tally: { False: 2 } as ConsensusView["tally"] };
    const rows = tallyRows(partial);
    expect(rows.find((r) => r.verdict === "True")?.total).toBe(0);
  });
});

describe("queue merging", () => {
  const notifications: NotificationItem[] = [
    { news_id: "a", excerpt: "first", score: 0.9, vote_count: 1, seq: 1 },
    { news_id: "b", excerpt: "second", score: 0.1, vote_count: 0, seq: 2 },
  ];
  const suspicious = [
    { news_id: "a", excerpt: "first", score: { score: 0.9 }, vote_count: 1 },
    { news_id: "c", excerpt: "third", score: { score: 0.95 }, vote_count: 2 },
  ] as unknown as NewsView[];

  it("keeps notification order and appends unseen suspicious items", () => {
    const entries = queueEntries(notifications, suspicious, 0.7);
    expect(entries.map((e) => e.news_id)).toEqual(["a", "b", "c"]);
  });

  it("flags entries above the threshold as hot", () => {
    const entries = queueEntries(notifications, suspicious, 0.7);
    expect(entries.map((e) => e.hot)).toEqual([true, false, true]);
  });
});

describe("formatting", () => {
  it("score formatting", () => {
    expect(fmtScore(0.7)).toBe("0.700");
    expect(fmtScore(null)).toBe("n/a");
    expect(fmtScore(undefined)).toBe("n/a");
  });

  it("suspicion is strictly greater-than", () => {
    expect(isHot(0.7, 0.7)).toBe(false);
    expect(isHot(0.71, 0.7)).toBe(true);
    expect(isHot(null, 0.7)).toBe(false);
  });

  it("short ids keep a prefix", () => {
    expect(shortId("abcdef", 10)).toBe("abcdef");
    expect(shortId("a".repeat(64), 10)).toBe("a".repeat(10) + "…");
  });

  it("status labels", () => {
    expect(statusLabel({ status: "under_analysis" })).toBe("under analysis");
    expect(statusLabel({ status: "labeled", verdict: "Partial" })).toBe("labeled: Partial");
  });

  it("receipts name the transaction and block", () => {
    const text = txReceiptText({ tx_id: "ab12", block_height: 9, tx_index: 0 });
    expect(text).toContain("ab12");
    expect(text).toContain("block 9");
  });

  it("explanation lines carry cue, offset and weight", () => {
    const lines = explanationLines({
      score: 0.9,
      explanation: "matched 1 cue",
      matches: [
        { cue_id: "clickbait:1", category: "clickbait", weight: 0.4, start: 7, text: "shocking" },
      ],
    });
    expect(lines).toHaveLength(1);
    expect(lines[0].detail).toContain("shocking");
    expect(lines[0].detail).toContain("offset 7");
    expect(lines[0].detail).toContain("weight 0.4");
  });
});

describe("error text", () => {
  it("keeps the API code verbatim and adds human wording", () => {
    const err = new ApiError("ALREADY_VOTED", "checker a already voted", 409);
    expect(errorText(err)).toBe("ALREADY_VOTED: you have already voted on this item");
  });

  it("falls back to the server message for unknown codes", () => {
    const err = new ApiError("SOMETHING_NEW", "strange failure", 500);
    expect(errorText(err)).toBe("SOMETHING_NEW: strange failure");
  });

  it("handles plain errors", () => {
    expect(errorText(new Error("socket hang up"))).toContain("socket hang up");
  });
});

describe("route parsing", () => {
  it("maps hashes to screens", () => {
    expect(parseRoute("")).toEqual({ name: "queue" });
    expect(parseRoute("#/")).toEqual({ name: "queue" });
    expect(parseRoute("#/login")).toEqual({ name: "login" });
    expect(parseRoute("#/news/abc")).toEqual({ name: "news", id: "abc" });
    expect(parseRoute("#/block/12")).toEqual({ name: "block", height: 12 });
    expect(parseRoute("#/admin")).toEqual({ name: "admin" });
    expect(parseRoute("#/overview")).toEqual({ name: "overview" });
  });

  it("rejects malformed block heights", () => {
    expect(parseRoute("#/block/xyz")).toEqual({ name: "overview" });
    expect(parseRoute("#/news/")).toEqual({ name: "queue" });
    expect(parseRoute("#/bogus")).toEqual({ name: "queue" });
  });
});
