/* DOM renderers, one per screen. They build elements with el() and never
 * assign innerHTML from API data, so content is inert by construction.
 * Navigation links carry data-nav and are handled by the app's click
 * delegate; everything else reports user intent through the handler
 * callbacks passed in. */

import {
  BlockView,
  CheckerView,
  DashboardSummary,
  NewsDetail,
  RewardsResponse,
  TxReceipt,
  Verdict,
  VerifyResult,
  VoteView,
} from "./api.js";
import {
  QueueEntry,
  VERDICTS,
  blockRoute,
  explanationLines,
  fmtCredibility,
  fmtScore,
  newsRoute,
  shortId,
  statusLabel,
  tallyRows,
  txReceiptText,
  verdictFormState,
} from "./views.js";

type Child = Node | string | null | undefined;

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | boolean> = {},
  ...children: Child[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "boolean") {
      // property, not attribute: disabled, checked, required
      (node as unknown as Record<string, boolean>)[key] = value;
    } else {
      node.setAttribute(key, value);
    }
  }
  for (const child of children) {
    if (child === null || child === undefined) {
      continue;
    }
    node.append(typeof child === "string" ? document.createTextNode(child) : child);
  }
  return node;
}

function section(title: string, ...children: Child[]): HTMLElement {
  return el("section", {}, el("h2", {}, title), ...children);
}

function errorBox(message: string | null): HTMLElement | null {
  return message ? el("p", { class: "error", role: "alert" }, message) : null;
}

function receiptBox(receipt: TxReceipt | null): HTMLElement | null {
  if (!receipt) {
    return null;
  }
  return el(
    "p",
    { class: "receipt" },
    txReceiptText(receipt),
    " ",
    el("a", { href: blockRoute(receipt.block_height), "data-nav": "1" },
      `view block ${receipt.block_height}`),
  );
}

// --- login -----------------------------------------------------------------

export interface LoginHandlers {
  onLogin(username: string, credential: string): void;
}

export function renderLogin(error: string | null, handlers: LoginHandlers): HTMLElement {
  const user = el("input", {
    id: "login-user", type: "text", autocomplete: "username",
    placeholder: "fact-checker id",
  });
  const credential = el("input", {
    id: "login-credential", type: "password", autocomplete: "current-password",
    placeholder: "credential",
  });
  const submit = el("button", { id: "login-submit", type: "submit" }, "Sign in");
  const form = el(
    "form",
    { id: "login-form" },
    el("h1", {}, "factledger"),
    el("p", {}, "Sign in to review flagged news and cast sealed votes."),
    el("label", { for: "login-user" }, "Username"),
    user,
    el("label", { for: "login-credential" }, "Credential"),
    credential,
    submit,
    errorBox(error),
  );
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    handlers.onLogin(user.value.trim(), credential.value);
  });
  return el("div", { class: "login-screen" }, form);
}

// --- vote queue --------------------------------------------------------------

export function renderQueue(data: {
  entries: QueueEntry[];
  threshold: number;
  error: string | null;
}): HTMLElement {
  const list = el("ul", { id: "queue-list" });
  for (const entry of data.entries) {
    list.append(
      el(
        "li",
        { class: entry.hot ? "queue-item hot" : "queue-item" },
        el("a", { href: newsRoute(entry.news_id), "data-nav": "1" }, entry.excerpt),
        el(
          "span",
          { class: "meta" },
          ` score ${fmtScore(entry.score)} / votes ${entry.vote_count}`,
        ),
      ),
    );
  }
  const empty =
    data.entries.length === 0
      ? el("p", { class: "empty" }, "Nothing waiting for your vote.")
      : null;
  return el(
    "div",
    {},
    section(`Vote queue (suspicious above ${data.threshold})`, errorBox(data.error), list, empty),
  );
}

// --- news detail -------------------------------------------------------------

export interface DetailHandlers {
  onVote(verdict: Verdict, rationale: string): void;
  onFinalize(): void;
}

export interface DetailState {
  detail: NewsDetail;
  votes: VoteView[] | null; // null when the viewer cannot list votes
  me: CheckerView | null;
  receipt: TxReceipt | null;
  error: string | null;
  busy: boolean;
}

export function renderDetail(state: DetailState, handlers: DetailHandlers): HTMLElement {
  const { detail } = state;
  const root = el("div", { class: "news-detail" });

  root.append(
    section(
      "News item",
      el("p", { class: "excerpt" }, detail.excerpt),
      el(
        "dl",
        { class: "metadata" },
        el("dt", {}, "status"),
        el("dd", { id: "news-status" }, statusLabel(detail)),
        el("dt", {}, "author"),
        el("dd", {}, detail.author ?? "unknown"),
        el("dt", {}, "platform"),
        el("dd", {}, detail.platform ?? "unknown"),
        el("dt", {}, "registered"),
        el(
          "dd",
          {},
          `block ${detail.register_block ?? "?"}, tx `,
          el("code", {}, shortId(detail.register_tx, 16)),
        ),
        el("dt", {}, "votes"),
        el("dd", { id: "vote-count" }, String(detail.vote_count)),
        el("dt", {}, "external repositories"),
        el(
          "dd",
          {},
          detail.external_match === null || detail.external_match === undefined
            ? "no external match"
            : JSON.stringify(detail.external_match),
        ),
      ),
    ),
  );

  root.append(renderScorePanel(detail));
  if (detail.status === "labeled" && detail.consensus) {
    root.append(renderRevealView(detail));
  }
  root.append(renderVoteForm(state, handlers));
  if (state.votes) {
    root.append(renderVotesList(state.votes));
  }
  if (state.me && state.me.role === "curator" && detail.status !== "labeled") {
    const btn = el("button", { id: "finalize-btn", type: "button" }, "Finalize consensus");
    btn.addEventListener("click", () => handlers.onFinalize());
    root.append(section("Curator", btn));
  }
  return root;
}

function renderScorePanel(detail: NewsDetail): HTMLElement {
  if (!detail.score) {
    return section(
      "AI evaluation",
      el("p", { id: "score-panel" }, "No propensity score for this item."),
    );
  }
  const lines = el("ul", { class: "cues" });
  for (const line of explanationLines(detail.score)) {
    lines.append(el("li", {}, line.detail));
  }
  return section(
    "AI evaluation",
    el(
      "p",
      { id: "score-panel" },
      "Falsehood propensity ",
      el("strong", { id: "score-value" }, fmtScore(detail.score.score)),
    ),
    el("p", { class: "explanation" }, detail.score.explanation),
    lines,
  );
}

function renderRevealView(detail: NewsDetail): HTMLElement {
  const consensus = detail.consensus!;
  const table = el("table", { id: "tally" });
  table.append(
    el("tr", {}, el("th", {}, "verdict"), el("th", {}, "weight")),
  );
  for (const row of tallyRows(consensus)) {
    table.append(
      el(
        "tr",
        { class: row.winner ? "winner" : "" },
        el("td", {}, row.verdict),
        el("td", {}, String(row.total)),
      ),
    );
  }
  const participants = el("ul", { class: "participants" });
  for (const p of consensus.participants) {
    participants.append(
      el(
        "li",
        {},
        `${p.checker_id}: ${p.verdict} (weight ${p.weight}, ` +
          `${p.aligned ? "aligned" : "not aligned"})`,
      ),
    );
  }
  const excluded =
    consensus.excluded.length > 0
      ? el(
          "ul",
          { class: "excluded" },
          ...consensus.excluded.map((x) =>
            el("li", {}, `${x.checker_id} excluded: ${x.reason}`),
          ),
        )
      : null;
  return el(
    "section",
    { id: "reveal-view" },
    el("h2", {}, "Consensus reveal"),
    el("p", {}, "Final verdict: ", el("strong", { id: "final-verdict" }, consensus.verdict)),
    table,
    participants,
    excluded,
    detail.label_block !== undefined
      ? el(
          "p",
          {},
          "Sealed in ",
          el(
            "a",
            {
              id: "label-block-link",
              href: blockRoute(detail.label_block),
              "data-nav": "1",
            },
            `block ${detail.label_block}`,
          ),
        )
      : null,
  );
}

function renderVoteForm(state: DetailState, handlers: DetailHandlers): HTMLElement {
  const myVote = state.votes?.find(
    (v) => state.me && v.checker_id === state.me.checker_id,
  );
  const formState = verdictFormState(state.detail, myVote);
  const disabled = formState.disabled || state.busy;

  const radios: HTMLInputElement[] = [];
  const choices = el("div", { class: "verdict-choices" });
  for (const verdict of VERDICTS) {
    const input = el("input", {
      type: "radio",
      name: "verdict",
      id: `verdict-${verdict.toLowerCase()}`,
      value: verdict,
      disabled,
    });
    radios.push(input);
    choices.append(el("label", { for: input.id }, input, verdict));
  }
  const rationale = el("textarea", {
    id: "vote-rationale",
    placeholder: "Why? Cite sources where possible.",
    disabled,
  });
  const submit = el(
    "button",
    { id: "vote-submit", type: "submit", disabled },
    state.busy ? "Waiting for commit…" : "Cast sealed vote",
  );
  const form = el(
    "form",
    { id: "vote-form" },
    choices,
    rationale,
    submit,
    formState.reason
      ? el("p", { id: "vote-disabled-reason", class: "muted" }, formState.reason)
      : null,
    errorBox(state.error),
    receiptBox(state.receipt),
  );
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const picked = radios.find((r) => r.checked);
    if (!picked) {
      return;
    }
    handlers.onVote(picked.value as Verdict, rationale.value);
  });
  return section("Your verdict", form);
}

function renderVotesList(votes: VoteView[]): HTMLElement {
  const list = el("ul", { id: "votes-list" });
  for (const vote of votes) {
    if (vote.revealed) {
      list.append(
        el(
          "li",
          { class: "vote revealed" },
          el("strong", {}, vote.checker_id),
          ` voted ${vote.verdict}: ${vote.rationale ?? ""} `,
          el("span", { class: "meta" }, `(block ${vote.cast_block ?? "?"})`),
        ),
      );
    } else {
      // sealed: only the commitment digest is public
      list.append(
        el(
          "li",
          { class: "vote sealed" },
          el("strong", {}, vote.checker_id),
          " voted (sealed) ",
          el("code", {}, shortId(vote.commitment, 16)),
          el("span", { class: "meta" }, ` (block ${vote.cast_block ?? "?"})`),
        ),
      );
    }
  }
  return section("Votes", list);
}

// --- curator admin -------------------------------------------------------------

export interface AdminHandlers {
  onCreate(checkerId: string, displayName: string, credential: string, role: string): void;
  onDeactivate(checkerId: string): void;
}

export function renderAdmin(
  data: {
    me: CheckerView | null;
    checkers: CheckerView[];
    receipt: TxReceipt | null;
    error: string | null;
  },
  handlers: AdminHandlers,
): HTMLElement {
  if (!data.me || data.me.role !== "curator") {
    return el(
      "div",
      { id: "access-denied" },
      el("h2", {}, "Curators only"),
      el("p", {}, "This screen requires the curator role."),
    );
  }

  const idInput = el("input", { id: "new-checker-id", placeholder: "checker id" });
  const nameInput = el("input", { id: "new-checker-name", placeholder: "display name" });
  const credInput = el("input", {
    id: "new-checker-credential", type: "password", placeholder: "credential",
  });
  const roleSelect = el(
    "select",
    { id: "new-checker-role" },
    el("option", { value: "checker" }, "fact checker"),
    el("option", { value: "curator" }, "curator"),
  );
  const createBtn = el("button", { id: "create-checker-btn", type: "submit" }, "Approve");
  const form = el(
    "form",
    { id: "create-checker-form" },
    idInput, nameInput, credInput, roleSelect, createBtn,
  );
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    handlers.onCreate(
      idInput.value.trim(), nameInput.value.trim(), credInput.value, roleSelect.value,
    );
  });

  const table = el("table", { id: "checker-table" });
  table.append(
    el(
      "tr",
      {},
      el("th", {}, "id"),
      el("th", {}, "name"),
      el("th", {}, "role"),
      el("th", {}, "credibility"),
      el("th", {}, "tokens"),
      el("th", {}, "state"),
      el("th", {}, ""),
    ),
  );
  for (const checker of data.checkers) {
    const state = checker.active
      ? checker.flagged ? "active, flagged" : "active"
      : "deactivated";
    const row = el(
      "tr",
      { class: checker.active ? "" : "inactive" },
      el("td", {}, checker.checker_id),
      el("td", {}, checker.display_name),
      el("td", {}, checker.role),
      el("td", {}, fmtCredibility(checker.credibility)),
      el("td", {}, String(checker.token_balance)),
      el("td", {}, state),
    );
    const cell = el("td", {});
    if (checker.active && checker.checker_id !== data.me.checker_id) {
      const btn = el(
        "button",
        { type: "button", "data-deactivate": checker.checker_id },
        "Deactivate",
      );
      btn.addEventListener("click", () => handlers.onDeactivate(checker.checker_id));
      cell.append(btn);
    }
    row.append(cell);
    table.append(row);
  }

  return el(
    "div",
    {},
    section("Approve a fact-checker", form),
    section("Fact-checkers", errorBox(data.error), receiptBox(data.receipt), table),
  );
}

// --- platform overview -----------------------------------------------------------

export function renderOverview(data: {
  dashboard: DashboardSummary;
  rewards: RewardsResponse | null;
  verify: VerifyResult;
}): HTMLElement {
  const d = data.dashboard;
  const cards = el(
    "dl",
    { class: "cards" },
    el("dt", {}, "registered news"),
    el("dd", { id: "card-total-news" }, String(d.total_news)),
    el("dt", {}, "labeled on chain"),
    el("dd", { id: "card-total-on-chain" }, String(d.total_on_chain)),
    el("dt", {}, "AI evaluated"),
    el("dd", { id: "card-ai-evaluated" }, String(d.ai_evaluated)),
    el("dt", {}, "awaiting evaluation"),
    el("dd", { id: "card-awaiting" }, String(d.awaiting_evaluation)),
    el("dt", {}, "suspicious open"),
    el("dd", { id: "card-suspicious" }, String(d.suspicious_open)),
    el("dt", {}, "tokens minted"),
    el("dd", { id: "card-tokens" }, String(d.tokens_minted)),
    el("dt", {}, "chain height"),
    el("dd", { id: "card-height" }, String(d.chain_height)),
  );
  const verdicts = el(
    "p",
    { id: "verdict-totals" },
    `verdicts so far: True ${d.verdicts.True}, False ${d.verdicts.False}, ` +
      `Partial ${d.verdicts.Partial}`,
  );
  const verify = el(
    "p",
    { id: "chain-verify", class: data.verify.ok ? "ok" : "error" },
    data.verify.ok
      ? `chain verified: ${data.verify.blocks_checked} blocks intact`
      : `chain verification FAILED at block ${data.verify.first_bad_height}: ` +
        `${data.verify.reason}`,
  );
  const rewards = data.rewards
    ? el(
        "p",
        { id: "rewards-total" },
        `${data.rewards.total} tokens paid out at ` +
          `${data.rewards.reward_per_aligned_vote} per aligned vote`,
      )
    : null;
  return el("div", {}, section("Platform overview", cards, verdicts, verify, rewards));
}

// --- block view ---------------------------------------------------------------

export function renderBlock(block: BlockView): HTMLElement {
  const table = el("table", { id: "block-txs" });
  table.append(
    el(
      "tr",
      {},
      el("th", {}, "tx"),
      el("th", {}, "operation"),
      el("th", {}, "submitter"),
      el("th", {}, "validity"),
    ),
  );
  for (const tx of block.tx_list) {
    table.append(
      el(
        "tr",
        { class: tx.validity === "valid" ? "" : "invalid" },
        el("td", {}, el("code", {}, shortId(tx.tx_id, 16))),
        el("td", {}, tx.operation),
        el("td", {}, tx.submitter),
        el("td", {}, tx.validity),
      ),
    );
  }
  return el(
    "div",
    {},
    section(
      `Block ${block.height}`,
      el(
        "dl",
        { class: "metadata" },
        el("dt", {}, "hash"),
        el("dd", {}, el("code", { id: "block-hash" }, block.block_hash)),
        el("dt", {}, "previous"),
        el("dd", {}, el("code", {}, block.prev_hash)),
        el("dt", {}, "transactions"),
        el("dd", {}, String(block.tx_list.length)),
      ),
      table,
    ),
  );
}

// --- shell -----------------------------------------------------------------

export interface ShellHandlers {
  onLogout(): void;
}

export function renderShell(
  me: CheckerView | null,
  active: string,
  handlers: ShellHandlers,
): HTMLElement {
  const nav = el("nav", {});
  const links: [string, string][] = [
    ["#/queue", "Queue"],
    ["#/overview", "Overview"],
  ];
  if (me && me.role === "curator") {
    links.push(["#/admin", "Fact-checkers"]);
  }
  for (const [href, label] of links) {
    nav.append(
      el(
        "a",
        { href, "data-nav": "1", class: href === active ? "active" : "" },
        label,
      ),
    );
  }
  const logout = el("button", { id: "logout-btn", type: "button" }, "Sign out");
  logout.addEventListener("click", () => handlers.onLogout());
  const who = me
    ? el(
        "span",
        { id: "whoami" },
        `${me.display_name} (${me.role}, credibility ${fmtCredibility(me.credibility)})`,
      )
    : null;
  return el("header", {}, el("strong", {}, "factledger"), nav, who, logout);
}
