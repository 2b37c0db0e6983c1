/* Application shell: session handling, hash routing, polling.
 *
 * All state lives on the server; every screen re-renders from a fresh API
 * response. The poll loop (default 5 s) refreshes the current screen so
 * sealed votes, quorum progress and reveals show up without a reload.
 * Votes are never applied optimistically: the form stays busy until the
 * server has committed the transaction and returned its location.
 */

import {
  ApiClient,
  ApiError,
  CheckerView,
  FetchLike,
  TxReceipt,
  Verdict,
} from "./api.js";
import {
  renderAdmin,
  renderBlock,
  renderDetail,
  renderLogin,
  renderOverview,
  renderQueue,
  renderShell,
} from "./dom.js";
import { Route, errorText, parseRoute, queueEntries } from "./views.js";

export interface AppConfig {
  apiBase: string;
  pollMs: number;
  fetchFn?: FetchLike;
}

const SESSION_KEY = "factledger.session";

interface StoredSession {
  token: string;
  checker: CheckerView;
}

function readMeta(name: string): string | null {
  const tag = document.querySelector(`meta[name="${name}"]`);
  return tag ? tag.getAttribute("content") : null;
}

function defaultConfig(): AppConfig {
  return {
    apiBase: readMeta("factledger-api-base") ?? "",
    pollMs: Number(readMeta("factledger-poll-ms") ?? "") || 5000,
  };
}

export class App {
  readonly client: ApiClient;
  private readonly config: AppConfig;
  private me: CheckerView | null = null;
  private renderSeq = 0;
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private busy = false;
  private lastError: string | null = null;
  private lastReceipt: TxReceipt | null = null;

  constructor(private root: HTMLElement, config?: Partial<AppConfig>) {
    this.config = { ...defaultConfig(), ...config };
    this.client = new ApiClient({
      baseUrl: this.config.apiBase,
      fetchFn: this.config.fetchFn,
    });
    this.restoreSession();
  }

  start(): void {
    document.addEventListener("click", (event) => {
      const target = (event.target as HTMLElement).closest?.("a[data-nav]");
      if (target) {
        event.preventDefault();
        this.navigate(target.getAttribute("href") ?? "#/queue");
      }
    });
    window.addEventListener("hashchange", () => void this.refresh());
    this.pollTimer = setInterval(() => void this.refresh(true), this.config.pollMs);
    void this.refresh();
  }

  stop(): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }

  navigate(hash: string): void {
    // clear one-shot banners when the user moves to another screen
    this.lastError = null;
    this.lastReceipt = null;
    if (window.location.hash !== hash) {
      window.location.hash = hash;
    }
    void this.refresh();
  }

  // --- session -----------------------------------------------------------------

  private restoreSession(): void {
    try {
      const raw = window.sessionStorage.getItem(SESSION_KEY);
      if (raw) {
        const stored = JSON.parse(raw) as StoredSession;
        this.client.setToken(stored.token);
        this.me = stored.checker;
      }
    } catch {
      window.sessionStorage.removeItem(SESSION_KEY);
    }
  }

  private saveSession(token: string, checker: CheckerView): void {
    this.me = checker;
    window.sessionStorage.setItem(
      SESSION_KEY,
      JSON.stringify({ token, checker }),
    );
  }

  private clearSession(): void {
    this.me = null;
    this.client.logout();
    window.sessionStorage.removeItem(SESSION_KEY);
  }

  // --- rendering ---------------------------------------------------------------

  async refresh(fromPoll = false): Promise<void> {
    const seq = ++this.renderSeq;
    const route = this.me ? parseRoute(window.location.hash) : { name: "login" as const };
    try {
      const screen = await this.buildScreen(route);
      if (seq !== this.renderSeq) {
        return; // a newer render finished first; drop this one
      }
      this.present(route, screen);
    } catch (err) {
      if (seq !== this.renderSeq) {
        return;
      }
      if (err instanceof ApiError && err.status === 401 && this.me) {
        // session expired or token revoked: back to the login screen
        this.clearSession();
        this.lastError = errorText(err);
        void this.refresh();
        return;
      }
      if (fromPoll) {
        return; // keep the last good screen; the next poll may recover
      }
      this.present(route, renderQueue({ entries: [], threshold: 0, error: errorText(err) }));
    }
  }

  private present(route: Route, screen: HTMLElement): void {
    const preserved = this.captureFormState();
    this.root.replaceChildren();
    if (this.me) {
      this.root.append(
        renderShell(this.me, `#/${route.name}`, { onLogout: () => this.logout() }),
      );
    }
    this.root.append(screen);
    this.restoreFormState(preserved);
  }

  /* Polling re-renders the screen underneath the user; carry over any
   * half-typed vote so the refresh is invisible. */
  private captureFormState(): { rationale: string; verdict: string | null } | null {
    const rationale = this.root.querySelector<HTMLTextAreaElement>("#vote-rationale");
    if (!rationale || rationale.disabled) {
      return null;
    }
    const picked = this.root.querySelector<HTMLInputElement>(
      "input[name=verdict]:checked",
    );
    return { rationale: rationale.value, verdict: picked ? picked.value : null };
  }

  private restoreFormState(
    state: { rationale: string; verdict: string | null } | null,
  ): void {
    if (!state) {
      return;
    }
    const rationale = this.root.querySelector<HTMLTextAreaElement>("#vote-rationale");
    if (rationale && !rationale.disabled && rationale.value === "") {
      rationale.value = state.rationale;
    }
    if (state.verdict) {
      const radio = this.root.querySelector<HTMLInputElement>(
        `input[name=verdict][value="${state.verdict}"]`,
      );
      if (radio && !radio.disabled) {
        radio.checked = true;
      }
    }
  }

  private async buildScreen(route: Route): Promise<HTMLElement> {
    switch (route.name) {
      case "login":
        return renderLogin(this.lastError, {
          onLogin: (username, credential) => void this.login(username, credential),
        });
      case "queue": {
        const [notifications, suspicious] = await Promise.all([
          this.client.notifications(),
          this.client.suspicious(),
        ]);
        return renderQueue({
          entries: queueEntries(
            notifications.notifications, suspicious.news, suspicious.threshold,
          ),
          threshold: suspicious.threshold,
          error: this.lastError,
        });
      }
      case "news": {
        const newsId = route.id!;
        const [detail, votes] = await Promise.all([
          this.client.checkNews(newsId),
          this.client.votesFor(newsId).then(
            (r) => r.votes,
            () => null, // vote listing needs a session; detail page works without
          ),
        ]);
        return renderDetail(
          {
            detail,
            votes,
            me: this.me,
            receipt: this.lastReceipt,
            error: this.lastError,
            busy: this.busy,
          },
          {
            onVote: (verdict, rationale) => void this.castVote(newsId, verdict, rationale),
            onFinalize: () => void this.finalize(newsId),
          },
        );
      }
      case "admin": {
        if (!this.me || this.me.role !== "curator") {
          return renderAdmin(
            { me: this.me, checkers: [], receipt: null, error: null },
            { onCreate: () => undefined, onDeactivate: () => undefined },
          );
        }
        const checkers = await this.client.listCheckers();
        return renderAdmin(
          {
            me: this.me,
            checkers: checkers.checkers,
            receipt: this.lastReceipt,
            error: this.lastError,
          },
          {
            onCreate: (id, name, credential, role) =>
              void this.createChecker(id, name, credential, role),
            onDeactivate: (id) => void this.deactivateChecker(id),
          },
        );
      }
      case "overview": {
        const [dashboard, verify, rewards] = await Promise.all([
          this.client.dashboard(),
          this.client.verifyChain(),
          this.client.rewardsTotal().then(
            (r) => r,
            () => null, // rewards need a session; the overview itself is public
          ),
        ]);
        return renderOverview({ dashboard, rewards, verify });
      }
      case "block": {
        const block = await this.client.block(route.height!);
        return renderBlock(block);
      }
    }
  }

  // --- actions ---------------------------------------------------------------

  private async login(username: string, credential: string): Promise<void> {
    try {
      const out = await this.client.login(username, credential);
      this.saveSession(out.token, out.checker);
      this.lastError = null;
      this.navigate("#/queue");
    } catch (err) {
      this.lastError = errorText(err);
      await this.refresh();
    }
  }

  private logout(): void {
    this.clearSession();
    this.navigate("#/login");
  }

  private async castVote(
    newsId: string,
    verdict: Verdict,
    rationale: string,
  ): Promise<void> {
    this.busy = true;
    this.lastError = null;
    await this.refresh(); // lock the form while the transaction commits
    try {
      const out = await this.client.castVote(newsId, verdict, rationale);
      this.lastReceipt = out;
    } catch (err) {
      this.lastError = errorText(err);
    } finally {
      this.busy = false;
    }
    await this.refresh();
  }

  private async finalize(newsId: string): Promise<void> {
    try {
      this.lastReceipt = await this.client.finalize(newsId);
      this.lastError = null;
    } catch (err) {
      this.lastError = errorText(err);
    }
    await this.refresh();
  }

  private async createChecker(
    checkerId: string,
    displayName: string,
    credential: string,
    role: string,
  ): Promise<void> {
    try {
      this.lastReceipt = await this.client.createChecker({
        checker_id: checkerId,
        display_name: displayName,
        credential,
        role: role as "checker" | "curator",
      });
      this.lastError = null;
    } catch (err) {
      this.lastError = errorText(err);
    }
    await this.refresh();
  }

  private async deactivateChecker(checkerId: string): Promise<void> {
    try {
      this.lastReceipt = await this.client.deactivateChecker(checkerId);
      this.lastError = null;
    } catch (err) {
      this.lastError = errorText(err);
    }
    await this.refresh();
  }
}

export function startApp(root: HTMLElement, config?: Partial<AppConfig>): App {
  const app = new App(root, config);
  app.start();
  return app;
}

function autostart(): void {
  const root = document.getElementById("app");
  if (root) {
    startApp(root);
  }
}

/* Tests construct the app themselves; the flag keeps module import free
 * of side effects there. */
const noAutostart =
  (globalThis as unknown as Record<string, boolean>).__FACTLEDGER_NO_AUTOSTART__;

if (typeof document !== "undefined" && !noAutostart) {
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", autostart);
  } else {
    autostart();
  }
}
