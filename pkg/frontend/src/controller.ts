import { ApiClient, ApiError } from "./api.js";
import type { CorpusSummary } from "./api.js";
import { SessionState } from "./state.js";
import type { SlotName } from "./state.js";
import {
  renderAnswer,
  renderConfirmationCard,
  renderCorpusBrowser,
  renderRetryBanner,
} from "./views.js";

/**
 * Glue between the page, the session state machine, and the API client.
 *
 * One controller drives one browser tab, which maps to one server
 * session at a time. At most one API call is in flight; actions taken
 * while busy are dropped. Confirm is only ever sent while the state
 * machine is in the confirming phase.
 */
export class Controller {
  readonly state = new SessionState();
  private readonly docTitles = new Map<string, string>();
  private current: Promise<void> | null = null;

  private corpusSlot!: HTMLElement;
  private transcriptEl!: HTMLElement;
  private cardSlot!: HTMLElement;
  private composerInput!: HTMLInputElement;
  private statusEl!: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {}

  /** Resolves when the in-flight API call, if any, has finished. */
  settled(): Promise<void> {
    return this.current ?? Promise.resolve();
  }

  mount(): Promise<void> {
    this.root.innerHTML = "";
    this.corpusSlot = document.createElement("aside");
    this.corpusSlot.className = "corpus-slot";
    this.transcriptEl = document.createElement("main");
    this.transcriptEl.className = "transcript";
    this.cardSlot = document.createElement("div");
    this.cardSlot.className = "card-slot";
    this.statusEl = document.createElement("div");
    this.statusEl.className = "status";

    const composer = document.createElement("form");
    composer.className = "composer";
    this.composerInput = document.createElement("input");
    this.composerInput.className = "composer-input";
    this.composerInput.placeholder = "Ask a compliance question";
    const ask = document.createElement("button");
    ask.type = "submit";
    ask.className = "ask-button";
    ask.textContent = "Ask";
    composer.append(this.composerInput, ask);
    composer.addEventListener("submit", (event) => {
      event.preventDefault();
      this.submitQuery(this.composerInput.value);
    });

    this.root.append(this.corpusSlot, this.transcriptEl, this.cardSlot, composer, this.statusEl);
    return this.refreshCorpus();
  }

  refreshCorpus(): Promise<void> {
    return this.run(async () => {
      let summary: CorpusSummary;
      try {
        summary = await this.api.listDocuments();
      } catch (err) {
        this.corpusSlot.innerHTML = "";
        this.corpusSlot.appendChild(
          renderRetryBanner(describe(err), () => this.refreshCorpus()),
        );
        return;
      }
      this.docTitles.clear();
      for (const doc of summary.documents) this.docTitles.set(doc.doc_id, doc.title);
      this.corpusSlot.innerHTML = "";
      this.corpusSlot.appendChild(renderCorpusBrowser(summary));
    });
  }

  submitQuery(text: string): Promise<void> {
    const question = text.trim();
    if (question === "" || this.state.phase === "confirming") {
      return this.settled();
    }
    return this.run(async () => {
      this.setStatus("interpreting…");
      try {
        const sessionId = this.state.sessionId ?? (await this.api.createSession()).session_id;
        const reply = await this.api.submitQuery(sessionId, question);
        this.state.beginConfirming(sessionId, question, reply.interpretation);
        this.appendBubble("user", question);
        this.composerInput.value = "";
        this.renderCard();
        this.setStatus("");
      } catch (err) {
        this.setStatus(describe(err));
      }
    });
  }

  confirmPending(): Promise<void> {
    if (this.state.phase !== "confirming") {
      return this.settled();
    }
    return this.run(async () => {
      const sessionId = this.state.sessionId;
      if (!sessionId) return;
      this.setStatus("retrieving…");
      try {
        const reply = await this.api.confirm(sessionId, this.state.confirmPayload());
        this.state.finishReading(reply.interpretation, reply.answer);
        this.cardSlot.innerHTML = "";
        this.transcriptEl.appendChild(
          renderAnswer(reply.answer, { docTitles: this.docTitles }),
        );
        this.setStatus("");
      } catch (err) {
        // ALL_SLOTS_EMPTY leaves the server session confirmable, so the
        // card stays up for another round; other failures also keep it.
        this.setStatus(describe(err));
      }
    });
  }

  cancelPending(): void {
    if (this.state.phase !== "confirming") return;
    this.state.cancel();
    this.cardSlot.innerHTML = "";
    this.setStatus("");
  }

  stageEdit(slot: SlotName, value: string): void {
    this.state.stageEdit(slot, value);
  }

  private renderCard(): void {
    if (!this.state.interpretation) return;
    this.cardSlot.innerHTML = "";
    this.cardSlot.appendChild(
      renderConfirmationCard(this.state.interpretation, {
        onEdit: (slot, value) => this.stageEdit(slot, value),
        onConfirm: () => this.confirmPending(),
        onCancel: () => this.cancelPending(),
      }),
    );
  }

  private appendBubble(role: "user" | "assistant", content: string): void {
    const bubble = document.createElement("p");
    bubble.className = `bubble bubble-${role}`;
    bubble.textContent = content;
    this.transcriptEl.appendChild(bubble);
  }

  private setStatus(message: string): void {
    this.statusEl.textContent = message;
  }

  private run(task: () => Promise<void>): Promise<void> {
    if (this.current) return this.current;
    const done = task().finally(() => {
      this.current = null;
    });
    this.current = done;
    return done;
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return err.status > 0 ? `${err.errorCode}: ${err.message}` : `network error: ${err.message}`;
  }
  return err instanceof Error ? err.message : String(err);
}
