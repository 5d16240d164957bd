import type { AnswerPayload, Interpretation, SlotEdits } from "./api.js";

export type Phase = "composing" | "confirming" | "reading";
export type SlotName = "policy" | "standard" | "subject";

export const SLOT_NAMES: readonly SlotName[] = ["policy", "standard", "subject"];

export interface TranscriptEntry {
  role: "user" | "assistant";
  content: string;
}

export class PhaseError extends Error {}

/**
 * Client-side mirror of one server session.
 *
 * composing maps to the server's idle/answered states, confirming to
 * awaiting_confirmation, reading to the moment an answer has arrived.
 * Slot edits are staged here and only leave the browser when the
 * confirm payload is built.
 */
export class SessionState {
  phase: Phase = "composing";
  sessionId: string | null = null;
  interpretation: Interpretation | null = null;
  answer: AnswerPayload | null = null;

  private edits: SlotEdits = {};
  private readonly transcript: TranscriptEntry[] = [];
  private readonly listeners: Array<(phase: Phase) => void> = [];

  onPhaseChange(listener: (phase: Phase) => void): void {
    this.listeners.push(listener);
  }

  get messages(): readonly TranscriptEntry[] {
    return this.transcript;
  }

  private moveTo(phase: Phase): void {
    this.phase = phase;
    for (const listener of this.listeners) listener(phase);
  }

  /** A query was sent and the server replied with its interpretation. */
  beginConfirming(sessionId: string, question: string, interpretation: Interpretation): void {
    if (this.phase === "confirming") {
      throw new PhaseError("already awaiting confirmation");
    }
    this.sessionId = sessionId;
    this.interpretation = interpretation;
    this.answer = null;
    this.edits = {};
    this.transcript.push({ role: "user", content: question });
    this.moveTo("confirming");
  }

  /**
   * Stage one slot value locally. Values equal to the interpreted one
   * (after trimming) are unstaged so the confirm payload only carries
   * real changes; an empty string clears the slot.
   */
  stageEdit(slot: SlotName, value: string): void {
    if (this.phase !== "confirming" || !this.interpretation) {
      throw new PhaseError("no interpretation to edit");
    }
    const trimmed = value.trim();
    const current = this.interpretation[slot];
    if (trimmed === (current ?? "")) {
      delete this.edits[slot];
    } else {
      this.edits[slot] = trimmed === "" ? null : trimmed;
    }
  }

  /** What the confirm endpoint should receive: changed slots only. */
  confirmPayload(): SlotEdits {
    if (this.phase !== "confirming") {
      throw new PhaseError("confirm is only valid while confirming");
    }
    return { ...this.edits };
  }

  /** The confirm round-trip succeeded. */
  finishReading(interpretation: Interpretation, answer: AnswerPayload): void {
    if (this.phase !== "confirming") {
      throw new PhaseError("no confirmation in flight");
    }
    this.interpretation = interpretation;
    this.answer = answer;
    this.edits = {};
    this.transcript.push({ role: "assistant", content: answer.markdown });
    this.moveTo("reading");
  }

  /**
   * Abandon the pending confirmation. The server session stays in
   * awaiting_confirmation, so it is dropped and the next question opens
   * a fresh one.
   */
  cancel(): void {
    if (this.phase !== "confirming") {
      throw new PhaseError("nothing to cancel");
    }
    this.sessionId = null;
    this.interpretation = null;
    this.edits = {};
    this.moveTo("composing");
  }
}
