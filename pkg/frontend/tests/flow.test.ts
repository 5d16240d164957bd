import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { Controller } from "../src/controller.js";
import type { RouteHandler } from "./helpers.js";
import {
  answerFixture,
  corpusFixture,
  interpretationFixture,
  scriptedFetch,
} from "./helpers.js";

const QUESTION = "Does the password policy apply to device X?";

function defaultRoutes(): Record<string, RouteHandler> {
  let nextSession = 1;
  return {
    "GET /v1/documents": () => ({ payload: corpusFixture(1) }),
    "POST /v1/sessions": () => ({
      status: 201,
      payload: { session_id: `s-${nextSession++}`, state: "idle" },
    }),
    "POST /v1/sessions/[^/]+/query": () => ({
      payload: {
        session_id: "s-1",
        state: "awaiting_confirmation",
        interpretation: interpretationFixture(),
      },
    }),
    "POST /v1/sessions/[^/]+/confirm": () => ({
      payload: {
        session_id: "s-1",
        state: "answered",
        interpretation: interpretationFixture({ subject: "device Y", status: "confirmed" }),
        answer: answerFixture(3),
      },
    }),
  };
}

function mountPage(routes: Record<string, RouteHandler> = defaultRoutes()) {
  const { fetchFn, calls } = scriptedFetch(routes);
  const root = document.createElement("div");
  document.body.appendChild(root);
  const controller = new Controller(
    root,
    new ApiClient({ baseUrl: "http://api.test", fetchFn }),
  );
  return { controller, root, calls };
}

function submitComposer(root: HTMLElement, text: string): void {
  const input = root.querySelector<HTMLInputElement>(".composer-input")!;
  input.value = text;
  root
    .querySelector<HTMLFormElement>("form.composer")!
    .dispatchEvent(new Event("submit", { cancelable: true }));
}

function submitCard(root: HTMLElement): void {
  root
    .querySelector<HTMLFormElement>("form.confirmation-card")!
    .dispatchEvent(new Event("submit", { cancelable: true }));
}

describe("confirmation round-trip", () => {
  it("carries an edited subject in the confirm body and walks the phases in order", async () => {
    const { controller, root, calls } = mountPage();
    const phases: string[] = [controller.state.phase];
    controller.state.onPhaseChange((phase) => phases.push(phase));
    await controller.mount();

    submitComposer(root, QUESTION);
    await controller.settled();
    expect(controller.state.phase).toBe("confirming");

    const subject = root.querySelector<HTMLInputElement>('input[name="subject"]')!;
    expect(subject.value).toBe("");
    expect(subject.placeholder).toBe("not detected");
    subject.value = "device Y";
    subject.dispatchEvent(new Event("input"));

    submitCard(root);
    await controller.settled();
    expect(controller.state.phase).toBe("reading");

    const confirm = calls.find((c) => c.path === "/v1/sessions/s-1/confirm")!;
    expect(confirm.body).toEqual({ subject: "device Y" });
    expect(phases).toEqual(["composing", "confirming", "reading"]);

    expect(root.querySelectorAll(".transcript a.citation-marker").length).toBe(3);
    expect(root.querySelector(".card-slot")!.children.length).toBe(0);
  });

  it("sends untouched slots nowhere: an unedited confirm has an empty body", async () => {
    const { controller, root, calls } = mountPage();
    await controller.mount();
    submitComposer(root, QUESTION);
    await controller.settled();
    submitCard(root);
    await controller.settled();
    const confirm = calls.find((c) => c.path.endsWith("/confirm"))!;
    expect(confirm.body).toEqual({});
  });

  it("never sends confirm outside the confirming phase", async () => {
    const { controller, calls } = mountPage();
    await controller.mount();
    await controller.confirmPending();
    expect(calls.filter((c) => c.path.endsWith("/confirm")).length).toBe(0);
  });

  it("drops a second submit while a call is in flight", async () => {
    const { controller, root, calls } = mountPage();
    await controller.mount();
    submitComposer(root, QUESTION);
    submitComposer(root, "second question fired too early");
    await controller.settled();
    expect(calls.filter((c) => c.path.endsWith("/query")).length).toBe(1);
  });

  it("reuses the session for a follow-up question after reading", async () => {
    const { controller, root, calls } = mountPage();
    await controller.mount();
    submitComposer(root, QUESTION);
    await controller.settled();
    submitCard(root);
    await controller.settled();
    submitComposer(root, "And for device Y?");
    await controller.settled();
    expect(controller.state.phase).toBe("confirming");
    expect(calls.filter((c) => c.path === "/v1/sessions").length).toBe(1);
  });

  it("cancel abandons the server session; the next question opens a new one", async () => {
    const { controller, root, calls } = mountPage();
    await controller.mount();
    submitComposer(root, QUESTION);
    await controller.settled();
    root.querySelector<HTMLButtonElement>(".cancel-button")!.click();
    expect(controller.state.phase).toBe("composing");
    expect(root.querySelector(".card-slot")!.children.length).toBe(0);
    submitComposer(root, QUESTION);
    await controller.settled();
    expect(calls.filter((c) => c.path === "/v1/sessions").length).toBe(2);
    expect(calls.at(-1)!.path).toBe("/v1/sessions/s-2/query");
  });

  it("keeps the card up when the server rejects an all-empty confirm", async () => {
    const routes = defaultRoutes();
    routes["POST /v1/sessions/[^/]+/confirm"] = () => ({
      status: 422,
      payload: { error_code: "ALL_SLOTS_EMPTY", message: "at least one slot must be set" },
    });
    const { controller, root } = mountPage(routes);
    await controller.mount();
    submitComposer(root, QUESTION);
    await controller.settled();
    submitCard(root);
    await controller.settled();
    expect(controller.state.phase).toBe("confirming");
    expect(root.querySelector("form.confirmation-card")).not.toBeNull();
    expect(root.querySelector(".status")!.textContent).toContain("ALL_SLOTS_EMPTY");
  });
});

describe("corpus browser wiring", () => {
  it("shows a retry banner on fetch failure and recovers on retry", async () => {
    const routes = defaultRoutes();
    let failures = 1;
    routes["GET /v1/documents"] = () => {
      if (failures > 0) {
        failures--;
        throw new Error("connection refused");
      }
      return { payload: corpusFixture(1) };
    };
    const { controller, root } = mountPage(routes);
    await controller.mount();
    expect(root.querySelector(".retry-banner")).not.toBeNull();
    root.querySelector<HTMLButtonElement>(".retry-button")!.click();
    await controller.settled();
    expect(root.querySelector(".retry-banner")).toBeNull();
    expect(root.querySelectorAll(".corpus-row").length).toBe(1);
  });
});
