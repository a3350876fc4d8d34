/** Chat panel: instruction transcript, follow-up prompts, the compose
 * box, and the error banner with its retry affordance. */

import type { ConsoleController } from "./controller.js";
import type { ConsoleState } from "./store.js";

export class ChatPanel {
  readonly root: HTMLElement;
  private readonly log: HTMLElement;
  private readonly bannerBox: HTMLElement;
  private readonly input: HTMLInputElement;
  private readonly sendButton: HTMLButtonElement;
  private state: ConsoleState | null = null;

  constructor(
    container: HTMLElement,
    private readonly controller: ConsoleController,
  ) {
    const doc = container.ownerDocument;
    this.root = doc.createElement("section");
    this.root.className = "chat-panel";

    this.log = doc.createElement("div");
    this.log.className = "chat-log";
    this.root.appendChild(this.log);

    this.bannerBox = doc.createElement("div");
    this.bannerBox.className = "chat-banner";
    this.root.appendChild(this.bannerBox);

    const compose = doc.createElement("form");
    compose.className = "chat-compose";
    this.input = doc.createElement("input");
    this.input.type = "text";
    this.input.placeholder = "Describe the mission...";
    this.input.setAttribute("aria-label", "mission instruction");
    this.sendButton = doc.createElement("button");
    this.sendButton.type = "submit";
    this.sendButton.textContent = "Send";
    compose.appendChild(this.input);
    compose.appendChild(this.sendButton);
    this.root.appendChild(compose);

    this.input.addEventListener("input", () => this.syncSendButton());
    compose.addEventListener("submit", (event) => {
      event.preventDefault();
      this.submit();
    });

    container.appendChild(this.root);
  }

  render(state: ConsoleState): void {
    this.state = state;
    const doc = this.root.ownerDocument;

    while (this.log.firstChild) {
      this.log.removeChild(this.log.firstChild);
    }
    for (const entry of state.transcript) {
      const line = doc.createElement("div");
      line.className = `chat-entry chat-${entry.who}`;
      line.textContent = entry.text;
      this.log.appendChild(line);
    }
    this.log.scrollTop = this.log.scrollHeight;

    while (this.bannerBox.firstChild) {
      this.bannerBox.removeChild(this.bannerBox.firstChild);
    }
    if (state.banner !== null) {
      const banner = doc.createElement("div");
      banner.className = `banner banner-${state.banner.kind}`;
      banner.setAttribute("role", "alert");
      const text = doc.createElement("span");
      text.textContent = state.banner.text;
      banner.appendChild(text);
      if (state.banner.kind === "retry") {
        const retry = doc.createElement("button");
        retry.type = "button";
        retry.className = "banner-retry";
        retry.textContent = "Retry";
        retry.addEventListener("click", () => void this.controller.retry());
        banner.appendChild(retry);
      }
      this.bannerBox.appendChild(banner);
    }

    const frozen = state.stage === "uploaded";
    this.input.disabled = state.sessionId === null || frozen;
    this.syncSendButton();
  }

  private syncSendButton(): void {
    const state = this.state;
    const blocked =
      state === null || state.busy || state.sessionId === null || state.stage === "uploaded";
    this.sendButton.disabled = blocked || this.input.value.trim() === "";
  }

  private submit(): void {
    const text = this.input.value.trim();
    if (text === "" || this.sendButton.disabled) {
      return;
    }
    this.input.value = "";
    this.syncSendButton();
    void this.controller.send(text);
  }
}
