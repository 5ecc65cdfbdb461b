// Keyboard-first review: digits rate the focused candidate, j/k and the
// arrow keys move through the queue, s skips without rating.

import { ReviewStore } from "./state.js";

export async function handleKey(key: string, store: ReviewStore): Promise<boolean> {
  if (key >= "1" && key <= "5") {
    return store.rate(Number(key));
  }
  switch (key) {
    case "j":
    case "ArrowDown":
      store.next();
      return true;
    case "k":
    case "ArrowUp":
      store.prev();
      return true;
    case "s":
      store.skip();
      return true;
    default:
      return false;
  }
}

export function bindKeys(target: EventTarget, store: ReviewStore): void {
  target.addEventListener("keydown", (event) => {
    const e = event as KeyboardEvent;
    if (e.ctrlKey || e.metaKey || e.altKey) return;
    const tag = (e.target as HTMLElement | null)?.tagName;
    if (tag === "INPUT" || tag === "TEXTAREA") return;
    void handleKey(e.key, store);
  });
}
