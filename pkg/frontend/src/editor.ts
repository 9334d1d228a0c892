/** Input pacing: a trailing debounce plus request sequence numbers. */

export const QUIET_PERIOD_MS = 300;

/** Runs the action once input has been quiet for the full period. */
export class Debouncer {
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(private readonly delayMs: number = QUIET_PERIOD_MS) {}

  schedule(action: () => void): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      action();
    }, this.delayMs);
  }

  cancel(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
  }
}

/** Monotone ticket counter; only the newest ticket's response may render.
 *
 * Issuing a ticket supersedes every earlier one, which both discards
 * stale responses and guarantees at most one request is live as far as
 * the page state is concerned.
 */
export class RequestSequencer {
  private latest = 0;

  issue(): number {
    return ++this.latest;
  }

  isCurrent(ticket: number): boolean {
    return ticket === this.latest;
  }
}
