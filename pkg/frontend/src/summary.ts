// Trailing-edge debouncer for the summary bar: refresh only after the
// camera has been idle for a beat, and collapse bursts into one call.

export const SUMMARY_DEBOUNCE_MS = 300;

export class Debouncer {
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(private readonly delayMs: number = SUMMARY_DEBOUNCE_MS) {}

  schedule(action: () => void): void {
    this.cancel();
    this.timer = setTimeout(() => {
      this.timer = null;
      action();
    }, this.delayMs);
  }

  cancel(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  get pending(): boolean {
    return this.timer !== null;
  }
}
