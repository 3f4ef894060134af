/** Debounced single-flight scheduler: at most one request in flight,
 * later edits cancel both pending timers and the outstanding request.
 * Superseded or cancelled runs resolve to undefined. */

interface Pending {
  timer: ReturnType<typeof setTimeout>;
  resolve: (value: undefined) => void;
}

export class SingleFlight {
  private pending: Pending | null = null;
  private controller: AbortController | null = null;
  private generation = 0;

  constructor(private readonly delayMs: number) {}

  get inFlight(): boolean {
    return this.controller !== null;
  }

  schedule<T>(work: (signal: AbortSignal) => Promise<T>): Promise<T | undefined> {
    this.dropPending();
    const gen = ++this.generation;
    return new Promise<T | undefined>((resolve, reject) => {
      const timer = setTimeout(() => {
        this.pending = null;
        this.controller?.abort();
        const controller = new AbortController();
        this.controller = controller;
        work(controller.signal).then(
          (value) => {
            if (this.controller === controller) this.controller = null;
            resolve(gen === this.generation ? value : undefined);
          },
          (err) => {
            if (this.controller === controller) this.controller = null;
            if (controller.signal.aborted || gen !== this.generation) {
              resolve(undefined);
            } else {
              reject(err);
            }
          },
        );
      }, this.delayMs);
      this.pending = { timer, resolve: resolve as (value: undefined) => void };
    });
  }

  cancel(): void {
    this.generation++;
    this.dropPending();
    this.controller?.abort();
    this.controller = null;
  }

  private dropPending(): void {
    if (this.pending) {
      clearTimeout(this.pending.timer);
      this.pending.resolve(undefined);
      this.pending = null;
    }
  }
}
