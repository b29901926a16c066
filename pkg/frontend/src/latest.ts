/**
 * Keeps each view down to one in-flight request. Starting a new request
 * aborts the previous one for that view and hands out a ticket; a response
 * is applied only if its ticket is still current, so a slow reply from an
 * older request can never overwrite a newer one.
 */
export class RequestGate {
  private seq = new Map<string, number>();
  private controllers = new Map<string, AbortController>();

  begin(view: string): { ticket: number; signal: AbortSignal } {
    this.controllers.get(view)?.abort();
    const controller = new AbortController();
    this.controllers.set(view, controller);
    const ticket = (this.seq.get(view) ?? 0) + 1;
    this.seq.set(view, ticket);
    return { ticket, signal: controller.signal };
  }

  isCurrent(view: string, ticket: number): boolean {
    return this.seq.get(view) === ticket;
  }
}

export function isAbort(err: unknown): boolean {
  return err instanceof Error && err.name === "AbortError";
}
