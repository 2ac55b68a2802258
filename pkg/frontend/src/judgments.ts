/**
 * Per-batch judgment tracking: which pending documents the reviewer has
 * marked relevant/not-relevant and where the keyboard cursor sits.
 *
 * Pure view state. Submission is only possible once every document in the
 * batch is judged, and the submitted map covers exactly the pending ids.
 */

import type { Labels } from "./api.js";

export class BatchJudgments {
  private readonly values = new Map<string, 0 | 1>();
  private cursorIndex = 0;

  constructor(readonly order: readonly string[]) {}

  get cursor(): string | null {
    return this.order[this.cursorIndex] ?? null;
  }

  get cursorAt(): number {
    return this.cursorIndex;
  }

  valueOf(docId: string): 0 | 1 | undefined {
    return this.values.get(docId);
  }

  /** Judge the document under the cursor, then jump to the next unjudged. */
  judgeCurrent(value: 0 | 1): void {
    const id = this.cursor;
    if (id === null) return;
    this.values.set(id, value);
    this.advanceToUnjudged();
  }

  judge(docId: string, value: 0 | 1): void {
    if (!this.order.includes(docId)) return;
    this.values.set(docId, value);
    this.cursorIndex = this.order.indexOf(docId);
    this.advanceToUnjudged();
  }

  /** Move the cursor without judging (card click). */
  focus(docId: string): void {
    const index = this.order.indexOf(docId);
    if (index >= 0) this.cursorIndex = index;
  }

  private advanceToUnjudged(): void {
    for (let step = 1; step <= this.order.length; step++) {
      const i = (this.cursorIndex + step) % this.order.length;
      const id = this.order[i];
      if (id !== undefined && !this.values.has(id)) {
        this.cursorIndex = i;
        return;
      }
    }
    // everything judged: leave the cursor in place
  }

  move(delta: number): void {
    if (this.order.length === 0) return;
    const n = this.order.length;
    this.cursorIndex = ((this.cursorIndex + delta) % n + n) % n;
  }

  get complete(): boolean {
    return this.order.length > 0 && this.order.every((id) => this.values.has(id));
  }

  get judgedCount(): number {
    return this.values.size;
  }

  /** The exact pending map the service expects. */
  toLabels(): Labels {
    const labels: Labels = {};
    for (const id of this.order) {
      const value = this.values.get(id);
      if (value === undefined) {
        throw new Error(`document ${id} is not judged yet`);
      }
      labels[id] = value;
    }
    return labels;
  }
}
