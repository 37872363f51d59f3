/**
 * Serializes batch work onto a single model instance: batches run one at
 * a time in arrival order while connections stay concurrent.
 */
export class BatchQueue {
  private tail: Promise<unknown> = Promise.resolve();

  run<T>(task: () => Promise<T>): Promise<T> {
    const result = this.tail.then(task, task);
    this.tail = result.catch(() => undefined);
    return result;
  }
}
