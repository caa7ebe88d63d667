// Polling loop: refresh the run while it executes, back off to the
// retry banner on network loss.

import { ApiClient, ApiError, Manifest } from "./api.js";

export interface PollHandle {
  stop(): void;
}

export function pollRun(
  client: ApiClient,
  runId: string,
  onUpdate: (manifest: Manifest) => void,
  onNetworkLoss: (down: boolean) => void,
  intervalMs = 1000,
): PollHandle {
  let stopped = false;

  async function tick(): Promise<void> {
    if (stopped) return;
    try {
      const manifest = await client.getRun(runId);
      onNetworkLoss(false);
      onUpdate(manifest);
      if (manifest.status === "running") {
        schedule();
      }
    } catch (err) {
      if (err instanceof ApiError && err.status === 0) {
        onNetworkLoss(true);
        schedule();
        return;
      }
      throw err;
    }
  }

  function schedule(): void {
    if (!stopped) setTimeout(tick, intervalMs);
  }

  void tick();
  return {
    stop() {
      stopped = true;
    },
  };
}
