"""Subprocess driver for the crash-safety acceptance criterion.

Runs the pipeline on a worker thread while the main thread watches for
the requested step boundary file; the moment it appears the process
SIGKILLs itself, leaving whatever the engine managed to persist.

Usage: python crash_driver.py <runs_root> <run_id> <transcripts> <description_file> <boundary>
"""

import os
import signal
import sys
import threading
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from nl2plan.llm.provider import ProviderConfig
from nl2plan.pipeline import RunConfig, RunStore, Engine


def main() -> None:
    runs_root, run_id, transcripts, description_file, boundary = sys.argv[1:6]
    description = Path(description_file).read_text()
    provider = ProviderConfig(kind="replay", transcript_dir=transcripts)
    config = RunConfig.make(provider, feedback="llm")
    store = RunStore.create(runs_root, description, config, run_id=run_id)

    worker = threading.Thread(
        target=lambda: Engine(store).execute(), daemon=True
    )
    worker.start()

    marker = Path(runs_root) / run_id / f"step_{boundary}.json"
    while not marker.exists():
        if not worker.is_alive():
            sys.exit(0)  # finished before the boundary could be hit
        time.sleep(0.001)
    os.kill(os.getpid(), signal.SIGKILL)


if __name__ == "__main__":
    main()
