"""Timing harness: publish files repeatedly and summarise the three phases.

Processing (encode, mask, store put) and attaching (tip selection, PoW,
insert) are wall-clock; confirming is simulated as poll rounds times the
poll interval, since the node runs in-process.
"""
from __future__ import annotations

import json
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from .hashing import H
from .mam import MamChannel, Mode
from .market import Marketplace, PublishReceipt
from .store import MemoryBlobStore
from .tangle import DEFAULT_DIFFICULTY, Ledger, UniformTips

PHASES = ("processing", "attaching", "confirming")


@dataclass(frozen=True)
class PhaseStats:
    mean: float
    sd: float
    min: float
    max: float

    @classmethod
    def of(cls, samples: Sequence[float]) -> "PhaseStats":
        if not samples:
            raise ValueError("no samples")
        sd = statistics.stdev(samples) if len(samples) > 1 else 0.0
        m = statistics.fmean(samples)
        # fmean can land a rounding step outside [min, max] for equal samples
        return cls(min(max(m, min(samples)), max(samples)), sd, min(samples), max(samples))


@dataclass
class BenchRow:
    file_id: str
    size: int
    iterations: int
    processing: PhaseStats
    attaching: PhaseStats
    confirming: PhaseStats
    samples: dict = field(default_factory=dict, repr=False)

    def phase(self, name: str) -> PhaseStats:
        return getattr(self, name)

    def to_dict(self) -> dict:
        d = {"file_id": self.file_id, "size": self.size, "iterations": self.iterations}
        for p in PHASES:
            d[p] = asdict(self.phase(p))
        d["samples_ms"] = self.samples
        return d


@dataclass
class BenchReport:
    rows: list[BenchRow]
    errors: dict[str, str] = field(default_factory=dict)
    settings: dict = field(default_factory=dict)

    def table(self) -> str:
        head = f"{'file':<20} {'size':>10} {'n':>3}"
        for p in PHASES:
            head += f" {p + ' mean':>16} {'sd':>9}"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            line = f"{r.file_id:<20} {r.size:>10} {r.iterations:>3}"
            for p in PHASES:
                s = r.phase(p)
                line += f" {s.mean:>16.2f} {s.sd:>9.2f}"
            lines.append(line)
        for fid, msg in self.errors.items():
            lines.append(f"{fid:<20} FAILED: {msg}")
        lines.append("(all times in ms; confirming is simulated)")
        return "\n".join(lines)

    def write_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"settings": self.settings}, sort_keys=True) + "\n")
            for r in self.rows:
                fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")
            for fid, msg in self.errors.items():
                fh.write(json.dumps({"file_id": fid, "error": msg}, sort_keys=True) + "\n")


def _new_ledger(difficulty, milestone_interval, seed, clock):
    return Ledger(difficulty=difficulty, tip_selector=UniformTips(), seed=seed,
                  milestone_interval=milestone_interval, clock=clock)


def run_bench(files: Sequence[tuple[str, bytes]], iterations: int = 10, *,
              difficulty: int = DEFAULT_DIFFICULTY, milestone_interval: int = 5, seed: int = 0,
              shared_node: bool = True, concurrent: bool = False, poll_interval_ms: float = 100.0,
              mode=Mode.PUBLIC, side_key: bytes | None = None, clock=None, store=None) -> BenchReport:
    """Publish every ``(file_id, data)`` pair ``iterations`` times.

    Each iteration uses its own channel so one-time keys are never reused.
    With ``shared_node`` all files go to one ledger; otherwise each file
    gets a fresh one.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    mode = Mode(mode)
    if mode is Mode.RESTRICTED and not side_key:
        raise ValueError("restricted mode requires a side key")
    store = store if store is not None else MemoryBlobStore()
    shared = _new_ledger(difficulty, milestone_interval, seed, clock) if shared_node else None
    report = BenchReport([], settings={
        "iterations": iterations, "difficulty": difficulty, "milestone_interval": milestone_interval,
        "seed": seed, "shared_node": shared_node, "concurrent": concurrent,
        "poll_interval_ms": poll_interval_ms, "mode": mode.value,
    })
    for fidx, (file_id, data) in enumerate(files):
        ledger = shared if shared is not None else _new_ledger(difficulty, milestone_interval, seed + fidx, clock)
        market = Marketplace(ledger, store)

        def one(i: int) -> PublishReceipt:
            chan_seed = H(b"bench-channel", str(seed).encode(), file_id.encode(), str(i).encode())
            channel = MamChannel(chan_seed, 1, mode, side_key)
            receipt = market.publish_document(data, channel)
            return market.await_confirmation(receipt, poll_interval_ms)

        try:
            if concurrent:
                with ThreadPoolExecutor(max_workers=min(iterations, 8)) as pool:
                    receipts = list(pool.map(one, range(iterations)))
            else:
                receipts = [one(i) for i in range(iterations)]
        except Exception as exc:  # a failed file must not sink the others
            report.errors[file_id] = f"{type(exc).__name__}: {exc}"
            continue
        samples = {
            "processing": [r.timings.processing_ms for r in receipts],
            "attaching": [r.timings.attaching_ms for r in receipts],
            "confirming": [r.timings.confirming_ms for r in receipts],
        }
        report.rows.append(BenchRow(file_id, len(data), iterations,
                                    *(PhaseStats.of(samples[p]) for p in PHASES), samples=samples))
    return report


def load_files(paths) -> list[tuple[str, bytes]]:
    return [(Path(p).name, Path(p).read_bytes()) for p in paths]
