"""CSV rows emitted by experiment runs."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

CSV_HEADER = (
    "seed", "n", "k", "regime", "model", "p", "q", "lambda", "algorithm",
    "m", "trials", "successes", "mean_overlap", "separation_margin_mean", "elapsed_ms",
)


def _fmt_float(x):
    return "" if x is None else repr(float(x))


def _parse_float(s):
    return None if s == "" else float(s)


@dataclass(frozen=True)
class ResultRow:
    """One CSV line.

    ``mean_overlap`` and ``separation_margin_mean`` are None on flagged rows
    (a grid point that raised); ``elapsed_ms`` is None unless timing was
    requested, which keeps default output byte-reproducible.
    """

    seed: int
    n: int
    k: int
    regime: str
    model: str
    p: float
    q: float
    lam: float
    algorithm: str
    m: int
    trials: int
    successes: int
    mean_overlap: float | None
    separation_margin_mean: float | None
    elapsed_ms: float | None = None

    def __post_init__(self):
        if not 0 <= self.successes <= self.trials:
            raise ValueError(f"successes={self.successes} outside [0, trials={self.trials}]")
        if self.mean_overlap is not None and not 0.0 <= self.mean_overlap <= 1.0:
            raise ValueError(f"mean_overlap={self.mean_overlap} outside [0, 1]")

    @property
    def flagged(self) -> bool:
        return self.mean_overlap is None

    def to_record(self):
        return [
            str(self.seed), str(self.n), str(self.k), self.regime, self.model,
            _fmt_float(self.p), _fmt_float(self.q), _fmt_float(self.lam), self.algorithm,
            str(self.m), str(self.trials), str(self.successes),
            _fmt_float(self.mean_overlap), _fmt_float(self.separation_margin_mean), _fmt_float(self.elapsed_ms),
        ]

    @classmethod
    def from_record(cls, rec):
        if isinstance(rec, dict):
            rec = [rec[h] for h in CSV_HEADER]
        (seed, n, k, regime, model, p, q, lam, algorithm, m, trials, successes,
         overlap, margin, elapsed) = rec
        return cls(int(seed), int(n), int(k), regime, model, float(p), float(q), float(lam), algorithm,
                   int(m), int(trials), int(successes), _parse_float(overlap), _parse_float(margin),
                   _parse_float(elapsed))


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow(r.to_record())
    return buf.getvalue()


def rows_from_csv(text: str):
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    return [ResultRow.from_record(rec) for rec in reader]
