"""Shared helpers: RNG substreams, batch-means errors, atomic file writes."""

from __future__ import annotations

import os
import tempfile

import numpy as np


class NumericalError(RuntimeError):
    """Computation failed for numerical reasons (maps to CLI exit code 2)."""


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for a (seed, *path) address.

    The same address always yields the same stream, regardless of how many
    other streams were created, so parallel schedules cannot change results.
    """
    return np.random.default_rng(np.random.SeedSequence((int(seed),) + tuple(int(p) for p in path)))


def batch_means_se(samples: np.ndarray, n_batches: int = 30) -> float:
    """Standard error of the mean of a (possibly serially correlated) series.

    Splits the series into ``n_batches`` contiguous batches and uses the
    spread of batch means.  Falls back to fewer batches for short series.
    """
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if n < 2:
        return float("inf")
    b = min(n_batches, n // 2)
    if b < 2:
        return float(np.std(x, ddof=1) / np.sqrt(n))
    m = n // b
    means = x[: b * m].reshape(b, m).mean(axis=1)
    return float(np.std(means, ddof=1) / np.sqrt(b))


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file + rename in the same directory."""
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
