"""Small shared pieces: the estimate record, tolerances and threading."""

import os
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple

import numpy as np

# classification tolerance on tr^2 and on the +-I test
CLASSIFY_TOL = 1e-9
# determinant normalization tolerance
DET_TOL = 1e-12
# |cz + d| below this is treated as a pole of the derivative
POLE_TOL = 1e-14


class Estimate(NamedTuple):
    """A computed value with an absolute error estimate."""

    value: complex
    error: float


def thread_count():
    """Worker count from ``UNIFORMIZER_THREADS`` (default 1, serial)."""
    raw = os.environ.get("UNIFORMIZER_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def map_chunks(fn, chunks):
    """Apply ``fn`` to each chunk, threaded when more than one worker is allowed.

    numpy releases the GIL inside the heavy kernels, so threads give real
    speedups for the node-parallel loops that use this.
    """
    chunks = list(chunks)
    n = min(thread_count(), len(chunks))
    if n <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, chunks))


def split_points(z, size):
    """Split a flat array into consecutive slices of at most ``size`` entries."""
    z = np.asarray(z)
    return [z[i:i + size] for i in range(0, z.size, max(1, size))]


def as_sampler(f):
    """Wrap ``f`` so that it maps complex arrays to complex arrays.

    Samplers written for scalars are evaluated pointwise as a fallback.
    """
    def sampler(z):
        z = np.asarray(z, dtype=complex)
        try:
            out = np.asarray(f(z), dtype=complex)
        except (TypeError, ValueError):
            out = None
        if out is None or out.shape != z.shape:
            flat = [complex(f(complex(p))) for p in z.ravel()]
            out = np.asarray(flat, dtype=complex).reshape(z.shape)
        return out
    return sampler
