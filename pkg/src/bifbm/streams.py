"""Counter-based random streams.

A stream is addressed by (seed, component tag, path index).  The Philox key
holds the seed and the tag, the counter's third word holds the path index, so
every path draws from its own non-overlapping block no matter which worker
produces it or in what order.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import DomainError

# component tags
EXACT = 1
FBM_PART = 2
XHK_PART = 3
WIENER = 4
VOLTERRA = 5
POISSON = 6

CHUNK = 256


def check_seed(seed):
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def path_rng(seed, tag, index):
    bitgen = np.random.Philox(key=check_seed(seed) | (int(tag) << 64), counter=int(index) << 128)
    return np.random.Generator(bitgen)


def normals(seed, tag, first, count, dim):
    """(count, dim) block of standard normals, row i from stream (seed, tag, first + i)."""
    out = np.empty((count, dim))
    for i in range(count):
        out[i] = path_rng(seed, tag, first + i).standard_normal(dim)
    return out


def map_chunks(fn, n_paths, first=0, threads=1):
    """Apply ``fn(start, count)`` over fixed CHUNK-sized path blocks and stack rows.

    Block boundaries do not depend on ``threads``, so results are identical
    for any degree of parallelism.
    """
    starts = list(range(first, first + n_paths, CHUNK))
    jobs = [(s, min(CHUNK, first + n_paths - s)) for s in starts]
    if threads is None or threads <= 1 or len(jobs) == 1:
        parts = [fn(s, c) for s, c in jobs]
    else:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            parts = list(pool.map(lambda job: fn(*job), jobs))
    return np.vstack(parts)
