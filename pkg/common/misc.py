import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from tqdm import tqdm


def child_seeds(seed, n):
    """Independent child streams of a root seed; replication r owns entry r.

    Unlike SeedSequence.spawn this keeps no state, so asking twice for the
    children of the same seed returns the same streams.
    """
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.SeedSequence(root.entropy, spawn_key=tuple(root.spawn_key) + (k,),
                                   pool_size=root.pool_size)
            for k in range(n)]


def seed_record(seed):
    """Serializable record of a seed (int root or spawned child)."""
    if isinstance(seed, np.random.SeedSequence):
        entropy = seed.entropy
        key = ".".join(str(k) for k in seed.spawn_key)
        return f"{entropy}" + (f"/{key}" if key else "")
    return str(seed)


def parallel_map(fn, items, threads=1, desc=None, progress=False):
    """Ordered map over ``items``; threads > 1 uses a thread pool."""
    items = list(items)
    pbar = tqdm(total=len(items), desc=desc, disable=not progress)
    if threads is None or threads <= 1:
        results = []
        for item in items:
            results.append(fn(item))
            pbar.update(1)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = []
            for res in pool.map(fn, items):
                results.append(res)
                pbar.update(1)
    pbar.close()
    return results


def mean_var(values):
    """Sample mean and variance (ddof=1) with compensated summation; var is None for n < 2."""
    values = [float(v) for v in values]
    n = len(values)
    if n == 0:
        return float("nan"), None
    mean = math.fsum(values) / n
    if n < 2:
        return mean, None
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, var
