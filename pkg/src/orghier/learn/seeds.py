import numpy as np


def derive_seed(*parts: int) -> int:
    """Deterministic 63-bit seed from a tuple of non-negative integers."""
    ss = np.random.SeedSequence([int(p) & 0xFFFFFFFFFFFFFFFF for p in parts])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
