"""
Counter-based random streams keyed by (seed, path id, block).

Every path draws its normals in fixed-size blocks of steps; block k of path p
is generated by Philox with key (seed, p) and counter word 1 set to k, so any
block can be produced independently of how paths are split across workers.
"""
import numpy as np

BLOCK_STEPS = 4096
_MASK64 = (1 << 64) - 1


def block_generator(seed: int, path_id: int, block: int) -> np.random.Generator:
    """Generator for one block of one path."""
    key = np.array([seed & _MASK64, path_id & _MASK64], dtype=np.uint64)
    counter = np.array([0, block, 0, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def block_normals(seed: int, path_ids: np.ndarray, block: int, n_steps: int) -> np.ndarray:
    """
    Standard normal pairs for a block, one row per path.

    Returns:
        Array (n_steps, n_paths, 2)
    """
    out = np.empty((n_steps, len(path_ids), 2))
    for j, pid in enumerate(path_ids):
        out[:, j, :] = block_generator(seed, int(pid), block).standard_normal((n_steps, 2))
    return out
