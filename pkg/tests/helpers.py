import numpy as np

from stabrad import StructureSpace

KINDS = ("full-complex", "full-real", "sparsity-complex", "sparsity-real", "toeplitz-real")


def random_structure(kind, n, rng):
    """A structure of the given kind with a random pattern or band."""
    if kind in ("full-complex", "full-real"):
        return StructureSpace(kind, n)
    if kind.startswith("sparsity"):
        mask = rng.random((n, n)) < 0.5
        mask[np.diag_indices(n)] = True  # nonempty
        return StructureSpace.sparsity(list(zip(*np.nonzero(mask))), n, real=kind == "sparsity-real")
    p = int(rng.integers(0, n))
    q = int(rng.integers(0, n))
    return StructureSpace.toeplitz_band(n, p, q)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# one line per acceptance criterion, printed again in the terminal summary
ACCEPTANCE = []


def verdict(number, title, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}  {title}  {detail}".rstrip()
    print(line)
    ACCEPTANCE.append(line)
    assert ok, line


def skipped(number, title, reason):
    import pytest

    line = f"[SKIP] criterion {number:>2}  {title}  {reason}"
    print(line)
    ACCEPTANCE.append(line)
    pytest.skip(reason)
