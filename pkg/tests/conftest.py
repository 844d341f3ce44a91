import numpy as np
import pytest

from dyadic_sharp.core import DyadicCube, StepFunction
from dyadic_sharp.experiments import point_rng, random_step_function


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def grid(f: StepFunction, depth: int | None = None) -> np.ndarray:
    """Values of f on every cell of the finest uniform grid, in x order (n = 1)."""
    assert f.dim == 1
    D = f.depth if depth is None else depth
    x = (np.arange(1 << D) + 0.5) / (1 << D)
    return np.asarray(f(x.reshape(-1, 1)), dtype=float)


def grid_average(v: np.ndarray, Q: DyadicCube) -> float:
    D = int(np.log2(len(v)))
    k = Q.coords[0]
    span = 1 << (D - Q.level)
    return float(v[k * span:(k + 1) * span].mean())


def rearrangement_oracle(v: np.ndarray, t: float) -> float:
    """inf{a > 0 : |{|v| > a}| < t} for equally weighted cells of total measure len(v)."""
    a = np.abs(v)
    for alpha in sorted(set([0.0] + a.tolist())):
        if np.sum(a > alpha) < t:
            return alpha if alpha > 0 else 0.0
    raise AssertionError("unreachable")


def oscillation_oracle(v: np.ndarray, lam: float) -> float:
    """min over c of ((v - c))^*(lam |Q|), trying every value and every midpoint."""
    vals = np.unique(v)
    cands = set(vals.tolist())
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            cands.add(0.5 * (vals[i] + vals[j]))
    return min(rearrangement_oracle(v - c, lam * len(v)) for c in cands)


def random_functions(seed: int, count: int, depth: int = 6, dim: int = 1):
    for k in range(count):
        yield random_step_function(point_rng(seed, k), depth, dim)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(n: int, ok: bool, detail: str):
    ACCEPTANCE[n] = (ok, detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
