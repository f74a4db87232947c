"""H-representation polytopes and uniform sampling by coordinate Gibbs.

The nonsignaling polytope in minimal coordinates is the set of vectors whose
reconstructed full table is entrywise nonnegative; its rows come straight from
the affine reconstruction map.  Sampling walks one coordinate at a time: the
exact feasible interval along the current axis is computed from every row,
and the coordinate is redrawn uniformly inside it.  Coordinate order is a
fresh seeded permutation each sweep.  The chain starts at the Chebyshev
centre (deepest interior point), found with the package's conic solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .conic import ConicProgram, solve
from .errors import DegenerateInterval, DomainError, SolverFailure
from .scenario import BellScenario, reconstruction_map

__all__ = [
    "PolytopeH",
    "ns_polytope",
    "box",
    "standard_simplex",
    "chebyshev_center",
    "ChainState",
    "start_chain",
    "gibbs_sweep",
    "sample_uniform",
    "GENERATOR_NAME",
]

GENERATOR_NAME = "numpy.random.Generator(PCG64)"
MIN_INTERVAL_WIDTH = 1e-14


@dataclass
class PolytopeH:
    """The set { x : A x <= b } with optional coordinate labels."""

    A: np.ndarray
    b: np.ndarray
    labels: list[str] | None = None

    def __post_init__(self) -> None:
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.asarray(self.b, dtype=float)
        if self.A.shape[0] != self.b.size:
            raise DomainError("row count of A must match length of b")
        if self.labels is not None and len(self.labels) != self.dim:
            raise DomainError("one label per coordinate is required")

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        return bool((self.A @ x <= self.b + tol).all())


def ns_polytope(scenario: BellScenario) -> PolytopeH:
    """All full-table nonnegativity rows of a scenario, in minimal coordinates.

    One row per full-table entry: settings^2 * outcomes^2 joint rows plus
    2 * settings * outcomes single-party marginal rows.
    """
    M, m0 = reconstruction_map(scenario)
    s, o = scenario.settings, scenario.outcomes
    rows = [(-M, m0.copy())]  # joint entries: M x + m0 >= 0

    # marginal entries P(a|x) and P(b|y), a/b = 1..outcomes, as affine rows
    d = scenario.cg_dim
    margA = np.zeros((s * o, d))
    cA = np.zeros(s * o)
    margB = np.zeros((s * o, d))
    cB = np.zeros(s * o)
    for x in range(1, s + 1):
        for a in range(1, o + 1):
            r = (x - 1) * o + (a - 1)
            if a < o:
                margA[r, scenario.marginal_index("A", a, x)] = 1.0
            else:
                cA[r] = 1.0
                for ap in range(1, o):
                    margA[r, scenario.marginal_index("A", ap, x)] = -1.0
    for y in range(1, s + 1):
        for b_ in range(1, o + 1):
            r = (y - 1) * o + (b_ - 1)
            if b_ < o:
                margB[r, scenario.marginal_index("B", b_, y)] = 1.0
            else:
                cB[r] = 1.0
                for bp in range(1, o):
                    margB[r, scenario.marginal_index("B", bp, y)] = -1.0
    rows.append((-margA, cA))
    rows.append((-margB, cB))

    A = np.vstack([r[0] for r in rows])
    b = np.concatenate([r[1] for r in rows])
    return PolytopeH(A, b, labels=scenario.cg_labels())


def box(dim: int) -> PolytopeH:
    """The unit hypercube [0, 1]^dim."""
    if dim < 1:
        raise DomainError("dimension must be positive")
    eye = np.eye(dim)
    return PolytopeH(
        np.vstack([eye, -eye]),
        np.concatenate([np.ones(dim), np.zeros(dim)]),
        labels=[f"x{i}" for i in range(dim)],
    )


def standard_simplex(dim: int) -> PolytopeH:
    """{ x >= 0, sum x <= 1 } in the given dimension."""
    if dim < 1:
        raise DomainError("dimension must be positive")
    A = np.vstack([-np.eye(dim), np.ones((1, dim))])
    b = np.concatenate([np.zeros(dim), [1.0]])
    return PolytopeH(A, b, labels=[f"x{i}" for i in range(dim)])


def chebyshev_center(poly: PolytopeH) -> tuple[np.ndarray, float]:
    """Centre and radius of a largest inscribed ball (conic LP)."""
    d = poly.dim
    norms = np.linalg.norm(poly.A, axis=1)
    # variables (x, r):  maximise r  s.t.  A x + norms * r <= b,  r >= 0
    G = np.hstack([-poly.A, -norms[:, None]])
    h = poly.b.copy()
    lb = np.full(d + 1, -np.inf)
    lb[d] = 0.0
    obj = np.zeros(d + 1)
    obj[d] = 1.0
    rep = solve(ConicProgram(n_vars=d + 1, objective=obj, nonneg_G=G, nonneg_h=h, lb=lb))
    if not rep.ok:
        raise SolverFailure(f"Chebyshev centre LP ended with status {rep.status}")
    return rep.x[:d].copy(), float(rep.objective)


@dataclass
class ChainState:
    """Mutable state of one Gibbs chain."""

    poly: PolytopeH
    x: np.ndarray
    rng: np.random.Generator
    sweeps_done: int = 0
    # per-column row indices with nonzero coefficients, precomputed once
    _pos_rows: list[np.ndarray] = field(default_factory=list, repr=False)
    _neg_rows: list[np.ndarray] = field(default_factory=list, repr=False)
    _slack: np.ndarray | None = field(default=None, repr=False)


def start_chain(
    poly: PolytopeH, seed: int, start: np.ndarray | None = None
) -> ChainState:
    """Initialise a chain at the Chebyshev centre (or a given interior point)."""
    if start is None:
        start, radius = chebyshev_center(poly)
        if radius <= MIN_INTERVAL_WIDTH:
            raise DegenerateInterval("polytope has (numerically) empty interior")
    x = np.asarray(start, dtype=float).copy()
    if x.shape != (poly.dim,):
        raise DomainError("start point has the wrong dimension")
    if not poly.contains(x):
        raise DomainError("start point is outside the polytope")
    state = ChainState(poly, x, np.random.default_rng(seed))
    for j in range(poly.dim):
        col = poly.A[:, j]
        pos = np.nonzero(col > 0.0)[0]
        neg = np.nonzero(col < 0.0)[0]
        if pos.size == 0 or neg.size == 0:
            raise DomainError(f"coordinate {j} is unbounded inside the polytope")
        state._pos_rows.append(pos)
        state._neg_rows.append(neg)
    state._slack = poly.b - poly.A @ x
    return state


def _update_coordinate(state: ChainState, j: int) -> None:
    A, b = state.poly.A, state.poly.b
    col = A[:, j]
    slack = state._slack
    pos, neg = state._pos_rows[j], state._neg_rows[j]
    # feasible step t in  x_j -> x_j + t  satisfies  t * col <= slack
    t_hi = np.min(slack[pos] / col[pos])
    t_lo = np.max(slack[neg] / col[neg])
    # the current point is feasible, so 0 is always in the closed interval;
    # clamp away tiny numerical inversions
    t_hi = max(t_hi, 0.0)
    t_lo = min(t_lo, 0.0)
    width = t_hi - t_lo
    if width < MIN_INTERVAL_WIDTH:
        raise DegenerateInterval(
            f"feasible interval for coordinate {j} has width {width:.3e}"
        )
    t = t_lo + state.rng.random() * width
    state.x[j] += t
    state._slack -= col * t


def gibbs_sweep(state: ChainState) -> None:
    """One full sweep: fresh random coordinate order, one move per coordinate."""
    for j in state.rng.permutation(state.poly.dim):
        _update_coordinate(state, int(j))
    state.sweeps_done += 1
    # kill floating-point drift in the incrementally maintained slack
    state._slack = state.poly.b - state.poly.A @ state.x


def sample_uniform(
    poly: PolytopeH,
    n: int,
    seed: int,
    *,
    burn_in: int = 1000,
    thinning: int = 5,
    start: np.ndarray | None = None,
) -> tuple[np.ndarray, dict]:
    """Draw n (approximately) uniform points; returns (samples, manifest).

    Bitwise deterministic for a fixed (polytope, n, seed, burn_in, thinning).
    """
    if n < 1:
        raise DomainError("need at least one sample")
    if burn_in < 0 or thinning < 1:
        raise DomainError("burn_in must be >= 0 and thinning >= 1")
    state = start_chain(poly, seed, start=start)
    for _ in range(burn_in):
        gibbs_sweep(state)
    out = np.empty((n, poly.dim))
    for i in range(n):
        for _ in range(thinning):
            gibbs_sweep(state)
        out[i] = state.x
    manifest = {
        "generator": GENERATOR_NAME,
        "seed": int(seed),
        "burn_in": int(burn_in),
        "thinning": int(thinning),
        "n_samples": int(n),
        "dim": int(poly.dim),
        "n_rows": int(poly.n_rows),
        "start": "chebyshev-center" if start is None else "custom",
        "package_version": __version__,
    }
    return out, manifest
