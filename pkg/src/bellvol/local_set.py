"""The local (deterministic-strategy) polytope and its visibility LP.

A behaviour is local iff it is a convex mixture of deterministic strategies.
Membership is decided by maximising the visibility v at which

    v * point + (1 - v) * white_noise

still admits such a mixture; the point is inside iff the optimum reaches 1.
The LP runs through the package's single conic code path.  Scenarios with a
huge strategy count are handled lazily: vertex rows are generated on demand
from the strategy index, and the LP is solved by column generation (restricted
master plus streamed pricing over all vertices).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .conic import ConicProgram, SolveReport, SolverOptions, solve
from .errors import DomainError, SolverFailure, TooManyVertices
from .scenario import BellScenario, Correlation, white_noise

__all__ = [
    "VertexTable",
    "enumerate_vertices",
    "visibility_to_local",
    "VERTEX_CAP",
]

VERTEX_CAP = 2_000_000
DENSE_LIMIT = 120_000          # materialise the table up to this many vertices
DIRECT_LP_LIMIT = 20_000       # solve with all columns up to this many
INITIAL_SUBSET = 10_000        # restricted-master size for column generation
PRICING_BLOCK = 65_536         # vertices per streamed pricing block
PRICING_TOL = 1e-7
MAX_ROUNDS = 200
ADD_PER_ROUND = 1_000


@dataclass
class VertexTable:
    """All deterministic strategies of a scenario, dense or generated lazily."""

    scenario: BellScenario
    n_vertices: int
    dense: np.ndarray | None  # (n_vertices, cg_dim) or None when lazy

    @property
    def is_dense(self) -> bool:
        return self.dense is not None

    def rows_for(self, ids: np.ndarray) -> np.ndarray:
        """Minimal-coordinate rows of the given strategy indices."""
        if self.dense is not None:
            return self.dense[ids]
        return _vertex_rows(self.scenario, np.asarray(ids, dtype=np.int64))

    def block(self, lo: int, hi: int) -> np.ndarray:
        return self.rows_for(np.arange(lo, hi, dtype=np.int64))


def _vertex_rows(sc: BellScenario, ids: np.ndarray) -> np.ndarray:
    """Vectorised strategy-index -> coordinate-row conversion.

    The index encodes the per-setting outcomes of both parties in base
    `outcomes`, party A in the high digits, setting 1 most significant.
    """
    s, o = sc.settings, sc.outcomes
    k = ids.size
    id_a = ids // o**s
    id_b = ids % o**s
    dig_a = np.empty((k, s), dtype=np.int64)  # 0-based outcomes
    dig_b = np.empty((k, s), dtype=np.int64)
    for x in range(s):
        shift = o ** (s - 1 - x)
        dig_a[:, x] = (id_a // shift) % o
        dig_b[:, x] = (id_b // shift) % o
    rows = np.zeros((k, sc.cg_dim))
    arange = np.arange(k)
    for x in range(s):
        keep = dig_a[:, x] < o - 1
        cols = x * (o - 1) + dig_a[:, x]
        rows[arange[keep], cols[keep]] = 1.0
        keep = dig_b[:, x] < o - 1
        cols = s * (o - 1) + x * (o - 1) + dig_b[:, x]
        rows[arange[keep], cols[keep]] = 1.0
    base = 2 * s * (o - 1)
    for x in range(s):
        for y in range(s):
            keep = (dig_a[:, x] < o - 1) & (dig_b[:, y] < o - 1)
            cols = (
                base
                + (x * s + y) * (o - 1) ** 2
                + dig_a[:, x] * (o - 1)
                + dig_b[:, y]
            )
            rows[arange[keep], cols[keep]] = 1.0
    return rows


@functools.lru_cache(maxsize=32)
def enumerate_vertices(
    scenario: BellScenario,
    cap: int = VERTEX_CAP,
    dense_limit: int = DENSE_LIMIT,
) -> VertexTable:
    """Vertex table of the local polytope; lazy above ``dense_limit`` rows."""
    n = scenario.n_local_vertices
    if n > cap:
        raise TooManyVertices(
            f"{n} deterministic strategies exceed the cap of {cap}"
        )
    if n <= dense_limit:
        rows = _vertex_rows(scenario, np.arange(n, dtype=np.int64))
        return VertexTable(scenario, n, rows)
    return VertexTable(scenario, n, None)


def _master_program(
    columns: np.ndarray, delta: np.ndarray, w: np.ndarray, v_cap: float
) -> ConicProgram:
    """LP  max v  s.t.  columns' q - delta v = w,  1'q = 1,  q >= 0, 0<=v<=cap."""
    n_cols = columns.shape[0]
    d = w.size
    n_vars = n_cols + 1
    A = np.zeros((d + 1, n_vars))
    A[:d, :n_cols] = columns.T
    A[:d, n_cols] = -delta
    A[d, :n_cols] = 1.0
    b = np.concatenate([w, [1.0]])
    lb = np.zeros(n_vars)
    ub = np.full(n_vars, np.inf)
    ub[n_cols] = v_cap
    obj = np.zeros(n_vars)
    obj[n_cols] = 1.0
    return ConicProgram(n_vars=n_vars, objective=obj, eq_A=A, eq_b=b, lb=lb, ub=ub)


def visibility_to_local(
    corr: Correlation,
    table: VertexTable | None = None,
    *,
    v_cap: float = 10.0,
    direct_limit: int = DIRECT_LP_LIMIT,
    initial_subset: int = INITIAL_SUBSET,
    pricing_block: int = PRICING_BLOCK,
    subset_seed: int = 0,
    options: SolverOptions | None = None,
) -> SolveReport:
    """Maximal visibility at which the noisy point stays local.

    The report's objective is the optimal visibility.  Small vertex tables are
    solved with every column; large ones by column generation with a seeded
    random restricted master.
    """
    sc = corr.scenario
    if table is None:
        table = enumerate_vertices(sc)
    if table.scenario != sc:
        raise DomainError("vertex table belongs to a different scenario")
    w = white_noise(sc).vec
    delta = corr.vec - w

    if table.n_vertices <= direct_limit:
        prog = _master_program(table.rows_for(np.arange(table.n_vertices)), delta, w, v_cap)
        return solve(prog, options)

    # --- column generation -------------------------------------------------
    rng = np.random.default_rng(subset_seed)
    n = table.n_vertices
    size = min(initial_subset, n)
    ids = np.sort(rng.choice(n, size=size, replace=False))
    # an artificial column equal to white noise keeps the master feasible for
    # any subset (it lies inside the polytope, so the optimum is unaffected)
    for _ in range(MAX_ROUNDS):
        columns = np.vstack([table.rows_for(ids), w])
        rep = solve(_master_program(columns, delta, w, v_cap), options)
        if not rep.ok or rep.eq_duals is None:
            raise SolverFailure(
                f"restricted master ended with status {rep.status}"
            )
        y, mu = rep.eq_duals[:-1], rep.eq_duals[-1]
        if np.isnan(y).any() or np.isnan(mu):
            raise SolverFailure("restricted master returned incomplete duals")
        # price all vertices in streamed blocks: violated when score < 0
        worst_ids: list[np.ndarray] = []
        worst_scores: list[np.ndarray] = []
        for lo in range(0, n, pricing_block):
            hi = min(lo + pricing_block, n)
            scores = table.block(lo, hi) @ y + mu
            bad = np.nonzero(scores < -PRICING_TOL)[0]
            if bad.size:
                worst_ids.append(bad + lo)
                worst_scores.append(scores[bad])
        if not worst_ids:
            return rep
        cand = np.concatenate(worst_ids)
        cand_scores = np.concatenate(worst_scores)
        new = np.setdiff1d(cand, ids)
        if new.size == 0:
            return rep
        if new.size > ADD_PER_ROUND:
            mask = np.isin(cand, new)
            order = np.argsort(cand_scores[mask])
            new = cand[mask][order[:ADD_PER_ROUND]]
        ids = np.sort(np.concatenate([ids, np.unique(new)]))
    raise SolverFailure("column generation did not converge")
