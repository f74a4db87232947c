"""One deterministic numerical code path for every optimisation in the package.

Programs maximise a linear objective over the intersection of an affine
subspace, variable bounds, general affine-nonnegativity rows, and PSD cone
constraints.  Pure LPs (no PSD blocks) run through the same solver, so the
local-polytope membership test and the semidefinite relaxations share
identical numerics and status handling.

The heavy lifting is done by CVXOPT's primal-dual path-following interior
point method (Nesterov-Todd scaling over a self-dual embedding), which handles
the nonnegative orthant and PSD cones in one algorithm.  This module owns the
contract: presolve (fixed-variable elimination, row scaling to unit max-norm),
strict tolerance enforcement, and a stable report format.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from cvxopt import matrix as cvx_matrix
from cvxopt import solvers as cvx_solvers
from cvxopt import spmatrix as cvx_spmatrix

from .errors import DomainError

__all__ = [
    "PsdBlock",
    "ConicProgram",
    "SolveReport",
    "SolverOptions",
    "solve",
    "PSD_DIM_CAP",
]

PSD_DIM_CAP = 400

# statuses a report can carry
OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
ITER_LIMIT = "IterLimit"
NUMERICAL_FAILURE = "NumericalFailure"


@dataclass
class PsdBlock:
    """An affine symmetric-matrix constraint  F0 + sum_j x_j * F_j  >= 0 (PSD).

    Entries are coordinate triplets over the full symmetric matrix; callers
    must supply both (i, j) and (j, i) for off-diagonal entries.
    """

    size: int
    var_rows: np.ndarray
    var_cols: np.ndarray
    var_idx: np.ndarray
    var_coeff: np.ndarray
    const_rows: np.ndarray
    const_cols: np.ndarray
    const_vals: np.ndarray

    def __post_init__(self) -> None:
        self.var_rows = np.asarray(self.var_rows, dtype=np.int64)
        self.var_cols = np.asarray(self.var_cols, dtype=np.int64)
        self.var_idx = np.asarray(self.var_idx, dtype=np.int64)
        self.var_coeff = np.asarray(self.var_coeff, dtype=float)
        self.const_rows = np.asarray(self.const_rows, dtype=np.int64)
        self.const_cols = np.asarray(self.const_cols, dtype=np.int64)
        self.const_vals = np.asarray(self.const_vals, dtype=float)

    def constant_matrix(self) -> np.ndarray:
        F0 = np.zeros((self.size, self.size))
        np.add.at(F0, (self.const_rows, self.const_cols), self.const_vals)
        return F0

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """The matrix F0 + sum_j x_j F_j at a point (for certificates)."""
        F = self.constant_matrix()
        np.add.at(F, (self.var_rows, self.var_cols), self.var_coeff * x[self.var_idx])
        return F


@dataclass
class ConicProgram:
    """maximise objective @ x  subject to
        eq_A @ x == eq_b
        nonneg_G @ x + nonneg_h >= 0     (componentwise)
        lb <= x <= ub                    (entries may be +-inf)
        every PsdBlock evaluates to a PSD matrix
    """

    n_vars: int
    objective: np.ndarray
    eq_A: np.ndarray | None = None
    eq_b: np.ndarray | None = None
    nonneg_G: np.ndarray | None = None
    nonneg_h: np.ndarray | None = None
    lb: np.ndarray | None = None
    ub: np.ndarray | None = None
    psd_blocks: list[PsdBlock] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.objective = np.asarray(self.objective, dtype=float)
        if self.objective.shape != (self.n_vars,):
            raise DomainError("objective length must equal n_vars")
        if (self.eq_A is None) != (self.eq_b is None):
            raise DomainError("eq_A and eq_b must be given together")
        if self.eq_A is not None:
            self.eq_A = np.atleast_2d(np.asarray(self.eq_A, dtype=float))
            self.eq_b = np.asarray(self.eq_b, dtype=float)
            if self.eq_A.shape != (self.eq_b.size, self.n_vars):
                raise DomainError("equality row shapes are inconsistent")
        if (self.nonneg_G is None) != (self.nonneg_h is None):
            raise DomainError("nonneg_G and nonneg_h must be given together")
        if self.nonneg_G is not None:
            self.nonneg_G = np.atleast_2d(np.asarray(self.nonneg_G, dtype=float))
            self.nonneg_h = np.asarray(self.nonneg_h, dtype=float)
            if self.nonneg_G.shape != (self.nonneg_h.size, self.n_vars):
                raise DomainError("nonneg row shapes are inconsistent")
        if self.lb is None:
            self.lb = np.full(self.n_vars, -np.inf)
        else:
            self.lb = np.asarray(self.lb, dtype=float)
        if self.ub is None:
            self.ub = np.full(self.n_vars, np.inf)
        else:
            self.ub = np.asarray(self.ub, dtype=float)
        total_psd = sum(b.size for b in self.psd_blocks)
        if total_psd > PSD_DIM_CAP:
            raise DomainError(
                f"total PSD dimension {total_psd} exceeds the cap {PSD_DIM_CAP}"
            )


@dataclass
class SolverOptions:
    maxiters: int = 100
    abstol: float = 1e-9
    reltol: float = 1e-8
    feastol: float = 1e-8
    accept_gap: float = 1e-8
    accept_residual: float = 1e-8
    # On a failed first attempt, retry once with a regularised LDL KKT
    # factorisation: slower, but it rescues degenerate instances (e.g. the
    # visibility LP at a polytope vertex) that stall the default factorisation.
    kkt_rescue: bool = True

    def to_cvxopt(self) -> dict:
        return {
            "show_progress": False,
            "maxiters": self.maxiters,
            "abstol": self.abstol,
            "reltol": self.reltol,
            "feastol": self.feastol,
        }


@dataclass
class SolveReport:
    """Outcome of one solve, in the original variable/row indexing.

    ``status`` is Optimal, Infeasible, IterLimit or NumericalFailure;
    Optimal guarantees duality_gap <= accept_gap and both residuals <=
    accept_residual (relative measures as reported by the interior-point
    method).  Unbounded programs surface as NumericalFailure: every program
    built by this package bounds its objective by construction.
    """

    status: str
    objective: float | None
    x: np.ndarray | None
    duality_gap: float
    primal_residual: float
    dual_residual: float
    iterations: int
    eq_duals: np.ndarray | None = None

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


def _eliminate_fixed(prog: ConicProgram):
    """Remove variables pinned by singleton equality rows.

    Returns (reduced program pieces, fixed_values array with NaN for free
    variables, kept_vars index array, kept_rows index array, objective_offset).
    """
    n = prog.n_vars
    A = prog.eq_A.copy() if prog.eq_A is not None else np.zeros((0, n))
    b = prog.eq_b.copy() if prog.eq_b is not None else np.zeros(0)
    fixed = np.full(n, np.nan)
    row_alive = np.ones(A.shape[0], dtype=bool)
    col_alive = np.ones(n, dtype=bool)
    offset = 0.0
    changed = True
    while changed:
        changed = False
        nz = (A != 0.0) & row_alive[:, None] & col_alive[None, :]
        counts = nz.sum(axis=1)
        for i in np.nonzero(row_alive & (counts == 1))[0]:
            j = int(np.nonzero(nz[i])[0][0])
            val = b[i] / A[i, j]
            fixed[j] = val
            offset += prog.objective[j] * val
            b -= A[:, j] * val
            A[:, j] = 0.0
            row_alive[i] = False
            col_alive[j] = False
            changed = True
            nz = (A != 0.0) & row_alive[:, None] & col_alive[None, :]
            counts = nz.sum(axis=1)
    kept_vars = np.nonzero(col_alive)[0]
    kept_rows = np.nonzero(row_alive)[0]
    return A, b, fixed, kept_vars, kept_rows, offset


def solve(prog: ConicProgram, options: SolverOptions | None = None) -> SolveReport:
    """Solve a program, returning a report in the original indexing."""
    opts = options or SolverOptions()
    n = prog.n_vars

    A_full, b_full, fixed, kept_vars, kept_rows, obj_offset = _eliminate_fixed(prog)
    free_pos = {int(j): k for k, j in enumerate(kept_vars)}
    nfree = kept_vars.size

    # values pinned by the equalities must still respect their bounds
    fixed_mask_all = ~np.isnan(fixed)
    for j in np.nonzero(fixed_mask_all)[0]:
        if fixed[j] < prog.lb[j] - 1e-9 or fixed[j] > prog.ub[j] + 1e-9:
            return SolveReport(INFEASIBLE, None, None, np.inf, np.inf, np.inf, 0)

    # Trivial case: everything fixed by the equalities.
    if nfree == 0:
        x = fixed.copy()
        if prog.nonneg_G is not None:
            residual = prog.nonneg_G @ x + prog.nonneg_h
            if residual.min(initial=0.0) < -1e-9:
                return SolveReport(INFEASIBLE, None, None, np.inf, np.inf, np.inf, 0)
        for blk in prog.psd_blocks:
            if np.linalg.eigvalsh(blk.evaluate(x)).min() < -1e-9:
                return SolveReport(INFEASIBLE, None, None, np.inf, np.inf, np.inf, 0)
        return SolveReport(
            status=OPTIMAL,
            objective=float(obj_offset),
            x=x,
            duality_gap=0.0,
            primal_residual=0.0,
            dual_residual=0.0,
            iterations=0,
            eq_duals=None,
        )

    # --- equality rows (scaled to unit max-norm) ---------------------------
    A_red = A_full[np.ix_(kept_rows, kept_vars)]
    b_red = b_full[kept_rows]
    eq_scale = np.ones(A_red.shape[0])
    if A_red.shape[0]:
        eq_scale = np.abs(A_red).max(axis=1)
        degenerate = eq_scale <= 0.0
        if np.any(degenerate):
            if np.any(np.abs(b_red[degenerate]) > 1e-12):
                return SolveReport(INFEASIBLE, None, None, np.inf, np.inf, np.inf, 0)
            keep = ~degenerate
            A_red, b_red, eq_scale = A_red[keep], b_red[keep], eq_scale[keep]
            kept_rows = kept_rows[keep]
        A_red = A_red / eq_scale[:, None]
        b_red = b_red / eq_scale

    # --- inequality (l-cone) rows as sparse triplets -----------------------
    tri_v: list[float] = []
    tri_i: list[int] = []
    tri_j: list[int] = []
    h_list: list[float] = []
    row = 0
    constant_row_violated = False

    def add_row(cols: np.ndarray, coeffs: np.ndarray, rhs: float) -> None:
        # row means coeffs @ x <= rhs  in cvxopt's  G x <= h  form
        nonlocal row, constant_row_violated
        norm = np.abs(coeffs).max(initial=0.0)
        if norm == 0.0:
            if rhs < -1e-12:  # 0 <= rhs is violated outright
                constant_row_violated = True
            return
        scale = max(norm, abs(rhs))
        for c, v in zip(cols, coeffs):
            if v != 0.0:
                tri_v.append(float(v / scale))
                tri_i.append(row)
                tri_j.append(int(c))
        h_list.append(float(rhs / scale))
        row += 1

    # variable bounds
    for j_orig in kept_vars:
        k = free_pos[int(j_orig)]
        lo, hi = prog.lb[j_orig], prog.ub[j_orig]
        if np.isfinite(lo):
            add_row(np.array([k]), np.array([-1.0]), -float(lo))
        if np.isfinite(hi):
            add_row(np.array([k]), np.array([1.0]), float(hi))
    # general nonneg rows:  G x + h >= 0   ->   (-G) x <= h
    if prog.nonneg_G is not None:
        for i in range(prog.nonneg_G.shape[0]):
            g = prog.nonneg_G[i]
            rhs = prog.nonneg_h[i]
            fixed_mask = ~np.isnan(fixed)
            rhs = rhs + float(g[fixed_mask] @ fixed[fixed_mask])
            cols = np.array([free_pos[int(j)] for j in kept_vars])
            add_row(cols, -g[kept_vars], rhs)
    l_rows = row
    if constant_row_violated:
        return SolveReport(INFEASIBLE, None, None, np.inf, np.inf, np.inf, 0)

    # --- PSD blocks --------------------------------------------------------
    psd_sizes = []
    for blk in prog.psd_blocks:
        m = blk.size
        psd_sizes.append(m)
        F0 = blk.constant_matrix()
        fixed_mask = ~np.isnan(fixed)
        if fixed_mask.any():
            sel = fixed_mask[blk.var_idx]
            if sel.any():
                np.add.at(
                    F0,
                    (blk.var_rows[sel], blk.var_cols[sel]),
                    blk.var_coeff[sel] * fixed[blk.var_idx[sel]],
                )
        # s-cone in cvxopt:  h - G x  must be PSD (vectorised column-major)
        h_list.extend(F0.ravel(order="F").tolist())
        sel = ~fixed_mask[blk.var_idx] if fixed_mask.any() else np.ones(blk.var_idx.size, bool)
        rr = blk.var_rows[sel]
        cc = blk.var_cols[sel]
        jj = blk.var_idx[sel]
        vv = blk.var_coeff[sel]
        vecpos = row + cc * m + rr  # column-major position within this block
        for p, j, v in zip(vecpos, jj, vv):
            tri_v.append(float(-v))
            tri_i.append(int(p))
            tri_j.append(free_pos[int(j)])
        row += m * m

    # --- hand off to the interior-point method -----------------------------
    c_min = cvx_matrix(-prog.objective[kept_vars])
    G = cvx_spmatrix(tri_v, tri_i, tri_j, size=(row, nfree))
    h = cvx_matrix(np.asarray(h_list))
    dims = {"l": l_rows, "q": [], "s": psd_sizes}
    kwargs = {}
    if A_red.shape[0]:
        kwargs["A"] = cvx_matrix(A_red)
        kwargs["b"] = cvx_matrix(b_red)

    def attempt(regularised: bool):
        cvx_opts = opts.to_cvxopt()
        extra = {}
        if regularised:
            cvx_opts["kktreg"] = 1e-9
            extra["kktsolver"] = "ldl"
        try:
            sol = cvx_solvers.conelp(
                c_min, G, h, dims=dims, options=cvx_opts, **kwargs, **extra
            )
        except (ValueError, ArithmeticError, ZeroDivisionError):
            return NUMERICAL_FAILURE, None, np.inf, np.inf, np.inf, 0
        iterations = int(sol.get("iterations", 0))
        # gap relative to the objective scale (so a zero optimum is not
        # penalised by the solver's purely relative measure)
        absgap = sol.get("gap")
        if absgap is None:
            gap = np.inf
        else:
            scale = max(
                1.0,
                abs(sol["primal objective"] or 0.0),
                abs(sol["dual objective"] or 0.0),
            )
            gap = float(absgap) / scale
        pres = sol["primal infeasibility"]
        pres = float(pres) if pres is not None else np.inf
        dres = sol["dual infeasibility"]
        dres = float(dres) if dres is not None else np.inf
        status = sol["status"]
        if status == "optimal":
            ok = (
                gap <= opts.accept_gap
                and pres <= opts.accept_residual
                and dres <= opts.accept_residual
            )
            mapped = OPTIMAL if ok else NUMERICAL_FAILURE
        elif status == "primal infeasible":
            mapped = INFEASIBLE
        elif status == "unknown" and iterations >= opts.maxiters:
            mapped = ITER_LIMIT
        else:  # 'dual infeasible' (unbounded) or stalled
            mapped = NUMERICAL_FAILURE
        return mapped, sol, gap, pres, dres, iterations

    mapped, sol, gap, pres, dres, iterations = attempt(regularised=False)
    if mapped in (NUMERICAL_FAILURE, ITER_LIMIT) and opts.kkt_rescue:
        mapped, sol, gap, pres, dres, iterations = attempt(regularised=True)

    if mapped != OPTIMAL:
        return SolveReport(mapped, None, None, gap, pres, dres, iterations)

    x = fixed.copy()
    x[kept_vars] = np.asarray(sol["x"]).ravel()
    objective = float(prog.objective[kept_vars] @ x[kept_vars] + obj_offset)

    eq_duals = None
    if prog.eq_A is not None and sol.get("y") is not None:
        eq_duals = np.full(prog.eq_A.shape[0], np.nan)
        y = np.asarray(sol["y"]).ravel()
        if y.size == kept_rows.size:
            # undo row scaling; for  max obj.x s.t. Ax=b, x>=0  these satisfy
            # A' y >= obj with b'y equal to the optimum (standard dual)
            eq_duals[kept_rows] = y / eq_scale
    return SolveReport(
        status=OPTIMAL,
        objective=objective,
        x=x,
        duality_gap=gap,
        primal_residual=pres,
        dual_residual=dres,
        iterations=iterations,
        eq_duals=eq_duals,
    )
