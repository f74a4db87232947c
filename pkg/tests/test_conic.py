"""Solver wrapper: LP and SDP oracles, duality, certificates, determinism."""

import numpy as np
import pytest

from bellvol.conic import (
    ConicProgram,
    PsdBlock,
    SolveReport,
    SolverOptions,
    solve,
)
from bellvol.errors import DomainError


def _simple_box_lp():
    # max x + y  on the unit square -> 2 at (1, 1)
    return ConicProgram(
        n_vars=2,
        objective=np.array([1.0, 1.0]),
        lb=np.zeros(2),
        ub=np.ones(2),
    )


def test_lp_box_oracle():
    rep = solve(_simple_box_lp())
    assert rep.status == "Optimal"
    assert abs(rep.objective - 2.0) <= 1e-7
    np.testing.assert_allclose(rep.x, [1.0, 1.0], atol=1e-6)
    assert rep.duality_gap <= 1e-8
    assert rep.primal_residual <= 1e-8


def test_lp_equality_and_duals():
    # max x1 + 2 x2  s.t.  x1 + x2 = 1, x >= 0  -> optimum 2 at (0, 1)
    prog = ConicProgram(
        n_vars=2,
        objective=np.array([1.0, 2.0]),
        eq_A=np.array([[1.0, 1.0]]),
        eq_b=np.array([1.0]),
        lb=np.zeros(2),
    )
    rep = solve(prog)
    assert rep.status == "Optimal"
    assert abs(rep.objective - 2.0) <= 1e-7
    # standard dual of the maximisation: A'y >= obj, b'y == optimum
    y = rep.eq_duals
    assert y is not None
    assert y[0] >= 2.0 - 1e-6
    assert abs(y[0] * 1.0 - rep.objective) <= 1e-6


def test_lp_scaling_robustness():
    # multiplying every equality row by 1000 must not move the optimum
    prog1 = ConicProgram(
        n_vars=3,
        objective=np.array([0.0, 0.0, 1.0]),
        eq_A=np.array([[1.0, 1.0, 0.5], [0.3, 0.7, -0.2]]),
        eq_b=np.array([1.0, 0.4]),
        lb=np.zeros(3),
        ub=np.array([np.inf, np.inf, 10.0]),
    )
    prog2 = ConicProgram(
        n_vars=3,
        objective=np.array([0.0, 0.0, 1.0]),
        eq_A=1000.0 * np.array([[1.0, 1.0, 0.5], [0.3, 0.7, -0.2]]),
        eq_b=1000.0 * np.array([1.0, 0.4]),
        lb=np.zeros(3),
        ub=np.array([np.inf, np.inf, 10.0]),
    )
    r1, r2 = solve(prog1), solve(prog2)
    assert r1.status == r2.status == "Optimal"
    assert abs(r1.objective - r2.objective) <= 1e-6


def test_lp_infeasible_detected():
    prog = ConicProgram(
        n_vars=1,
        objective=np.array([1.0]),
        eq_A=np.array([[1.0]]),
        eq_b=np.array([2.0]),
        lb=np.zeros(1),
        ub=np.ones(1),
    )
    rep = solve(prog)
    assert rep.status == "Infeasible"
    assert rep.objective is None


def test_fixed_variable_elimination():
    # x0 pinned to 0.25 by a singleton row; objective includes it
    prog = ConicProgram(
        n_vars=2,
        objective=np.array([1.0, 1.0]),
        eq_A=np.array([[4.0, 0.0]]),
        eq_b=np.array([1.0]),
        lb=np.zeros(2),
        ub=np.ones(2),
    )
    rep = solve(prog)
    assert rep.status == "Optimal"
    assert abs(rep.x[0] - 0.25) <= 1e-9
    assert abs(rep.objective - 1.25) <= 1e-6


def test_all_variables_fixed():
    prog = ConicProgram(
        n_vars=2,
        objective=np.array([2.0, 3.0]),
        eq_A=np.array([[1.0, 0.0], [0.0, 2.0]]),
        eq_b=np.array([0.5, 1.0]),
    )
    rep = solve(prog)
    assert rep.status == "Optimal"
    np.testing.assert_allclose(rep.x, [0.5, 0.5])
    assert abs(rep.objective - 2.5) <= 1e-12


def _two_by_two_sdp():
    # max t  s.t.  [[1, t], [t, 1]] >= 0  -> t* = 1
    blk = PsdBlock(
        size=2,
        var_rows=[0, 1],
        var_cols=[1, 0],
        var_idx=[0, 0],
        var_coeff=[1.0, 1.0],
        const_rows=[0, 1],
        const_cols=[0, 1],
        const_vals=[1.0, 1.0],
    )
    return ConicProgram(
        n_vars=1,
        objective=np.array([1.0]),
        lb=np.array([-10.0]),
        ub=np.array([10.0]),
        psd_blocks=[blk],
    )


def test_sdp_correlation_oracle():
    rep = solve(_two_by_two_sdp())
    assert rep.status == "Optimal"
    assert abs(rep.objective - 1.0) <= 1e-6


def test_sdp_eigenvalue_certificate():
    prog = _two_by_two_sdp()
    rep = solve(prog)
    F = prog.psd_blocks[0].evaluate(rep.x)
    w = np.linalg.eigvalsh(F)
    assert w.min() >= -1e-7 * (1.0 + np.abs(F).max())


def test_sdp_with_general_nonneg_row():
    # max t  s.t.  [[1, t],[t, 1]] >= 0  and  0.5 - t >= 0
    prog = _two_by_two_sdp()
    prog.nonneg_G = np.array([[-1.0]])
    prog.nonneg_h = np.array([0.5])
    rep = solve(prog)
    assert rep.status == "Optimal"
    assert abs(rep.objective - 0.5) <= 1e-6


def test_mixed_lp_sdp_cones():
    # max x0 + t: x0 <= 0.3 (l-cone), t constrained by the PSD block
    blk = PsdBlock(
        size=2,
        var_rows=[0, 1],
        var_cols=[1, 0],
        var_idx=[1, 1],
        var_coeff=[1.0, 1.0],
        const_rows=[0, 1],
        const_cols=[0, 1],
        const_vals=[1.0, 1.0],
    )
    prog = ConicProgram(
        n_vars=2,
        objective=np.array([1.0, 1.0]),
        lb=np.array([0.0, -10.0]),
        ub=np.array([0.3, 10.0]),
        psd_blocks=[blk],
    )
    rep = solve(prog)
    assert rep.status == "Optimal"
    assert abs(rep.objective - 1.3) <= 1e-6


def test_two_psd_blocks():
    # max t1 + t2, each bounded by its own 2x2 correlation block
    def blk(idx):
        return PsdBlock(
            size=2,
            var_rows=[0, 1],
            var_cols=[1, 0],
            var_idx=[idx, idx],
            var_coeff=[1.0, 1.0],
            const_rows=[0, 1],
            const_cols=[0, 1],
            const_vals=[1.0, 1.0],
        )

    prog = ConicProgram(
        n_vars=2,
        objective=np.ones(2),
        lb=np.array([-10.0, -10.0]),
        ub=np.array([10.0, 10.0]),
        psd_blocks=[blk(0), blk(1)],
    )
    rep = solve(prog)
    assert rep.status == "Optimal"
    assert abs(rep.objective - 2.0) <= 1e-6


def test_psd_dimension_cap():
    blk = PsdBlock(
        size=401,
        var_rows=[0],
        var_cols=[0],
        var_idx=[0],
        var_coeff=[1.0],
        const_rows=[],
        const_cols=[],
        const_vals=[],
    )
    with pytest.raises(DomainError):
        ConicProgram(n_vars=1, objective=np.array([1.0]), psd_blocks=[blk])


def test_deterministic_repeat():
    prog = _two_by_two_sdp()
    r1 = solve(prog)
    r2 = solve(prog)
    assert r1.objective == r2.objective
    assert np.array_equal(r1.x, r2.x)
    assert r1.iterations == r2.iterations


def test_report_shape_validation():
    with pytest.raises(DomainError):
        ConicProgram(n_vars=2, objective=np.array([1.0]))
    with pytest.raises(DomainError):
        ConicProgram(
            n_vars=1,
            objective=np.array([1.0]),
            eq_A=np.array([[1.0, 2.0]]),
            eq_b=np.array([1.0]),
        )


def test_weak_duality_reported_gap():
    rep = solve(_simple_box_lp())
    # the relative gap bound implies near-equality of primal and dual values
    assert rep.duality_gap <= SolverOptions().accept_gap
