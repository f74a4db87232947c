"""Tests for visibility-based membership and battery orchestration.

Visibility oracles: the two-setting two-outcome extreme nonsignaling box has
local visibility 1/2 and quantum-relaxation visibility 1/sqrt(2); with a
partial-transpose restriction the visibility drops back to 1/2.
"""

import math

import numpy as np
import pytest
from fractions import Fraction

from bellvol.errors import DomainError
from bellvol.membership import (
    INSIDE_TOL,
    BatteryResult,
    MembershipTester,
    Target,
    estimated_cost,
    implies_membership,
    parse_target,
    resolve_workers,
    test_battery as run_battery,
    test_point as run_point,
)
from bellvol.polytope import ns_polytope, sample_uniform
from bellvol.scenario import (
    BellScenario,
    deterministic_vertex_cg,
    pr_box,
    white_noise,
)

INV_SQRT2 = 1.0 / math.sqrt(2.0)


@pytest.fixture(scope="module")
def sc22():
    return BellScenario(2, 2)


@pytest.fixture(scope="module")
def samples22():
    X, _ = sample_uniform(ns_polytope(BellScenario(2, 2)), 25, 20240817)
    return X


# ---------------------------------------------------------------------------
# target parsing and the inclusion order
# ---------------------------------------------------------------------------


class TestTargets:
    @pytest.mark.parametrize(
        "text,family,level",
        [
            ("L", "L", None),
            ("Q1", "Q", Fraction(1)),
            ("Q2", "Q", Fraction(2)),
            ("Qt1", "Qt", Fraction(1)),
            ("Qt1.5", "Qt", Fraction(3, 2)),
            ("P1", "P", Fraction(1)),
            ("P1.25", "P", Fraction(5, 4)),
            ("M2", "M", Fraction(2)),
        ],
    )
    def test_parse_round_trip(self, text, family, level):
        t = parse_target(text)
        assert t.family == family
        assert t.level == level
        assert t.label == text
        assert parse_target(t) is t

    @pytest.mark.parametrize("bad", ["", "X1", "Q", "L2", "Q0.5", "Qabc"])
    def test_parse_rejects(self, bad):
        with pytest.raises((DomainError, Exception)):
            parse_target(bad)

    def test_level_text(self):
        assert parse_target("Qt1.5").level_text == "1.5"
        assert parse_target("L").level_text == ""

    @pytest.mark.parametrize(
        "a,b,expected",
        [
            ("L", "Q1", True),
            ("L", "Qt2", True),
            ("L", "P1", True),
            ("L", "M1", False),
            ("Q2", "Q1", True),
            ("Q1", "Q2", False),
            ("Qt1", "Q1", True),
            ("Qt2", "Q1", True),
            ("Qt1", "Q2", False),
            ("P2", "Qt1", True),
            ("P1", "Qt2", False),
            ("P1", "Q1", True),
            ("M2", "M1", True),
            ("M1", "Q1", False),
            ("Q1", "M1", False),
            ("Q1", "L", False),
            ("P1", "L", False),
        ],
    )
    def test_implies(self, a, b, expected):
        assert implies_membership(parse_target(a), parse_target(b)) is expected

    def test_implies_reflexive(self):
        for label in ["L", "Q1", "Qt1.5", "P1", "M2"]:
            t = parse_target(label)
            assert implies_membership(t, t)

    def test_cost_ordering(self, sc22):
        cL = estimated_cost(sc22, parse_target("L"))
        cQ1 = estimated_cost(sc22, parse_target("Q1"))
        cQt1 = estimated_cost(sc22, parse_target("Qt1"))
        cP1 = estimated_cost(sc22, parse_target("P1"))
        assert cL < cQ1 < cQt1 < cP1
        assert cP1 == 2 * cQt1  # two blocks of the same size


# ---------------------------------------------------------------------------
# single-point oracles
# ---------------------------------------------------------------------------


class TestPointOracles:
    def test_box_local_visibility(self, sc22):
        out = run_point(sc22, pr_box().vec, "L")
        assert out.status == "optimal"
        assert out.v_star == pytest.approx(0.5, abs=1e-6)
        assert not out.inside

    @pytest.mark.parametrize("target", ["Q1", "Qt1", "Qt2", "M1", "M2"])
    def test_box_quantum_visibility(self, sc22, target):
        out = run_point(sc22, pr_box().vec, target)
        assert out.status == "optimal"
        assert out.v_star == pytest.approx(INV_SQRT2, abs=1e-6)
        assert not out.inside

    def test_box_ppt_visibility_matches_local(self, sc22):
        # partial-transpose positivity forbids any violation in this scenario
        out = run_point(sc22, pr_box().vec, "P1")
        assert out.v_star == pytest.approx(0.5, abs=1e-6)

    def test_white_noise_hits_cap(self, sc22):
        out = run_point(sc22, white_noise(sc22).vec, "Q1")
        assert out.inside
        assert out.v_star == pytest.approx(10.0, abs=1e-5)

    def test_deterministic_vertex_on_boundary(self, sc22):
        det = deterministic_vertex_cg(sc22, (1, 1), (1, 1))
        for target in ["L", "Q1"]:
            out = run_point(sc22, det, target)
            assert out.inside
            assert out.v_star == pytest.approx(1.0, abs=1e-6)

    def test_quantum_boundary_point(self, sc22):
        mix = INV_SQRT2 * pr_box().vec + (1 - INV_SQRT2) * white_noise(sc22).vec
        out = run_point(sc22, mix, "Q1")
        assert out.inside
        assert out.v_star == pytest.approx(1.0, abs=1e-6)
        outl = run_point(sc22, mix, "L")
        assert not outl.inside
        assert outl.v_star == pytest.approx(0.5 / INV_SQRT2, abs=1e-6)

    def test_vstar_not_clamped_above_one(self, sc22):
        # a strictly interior point has visibility well above 1
        mix = 0.3 * pr_box().vec + 0.7 * white_noise(sc22).vec
        out = run_point(sc22, mix, "Q1")
        assert out.inside
        assert out.v_star > 1.5

    def test_tester_reuse_is_consistent(self, sc22, samples22):
        tester = MembershipTester(sc22, "Qt1")
        a = [tester.test(x).v_star for x in samples22[:5]]
        b = [run_point(sc22, x, "Qt1").v_star for x in samples22[:5]]
        assert a == pytest.approx(b, abs=1e-9)

    def test_bad_vector_length(self, sc22):
        with pytest.raises(DomainError):
            run_point(sc22, np.zeros(5), "Q1")


# ---------------------------------------------------------------------------
# batteries
# ---------------------------------------------------------------------------


class TestBattery:
    def test_chain_inequalities(self, sc22, samples22):
        res = run_battery(
            sc22, samples22, ["L", "P1", "Qt1", "Q1"], need_vstar=True
        )
        v = res.v_star
        cL, cP, cQt, cQ = (res.column(t) for t in ["L", "P1", "Qt1", "Q1"])
        assert np.all(v[:, cL] <= v[:, cP] + 1e-7)
        assert np.all(v[:, cP] <= v[:, cQt] + 1e-7)
        assert np.all(v[:, cQt] <= v[:, cQ] + 1e-7)
        assert res.qa_ok
        assert set(np.unique(res.status)) == {"optimal"}

    def test_propagation_matches_full_run(self, sc22, samples22):
        targets = ["L", "P1", "Qt1", "Q1"]
        full = run_battery(sc22, samples22, targets, need_vstar=True)
        prop = run_battery(
            sc22, samples22, targets, need_vstar=False, propagate=True
        )
        assert np.array_equal(full.inside, prop.inside)
        assert "derived" in set(np.unique(prop.status))
        # derived verdicts carry no visibility
        derived = prop.status == "derived"
        assert np.all(np.isnan(prop.v_star[derived]))

    def test_tracial_gated_by_tightest_quantum_target(self, sc22):
        box = pr_box().vec[None, :]
        res = run_battery(sc22, box, ["Q1", "M1"], need_vstar=True)
        cM = res.column("M1")
        assert res.status[0, cM] == "derived"
        assert not res.inside[0, cM]
        noise = white_noise(sc22).vec[None, :]
        res2 = run_battery(sc22, noise, ["Q1", "M1"], need_vstar=True)
        assert res2.status[0, res2.column("M1")] == "optimal"
        assert res2.inside[0, res2.column("M1")]

    def test_tracial_ungated_without_quantum_targets(self, sc22):
        box = pr_box().vec[None, :]
        res = run_battery(sc22, box, ["L", "M1"], need_vstar=True)
        assert res.status[0, res.column("M1")] == "optimal"

    def test_rows_format(self, sc22, samples22):
        res = run_battery(sc22, samples22[:3], ["L", "Q1"], need_vstar=True)
        rows = list(res.rows())
        assert len(rows) == 6
        sid, label, level, v, inside, status = rows[0]
        assert sid == 0 and label == "L" and level == ""
        assert status == "optimal" and inside in (0, 1)
        assert float(v) > 0

    def test_sample_ids_respected(self, sc22, samples22):
        ids = np.array([10, 20, 30])
        res = run_battery(
            sc22, samples22[:3], ["L"], sample_ids=ids, need_vstar=True
        )
        assert [r[0] for r in res.rows()] == [10, 20, 30]

    def test_duplicate_targets_dropped(self, sc22, samples22):
        res = run_battery(sc22, samples22[:2], ["Q1", "Q1", "L"], need_vstar=True)
        assert res.labels == ["Q1", "L"]

    def test_worker_count_invariance(self, sc22, samples22):
        one = run_battery(sc22, samples22[:8], ["L", "Q1"], workers=1)
        two = run_battery(sc22, samples22[:8], ["L", "Q1"], workers=2)
        assert np.array_equal(one.inside, two.inside)
        assert np.allclose(one.v_star, two.v_star, equal_nan=True)
        assert np.array_equal(one.status, two.status)

    def test_shape_validation(self, sc22):
        with pytest.raises(DomainError):
            run_battery(sc22, np.zeros((3, 5)), ["L"])
        with pytest.raises(DomainError):
            run_battery(sc22, np.zeros((3, 8)), [])
        with pytest.raises(DomainError):
            run_battery(
                sc22, np.zeros((3, 8)), ["L"], sample_ids=np.arange(2)
            )


class TestWorkers:
    def test_default_is_one(self, monkeypatch):
        monkeypatch.delenv("BELLVOL_WORKERS", raising=False)
        assert resolve_workers() == 1

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("BELLVOL_WORKERS", "3")
        assert resolve_workers() == 3

    def test_argument_beats_env(self, monkeypatch):
        monkeypatch.setenv("BELLVOL_WORKERS", "3")
        assert resolve_workers(2) == 2

    def test_invalid_env(self, monkeypatch):
        monkeypatch.setenv("BELLVOL_WORKERS", "lots")
        with pytest.raises(DomainError):
            resolve_workers()

    def test_nonpositive_rejected(self):
        with pytest.raises(DomainError):
            resolve_workers(0)
