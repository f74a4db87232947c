"""Relative-volume estimates and summary statistics over battery verdicts.

The relative volume of a set is the fraction of uniform polytope samples the
membership test places inside it, with a 99% Wilson score interval.  Samples
whose solve failed are excluded from both numerator and denominator; a
failure share above 0.1% trips the quality flag.  Visibilities feed summary
statistics, prefix convergence series, and a crude product-form lower-bound
extrapolation for the local volume across scenario sizes.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass
from math import comb, sqrt

import numpy as np

from .errors import DomainError
from .membership import STATUS_FAILED, STATUS_OPTIMAL, BatteryResult, parse_target

__all__ = [
    "Z99",
    "wilson_interval",
    "RvEstimate",
    "estimate_rv",
    "estimate_rv_all",
    "NonlocalFraction",
    "nonlocal_fraction",
    "VisibilityStats",
    "visibility_stats",
    "convergence_series",
    "naive_subcorrelation_bound",
    "q_star_star",
    "write_report_bundle",
]

# two-sided 99% normal quantile
Z99 = 2.5758293035489004

MAX_FAILURE_FRACTION = 1e-3


def wilson_interval(k: int, n: int, z: float = Z99) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion k/n."""
    if n <= 0:
        raise DomainError("the interval needs at least one trial")
    if not 0 <= k <= n:
        raise DomainError("successes must lie in [0, n]")
    p = k / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = (z / denom) * sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class RvEstimate:
    """Relative volume of one target set from one battery."""

    target: str
    level: str
    n_total: int
    n_valid: int
    n_inside: int
    rv: float
    ci_lo: float
    ci_hi: float
    failure_fraction: float

    @property
    def qa_ok(self) -> bool:
        return self.failure_fraction <= MAX_FAILURE_FRACTION


def estimate_rv(battery: BatteryResult, target) -> RvEstimate:
    t = parse_target(target)
    col = battery.column(t)
    status = battery.status[:, col]
    valid = status != STATUS_FAILED
    n_total = status.size
    n_valid = int(valid.sum())
    if n_valid == 0:
        raise DomainError(f"no valid verdicts for target {t.label!r}")
    n_inside = int(battery.inside[valid, col].sum())
    lo, hi = wilson_interval(n_inside, n_valid)
    return RvEstimate(
        target=t.label,
        level=t.level_text,
        n_total=n_total,
        n_valid=n_valid,
        n_inside=n_inside,
        rv=n_inside / n_valid,
        ci_lo=lo,
        ci_hi=hi,
        failure_fraction=1.0 - n_valid / n_total,
    )


def estimate_rv_all(battery: BatteryResult) -> list[RvEstimate]:
    return [estimate_rv(battery, t) for t in battery.targets]


@dataclass
class NonlocalFraction:
    """Share of a set's samples that fall outside the local polytope."""

    target: str
    n_matched: int
    n_inside: int
    n_nonlocal: int
    fraction: float


def nonlocal_fraction(
    battery: BatteryResult,
    target,
    *,
    local_battery: BatteryResult | None = None,
    local_target="L",
) -> NonlocalFraction:
    """Among samples inside ``target``, the fraction not inside the local set.

    Verdicts are matched by sample id (so the two columns may come from
    different runs); rows where either verdict failed are dropped.
    """
    t = parse_target(target)
    lb = local_battery if local_battery is not None else battery
    lt = parse_target(local_target)
    col_t = battery.column(t)
    col_l = lb.column(lt)

    ids_t = battery.sample_ids
    ids_l = lb.sample_ids
    common, idx_t, idx_l = np.intersect1d(ids_t, ids_l, return_indices=True)
    if common.size == 0:
        raise DomainError("no samples shared between the two verdict sets")
    ok = (battery.status[idx_t, col_t] != STATUS_FAILED) & (
        lb.status[idx_l, col_l] != STATUS_FAILED
    )
    inside_t = battery.inside[idx_t, col_t][ok]
    inside_l = lb.inside[idx_l, col_l][ok]
    n_inside = int(inside_t.sum())
    n_nonlocal = int((inside_t & ~inside_l).sum())
    return NonlocalFraction(
        target=t.label,
        n_matched=int(ok.sum()),
        n_inside=n_inside,
        n_nonlocal=n_nonlocal,
        fraction=n_nonlocal / n_inside if n_inside else 0.0,
    )


@dataclass
class VisibilityStats:
    """Summary of the computed visibilities for one target."""

    target: str
    n: int
    v_max: float
    v_min: float
    v_mean: float
    v_std: float  # population standard deviation
    within_one_sigma: float

    @classmethod
    def from_values(cls, target: str, values: np.ndarray) -> "VisibilityStats":
        if values.size == 0:
            raise DomainError(f"no visibilities recorded for target {target!r}")
        mean = float(values.mean())
        std = float(values.std())  # ddof=0
        inside_band = (values >= mean - std) & (values <= mean + std)
        return cls(
            target=target,
            n=int(values.size),
            v_max=float(values.max()),
            v_min=float(values.min()),
            v_mean=mean,
            v_std=std,
            within_one_sigma=float(inside_band.mean()),
        )


def visibility_stats(battery: BatteryResult, target) -> VisibilityStats:
    t = parse_target(target)
    col = battery.column(t)
    solved = battery.status[:, col] == STATUS_OPTIMAL
    values = battery.v_star[solved, col]
    values = values[~np.isnan(values)]
    return VisibilityStats.from_values(t.label, values)


def convergence_series(
    battery: BatteryResult, target, n_points: int = 20
) -> list[RvEstimate]:
    """Prefix relative-volume estimates at log-spaced sample counts.

    The last entry always uses every sample, so it matches ``estimate_rv``.
    """
    t = parse_target(target)
    col = battery.column(t)
    n = battery.sample_ids.size
    if n < 1:
        raise DomainError("empty battery")
    lo = min(10, n)
    counts = np.unique(
        np.round(np.logspace(np.log10(lo), np.log10(n), n_points)).astype(int)
    )
    counts = counts[(counts >= 1) & (counts <= n)]
    if counts[-1] != n:
        counts = np.append(counts, n)
    out = []
    status = battery.status[:, col]
    inside = battery.inside[:, col]
    for m in counts:
        valid = status[:m] != STATUS_FAILED
        n_valid = int(valid.sum())
        if n_valid == 0:
            continue
        k = int(inside[:m][valid].sum())
        lo_ci, hi_ci = wilson_interval(k, n_valid)
        out.append(
            RvEstimate(
                target=t.label,
                level=t.level_text,
                n_total=int(m),
                n_valid=n_valid,
                n_inside=k,
                rv=k / n_valid,
                ci_lo=lo_ci,
                ci_hi=hi_ci,
                failure_fraction=1.0 - n_valid / m,
            )
        )
    return out


def naive_subcorrelation_bound(p: float, s_from: int, s_to: int) -> float:
    """Product-form extrapolation of a local volume across setting counts.

    Treats the ``C(s_to, s_from)**2`` sub-blocks of settings as if they were
    independent, each locally behaved with probability ``p``.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError("the base probability must lie in [0, 1]")
    if s_from < 1 or s_to < s_from:
        raise DomainError("need 1 <= s_from <= s_to")
    return p ** (comb(s_to, s_from) ** 2)


def q_star_star(rv_by_target: dict) -> str:
    """The quantum-approximation label with the smallest relative volume."""
    if not rv_by_target:
        raise DomainError("no relative volumes given")
    items = sorted(rv_by_target.items(), key=lambda kv: (kv[1], kv[0]))
    return items[0][0]


# ---------------------------------------------------------------------------
# report bundle
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def write_report_bundle(
    directory,
    battery: BatteryResult,
    *,
    manifest_extra: dict | None = None,
) -> dict:
    """Write rv_table.csv, nonlocal_fractions.csv, visibility_stats.csv,
    convergence.csv, verdicts.csv and manifest.json into a directory.

    Returns the manifest dictionary.  Output bytes depend only on the battery
    content, not on worker count or timing.
    """
    os.makedirs(directory, exist_ok=True)
    estimates = estimate_rv_all(battery)

    with open(os.path.join(directory, "rv_table.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            [
                "target",
                "level",
                "n_total",
                "n_valid",
                "n_inside",
                "rv",
                "ci_lo",
                "ci_hi",
                "failure_fraction",
            ]
        )
        for e in estimates:
            w.writerow(
                [
                    e.target,
                    e.level,
                    e.n_total,
                    e.n_valid,
                    e.n_inside,
                    _fmt(e.rv),
                    _fmt(e.ci_lo),
                    _fmt(e.ci_hi),
                    _fmt(e.failure_fraction),
                ]
            )

    labels = battery.labels
    with open(
        os.path.join(directory, "nonlocal_fractions.csv"), "w", newline=""
    ) as fh:
        w = csv.writer(fh)
        w.writerow(["target", "n_matched", "n_inside", "n_nonlocal", "fraction"])
        if "L" in labels:
            for t in battery.targets:
                if t.label == "L":
                    continue
                f = nonlocal_fraction(battery, t)
                w.writerow(
                    [f.target, f.n_matched, f.n_inside, f.n_nonlocal, _fmt(f.fraction)]
                )

    with open(
        os.path.join(directory, "visibility_stats.csv"), "w", newline=""
    ) as fh:
        w = csv.writer(fh)
        w.writerow(
            ["target", "n", "v_max", "v_min", "v_mean", "v_std", "within_one_sigma"]
        )
        for t in battery.targets:
            col = battery.column(t)
            solved = battery.status[:, col] == STATUS_OPTIMAL
            values = battery.v_star[solved, col]
            values = values[~np.isnan(values)]
            if values.size == 0:
                continue
            s = VisibilityStats.from_values(t.label, values)
            w.writerow(
                [
                    s.target,
                    s.n,
                    _fmt(s.v_max),
                    _fmt(s.v_min),
                    _fmt(s.v_mean),
                    _fmt(s.v_std),
                    _fmt(s.within_one_sigma),
                ]
            )

    with open(os.path.join(directory, "convergence.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["target", "n_total", "n_valid", "n_inside", "rv", "ci_lo", "ci_hi"])
        for t in battery.targets:
            for e in convergence_series(battery, t):
                w.writerow(
                    [
                        e.target,
                        e.n_total,
                        e.n_valid,
                        e.n_inside,
                        _fmt(e.rv),
                        _fmt(e.ci_lo),
                        _fmt(e.ci_hi),
                    ]
                )

    with open(os.path.join(directory, "verdicts.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample_id", "target", "level", "v_star", "inside", "status"])
        for row in battery.rows():
            w.writerow(row)

    manifest = {
        "scenario": [battery.scenario.settings, battery.scenario.outcomes],
        "targets": labels,
        "n_samples": int(battery.sample_ids.size),
        "rv": {e.target: e.rv for e in estimates},
        "qa_ok": battery.qa_ok and all(e.qa_ok for e in estimates),
    }
    if manifest_extra:
        manifest.update(manifest_extra)
    with open(os.path.join(directory, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
