"""Bipartite Bell scenarios and minimal (Collins-Gisin) coordinates.

A scenario has two parties, each with `settings` measurement choices and
`outcomes` results per measurement.  A nonsignaling behaviour is stored either
as the full conditional-probability table P(a,b|x,y) or as the minimal
coordinate vector that drops the last outcome of every measurement:

    [ P(a|x)     for x = 1..settings, a = 1..outcomes-1 ]
    [ P(b|y)     for y = 1..settings, b = 1..outcomes-1 ]
    [ P(a,b|x,y) lexicographic in (x, y, a, b), a,b <= outcomes-1 ]

The dropped entries are affine functions of the kept ones (normalisation plus
the nonsignaling marginal identities), so the map between the two forms is an
exact affine bijection on nonsignaling tables.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SignalingInput

__all__ = [
    "BellScenario",
    "Correlation",
    "FullDistribution",
    "white_noise",
    "pr_box",
    "full_from_cg",
    "cg_from_full",
    "reconstruction_map",
    "deterministic_vertex_cg",
    "ns_extreme_point",
    "euclidean_distance",
    "distance_to_white_noise",
    "local_vertex_noise_distance",
    "ns_vertex_noise_distance",
]


@dataclass(frozen=True)
class BellScenario:
    """A bipartite scenario: per-party number of settings and of outcomes."""

    settings: int
    outcomes: int

    def __post_init__(self) -> None:
        if not isinstance(self.settings, int) or not isinstance(self.outcomes, int):
            raise DomainError("settings and outcomes must be integers")
        if self.settings < 1:
            raise DomainError(f"need at least one setting, got {self.settings}")
        if self.outcomes < 2:
            raise DomainError(f"need at least two outcomes, got {self.outcomes}")

    # -- dimensions ---------------------------------------------------------
    @property
    def cg_dim(self) -> int:
        """Dimension of the minimal coordinate vector."""
        s, o = self.settings, self.outcomes
        return (o - 1) ** 2 * s**2 + 2 * s * (o - 1)

    @property
    def full_dim(self) -> int:
        """Number of entries of the full table P(a,b|x,y)."""
        return self.settings**2 * self.outcomes**2

    @property
    def n_local_vertices(self) -> int:
        """Number of deterministic local strategies."""
        return self.outcomes ** (2 * self.settings)

    # -- coordinate indexing (1-based labels, 0-based vector positions) -----
    def marginal_index(self, party: str, outcome: int, setting: int) -> int:
        """Vector position of P(outcome|setting) for party 'A' or 'B'."""
        s, o = self.settings, self.outcomes
        if party not in ("A", "B"):
            raise DomainError(f"party must be 'A' or 'B', got {party!r}")
        if not (1 <= outcome <= o - 1):
            raise DomainError(f"kept outcomes are 1..{o - 1}, got {outcome}")
        if not (1 <= setting <= s):
            raise DomainError(f"settings are 1..{s}, got {setting}")
        base = 0 if party == "A" else s * (o - 1)
        return base + (setting - 1) * (o - 1) + (outcome - 1)

    def joint_index(self, a: int, b: int, x: int, y: int) -> int:
        """Vector position of P(a,b|x,y) with a, b <= outcomes-1."""
        s, o = self.settings, self.outcomes
        for name, val, hi in (("a", a, o - 1), ("b", b, o - 1), ("x", x, s), ("y", y, s)):
            if not (1 <= val <= hi):
                raise DomainError(f"{name}={val} outside 1..{hi}")
        block = ((x - 1) * s + (y - 1)) * (o - 1) ** 2
        return 2 * s * (o - 1) + block + (a - 1) * (o - 1) + (b - 1)

    def cg_labels(self) -> list[str]:
        """Human-readable name of every coordinate, in vector order."""
        s, o = self.settings, self.outcomes
        labels = [f"pA_a{a}_x{x}" for x in range(1, s + 1) for a in range(1, o)]
        labels += [f"pB_b{b}_y{y}" for y in range(1, s + 1) for b in range(1, o)]
        labels += [
            f"pAB_a{a}_b{b}_x{x}_y{y}"
            for x in range(1, s + 1)
            for y in range(1, s + 1)
            for a in range(1, o)
            for b in range(1, o)
        ]
        return labels


@dataclass
class Correlation:
    """A behaviour in minimal coordinates."""

    scenario: BellScenario
    vec: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        self.vec = np.asarray(self.vec, dtype=float)
        if self.vec.shape != (self.scenario.cg_dim,):
            raise DomainError(
                f"expected vector of length {self.scenario.cg_dim}, "
                f"got shape {self.vec.shape}"
            )


@dataclass
class FullDistribution:
    """A behaviour as the full table, indexed [x-1, y-1, a-1, b-1]."""

    scenario: BellScenario
    table: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        self.table = np.asarray(self.table, dtype=float)
        s, o = self.scenario.settings, self.scenario.outcomes
        if self.table.shape != (s, s, o, o):
            raise DomainError(
                f"expected table of shape {(s, s, o, o)}, got {self.table.shape}"
            )


# ---------------------------------------------------------------------------
# Affine map between the two representations
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=None)
def reconstruction_map(scenario: BellScenario) -> tuple[np.ndarray, np.ndarray]:
    """Matrix M and offset m0 with  full_table.ravel() = M @ cg_vec + m0.

    The full table is flattened in C order of its (x, y, a, b) axes.  Rows for
    kept entries are unit rows; rows for dropped entries encode normalisation
    and the nonsignaling marginal identities.
    """
    s, o = scenario.settings, scenario.outcomes
    d = scenario.cg_dim
    M = np.zeros((scenario.full_dim, d))
    m0 = np.zeros(scenario.full_dim)

    def flat(x: int, y: int, a: int, b: int) -> int:
        return ((x - 1) * s + (y - 1)) * o * o + (a - 1) * o + (b - 1)

    for x in range(1, s + 1):
        for y in range(1, s + 1):
            for a in range(1, o + 1):
                for b in range(1, o + 1):
                    r = flat(x, y, a, b)
                    if a < o and b < o:
                        M[r, scenario.joint_index(a, b, x, y)] = 1.0
                    elif a < o:  # b == o: row = P(a|x) - sum_b' P(a,b'|x,y)
                        M[r, scenario.marginal_index("A", a, x)] = 1.0
                        for bp in range(1, o):
                            M[r, scenario.joint_index(a, bp, x, y)] -= 1.0
                    elif b < o:  # a == o
                        M[r, scenario.marginal_index("B", b, y)] = 1.0
                        for ap in range(1, o):
                            M[r, scenario.joint_index(ap, b, x, y)] -= 1.0
                    else:  # both dropped: 1 - sum margA - sum margB + sum joint
                        m0[r] = 1.0
                        for ap in range(1, o):
                            M[r, scenario.marginal_index("A", ap, x)] -= 1.0
                        for bp in range(1, o):
                            M[r, scenario.marginal_index("B", bp, y)] -= 1.0
                        for ap in range(1, o):
                            for bp in range(1, o):
                                M[r, scenario.joint_index(ap, bp, x, y)] += 1.0
    M.setflags(write=False)
    m0.setflags(write=False)
    return M, m0


def full_from_cg(corr: Correlation) -> FullDistribution:
    """Reconstruct the full table from minimal coordinates (exact affine map).

    No positivity check is performed: the reconstruction is defined for any
    vector, which is what the polytope H-representation is built from.
    """
    sc = corr.scenario
    M, m0 = reconstruction_map(sc)
    flat = M @ corr.vec + m0
    return FullDistribution(sc, flat.reshape(sc.settings, sc.settings, sc.outcomes, sc.outcomes))


def cg_from_full(
    full: FullDistribution, *, atol: float = 1e-9, validate: bool = True
) -> Correlation:
    """Project a full table onto minimal coordinates.

    With ``validate`` on, every conditional must be normalised and the
    single-party marginals must not depend on the remote setting
    (``SignalingInput`` otherwise).  Entry positivity is deliberately not
    required so that boundary/affine inputs round-trip exactly.
    """
    sc = full.scenario
    s, o = sc.settings, sc.outcomes
    t = full.table
    mA = t.sum(axis=3)  # [x, y, a]
    mB = t.sum(axis=2)  # [x, y, b]
    if validate:
        norms = t.sum(axis=(2, 3))
        if not np.allclose(norms, 1.0, atol=atol, rtol=0.0):
            raise DomainError("conditional distributions are not normalised")
        if np.abs(mA - mA[:, :1, :]).max() > atol:
            raise SignalingInput("P(a|x) depends on the remote setting y")
        if np.abs(mB - mB[:1, :, :]).max() > atol:
            raise SignalingInput("P(b|y) depends on the remote setting x")
    vec = np.empty(sc.cg_dim)
    margA = mA.mean(axis=1)  # [x, a]
    margB = mB.mean(axis=0)  # [y, b]
    for x in range(1, s + 1):
        for a in range(1, o):
            vec[sc.marginal_index("A", a, x)] = margA[x - 1, a - 1]
    for y in range(1, s + 1):
        for b in range(1, o):
            vec[sc.marginal_index("B", b, y)] = margB[y - 1, b - 1]
    for x in range(1, s + 1):
        for y in range(1, s + 1):
            for a in range(1, o):
                for b in range(1, o):
                    vec[sc.joint_index(a, b, x, y)] = t[x - 1, y - 1, a - 1, b - 1]
    return Correlation(sc, vec)


# ---------------------------------------------------------------------------
# Named behaviours
# ---------------------------------------------------------------------------


def white_noise(scenario: BellScenario) -> Correlation:
    """The uniformly random behaviour: every P(a,b|x,y) = 1/outcomes**2."""
    o = scenario.outcomes
    vec = np.empty(scenario.cg_dim)
    n_marg = 2 * scenario.settings * (o - 1)
    vec[:n_marg] = 1.0 / o
    vec[n_marg:] = 1.0 / o**2
    return Correlation(scenario, vec)


def pr_box() -> Correlation:
    """The two-setting/two-outcome nonlocal extreme box (outputs agree unless
    both settings are the second one)."""
    sc = BellScenario(2, 2)
    vec = np.empty(sc.cg_dim)
    for x in (1, 2):
        vec[sc.marginal_index("A", 1, x)] = 0.5
        vec[sc.marginal_index("B", 1, x)] = 0.5
    for x in (1, 2):
        for y in (1, 2):
            vec[sc.joint_index(1, 1, x, y)] = 0.0 if (x, y) == (2, 2) else 0.5
    return Correlation(sc, vec)


def deterministic_vertex_cg(
    scenario: BellScenario, assign_a: tuple[int, ...], assign_b: tuple[int, ...]
) -> np.ndarray:
    """Minimal coordinates of the deterministic strategy that outputs
    ``assign_a[x-1]`` and ``assign_b[y-1]`` (1-based outcomes)."""
    s, o = scenario.settings, scenario.outcomes
    if len(assign_a) != s or len(assign_b) != s:
        raise DomainError("one assigned outcome per setting is required")
    if any(not 1 <= v <= o for v in assign_a + assign_b):
        raise DomainError(f"assigned outcomes must lie in 1..{o}")
    vec = np.zeros(scenario.cg_dim)
    for x in range(1, s + 1):
        a = assign_a[x - 1]
        if a < o:
            vec[scenario.marginal_index("A", a, x)] = 1.0
    for y in range(1, s + 1):
        b = assign_b[y - 1]
        if b < o:
            vec[scenario.marginal_index("B", b, y)] = 1.0
    for x in range(1, s + 1):
        for y in range(1, s + 1):
            a, b = assign_a[x - 1], assign_b[y - 1]
            if a < o and b < o:
                vec[scenario.joint_index(a, b, x, y)] = 1.0
    return vec


def ns_extreme_point(scenario: BellScenario, k: int) -> FullDistribution:
    """A nonlocal extreme point of the two-setting nonsignaling polytope with
    support on k outcomes per party: uniform over output pairs whose difference
    mod k equals the product of the (0-based) settings."""
    if scenario.settings != 2:
        raise DomainError("this extreme-point family needs exactly two settings")
    o = scenario.outcomes
    if not (2 <= k <= o):
        raise DomainError(f"k must lie in 2..{o}, got {k}")
    table = np.zeros((2, 2, o, o))
    for x0 in (0, 1):
        for y0 in (0, 1):
            for a0 in range(k):
                for b0 in range(k):
                    if (b0 - a0) % k == (x0 * y0) % k:
                        table[x0, y0, a0, b0] = 1.0 / k
    return FullDistribution(scenario, table)


# ---------------------------------------------------------------------------
# Euclidean distances on full tables
# ---------------------------------------------------------------------------


def euclidean_distance(p: FullDistribution, q: FullDistribution) -> float:
    """Plain Euclidean distance between two full tables."""
    if p.scenario != q.scenario:
        raise DomainError("distance requires matching scenarios")
    return float(np.linalg.norm(p.table - q.table))


def distance_to_white_noise(p: FullDistribution) -> float:
    """Euclidean distance from the uniformly random behaviour."""
    return float(np.linalg.norm(p.table - 1.0 / p.scenario.outcomes**2))


def local_vertex_noise_distance(scenario: BellScenario) -> float:
    """Closed form for the noise distance of any deterministic strategy."""
    return scenario.settings * math.sqrt(1.0 - 1.0 / scenario.outcomes**2)


def ns_vertex_noise_distance(scenario: BellScenario, k: int) -> float:
    """Closed form for the noise distance of ``ns_extreme_point(scenario, k)``."""
    if scenario.settings != 2:
        raise DomainError("this extreme-point family needs exactly two settings")
    if not (2 <= k <= scenario.outcomes):
        raise DomainError(f"k must lie in 2..{scenario.outcomes}, got {k}")
    return 2.0 * math.sqrt(1.0 / k - 1.0 / scenario.outcomes**2)
