"""Plain-text exchange format for compiled moment problems.

Line-oriented, whitespace-separated, order fixed; integers only except the
level, which is written as an exact fraction (``2`` or ``3/2``).  Layout::

    bellvol-sdp 1
    scenario <settings> <outcomes>
    kind <kind>
    level <level>
    moments <count>
    blocks <count>
    block <size>
    <size rows of <size> moment ids>
    ... (next blocks)
    nonneg <count>
    [<count> ids on one line]
    dataslots <count>
    <count> ids on one line
    end

Moment id 0 is the unit moment, id 1 the annihilated moment; ``dataslots``
maps each minimal behaviour coordinate (in layout order) to its moment id.
"""

from __future__ import annotations

import io
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .hierarchy import KINDS, MomentProblem
from .scenario import BellScenario

__all__ = ["write_problem", "read_problem", "FORMAT_NAME", "FORMAT_VERSION"]

FORMAT_NAME = "bellvol-sdp"
FORMAT_VERSION = 1


def write_problem(problem: MomentProblem, destination) -> None:
    """Serialise to a path or text file object."""
    if hasattr(destination, "write"):
        _write(problem, destination)
    else:
        with open(destination, "w", encoding="ascii") as fh:
            _write(problem, fh)


def _write(p: MomentProblem, fh) -> None:
    sc = p.scenario
    fh.write(f"{FORMAT_NAME} {FORMAT_VERSION}\n")
    fh.write(f"scenario {sc.settings} {sc.outcomes}\n")
    fh.write(f"kind {p.kind}\n")
    fh.write(f"level {p.level}\n")
    fh.write(f"moments {p.n_moments}\n")
    fh.write(f"blocks {len(p.blocks)}\n")
    for block in p.blocks:
        fh.write(f"block {block.shape[0]}\n")
        for row in block:
            fh.write(" ".join(map(str, row.tolist())) + "\n")
    fh.write(f"nonneg {p.nonneg_ids.size}\n")
    if p.nonneg_ids.size:
        fh.write(" ".join(map(str, p.nonneg_ids.tolist())) + "\n")
    fh.write(f"dataslots {p.data_slots.size}\n")
    fh.write(" ".join(map(str, p.data_slots.tolist())) + "\n")
    fh.write("end\n")


class _Lines:
    def __init__(self, fh) -> None:
        self._it = iter(fh)
        self.n = 0

    def next(self) -> str:
        for raw in self._it:
            self.n += 1
            line = raw.strip()
            if line:
                return line
        raise DomainError("unexpected end of moment-problem file")

    def expect(self, keyword: str) -> list[str]:
        line = self.next()
        parts = line.split()
        if parts[0] != keyword:
            raise DomainError(
                f"line {self.n}: expected {keyword!r}, found {parts[0]!r}"
            )
        return parts[1:]


def read_problem(source) -> MomentProblem:
    """Parse from a path, text file object, or string containing the format."""
    if hasattr(source, "read"):
        return _read(_Lines(source))
    if isinstance(source, str) and "\n" in source:
        return _read(_Lines(io.StringIO(source)))
    with open(source, "r", encoding="ascii") as fh:
        return _read(_Lines(fh))


def _read(lines: _Lines) -> MomentProblem:
    header = lines.next().split()
    if header[:1] != [FORMAT_NAME] or int(header[1]) != FORMAT_VERSION:
        raise DomainError(f"unrecognised header {' '.join(header)!r}")
    s, o = map(int, lines.expect("scenario"))
    scenario = BellScenario(s, o)
    (kind,) = lines.expect("kind")
    if kind not in KINDS:
        raise DomainError(f"unknown relaxation kind {kind!r}")
    (level_text,) = lines.expect("level")
    level = Fraction(level_text)
    (n_moments,) = map(int, lines.expect("moments"))
    (n_blocks,) = map(int, lines.expect("blocks"))
    blocks: list[np.ndarray] = []
    for _ in range(n_blocks):
        (size,) = map(int, lines.expect("block"))
        rows = np.empty((size, size), dtype=np.int64)
        for r in range(size):
            vals = lines.next().split()
            if len(vals) != size:
                raise DomainError(
                    f"line {lines.n}: block row has {len(vals)} entries, expected {size}"
                )
            rows[r] = [int(v) for v in vals]
        if rows.size and (rows.min() < 0 or rows.max() >= n_moments):
            raise DomainError("block entry outside the declared moment range")
        if not (rows == rows.T).all():
            raise DomainError("block is not symmetric")
        blocks.append(rows)
    (n_nonneg,) = map(int, lines.expect("nonneg"))
    if n_nonneg:
        nonneg = np.array([int(v) for v in lines.next().split()], dtype=np.int64)
        if nonneg.size != n_nonneg:
            raise DomainError("nonneg id count mismatch")
    else:
        nonneg = np.empty(0, dtype=np.int64)
    (n_slots,) = map(int, lines.expect("dataslots"))
    if n_slots != scenario.cg_dim:
        raise DomainError(
            f"dataslots count {n_slots} does not match the scenario layout "
            f"({scenario.cg_dim})"
        )
    slots = np.array([int(v) for v in lines.next().split()], dtype=np.int64)
    if slots.size != n_slots:
        raise DomainError("dataslot count mismatch")
    if lines.next() != "end":
        raise DomainError("missing end marker")
    return MomentProblem(
        scenario=scenario,
        kind=kind,
        level=level,
        n_moments=n_moments,
        blocks=blocks,
        data_slots=slots,
        nonneg_ids=nonneg,
        moment_keys=[],
    )
