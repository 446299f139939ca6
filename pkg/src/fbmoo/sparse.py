"""Sparse families, the dyadic stopping-time constructor, sparse operators and forms."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dyadic import DyadicCube, cube_cells
from .gridfn import GridFunction

__all__ = [
    "SparseFamily",
    "SparsityCertificate",
    "SymbolData",
    "StoppingRecord",
    "is_sparse",
    "cz_threshold",
    "build_sparse_cz",
    "sparse_operator",
    "sparse_operator_grid",
    "sparse_form",
]


@dataclass(frozen=True)
class StoppingRecord:
    """Total measure of the stopping cubes selected inside one parent cube."""

    cube: DyadicCube
    selected_measure: float

    @property
    def ratio(self) -> float:
        return self.selected_measure / float(self.cube.length)


@dataclass(frozen=True, eq=False)
class SparseFamily:
    """Cubes with designated exceptional sets ``E_Q`` given as grid cells.

    Parameters
    ----------
    cubes : sequence of DyadicCube
    exceptional_sets : sequence of int arrays
        Cell indices (at ``resolution``) of ``E_Q``, one array per cube.
    delta : float
        Claimed sparsity parameter.
    resolution : int
        Grid on which the cell indices are expressed.
    records : tuple of StoppingRecord, optional
        Stopping-time bookkeeping filled by :func:`build_sparse_cz`.
    """

    cubes: tuple
    exceptional_sets: tuple
    delta: float
    resolution: int
    records: tuple = field(default=(), repr=False)

    def __post_init__(self):
        cubes = tuple(self.cubes)
        sets = tuple(np.unique(np.asarray(e, dtype=np.int64)) for e in self.exceptional_sets)
        if len(cubes) != len(sets):
            raise ValueError("one exceptional set per cube is required")
        object.__setattr__(self, "cubes", cubes)
        object.__setattr__(self, "exceptional_sets", sets)
        object.__setattr__(self, "records", tuple(self.records))

    def __len__(self) -> int:
        return len(self.cubes)

    def to_json(self) -> str:
        data = {
            "delta": self.delta,
            "resolution": self.resolution,
            "cubes": [c.to_dict() for c in self.cubes],
            "exceptional_cells": [e.tolist() for e in self.exceptional_sets],
        }
        return json.dumps(data, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SparseFamily":
        data = json.loads(text)
        return cls(
            tuple(DyadicCube.from_dict(c) for c in data["cubes"]),
            tuple(np.array(e, dtype=np.int64) for e in data["exceptional_cells"]),
            float(data["delta"]),
            int(data["resolution"]),
        )


@dataclass(frozen=True)
class SparsityCertificate:
    """Outcome of :func:`is_sparse`; truthy when the family is sparse."""

    ok: bool
    cube: DyadicCube | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def is_sparse(family: SparseFamily) -> SparsityCertificate:
    """Check ``E_Q ⊆ Q``, pairwise disjointness and ``|E_Q| >= delta |Q|`` exactly.

    The measure comparison is done in integer arithmetic on cell counts
    against the exact binary value of ``delta``.

    Examples
    --------
    >>> Q = DyadicCube(0, 0)
    >>> bool(is_sparse(SparseFamily([Q], [np.arange(4)], 1.0, 2)))
    True
    """
    N = family.resolution
    delta = Fraction(family.delta)
    owner = np.full(2**N, -1, dtype=np.int64)
    for idx, (Q, E) in enumerate(zip(family.cubes, family.exceptional_sets)):
        if Q.level > N:
            return SparsityCertificate(False, Q, f"cube finer than resolution {N}")
        if E.size and (E.min() < 0 or E.max() >= 2**N):
            return SparsityCertificate(False, Q, "exceptional cell index out of range")
        inside = np.zeros(2**N, dtype=bool)
        inside[cube_cells(Q, N)] = True
        if not np.all(inside[E]):
            return SparsityCertificate(False, Q, "E_Q is not contained in Q")
        taken = owner[E]
        if np.any(taken >= 0):
            other = family.cubes[int(taken[taken >= 0][0])]
            return SparsityCertificate(False, Q, f"E_Q overlaps the exceptional set of {other}")
        owner[E] = idx
        # |E_Q| >= delta |Q|  <=>  count * 2**level >= delta * 2**N
        if Fraction(E.size * 2**Q.level) < delta * 2**N:
            return SparsityCertificate(False, Q, f"|E_Q| < delta |Q| (|E_Q| = {E.size} cells)")
    return SparsityCertificate(True)


def cz_threshold(m: int, delta: float) -> float:
    """Stopping threshold ``(m + 1) / (1 - delta)`` for ``m`` inputs and one extra slot."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return (m + 1) / (1.0 - delta)


def build_sparse_cz(
    fs: Sequence[GridFunction],
    g: GridFunction,
    P0: DyadicCube,
    delta: float,
    max_level: int | None = None,
) -> SparseFamily:
    """Dyadic Calderón–Zygmund stopping time producing a ``delta``-sparse family.

    Inside every stopping cube ``P0`` the maximal subcubes ``P`` with
    ``sum_i <f_i>_P / <f_i>_{P0} + <g>_P / <g>_{P0} > C0`` are selected,
    slots with vanishing average on ``P0`` being dropped.  The
    exceptional set of ``P0`` is what the selected cubes leave uncovered,
    and the construction recurses into each selected cube.  Since the ratio
    sum has mean ``m + 1`` over ``P0`` the selected cubes cover at most
    ``(m + 1) / C0 = 1 - delta`` of ``P0``.

    Parameters
    ----------
    fs : sequence of GridFunction
        Nonnegative inputs.
    g : GridFunction
        Nonnegative extra slot.
    P0 : DyadicCube
        Top cube.
    delta : float
        Sparsity parameter in ``(0, 1)``.
    max_level : int, optional
        Deepest admissible stopping level (default: the grid resolution).

    Returns
    -------
    SparseFamily
        Cubes in the order they were stopped (breadth first), with the
        per-cube covering records.
    """
    slots = list(fs) + [g]
    N = g.resolution
    if any(f.resolution != N for f in slots):
        raise ValueError("input functions live on different grids")
    if any(np.any(f.values < 0) for f in slots):
        raise ValueError("stopping-time inputs must be nonnegative")
    C0 = cz_threshold(len(fs), delta)
    L = N if max_level is None else min(int(max_level), N)
    if P0.level > L:
        raise ValueError("top cube is finer than the admissible depth")
    cubes, sets, records = [], [], []
    queue = [P0]
    while queue:
        P = queue.pop(0)
        cells = cube_cells(P, N)
        local = [f.values[cells] for f in slots]
        tops = [float(v.mean()) for v in local]
        active = [(v, t) for v, t in zip(local, tops) if t > 0]
        n = cells.size
        covered = np.zeros(n, dtype=bool)
        selected = []
        for depth in range(1, L - P.level + 1):
            blocks = 2**depth
            ratio = np.zeros(blocks)
            for v, t in active:
                ratio += v.reshape(blocks, -1).mean(axis=1) / t
            free = ~covered.reshape(blocks, -1).any(axis=1)
            hits = np.flatnonzero((ratio > C0) & free)
            if hits.size:
                width = n // blocks
                for j in hits:
                    covered[j * width:(j + 1) * width] = True
                    selected.append(
                        DyadicCube(P.level + depth, P.index * blocks + int(j), P.shift)
                    )
        cubes.append(P)
        sets.append(cells[~covered])
        records.append(StoppingRecord(P, float(covered.sum()) * 2.0**-N))
        queue.extend(selected)
    return SparseFamily(tuple(cubes), tuple(sets), float(delta), N, tuple(records))


@dataclass(frozen=True, eq=False)
class SymbolData:
    """Symbols ``b_i`` with orders ``0 <= t_i <= k_i``."""

    b: tuple
    k: tuple
    t: tuple

    def __post_init__(self):
        b, k, t = tuple(self.b), tuple(int(v) for v in self.k), tuple(int(v) for v in self.t)
        if not len(b) == len(k) == len(t):
            raise ValueError("b, k and t must have the same length")
        if any(not 0 <= ti <= ki for ti, ki in zip(t, k)):
            raise ValueError("orders must satisfy 0 <= t_i <= k_i")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "t", t)

    @classmethod
    def trivial(cls, m: int, resolution: int) -> "SymbolData":
        zero = GridFunction(np.zeros(2**resolution))
        return cls((zero,) * m, (0,) * m, (0,) * m)


def _prepare(sym, fs, rs):
    fs = list(fs)
    m = len(fs)
    if sym is None:
        sym = SymbolData.trivial(m, fs[0].resolution)
    if len(sym.b) != m:
        raise ValueError("symbol data does not match the number of inputs")
    rs = [float(rs)] * m if np.ndim(rs) == 0 else [float(r) for r in rs]
    if len(rs) != m:
        raise ValueError(f"rs must have {m} entries")
    return sym, fs, rs


def _cube_terms(family, sym, fs, rs, Q):
    """Average factor and the pointwise symbol factor of one cube."""
    N = fs[0].resolution
    cells = cube_cells(Q, N)
    factor = 1.0
    pointwise = np.ones(cells.size)
    for f, r, b, k, t in zip(fs, rs, sym.b, sym.k, sym.t):
        local_f = f.values[cells]
        if k == 0:
            osc = None
            weighted = np.abs(local_f)
        else:
            local_b = b.values[cells]
            osc = np.abs(local_b - local_b.mean())
            weighted = np.abs(local_f) * osc**t
            pointwise = pointwise * osc ** (k - t)
        factor *= float(np.mean(weighted**r) ** (1.0 / r))
    return cells, factor, pointwise


def sparse_operator_grid(
    family: SparseFamily, sym, fs: Sequence[GridFunction], rs=1.0, eta: float = 0.0
) -> GridFunction:
    """Sparse operator evaluated on every grid cell.

    Computes ``sum_B |B|**eta prod_i |b_i - b_{i,B}|**(k_i - t_i)
    <|f_i (b_i - b_{i,B})**t_i|>_{r_i,B} chi_B``; pass ``sym=None`` for the
    symbol-free operator.
    """
    sym, fs, rs = _prepare(sym, fs, rs)
    N = fs[0].resolution
    out = np.zeros(2**N)
    for Q in family.cubes:
        cells, factor, pointwise = _cube_terms(family, sym, fs, rs, Q)
        out[cells] += float(Q.length) ** eta * factor * pointwise
    return GridFunction(out)


def sparse_operator(family: SparseFamily, sym, fs: Sequence[GridFunction], rs, eta: float, x) -> float:
    """Value at the point ``x`` of :func:`sparse_operator_grid`.

    Examples
    --------
    >>> from fbmoo.gridfn import indicator
    >>> S = SparseFamily([DyadicCube(0, 0)], [np.arange(8)], 1.0, 3)
    >>> sparse_operator(S, None, [indicator(0, 0.5, 3)], 1.0, 0.0, 0.9)
    0.5
    """
    if not 0 <= x < 1:
        raise ValueError(f"point {x} outside [0, 1)")
    sym, fs, rs = _prepare(sym, fs, rs)
    N = fs[0].resolution
    cell = min(int(x * 2**N), 2**N - 1)
    total = 0.0
    for Q in family.cubes:
        if not Q.contains_point(x):
            continue
        cells, factor, pointwise = _cube_terms(family, sym, fs, rs, Q)
        pos = int(np.flatnonzero(cells == cell)[0])
        total += float(Q.length) ** eta * factor * float(pointwise[pos])
    return total


def sparse_form(
    family: SparseFamily,
    sym,
    fs: Sequence[GridFunction],
    psi: GridFunction,
    rs=1.0,
    sprime: float = 1.0,
    eta: float = 0.0,
) -> float:
    """``sum_B |B|**(eta + 1) prod_i <|f_i (b_i - b_B)**t_i|>_{r_i,B} <(prod_i |b_i - b_B|**(k_i - t_i)) psi>_{s',B}``."""
    if sprime < 1:
        raise ValueError("s' must be at least 1")
    sym, fs, rs = _prepare(sym, fs, rs)
    total = 0.0
    for Q in family.cubes:
        cells, factor, pointwise = _cube_terms(family, sym, fs, rs, Q)
        last = float(np.mean(np.abs(pointwise * psi.values[cells]) ** sprime) ** (1.0 / sprime))
        total += float(Q.length) ** (eta + 1) * factor * last
    return total
