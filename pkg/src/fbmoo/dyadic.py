"""Dyadic lattices on the circle [0, 1), Haar functions and good/bad cubes.

A lattice is the standard dyadic system translated by a rational shift
``omega`` and wrapped modulo 1.  Every cube is stored by its level ``k``,
its index ``j`` and the shift, and covers the half-open arc
``[(j + omega 2^k) 2^-k, (j + 1 + omega 2^k) 2^-k)`` taken modulo 1.

On a sampled grid of ``2**N`` cells a shift of ``omega`` is a cyclic
rotation of the sample array by ``omega * 2**N`` cells, so all cube sums
over a shifted lattice reduce to the standard lattice acting on
``np.roll(values, -shift_cells)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

__all__ = [
    "MAX_LEVEL",
    "DyadicCube",
    "Lattice",
    "Goodness",
    "as_shift",
    "build_lattice",
    "cube_cells",
    "haar",
    "haar_vector",
    "haar_coefficients",
    "martingale_difference",
    "good_bad_lambda",
    "boundary_distance",
    "classify_good_bad",
]

MAX_LEVEL = 24


def as_shift(value) -> Fraction:
    """Convert ``value`` to an exact shift in ``[0, 1)``.

    Floats are read through their decimal ``repr`` so that ``0.25`` maps to
    ``1/4``; strings such as ``"3/8"`` are accepted as well.
    """
    if isinstance(value, Fraction):
        out = value
    elif isinstance(value, float):
        out = Fraction(repr(value))
    else:
        out = Fraction(value)
    if not 0 <= out < 1:
        raise ValueError(f"shift must lie in [0, 1), got {out}")
    return out


def _is_dyadic(q: Fraction, level: int) -> bool:
    return (q * 2**level).denominator == 1


@dataclass(frozen=True, order=True)
class DyadicCube:
    """Dyadic interval ``level``/``index`` of the lattice translated by ``shift``.

    Parameters
    ----------
    level : int
        Generation ``k >= 0``; the side length is ``2**-k``.
    index : int
        Position ``0 <= j < 2**k`` counted from the shift point.
    shift : Fraction, optional
        Lattice offset in ``[0, 1)``.

    Examples
    --------
    >>> DyadicCube(2, 1).interval()
    (Fraction(1, 4), Fraction(1, 2))
    >>> DyadicCube(1, 1, Fraction(1, 4)).interval()
    (Fraction(3, 4), Fraction(1, 4))
    """

    level: int
    index: int
    shift: Fraction = Fraction(0)

    def __post_init__(self):
        if self.level < 0:
            raise ValueError(f"level must be nonnegative, got {self.level}")
        if not 0 <= self.index < 2**self.level:
            raise ValueError(f"index {self.index} out of range for level {self.level}")
        object.__setattr__(self, "shift", as_shift(self.shift))

    @property
    def length(self) -> Fraction:
        """Exact side length ``2**-level``."""
        return Fraction(1, 2**self.level)

    def interval(self) -> tuple[Fraction, Fraction]:
        """Endpoints ``(a, b)`` with ``a`` in ``[0, 1)`` and ``b`` in ``(0, 1]``.

        When the cube wraps around the origin ``b <= a``; for the root of a
        shifted lattice both endpoints coincide with the shift.
        """
        a = (self.index * self.length + self.shift) % 1
        b = ((self.index + 1) * self.length + self.shift) % 1
        return a, (b if b != 0 else Fraction(1))

    def unrolled(self) -> tuple[Fraction, Fraction]:
        """Endpoints in the rotated coordinate ``u = (x - shift) mod 1``."""
        return self.index * self.length, (self.index + 1) * self.length

    def local(self, x) -> Fraction | float:
        """Rotated coordinate of ``x`` (same type as ``x`` for floats)."""
        if isinstance(x, (Fraction, int)):
            return (Fraction(x) - self.shift) % 1
        return (float(x) - float(self.shift)) % 1.0

    def contains_point(self, x) -> bool:
        a, b = self.unrolled()
        u = self.local(x)
        return a <= u < b

    def contains(self, other: "DyadicCube") -> bool:
        """Whether ``other`` is a (non-strict) subcube of ``self``."""
        _same_grid(self, other)
        if other.level < self.level:
            return False
        return other.index >> (other.level - self.level) == self.index

    def parent(self) -> "DyadicCube":
        if self.level == 0:
            raise ValueError("the root cube has no parent")
        return DyadicCube(self.level - 1, self.index // 2, self.shift)

    def children(self) -> tuple["DyadicCube", "DyadicCube"]:
        k, j = self.level + 1, 2 * self.index
        return DyadicCube(k, j, self.shift), DyadicCube(k, j + 1, self.shift)

    def ancestor(self, level: int) -> "DyadicCube":
        """The containing cube at ``level <= self.level``."""
        if not 0 <= level <= self.level:
            raise ValueError(f"no ancestor at level {level}")
        return DyadicCube(level, self.index >> (self.level - level), self.shift)

    def ancestors(self, include_self: bool = False) -> list["DyadicCube"]:
        """Containing cubes ordered from the parent up to the root."""
        start = self.level if include_self else self.level - 1
        return [self.ancestor(k) for k in range(start, -1, -1)]

    def dagger(self) -> "DyadicCube":
        """Hull ``B†`` used by the truncation conditions: the parent, root to itself."""
        return self if self.level == 0 else self.parent()

    def to_dict(self) -> dict:
        return {"level": self.level, "index": self.index, "shift": str(self.shift)}

    @classmethod
    def from_dict(cls, data: dict) -> "DyadicCube":
        return cls(int(data["level"]), int(data["index"]), as_shift(data.get("shift", 0)))


def _same_grid(a: DyadicCube, b: DyadicCube):
    if a.shift != b.shift:
        raise ValueError(f"cubes live on different grids (shifts {a.shift} and {b.shift})")


@dataclass(frozen=True)
class Lattice:
    """All cubes of levels ``0..max_level`` of one (possibly shifted) grid.

    Cubes are enumerated level-major, index-minor, which is the fixed
    reduction order used throughout the package.
    """

    max_level: int
    shift: Fraction = Fraction(0)
    _size: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.max_level <= MAX_LEVEL:
            raise ValueError(f"max_level must lie in [0, {MAX_LEVEL}], got {self.max_level}")
        shift = as_shift(self.shift)
        if not _is_dyadic(shift, self.max_level):
            raise ValueError(
                f"shift {shift} is not a dyadic rational with denominator <= 2**{self.max_level}"
            )
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "_size", 2 ** (self.max_level + 1) - 1)

    def __len__(self) -> int:
        return self._size

    def __iter__(self) -> Iterator[DyadicCube]:
        for k in range(self.max_level + 1):
            yield from self.level_cubes(k)

    def __contains__(self, cube) -> bool:
        return (
            isinstance(cube, DyadicCube)
            and cube.shift == self.shift
            and cube.level <= self.max_level
        )

    @property
    def root(self) -> DyadicCube:
        return DyadicCube(0, 0, self.shift)

    def level_cubes(self, level: int) -> list[DyadicCube]:
        return [DyadicCube(level, j, self.shift) for j in range(2**level)]

    def cube_at(self, x, level: int) -> DyadicCube:
        """The level-``level`` cube containing the point ``x``."""
        if not 0 <= x < 1:
            raise ValueError(f"point {x} outside [0, 1)")
        u = self.root.local(x)
        j = min(int(u * 2**level), 2**level - 1)
        return DyadicCube(level, j, self.shift)

    def containing(self, x) -> list[DyadicCube]:
        """Cubes of the lattice containing ``x``, root first."""
        deepest = self.cube_at(x, self.max_level)
        return deepest.ancestors(include_self=True)[::-1]

    def shift_cells(self, resolution: int) -> int:
        """Rotation, in cells of size ``2**-resolution``, that realizes the shift."""
        cells = self.shift * 2**resolution
        if cells.denominator != 1:
            raise ValueError(
                f"shift {self.shift} is not resolvable at resolution {resolution}"
            )
        return int(cells)


def build_lattice(max_level: int, shift=0) -> Lattice:
    """Construct the lattice of depth ``max_level`` translated by ``shift``.

    Examples
    --------
    >>> [c.interval() for c in build_lattice(1)]  # doctest: +NORMALIZE_WHITESPACE
    [(Fraction(0, 1), Fraction(1, 1)), (Fraction(0, 1), Fraction(1, 2)),
     (Fraction(1, 2), Fraction(1, 1))]
    """
    return Lattice(int(max_level), as_shift(shift))


def _resolution_of(values: np.ndarray) -> int:
    n = values.shape[-1]
    N = n.bit_length() - 1
    if n != 2**N:
        raise ValueError(f"sample count {n} is not a power of two")
    return N


def cube_cells(cube: DyadicCube, resolution: int) -> np.ndarray:
    """Indices of the grid cells covered by ``cube``, in rotated order."""
    if cube.level > resolution:
        raise ValueError(
            f"cube level {cube.level} exceeds grid resolution {resolution}"
        )
    per = 2 ** (resolution - cube.level)
    offset = cube.shift * 2**resolution
    if offset.denominator != 1:
        raise ValueError(f"shift {cube.shift} is not resolvable at resolution {resolution}")
    start = cube.index * per + int(offset)
    return (start + np.arange(per)) % 2**resolution


def haar(cube: DyadicCube, x, cancellative: bool = True) -> float:
    """Value at ``x`` of the L2-normalized Haar function of ``cube``.

    Parameters
    ----------
    cube : DyadicCube
    x : float or Fraction
        Point of ``[0, 1)``.
    cancellative : bool, optional
        If False, return the normalized indicator ``|I|**-1/2 chi_I``.

    Examples
    --------
    >>> haar(DyadicCube(0, 0), 0.75)
    -1.0
    >>> round(haar(DyadicCube(1, 0), 0.1), 5)
    1.41421
    """
    if not 0 <= x < 1:
        raise ValueError(f"point {x} outside [0, 1)")
    a, b = cube.unrolled()
    u = cube.local(x)
    if not a <= u < b:
        return 0.0
    scale = 2.0 ** (cube.level / 2)
    if not cancellative:
        return scale
    mid = (a + b) / 2
    return scale if u < mid else -scale


def haar_vector(cube: DyadicCube, resolution: int, cancellative: bool = True) -> np.ndarray:
    """Grid samples of the Haar function of ``cube`` at ``2**resolution`` cells."""
    need = cube.level + 1 if cancellative else cube.level
    if need > resolution:
        raise ValueError(
            f"resolution {resolution} cannot resolve the Haar function of a level-{cube.level} cube"
        )
    out = np.zeros(2**resolution)
    cells = cube_cells(cube, resolution)
    scale = 2.0 ** (cube.level / 2)
    if cancellative:
        half = cells.size // 2
        out[cells[:half]] = scale
        out[cells[half:]] = -scale
    else:
        out[cells] = scale
    return out


def haar_coefficients(values, level: int, shift_cells: int = 0, cancellative: bool = True):
    """Inner products with all Haar functions of one level.

    Parameters
    ----------
    values : array_like
        Samples of length ``2**N``.
    level : int
        Level ``k`` of the cubes; requires ``k + 1 <= N`` when cancellative.
    shift_cells : int, optional
        Rotation realizing the lattice shift.

    Returns
    -------
    ndarray
        Array of length ``2**level``; entry ``j`` is ``<f, h_I>`` for the
        ``j``-th cube of the level.
    """
    values = np.asarray(values, dtype=float)
    N = _resolution_of(values)
    if shift_cells:
        values = np.roll(values, -shift_cells)
    h = 2.0**-N
    scale = 2.0 ** (level / 2)
    if not cancellative:
        if level > N:
            raise ValueError(f"level {level} exceeds resolution {N}")
        return values.reshape(2**level, -1).sum(axis=1) * h * scale
    if level + 1 > N:
        raise ValueError(f"level {level} needs resolution at least {level + 1}")
    halves = values.reshape(2 ** (level + 1), -1).sum(axis=1) * h
    return (halves[0::2] - halves[1::2]) * scale


def martingale_difference(f, cube: DyadicCube):
    """Martingale difference ``Delta_I f`` of a grid function.

    Returns a :class:`~fbmoo.gridfn.GridFunction` equal to
    ``<f>_{I'} - <f>_I`` on each child ``I'`` of ``I`` and 0 elsewhere.

    Examples
    --------
    >>> from fbmoo.gridfn import GridFunction
    >>> f = GridFunction.from_callable(lambda x: x, 4)
    >>> d = martingale_difference(f, DyadicCube(0, 0))
    >>> float(d.values[0]), float(d.values[-1])
    (-0.25, 0.25)
    """
    from .gridfn import GridFunction

    N = f.resolution
    if cube.level + 1 > N:
        raise ValueError(
            f"resolution {N} cannot resolve the children of a level-{cube.level} cube"
        )
    cells = cube_cells(cube, N)
    local = f.values[cells]
    half = local.size // 2
    mean = local.mean()
    out = np.zeros(2**N)
    out[cells[:half]] = local[:half].mean() - mean
    out[cells[half:]] = local[half:].mean() - mean
    return GridFunction(out)


def good_bad_lambda(eta: float, delta: float) -> float:
    """Exponent ``lambda = delta / (2 ((2 - eta) + delta))`` for dimension one."""
    return delta / (2.0 * ((2.0 - eta) + delta))


def boundary_distance(inner: DyadicCube, outer: DyadicCube) -> Fraction:
    """Exact distance from ``inner`` to the boundary of ``outer``.

    For nested cubes this is the smaller gap between the endpoints; for
    disjoint cubes it is the gap to the nearer endpoint of ``outer``.
    Distances are measured on the circle, and the root of the lattice has
    its two endpoints at the shift point.
    """
    _same_grid(inner, outer)
    a, b = inner.unrolled()
    c, d = outer.unrolled()
    if outer.level == 0:
        return min(a - c, d - b)
    if outer.contains(inner):
        return min(a - c, d - b)
    gaps = [abs(c - b), abs(a - d), abs(c - a), abs(d - b)]
    gaps += [1 - g for g in gaps]
    return min(gaps)


class Goodness(str, enum.Enum):
    GOOD = "good"
    BAD = "bad"


def classify_good_bad(
    cube: DyadicCube, lattice: Lattice, r: int, eta: float, delta: float
) -> Goodness:
    """Classify ``cube`` as good or bad relative to ``lattice``.

    A cube ``I`` is bad when some lattice cube ``J`` with
    ``len(J) >= 2**r len(I)`` satisfies
    ``dist(I, boundary J) <= len(I)**lam * len(J)**(1 - lam)``.  A cube
    disjoint from ``I`` is never closer to ``I`` than the boundary of the
    ancestor of ``I`` at the same level, so the search runs over ancestors.

    Examples
    --------
    >>> L = build_lattice(4)
    >>> classify_good_bad(DyadicCube(4, 8), L, 2, 0.0, 1.0).value
    'bad'
    >>> classify_good_bad(DyadicCube(1, 0), L, 3, 0.0, 1.0).value
    'good'
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    if cube not in lattice:
        raise ValueError("cube does not belong to the lattice")
    lam = good_bad_lambda(eta, delta)
    li = float(cube.length)
    for k in range(cube.level - r, -1, -1):
        J = cube.ancestor(k)
        lj = float(J.length)
        if float(boundary_distance(cube, J)) <= li**lam * lj ** (1.0 - lam):
            return Goodness.BAD
    return Goodness.GOOD
