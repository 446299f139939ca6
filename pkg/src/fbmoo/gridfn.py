"""Piecewise-constant functions on a uniform dyadic grid of [0, 1).

A :class:`GridFunction` stores ``2**N`` cell values.  Integrals over dyadic
cubes of level at most ``N`` are exact cell sums, which makes every
average, oscillation and Haar coefficient below exact up to rounding.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import optimize

from .dyadic import DyadicCube, Lattice, cube_cells, haar_coefficients, haar_vector

__all__ = [
    "GridFunction",
    "YoungKind",
    "YoungFunction",
    "avg",
    "maximal_avg",
    "level_means",
    "level_averages",
    "luxemburg_norm",
    "bmo_norm",
    "bmo_norm_weighted",
    "fbmo_norm_haar",
    "fbmo_norm_direct",
    "lp_norm",
    "constant",
    "indicator",
    "power",
    "haar_function",
    "random_function",
]


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Cell values of a piecewise-constant function on ``2**N`` cells.

    Parameters
    ----------
    values : array_like
        One finite real value per cell; the length must be a power of two.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("values must be one-dimensional")
        n = v.size
        if n == 0 or n & (n - 1):
            raise ValueError(f"number of cells {n} is not a power of two")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def resolution(self) -> int:
        return self.values.size.bit_length() - 1

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def cell_width(self) -> float:
        return 2.0**-self.resolution

    @property
    def nodes(self) -> np.ndarray:
        """Left endpoints of the cells."""
        return np.arange(self.size) * self.cell_width

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self.size) + 0.5) * self.cell_width

    @classmethod
    def from_callable(cls, fn: Callable, resolution: int, sample: str = "left") -> "GridFunction":
        """Sample ``fn`` at left endpoints or (``sample="midpoint"``) midpoints."""
        n = 2**resolution
        if sample == "left":
            x = np.arange(n) / n
        elif sample == "midpoint":
            x = (np.arange(n) + 0.5) / n
        else:
            raise ValueError(f"unknown sampling rule {sample!r}")
        return cls(np.broadcast_to(np.asarray(fn(x), dtype=float), (n,)))

    def __call__(self, x) -> float:
        if not 0 <= x < 1:
            raise ValueError(f"point {x} outside [0, 1)")
        return float(self.values[min(int(x * self.size), self.size - 1)])

    def __repr__(self) -> str:
        return f"GridFunction(resolution={self.resolution})"

    # arithmetic helpers keep the grid fixed
    def _other(self, other):
        if isinstance(other, GridFunction):
            if other.size != self.size:
                raise ValueError("grid functions live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return GridFunction(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction(self.values - self._other(other))

    def __mul__(self, other):
        return GridFunction(self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return GridFunction(self.values / self._other(other))

    def __pow__(self, exponent):
        return GridFunction(self.values**exponent)

    def __neg__(self):
        return GridFunction(-self.values)

    def __abs__(self):
        return GridFunction(np.abs(self.values))

    def restrict(self, cube: DyadicCube) -> "GridFunction":
        """``f * chi_cube``."""
        out = np.zeros(self.size)
        cells = cube_cells(cube, self.resolution)
        out[cells] = self.values[cells]
        return GridFunction(out)

    def refine(self, levels: int = 1) -> "GridFunction":
        """Same piecewise-constant function on a grid ``2**levels`` times finer."""
        return GridFunction(np.repeat(self.values, 2**levels))

    def integral(self) -> float:
        return float(self.values.sum() * self.cell_width)

    def cube_integral(self, cube: DyadicCube) -> float:
        return float(self.values[cube_cells(cube, self.resolution)].sum() * self.cell_width)

    def mean(self, cube: DyadicCube) -> float:
        return float(self.values[cube_cells(cube, self.resolution)].mean())

    def is_nonnegative(self) -> bool:
        return bool(np.all(self.values >= 0))

    def to_csv(self, path) -> None:
        """Write ``index,value`` rows, one per cell."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "value"])
            for i, v in enumerate(self.values):
                writer.writerow([i, repr(float(v))])

    @classmethod
    def from_csv(cls, path) -> "GridFunction":
        with open(Path(path), newline="") as fh:
            rows = list(csv.DictReader(fh))
        idx = np.array([int(r["index"]) for r in rows])
        if not np.array_equal(idx, np.arange(idx.size)):
            raise ValueError("CSV indices must run 0..n-1 in order")
        return cls(np.array([float(r["value"]) for r in rows]))


def _check_cube(f: GridFunction, Q: DyadicCube):
    if Q.level > f.resolution:
        raise ValueError(
            f"cube level {Q.level} is finer than the grid resolution {f.resolution}"
        )


def _check_eta_r(r, eta):
    if r < 1:
        raise ValueError(f"r must be at least 1, got {r}")
    if not 0 <= eta * r <= 1:
        raise ValueError(f"eta*r must lie in [0, 1], got {eta * r}")


def avg(f: GridFunction, Q: DyadicCube, r: float = 1.0, eta: float = 0.0) -> float:
    """Fractional average bump ``(|Q|**-(1 - eta r) int_Q |f|**r)**(1/r)``.

    Examples
    --------
    >>> f = GridFunction.from_callable(lambda x: x * 0 + 1, 3)
    >>> round(avg(f, DyadicCube(1, 0), r=2, eta=0.5), 5)
    0.70711
    """
    _check_eta_r(r, eta)
    _check_cube(f, Q)
    vals = np.abs(f.values[cube_cells(Q, f.resolution)])
    size = float(Q.length)
    integral = np.sum(vals**r) * f.cell_width
    return float((size ** -(1.0 - eta * r) * integral) ** (1.0 / r))


def level_means(values: np.ndarray, level: int, shift_cells: int = 0) -> np.ndarray:
    """Means of ``values`` over every cube of one level (rotated order)."""
    if shift_cells:
        values = np.roll(values, -shift_cells)
    return values.reshape(2**level, -1).mean(axis=1)


def level_averages(
    f: GridFunction, level: int, r: float = 1.0, eta: float = 0.0, shift_cells: int = 0
) -> np.ndarray:
    """``<|f|>_{eta,r,Q}`` for all cubes ``Q`` of one level at once."""
    _check_eta_r(r, eta)
    if level > f.resolution:
        raise ValueError(f"level {level} exceeds resolution {f.resolution}")
    m = level_means(np.abs(f.values) ** r, level, shift_cells)
    return (2.0 ** (-level * eta * r) * m) ** (1.0 / r)


def maximal_avg(
    f: GridFunction, Q: DyadicCube, lattice: Lattice, r: float = 1.0, eta: float = 0.0
) -> float:
    """Maximal bump: sup of :func:`avg` over lattice cubes containing ``Q``."""
    if Q not in lattice:
        raise ValueError("cube does not belong to the lattice")
    return max(avg(f, B, r, eta) for B in Q.ancestors(include_self=True))


class YoungKind(str, enum.Enum):
    POWER = "power"
    LLOGL = "LlogL"
    EXPL = "expL"


@dataclass(frozen=True)
class YoungFunction:
    """One of the parametric Young functions ``t**p``, ``t log(e+t)**r``, ``exp(t**r) - 1``."""

    kind: YoungKind
    parameter: float

    def __post_init__(self):
        object.__setattr__(self, "kind", YoungKind(self.kind))
        if not self.parameter > 0:
            raise ValueError("Young function parameter must be positive")
        if self.kind is YoungKind.POWER and self.parameter < 1:
            raise ValueError("power Young function needs p >= 1")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        p = self.parameter
        with np.errstate(over="ignore"):
            if self.kind is YoungKind.POWER:
                return t**p
            if self.kind is YoungKind.LLOGL:
                return t * np.log(np.e + t) ** p
            return np.expm1(t**p)


def luxemburg_norm(f: GridFunction, Q: DyadicCube, phi: YoungFunction, rtol: float = 1e-12) -> float:
    """Normalized Luxemburg norm of ``f`` on ``Q`` by bisection.

    Solves ``mean_Q phi(|f| / lam) = 1`` for ``lam``; the left-hand side is
    continuous and strictly decreasing in ``lam`` wherever ``f`` is not
    identically zero.

    Examples
    --------
    >>> f = GridFunction(np.full(8, 2.0))
    >>> round(luxemburg_norm(f, DyadicCube(0, 0), YoungFunction("expL", 1)), 9)
    2.885390082
    """
    _check_cube(f, Q)
    a = np.abs(f.values[cube_cells(Q, f.resolution)])
    top = float(a.max())
    if top == 0.0:
        return 0.0

    def excess(lam):
        return float(np.mean(phi(a / lam))) - 1.0

    lo, hi = 1e-12 * top, top
    while excess(lo) <= 0:
        lo /= 2.0
    while excess(hi) > 0:
        hi *= 2.0
    return float(optimize.bisect(excess, lo, hi, xtol=1e-300, rtol=rtol, maxiter=2000))


def _lattice_shift(f: GridFunction, lattice: Lattice) -> int:
    if lattice.max_level > f.resolution:
        raise ValueError(
            f"lattice depth {lattice.max_level} exceeds grid resolution {f.resolution}"
        )
    return lattice.shift_cells(f.resolution)


def _sup_with_cube(per_level: list[np.ndarray], lattice: Lattice) -> tuple[float, DyadicCube]:
    best, where = -np.inf, lattice.root
    for k, vals in enumerate(per_level):
        j = int(np.argmax(vals))
        if vals[j] > best:
            best, where = float(vals[j]), DyadicCube(k, j, lattice.shift)
    return best, where


def bmo_norm(b: GridFunction, lattice: Lattice, return_cube: bool = False):
    """``sup_B mean_B |b - b_B|`` over the lattice.

    Examples
    --------
    >>> from fbmoo.dyadic import build_lattice
    >>> b = GridFunction.from_callable(lambda x: x, 10, sample="midpoint")
    >>> round(bmo_norm(b, build_lattice(6)), 6)
    0.25
    """
    s = _lattice_shift(b, lattice)
    v = np.roll(b.values, -s) if s else b.values
    per_level = []
    for k in range(lattice.max_level + 1):
        blocks = v.reshape(2**k, -1)
        per_level.append(np.abs(blocks - blocks.mean(axis=1, keepdims=True)).mean(axis=1))
    value, cube = _sup_with_cube(per_level, lattice)
    return (value, cube) if return_cube else value


def bmo_norm_weighted(b: GridFunction, phi: GridFunction, lattice: Lattice, return_cube: bool = False):
    """``sup_B phi(B)**-1 int_B |b - b_B|`` with ``phi(B) = int_B phi``."""
    s = _lattice_shift(b, lattice)
    v = np.roll(b.values, -s) if s else b.values
    w = np.roll(phi.values, -s) if s else phi.values
    per_level = []
    for k in range(lattice.max_level + 1):
        blocks = v.reshape(2**k, -1)
        mass = w.reshape(2**k, -1).sum(axis=1)
        if np.any(mass <= 0):
            raise ValueError("degenerate weight: a lattice cube has zero weighted measure")
        osc = np.abs(blocks - blocks.mean(axis=1, keepdims=True)).sum(axis=1)
        per_level.append(osc / mass)
    value, cube = _sup_with_cube(per_level, lattice)
    return (value, cube) if return_cube else value


def fbmo_norm_haar(b: GridFunction, lattice: Lattice, eta: float = 0.0) -> float:
    """Fractional BMO norm through squared Haar coefficients.

    Computes ``sup_R (|R|**(2 eta - 1) sum_{Q in R} <b, h_Q>**2)**(1/2)``
    where ``R`` runs over the lattice and ``Q`` over all its dyadic
    subcubes of level below the grid resolution.

    Examples
    --------
    >>> from fbmoo.dyadic import build_lattice
    >>> b = haar_function(DyadicCube(0, 0), 6)
    >>> fbmo_norm_haar(b, build_lattice(4), eta=0.5)
    1.0
    """
    s = _lattice_shift(b, lattice)
    N = b.resolution
    if N == 0:
        return 0.0
    # tail[k][j]: sum of squared coefficients over all subcubes of cube (k, j)
    tail = haar_coefficients(b.values, N - 1, s) ** 2
    tails = {N - 1: tail}
    for k in range(N - 2, -1, -1):
        tail = haar_coefficients(b.values, k, s) ** 2 + tail.reshape(-1, 2).sum(axis=1)
        tails[k] = tail
    best = 0.0
    for k in range(min(lattice.max_level, N - 1) + 1):
        best = max(best, float(np.max(2.0 ** (-k * (2 * eta - 1)) * tails[k])))
    return math.sqrt(best)


def fbmo_norm_direct(b: GridFunction, lattice: Lattice, eta: float = 0.0, r: float = 2.0) -> float:
    """``sup_R |R|**eta <|b - b_R|>_{r,R}`` computed from oscillations."""
    s = _lattice_shift(b, lattice)
    v = np.roll(b.values, -s) if s else b.values
    best = 0.0
    for k in range(lattice.max_level + 1):
        blocks = v.reshape(2**k, -1)
        osc = (np.abs(blocks - blocks.mean(axis=1, keepdims=True)) ** r).mean(axis=1) ** (1 / r)
        best = max(best, float(np.max(2.0 ** (-k * eta) * osc)))
    return best


def lp_norm(f: GridFunction, p: float, weight: GridFunction | None = None) -> float:
    """``(int |f|**p w)**(1/p)``; ``p = inf`` gives the grid sup norm."""
    a = np.abs(f.values)
    if math.isinf(p):
        return float(a.max())
    w = 1.0 if weight is None else weight.values
    return float((np.sum(a**p * w) * f.cell_width) ** (1.0 / p))


# -- factories ---------------------------------------------------------------


def constant(c: float, resolution: int) -> GridFunction:
    return GridFunction(np.full(2**resolution, float(c)))


def indicator(a: float, b: float, resolution: int) -> GridFunction:
    """``chi_[a, b)`` sampled at the left endpoints of the cells."""
    x = np.arange(2**resolution) / 2**resolution
    return GridFunction(((x >= a) & (x < b)).astype(float))


def power(exponent: float, resolution: int, scale: float = 1.0) -> GridFunction:
    """``scale * x**exponent`` sampled at cell midpoints."""
    return GridFunction.from_callable(lambda x: scale * x**exponent, resolution, "midpoint")


def haar_function(cube: DyadicCube, resolution: int, cancellative: bool = True) -> GridFunction:
    return GridFunction(haar_vector(cube, resolution, cancellative))


def random_function(
    rng: np.random.Generator,
    resolution: int,
    level: int | None = None,
    low: float = 0.0,
    high: float = 1.0,
    sparsity: float = 0.0,
) -> GridFunction:
    """Random function constant on the cubes of ``level`` (default: cells).

    Values are uniform on ``[low, high)``; each coarse cube is zeroed
    independently with probability ``sparsity``.
    """
    level = resolution if level is None else level
    if level > resolution:
        raise ValueError("level exceeds resolution")
    coarse = rng.uniform(low, high, 2**level)
    if sparsity > 0:
        coarse = np.where(rng.random(2**level) < sparsity, 0.0, coarse)
    return GridFunction(np.repeat(coarse, 2 ** (resolution - level)))
