"""Multilinear fractional maximal operators, fractional integrals, shifts and paraproducts.

Grid evaluations return :class:`~fbmoo.gridfn.GridFunction` objects on the
input grid.  The fractional integral is evaluated with midpoint quadrature
nodes; at the left endpoint ``x_i`` of a cell every distance to a node is a
half-integer multiple of the cell width, which turns the ``m``-fold sum into
a one-dimensional convolution of distance histograms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy import signal

from .dyadic import DyadicCube, Lattice, cube_cells, haar_coefficients
from .gridfn import GridFunction, level_averages, level_means

__all__ = [
    "KernelSpec",
    "ShiftSpec",
    "ParaproductSpec",
    "maximal",
    "maximal_tensor",
    "maximal_grid",
    "fractional_integral",
    "fractional_integral_grid",
    "apply_shift",
    "apply_paraproduct",
    "shift_coefficient_bound",
    "carleson_constant",
]


def _as_list(fs) -> list[GridFunction]:
    fs = list(fs)
    if not fs:
        raise ValueError("at least one input function is required")
    N = fs[0].resolution
    if any(f.resolution != N for f in fs):
        raise ValueError("input functions live on different grids")
    return fs


def _broadcast(values, m, name):
    if np.ndim(values) == 0:
        return [float(values)] * m
    values = [float(v) for v in values]
    if len(values) != m:
        raise ValueError(f"{name} must have {m} entries")
    return values


def _level_products(fs, lattice, rs, etas, level, s):
    prod = np.ones(2**level)
    for f, r, eta in zip(fs, rs, etas):
        prod = prod * level_averages(f, level, r, eta, s)
    return prod


def maximal(fs: Sequence[GridFunction], x, lattice: Lattice, rs=1.0, etas=0.0) -> float:
    """``sup_{B ∋ x} prod_i <|f_i|>_{eta_i, r_i, B}`` over the lattice.

    Examples
    --------
    >>> from fbmoo.dyadic import build_lattice
    >>> from fbmoo.gridfn import indicator
    >>> f = indicator(0, 0.5, 6)
    >>> maximal([f], 0.75, build_lattice(6))
    0.5
    """
    fs = _as_list(fs)
    m = len(fs)
    rs, etas = _broadcast(rs, m, "rs"), _broadcast(etas, m, "etas")
    if not 0 <= x < 1:
        raise ValueError(f"point {x} outside [0, 1)")
    N = fs[0].resolution
    if lattice.max_level > N:
        raise ValueError("lattice is deeper than the grid")
    s = lattice.shift_cells(N)
    best = 0.0
    for B in lattice.containing(x):
        vals = _level_products(fs, lattice, rs, etas, B.level, s)
        best = max(best, float(vals[B.index]))
    return best


def maximal_tensor(fs: Sequence[GridFunction], x, lattice: Lattice, rs=1.0, etas=0.0) -> float:
    """Product of the one-function maximal operators, ``prod_i M_{eta_i, r_i} f_i(x)``."""
    fs = _as_list(fs)
    m = len(fs)
    rs, etas = _broadcast(rs, m, "rs"), _broadcast(etas, m, "etas")
    return math.prod(maximal([f], x, lattice, r, e) for f, r, e in zip(fs, rs, etas))


def maximal_grid(fs: Sequence[GridFunction], lattice: Lattice, rs=1.0, etas=0.0) -> GridFunction:
    """:func:`maximal` evaluated on every grid cell at once."""
    fs = _as_list(fs)
    m = len(fs)
    rs, etas = _broadcast(rs, m, "rs"), _broadcast(etas, m, "etas")
    N = fs[0].resolution
    if lattice.max_level > N:
        raise ValueError("lattice is deeper than the grid")
    s = lattice.shift_cells(N)
    out = np.zeros(2**N)
    for k in range(lattice.max_level + 1):
        vals = _level_products(fs, lattice, rs, etas, k, s)
        out = np.maximum(out, np.repeat(vals, 2 ** (N - k)))
    if s:
        out = np.roll(out, s)
    return GridFunction(out)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel ``(sum_i |x - y_i|)**(eta - m)`` with optional truncation.

    Parameters
    ----------
    m : int
        Number of input functions.
    eta : float
        Total fractional order, ``0 < eta < m``.
    epsilon : float, optional
        Distance sums at or below ``epsilon`` are excluded.
    """

    m: int
    eta: float
    epsilon: float = 0.0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if not 0 < self.eta < self.m:
            raise ValueError(f"eta must lie in (0, m) = (0, {self.m}), got {self.eta}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")

    def __call__(self, distance_sum):
        d = np.asarray(distance_sum, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(d > self.epsilon, d ** (self.eta - self.m), 0.0)
        return out


def fractional_integral(fs: Sequence[GridFunction], x, kernel: KernelSpec) -> float:
    """Direct midpoint quadrature of the ``m``-linear fractional integral at ``x``.

    Node tuples whose distance sum vanishes are skipped.  The cost is
    ``2**(N m)`` kernel evaluations, so this is the reference route for
    small grids or single points; :func:`fractional_integral_grid` is the
    fast route at the grid nodes.

    Examples
    --------
    >>> from fbmoo.gridfn import constant
    >>> round(fractional_integral([constant(1, 12)], 0.0, KernelSpec(1, 0.5)), 3)
    1.991
    """
    fs = _as_list(fs)
    if len(fs) != kernel.m:
        raise ValueError(f"kernel arity {kernel.m} does not match {len(fs)} inputs")
    if not 0 <= x < 1:
        raise ValueError(f"point {x} outside [0, 1)")
    h = fs[0].cell_width
    mids = fs[0].midpoints
    dist = np.abs(x - mids)
    vals = [f.values * h for f in fs]
    if kernel.m == 1:
        return float(np.sum(vals[0] * kernel(dist)))
    # fold all but the first slot into a table of (distance sum, weight)
    d_tail, w_tail = dist, vals[-1]
    for v in reversed(vals[1:-1]):
        d_tail = np.add.outer(dist, d_tail).ravel()
        w_tail = np.multiply.outer(v, w_tail).ravel()
    total = 0.0
    for j in np.flatnonzero(vals[0]):
        total += vals[0][j] * float(np.sum(w_tail * kernel(dist[j] + d_tail)))
    return float(total)


def _distance_weights(values: np.ndarray, h: float, rows: np.ndarray) -> np.ndarray:
    """Histogram of node weights by half-integer distance to the nodes ``rows``.

    Entry ``[a, k]`` is the total weight of the nodes at distance
    ``(k + 1/2) h`` from the left endpoint of cell ``rows[a]``.
    """
    n = values.size
    k = np.arange(n)
    right = rows[:, None] + k[None, :]
    left = rows[:, None] - 1 - k[None, :]
    padded = np.concatenate([values, [0.0]])
    out = padded[np.where(right < n, right, n)]
    out = out + padded[np.where(left >= 0, left, n)]
    return out * h


def fractional_integral_grid(
    fs: Sequence[GridFunction], kernel: KernelSpec, block: int | None = None
) -> GridFunction:
    """Fractional integral at every left endpoint ``x_i = i 2**-N``.

    Each slot contributes the histogram of its weights over distances
    ``(k + 1/2) h``; the ``m``-fold convolution of the histograms gives the
    weight of every distance sum ``(K + m/2) h``, which is then paired with
    the kernel.  The result equals :func:`fractional_integral` at the same
    points up to rounding.
    """
    fs = _as_list(fs)
    m = kernel.m
    if len(fs) != m:
        raise ValueError(f"kernel arity {m} does not match {len(fs)} inputs")
    n, h = fs[0].size, fs[0].cell_width
    kern = kernel((np.arange(m * n) + m / 2.0) * h)
    if block is None:
        block = max(1, min(n, 2**22 // (m * n)))
    out = np.empty(n)
    for start in range(0, n, block):
        rows = np.arange(start, min(n, start + block))
        hist = _distance_weights(fs[0].values, h, rows)
        for f in fs[1:]:
            hist = signal.fftconvolve(hist, _distance_weights(f.values, h, rows), axes=1)
        out[rows] = hist @ kern[: hist.shape[1]]
    return GridFunction(out)


# -- dyadic model operators --------------------------------------------------


def shift_coefficient_bound(P: DyadicCube, Js: Sequence[DyadicCube], m: int, eta: float, C: float = 1.0) -> float:
    """``C prod_i |J_i|**(1/2) / |P|**(m - eta)``."""
    size = math.prod(float(J.length) ** 0.5 for J in Js)
    return C * size / float(P.length) ** (m - eta)


@dataclass(frozen=True)
class ShiftSpec:
    """Coefficients of an ``m``-linear fractional dyadic shift.

    Parameters
    ----------
    complexity : tuple of int
        ``(j_1, ..., j_{m+1})``: cube ``J_i`` sits ``j_i`` levels below ``P``.
    coefficients : mapping
        ``(P, J_1, ..., J_{m+1}) -> beta``.
    cancellative : tuple of bool
        Whether input slot ``i`` pairs with ``h_{J_i}`` (True) or with the
        normalized indicator ``h^0_{J_i}`` (False).  The output slot always
        uses ``h_{J_{m+1}}``.
    eta : float
    constant : float, optional
        The ``C`` of the coefficient bound.

    Raises
    ------
    ValueError
        If a coefficient exceeds the bound, a cube tuple does not match the
        complexity, or no input slot is cancellative.
    """

    complexity: tuple
    coefficients: Mapping
    cancellative: tuple
    eta: float
    constant: float = 1.0
    m: int = field(init=False)

    def __post_init__(self):
        complexity = tuple(int(j) for j in self.complexity)
        if len(complexity) < 2 or min(complexity) < 0:
            raise ValueError("complexity needs m + 1 >= 2 nonnegative entries")
        m = len(complexity) - 1
        canc = tuple(bool(c) for c in self.cancellative)
        if len(canc) != m:
            raise ValueError(f"expected {m} cancellation flags")
        if not any(canc):
            raise ValueError("at least one input slot must be cancellative")
        if not 0 <= self.eta < m:
            raise ValueError(f"eta must lie in [0, {m})")
        coeffs = {}
        for key, beta in self.coefficients.items():
            P, *Js = key
            if len(Js) != m + 1:
                raise ValueError("each key must be (P, J_1, ..., J_{m+1})")
            for J, j in zip(Js, complexity):
                if J.level != P.level + j or not P.contains(J):
                    raise ValueError(f"{J} is not a level-{j} descendant of {P}")
            bound = shift_coefficient_bound(P, Js, m, self.eta, self.constant)
            if abs(beta) > bound * (1 + 1e-12):
                raise ValueError(
                    f"coefficient {beta} exceeds the size bound {bound} at {P}"
                )
            coeffs[tuple(key)] = float(beta)
        object.__setattr__(self, "complexity", complexity)
        object.__setattr__(self, "cancellative", canc)
        object.__setattr__(self, "coefficients", dict(sorted(coeffs.items())))
        object.__setattr__(self, "m", m)


def _coefficient_tables(fs, levels, s, cancellative):
    """Haar (or averaging) coefficients of each input at each needed level."""
    tables = []
    for f, canc in zip(fs, cancellative):
        tables.append({k: haar_coefficients(f.values, k, s, canc) for k in levels})
    return tables


def _synthesize(coeffs_by_level: dict, N: int, s: int) -> GridFunction:
    out = np.zeros(2**N)
    for k, c in sorted(coeffs_by_level.items()):
        half = 2 ** (N - k - 1)
        pattern = np.stack([c, -c], axis=1) * 2.0 ** (k / 2)
        out += np.repeat(pattern.ravel(), half)
    if s:
        out = np.roll(out, s)
    return GridFunction(out)


def _check_lattice(cubes, lattice, N):
    for Q in cubes:
        if Q not in lattice:
            raise ValueError(f"cube {Q} lies outside the lattice")
        if Q.level + 1 > N:
            raise ValueError(f"resolution {N} cannot resolve the Haar function of {Q}")


def apply_shift(spec: ShiftSpec, fs: Sequence[GridFunction], lattice: Lattice) -> GridFunction:
    """``sum beta prod_i <f_i, h~_{J_i}> h_{J_{m+1}}`` over the coefficient map.

    Examples
    --------
    >>> from fbmoo.gridfn import constant
    >>> P = DyadicCube(0, 0)
    >>> spec = ShiftSpec((0, 0, 0), {(P, P, P, P): 1.0}, (True, True), 0.0)
    >>> from fbmoo.dyadic import build_lattice
    >>> float(abs(apply_shift(spec, [constant(1, 4)] * 2, build_lattice(3)).values).max())
    0.0
    """
    fs = _as_list(fs)
    if len(fs) != spec.m:
        raise ValueError(f"shift is {spec.m}-linear, got {len(fs)} inputs")
    N = fs[0].resolution
    s = lattice.shift_cells(N)
    keys = list(spec.coefficients)
    _check_lattice({J for key in keys for J in key}, lattice, N)
    levels = sorted({J.level for key in keys for J in key[1:]})
    tables = _coefficient_tables(fs, levels, s, spec.cancellative)
    out: dict[int, np.ndarray] = {}
    for key, beta in spec.coefficients.items():
        Js = key[1:]
        term = beta
        for t, J in zip(tables, Js[:-1]):
            term *= t[J.level][J.index]
        Jout = Js[-1]
        out.setdefault(Jout.level, np.zeros(2**Jout.level))[Jout.index] += term
    return _synthesize(out, N, s)


def carleson_constant(coefficients: Mapping[DyadicCube, float], eta: float) -> float:
    """``sup_{P0} |P0|**(-2 eta - 1) sum_{P in P0} beta_P**2``.

    Only cubes containing at least one coefficient cube contribute, so the
    supremum runs over the coefficient cubes and their ancestors.
    """
    mass: dict[DyadicCube, float] = {}
    for P, beta in coefficients.items():
        for A in P.ancestors(include_self=True):
            mass[A] = mass.get(A, 0.0) + beta * beta
    return max(
        (v * float(A.length) ** (-2 * eta - 1) for A, v in mass.items()), default=0.0
    )


@dataclass(frozen=True)
class ParaproductSpec:
    """Coefficients ``beta_P`` of an ``m``-linear fractional paraproduct.

    Raises
    ------
    ValueError
        If the Carleson packing constant exceeds ``constant``.
    """

    coefficients: Mapping
    eta: float
    m: int = 2
    constant: float = 1.0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be at least 1")
        coeffs = {P: float(b) for P, b in self.coefficients.items()}
        value = carleson_constant(coeffs, self.eta)
        if value > self.constant * (1 + 1e-12):
            raise ValueError(
                f"Carleson packing constant {value} exceeds {self.constant}"
            )
        object.__setattr__(self, "coefficients", dict(sorted(coeffs.items())))


def apply_paraproduct(spec: ParaproductSpec, fs: Sequence[GridFunction], lattice: Lattice) -> GridFunction:
    """``sum_P beta_P prod_i <f_i>_P h_P``."""
    fs = _as_list(fs)
    if len(fs) != spec.m:
        raise ValueError(f"paraproduct is {spec.m}-linear, got {len(fs)} inputs")
    N = fs[0].resolution
    s = lattice.shift_cells(N)
    _check_lattice(spec.coefficients, lattice, N)
    levels = sorted({P.level for P in spec.coefficients})
    # signed averages <f_i>_P, not the averages of |f_i|
    means = [{k: level_means(f.values, k, s) for k in levels} for f in fs]
    out: dict[int, np.ndarray] = {}
    for P, beta in spec.coefficients.items():
        term = beta * math.prod(t[P.level][P.index] for t in means)
        out.setdefault(P.level, np.zeros(2**P.level))[P.index] += term
    return _synthesize(out, N, s)
