"""Weight characteristics, extrapolation exponents and weight factorizations.

Exponents are handled through their reciprocals as exact fractions, so an
infinite exponent is the reciprocal ``0``.  An average with reciprocal
exponent ``0`` is the grid essential supremum.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .dyadic import DyadicCube, Lattice
from .gridfn import GridFunction, lp_norm

__all__ = [
    "InadmissibleExponents",
    "ExponentTuple",
    "WeightTuple",
    "reciprocal",
    "extrapolation_exponents",
    "random_exponents",
    "ap_constant",
    "apq_constant_weighted",
    "multilinear_constant",
    "cube_sweep",
    "factorize_weights",
    "inverse_factorize",
    "FactorizationReport",
    "lemma_product_bound",
    "norm_identities",
    "bloom_weight",
    "power_weight",
    "random_log_lipschitz_weight",
    "weight_report_json",
]


class InadmissibleExponents(ValueError):
    """Raised when an exponent tuple violates an admissibility relation."""


def reciprocal(value) -> Fraction:
    """Exact reciprocal of an exponent; ``inf`` maps to ``0``.

    Floats are read through their decimal ``repr``; strings such as
    ``"4/3"`` or ``"inf"`` are accepted.
    """
    if isinstance(value, str) and value.strip().lower() in {"inf", "infinity", "∞"}:
        return Fraction(0)
    if isinstance(value, float):
        if math.isinf(value) and value > 0:
            return Fraction(0)
        q = Fraction(repr(value))
    else:
        q = Fraction(value)
    if q <= 0:
        raise InadmissibleExponents(f"exponent must be positive, got {value}")
    return 1 / q


def _fmt(inv: Fraction) -> str:
    return "inf" if inv == 0 else str(1 / inv)


def _as_float(inv: Fraction) -> float:
    return math.inf if inv == 0 else float(1 / inv)


@dataclass(frozen=True)
class ExponentTuple:
    """``(m, eta, p, r, s)`` and every derived exponent, as exact reciprocals.

    Use :func:`extrapolation_exponents` to build validated instances.  All
    ``inv_*`` attributes hold reciprocals; e.g. ``inv_delta[j] = 1/delta_{j+1}``
    for ``j = 0..m`` with the last entry belonging to the output slot.
    """

    m: int
    eta: Fraction
    inv_p: tuple
    inv_r: tuple
    inv_s: Fraction
    inv_ptilde: Fraction = field(init=False)
    inv_rtilde: Fraction = field(init=False)
    inv_delta: tuple = field(init=False)
    inv_gamma: Fraction = field(init=False)
    zeta: Fraction = field(init=False)
    inv_theta: tuple = field(init=False)
    inv_rho: Fraction = field(init=False)

    def __post_init__(self):
        s = object.__setattr__
        s(self, "eta", Fraction(self.eta))
        s(self, "inv_p", tuple(Fraction(v) for v in self.inv_p))
        s(self, "inv_r", tuple(Fraction(v) for v in self.inv_r))
        s(self, "inv_s", Fraction(self.inv_s))
        inv_pt = sum(self.inv_p) - self.eta
        s(self, "inv_ptilde", inv_pt)
        s(self, "inv_rtilde", sum(self.inv_r) - self.eta)
        deltas = tuple(r - p for r, p in zip(self.inv_r, self.inv_p)) + (inv_pt - self.inv_s,)
        s(self, "inv_delta", deltas)
        s(self, "inv_gamma", sum(self.inv_r) + (1 - self.inv_s))
        zeta = self.inv_gamma - (1 + self.eta)
        s(self, "zeta", zeta)
        s(self, "inv_theta", tuple(zeta - d for d in deltas[: self.m]))
        s(self, "inv_rho", deltas[self.m - 1] + deltas[self.m])

    # derived quantities -------------------------------------------------
    @property
    def inv_sprime(self) -> Fraction:
        return 1 - self.inv_s

    @property
    def inv_ptilde_prime(self) -> Fraction:
        return 1 - self.inv_ptilde

    @property
    def degenerate(self) -> bool:
        """True when ``zeta = 0``: every average bracket is an ess-sup."""
        return self.zeta == 0

    @property
    def theta_sharp(self) -> float:
        """``max_j (1/r_j) / (1/delta_j)`` with ``1/r_{m+1} = 1/s'``; ``inf`` if degenerate."""
        tops = list(self.inv_r) + [self.inv_sprime]
        vals = [math.inf if d == 0 else float(t / d) for t, d in zip(tops, self.inv_delta)]
        return max(vals)

    @property
    def theta_inputs(self) -> float:
        """``max_i p_i / (p_i - r_i)`` over the input slots only."""
        return max(
            math.inf if d == 0 else float(t / d)
            for t, d in zip(self.inv_r, self.inv_delta[: self.m])
        )

    @property
    def xi(self) -> float:
        """``max_j delta_j``."""
        return max(_as_float(d) for d in self.inv_delta)

    @property
    def p(self) -> tuple:
        return tuple(_as_float(v) for v in self.inv_p)

    @property
    def r(self) -> tuple:
        return tuple(_as_float(v) for v in self.inv_r)

    @property
    def s(self) -> float:
        return _as_float(self.inv_s)

    @property
    def ptilde(self) -> float:
        return _as_float(self.inv_ptilde)

    @property
    def rtilde(self) -> float:
        return _as_float(self.inv_rtilde)

    def identities(self) -> dict:
        """The exact identities, each as a pair ``(lhs, rhs)`` of fractions."""
        return {
            "sum_inv_p_equals_1_plus_eta": (sum(self.inv_p) + self.inv_ptilde_prime, 1 + self.eta),
            "sum_inv_delta_equals_zeta": (sum(self.inv_delta), self.zeta),
            "inv_rho_relation": (self.inv_rho, self.inv_delta[self.m - 1] + self.inv_delta[self.m]),
            "inv_theta_relation": (
                tuple(self.inv_theta),
                tuple(self.zeta - d for d in self.inv_delta[: self.m]),
            ),
        }

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "eta": str(self.eta),
            "p": [_fmt(v) for v in self.inv_p],
            "r": [_fmt(v) for v in self.inv_r],
            "s": _fmt(self.inv_s),
            "ptilde": _fmt(self.inv_ptilde),
            "rtilde": _fmt(self.inv_rtilde),
            "inv_delta": [str(v) for v in self.inv_delta],
            "inv_gamma": str(self.inv_gamma),
            "zeta": str(self.zeta),
            "inv_theta": [str(v) for v in self.inv_theta],
            "inv_rho": str(self.inv_rho),
            "theta_sharp": self.theta_sharp,
            "xi": self.xi,
            "degenerate": self.degenerate,
        }


def extrapolation_exponents(m: int, eta, p, r, s) -> ExponentTuple:
    """Validated :class:`ExponentTuple` for ``(m, eta, p, r, s)``.

    Raises
    ------
    InadmissibleExponents
        If some ``r_i > p_i``, if ``s < p~`` (the relation
        ``(r, s) ⪯ (p, p~)`` fails), or if a range condition is violated.

    Examples
    --------
    >>> e = extrapolation_exponents(1, 0, [2], [1], "inf")
    >>> e.ptilde, [1 / d for d in e.inv_delta], e.zeta, e.inv_theta[0], e.inv_rho
    (2.0, [Fraction(2, 1), Fraction(2, 1)], Fraction(1, 1), Fraction(1, 2), Fraction(1, 1))
    """
    m = int(m)
    if m < 1:
        raise InadmissibleExponents("m must be at least 1")
    eta = Fraction(repr(eta)) if isinstance(eta, float) else Fraction(eta)
    p = [p] if np.ndim(p) == 0 and not isinstance(p, (list, tuple)) else list(p)
    r = [r] if np.ndim(r) == 0 and not isinstance(r, (list, tuple)) else list(r)
    if len(p) != m or len(r) != m:
        raise InadmissibleExponents(f"expected {m} entries in p and r")
    inv_p = [reciprocal(v) for v in p]
    inv_r = [reciprocal(v) for v in r]
    inv_s = reciprocal(s)
    if not 0 <= eta < m:
        raise InadmissibleExponents(f"eta must lie in [0, m) = [0, {m}), got {eta}")
    for i, (a, b) in enumerate(zip(inv_p, inv_r), 1):
        if a >= 1:
            raise InadmissibleExponents(f"p_{i} = {_fmt(a)} must exceed 1")
        if b > 1 or b == 0:
            raise InadmissibleExponents(f"r_{i} = {_fmt(b)} must lie in [1, inf)")
        if b < a:
            raise InadmissibleExponents(
                f"(r, s) ⪯ (p, p~) violated: r_{i} = {_fmt(b)} > p_{i} = {_fmt(a)}"
            )
    if inv_s > 1:
        raise InadmissibleExponents(f"s = {_fmt(inv_s)} must be at least 1")
    exps = ExponentTuple(m, eta, tuple(inv_p), tuple(inv_r), inv_s)
    if exps.inv_ptilde <= 0:
        raise InadmissibleExponents(
            f"1/p~ = sum 1/p_i - eta = {exps.inv_ptilde} must be positive"
        )
    if exps.inv_ptilde > 1:
        raise InadmissibleExponents(f"p~ = {_fmt(exps.inv_ptilde)} must be at least 1")
    if inv_s > exps.inv_ptilde:
        raise InadmissibleExponents(
            f"(r, s) ⪯ (p, p~) violated: s = {_fmt(inv_s)} < p~ = {_fmt(exps.inv_ptilde)}"
        )
    return exps


def random_exponents(rng: np.random.Generator, m: int, denominator: int = 12) -> ExponentTuple:
    """Random admissible tuple with reciprocals on the grid ``1/denominator``."""
    while True:
        inv_p = [Fraction(int(rng.integers(1, denominator)), denominator) for _ in range(m)]
        inv_r = [Fraction(int(rng.integers(int(a * denominator), denominator + 1)), denominator) for a in inv_p]
        top = sum(inv_p)
        eta_num = int(rng.integers(0, max(1, int(top * denominator))))
        eta = Fraction(eta_num, denominator)
        if not eta < min(top, m):
            continue
        inv_pt = top - eta
        if not 0 < inv_pt <= 1:
            continue
        inv_s = Fraction(int(rng.integers(0, int(inv_pt * denominator) + 1)), denominator)
        if inv_s > inv_pt:
            continue
        return extrapolation_exponents(m, eta, [1 / a for a in inv_p], [1 / b for b in inv_r], "inf" if inv_s == 0 else 1 / inv_s)


@dataclass(frozen=True, eq=False)
class WeightTuple:
    """Positive weights ``omega_1, ..., omega_m`` on a common grid."""

    weights: tuple

    def __post_init__(self):
        ws = tuple(self.weights)
        if not ws:
            raise ValueError("at least one weight is required")
        N = ws[0].resolution
        for w in ws:
            if w.resolution != N:
                raise ValueError("weights live on different grids")
            if not np.all(w.values > 0):
                raise ValueError("weights must be strictly positive")
        object.__setattr__(self, "weights", ws)

    def __len__(self):
        return len(self.weights)

    def __getitem__(self, i):
        return self.weights[i]

    @property
    def product(self) -> GridFunction:
        out = np.ones(self.weights[0].size)
        for w in self.weights:
            out = out * w.values
        return GridFunction(out)


# -- cube sweeps -----------------------------------------------------------


def _blocks(values, level, s):
    v = np.roll(values, -s) if s else values
    return v.reshape(2**level, -1)


def _bracket(blocks: np.ndarray, inv_t: Fraction, sigma: np.ndarray | None = None) -> np.ndarray:
    """Per-cube ``(mean g**t)**(1/t)`` (or ``sigma``-weighted mean); ess-sup when ``1/t = 0``."""
    if inv_t < 0:
        raise InadmissibleExponents(f"negative bracket exponent 1/t = {inv_t}")
    if inv_t == 0:
        return blocks.max(axis=1)
    t = float(1 / inv_t)
    if sigma is None:
        mean = (blocks**t).mean(axis=1)
    else:
        mean = (blocks**t * sigma).sum(axis=1) / sigma.sum(axis=1)
    return mean ** float(inv_t)


def cube_sweep(per_cube, lattice: Lattice, resolution: int) -> tuple[float, DyadicCube, list]:
    """Maximize ``per_cube(level, shift_cells)`` over the lattice.

    ``per_cube`` returns an array with one value per cube of the level.
    Returns the supremum, the first cube (level-major, index-minor) that
    attains it and the per-level arrays.
    """
    if lattice.max_level > resolution:
        raise ValueError("lattice is deeper than the grid")
    s = lattice.shift_cells(resolution)
    best, where, table = -math.inf, lattice.root, []
    for k in range(lattice.max_level + 1):
        vals = np.asarray(per_cube(k, s), dtype=float)
        table.append(vals)
        j = int(np.argmax(vals))
        if vals[j] > best:
            best, where = float(vals[j]), DyadicCube(k, j, lattice.shift)
    return best, where, table


def ap_constant(w: GridFunction, p: float, lattice: Lattice, return_cube: bool = False):
    """Muckenhoupt characteristic ``sup_B <w>_B <w**(1 - p')>_B**(p - 1)``.

    ``p = 1`` gives the ``A_1`` characteristic ``sup_B <w>_B ess sup_B w**-1``.

    Examples
    --------
    >>> from fbmoo.dyadic import build_lattice
    >>> from fbmoo.gridfn import constant
    >>> ap_constant(constant(3.0, 6), 2.0, build_lattice(5))
    1.0
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    if not np.all(w.values > 0):
        raise ValueError("weight must be strictly positive")

    def per_cube(k, s):
        b = _blocks(w.values, k, s)
        if p == 1:
            return b.mean(axis=1) * (1.0 / b).max(axis=1)
        # log space: w**(1 - p') overflows as p -> 1
        pp = p / (p - 1)
        logb = np.log(b)
        dual = (logsumexp((1 - pp) * logb, axis=1) - np.log(b.shape[1])) * (p - 1)
        return np.exp(logsumexp(logb, axis=1) - np.log(b.shape[1]) + dual)

    value, cube, _ = cube_sweep(per_cube, lattice, w.resolution)
    return (value, cube) if return_cube else value


def apq_constant_weighted(
    W: GridFunction, inv_p: Fraction, inv_q: Fraction, sigma: GridFunction, lattice: Lattice,
    return_cube: bool = False,
):
    """``sup_B (avg_sigma W**q)**(1/q) (avg_sigma W**-p')**(1/p')`` with ``sigma``-averages."""

    inv_pprime = 1 - Fraction(inv_p)

    def per_cube(k, s):
        bw = _blocks(W.values, k, s)
        bs = _blocks(sigma.values, k, s)
        return _bracket(bw, Fraction(inv_q), bs) * _bracket(1.0 / bw, inv_pprime, bs)

    value, cube, _ = cube_sweep(per_cube, lattice, W.resolution)
    return (value, cube) if return_cube else value


def multilinear_constant(ws: WeightTuple, exps: ExponentTuple, lattice: Lattice, return_cube: bool = False):
    """``sup_B prod_j <omega_j**-1>_{delta_j,B} <omega>_{delta_{m+1},B}``.

    A reciprocal exponent ``1/delta_j = 0`` turns the bracket into an
    ess-sup; a negative one raises :class:`InadmissibleExponents`.
    """
    if len(ws) != exps.m:
        raise ValueError(f"expected {exps.m} weights, got {len(ws)}")
    for j, d in enumerate(exps.inv_delta, 1):
        if d < 0:
            raise InadmissibleExponents(f"1/delta_{j} = {d} is negative")
    omega = ws.product

    def per_cube(k, s):
        out = _bracket(_blocks(omega.values, k, s), exps.inv_delta[-1])
        for w, d in zip(ws.weights, exps.inv_delta[:-1]):
            out = out * _bracket(1.0 / _blocks(w.values, k, s), d)
        return out

    value, cube, _ = cube_sweep(per_cube, lattice, omega.resolution)
    return (value, cube) if return_cube else value


# -- factorization -----------------------------------------------------------


@dataclass
class FactorizationReport:
    """Measured constants of the factorization and the lemma's inequalities."""

    constants: dict
    inequalities: dict

    @property
    def passed(self) -> bool:
        return all(v["passed"] for v in self.inequalities.values() if v.get("gating", True))

    def to_dict(self) -> dict:
        return {"constants": self.constants, "inequalities": self.inequalities}


def _require_factorizable(exps: ExponentTuple):
    if exps.inv_rho <= 0:
        raise InadmissibleExponents(f"1/rho = {exps.inv_rho} must be positive")
    for i, t in enumerate(exps.inv_theta[: exps.m - 1], 1):
        if t <= 0:
            raise InadmissibleExponents(f"1/theta_{i} = {t} must be positive")
    for j, d in enumerate(exps.inv_delta, 1):
        if d < 0:
            raise InadmissibleExponents(f"1/delta_{j} = {d} is negative")


def _small_weight(ws: WeightTuple, exps: ExponentTuple) -> GridFunction:
    out = np.ones(ws[0].size)
    for w in ws.weights[:-1]:
        out = out * w.values
    return GridFunction(out ** float(1 / exps.inv_rho))


def _ineq(lhs, rhs, rtol, gating=True):
    return {"lhs": lhs, "rhs": rhs, "rtol": rtol, "gating": gating,
            "passed": bool(lhs <= rhs * (1 + rtol))}


def factorize_weights(ws: WeightTuple, exps: ExponentTuple, lattice: Lattice, rtol: float = 1e-9):
    """Split ``omega`` into ``omega~ = (prod_{i<m} omega_i)**rho`` and ``W``.

    ``W = omega**r_m * omega~**(-r_m / delta_{m+1})``.  The report holds
    the measured characteristics and the inequalities
    ``[omega_i**theta_i]_{A_{zeta theta_i}} <= [omega]**theta_i`` (i.1),
    ``[omega~]_{A_{zeta rho}} <= [omega]**rho`` (i.2), both gating, and the
    weighted ``A_{p,q}(omega~)`` bound for ``W`` (i.3), reported only.

    Returns
    -------
    omega_small : GridFunction
    W : GridFunction
    report : FactorizationReport
    """
    _require_factorizable(exps)
    m = exps.m
    r_m = float(1 / exps.inv_r[m - 1])
    omega = ws.product
    small = _small_weight(ws, exps)
    W = GridFunction(omega.values**r_m * small.values ** (-r_m * float(exps.inv_delta[m])))
    K = multilinear_constant(ws, exps, lattice)
    constants = {"multilinear": K}
    inequalities = {}
    for i in range(m - 1):
        theta = float(1 / exps.inv_theta[i])
        p_i = float(exps.zeta / exps.inv_theta[i])
        c = ap_constant(ws[i] ** theta, p_i, lattice)
        constants[f"A_theta_{i + 1}"] = c
        inequalities[f"i.1[{i + 1}]"] = _ineq(c, K**theta, rtol)
    if m >= 2:
        rho = float(1 / exps.inv_rho)
        c = ap_constant(small, float(exps.zeta / exps.inv_rho), lattice)
        constants["A_rho_small"] = c
        inequalities["i.2"] = _ineq(c, K**rho, rtol)
    inv_p_w = exps.inv_p[m - 1] / exps.inv_r[m - 1]
    inv_q_w = exps.inv_delta[m] / exps.inv_r[m - 1]
    c = apq_constant_weighted(W, inv_p_w, inv_q_w, small, lattice)
    constants["Apq_W"] = c
    inequalities["i.3"] = _ineq(c, K**r_m, rtol, gating=False)
    return small, W, FactorizationReport(constants, inequalities)


def inverse_factorize(omega_small: Sequence[GridFunction], W: GridFunction, exps: ExponentTuple) -> WeightTuple:
    """Rebuild the weight tuple from ``omega_1, ..., omega_{m-1}`` and ``W``.

    ``omega_m = W**(1/r_m) * omega~**(-1/delta_m)`` with ``omega~`` formed
    from the given small weights.
    """
    smalls = list(omega_small)
    if len(smalls) != exps.m - 1:
        raise ValueError(f"expected {exps.m - 1} small weights")
    for w in smalls + [W]:
        if not np.all(w.values > 0):
            raise ValueError("weights must be strictly positive")
    _require_factorizable(exps)
    m = exps.m
    prod = np.ones(W.size)
    for w in smalls:
        prod = prod * w.values
    tilde = prod ** float(1 / exps.inv_rho)
    last = W.values ** float(exps.inv_r[m - 1]) * tilde ** (-float(exps.inv_delta[m - 1]))
    return WeightTuple(tuple(smalls) + (GridFunction(last),))


def lemma_product_bound(ws: WeightTuple, exps: ExponentTuple, lattice: Lattice, rtol: float = 1e-9) -> dict:
    """Right-hand side of the product bound for the rebuilt tuple and the flag."""
    small, W, report = factorize_weights(ws, exps, lattice, rtol)
    m = exps.m
    r_m = float(1 / exps.inv_r[m - 1])
    rhs = report.constants["Apq_W"] ** (1 / r_m)
    if m >= 2:
        rhs *= report.constants["A_rho_small"] ** float(exps.inv_rho)
    for i in range(m - 1):
        rhs *= report.constants[f"A_theta_{i + 1}"] ** float(exps.inv_theta[i])
    lhs = report.constants["multilinear"]
    return _ineq(lhs, rhs, rtol, gating=False)


def norm_identities(f: GridFunction, ws: WeightTuple, exps: ExponentTuple) -> dict:
    """Both sides of the two weighted norm identities behind the factorization.

    ``||f omega||_{p~} = ||(f omega~**(-1/s))**r_m W||_{L^{p~/r_m}(omega~)}**(1/r_m)``
    and
    ``||f omega_m||_{p_m} = ||(f omega~**(-1/r_m))**r_m W||_{L^{p_m/r_m}(omega~)}**(1/r_m)``.
    Each side is computed from its own definition.
    """
    _require_factorizable(exps)
    m = exps.m
    if exps.inv_p[m - 1] == 0:
        raise InadmissibleExponents("p_m must be finite for the norm identities")
    r_m = float(1 / exps.inv_r[m - 1])
    p_m = float(1 / exps.inv_p[m - 1])
    pt = float(1 / exps.inv_ptilde)
    small = _small_weight(ws, exps)
    omega = ws.product
    W = omega.values**r_m * small.values ** (-r_m * float(exps.inv_delta[m]))
    a = np.abs(f.values)
    lhs1 = lp_norm(GridFunction(a * omega.values), pt)
    g1 = (a * small.values ** (-float(exps.inv_s))) ** r_m * W
    rhs1 = lp_norm(GridFunction(g1), pt / r_m, small) ** (1 / r_m)
    lhs2 = lp_norm(GridFunction(a * ws[m - 1].values), p_m)
    g2 = (a * small.values ** (-1 / r_m)) ** r_m * W
    rhs2 = lp_norm(GridFunction(g2), p_m / r_m, small) ** (1 / r_m)
    return {"ptilde": (lhs1, rhs1), "p_m": (lhs2, rhs2)}


# -- generators ------------------------------------------------------------


def bloom_weight(omega_i: GridFunction, mu_i: GridFunction, k_i: int) -> GridFunction:
    """``(omega_i / mu_i)**(1/k_i)``."""
    if int(k_i) < 1:
        raise ValueError("k_i must be at least 1")
    if not (np.all(omega_i.values > 0) and np.all(mu_i.values > 0)):
        raise ValueError("weights must be strictly positive")
    return GridFunction((omega_i.values / mu_i.values) ** (1.0 / int(k_i)))


def power_weight(exponent: float, resolution: int) -> GridFunction:
    """``x**exponent`` sampled at cell midpoints; requires ``exponent > -1``.

    Examples
    --------
    >>> float(power_weight(1.0, 3).values[0])
    0.0625
    """
    if exponent <= -1:
        raise ValueError(f"x**{exponent} is not integrable near 0")
    x = (np.arange(2**resolution) + 0.5) / 2**resolution
    return GridFunction(x**exponent)


def random_log_lipschitz_weight(
    rng: np.random.Generator, resolution: int, lipschitz: float = 2.0, modes: int = 4
) -> GridFunction:
    """``exp(g)`` for a random trigonometric ``g`` with ``|g'| <= lipschitz``."""
    x = (np.arange(2**resolution) + 0.5) / 2**resolution
    freq = np.arange(1, modes + 1)
    amp = rng.uniform(-1, 1, modes) / (2 * np.pi * freq)
    phase = rng.uniform(0, 2 * np.pi, modes)
    g = (amp[:, None] * np.sin(2 * np.pi * freq[:, None] * x + phase[:, None])).sum(axis=0)
    # each mode has slope at most |amp| 2 pi freq <= 1
    return GridFunction(np.exp(lipschitz * g / modes))


def weight_report_json(constant: float, cube: DyadicCube, per_cube: Sequence | None = None) -> str:
    """Serialize a constant together with the cube that attains it."""
    data = {"constant": constant, "attaining_cube": cube.to_dict()}
    if per_cube is not None:
        data["per_cube_values"] = [list(map(float, v)) for v in per_cube]
    return json.dumps(data, sort_keys=True)
