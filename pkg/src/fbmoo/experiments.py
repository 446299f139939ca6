"""Experiment catalog and the mapping from a config dict to a check.

A config is a flat JSON object.  Generic keys: ``experiment``, ``seed``,
``resolution``, ``lattice_depth``, ``m``, ``eta``, ``p``, ``r``, ``s``,
``functions``, ``weights``, ``output`` and any tolerance name from
:data:`fbmoo.config.TOLERANCES`.  Each experiment reads the subset it needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import verify
from .config import TOLERANCES, ConfigError
from .dyadic import DyadicCube, build_lattice
from .gridfn import GridFunction, constant, haar_function, indicator, power, random_function
from .operators import KernelSpec
from .weights import WeightTuple, extrapolation_exponents, power_weight

__all__ = ["Experiment", "CATALOG", "function_from_spec", "run_experiment"]


@dataclass(frozen=True)
class Experiment:
    name: str
    label: str
    summary: str
    runner: Callable[[dict], verify.ExperimentReport]


def function_from_spec(spec: dict, resolution: int) -> GridFunction:
    """Build a grid function from a small JSON description.

    Examples
    --------
    >>> function_from_spec({"kind": "constant", "value": 2.0}, 3).values.tolist()
    [2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0]
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"function spec needs a 'kind': {spec!r}")
    kind = spec["kind"]
    if kind == "constant":
        return constant(float(spec.get("value", 1.0)), resolution)
    if kind == "indicator":
        return indicator(float(spec["a"]), float(spec["b"]), resolution)
    if kind == "power":
        return power(float(spec["exponent"]), resolution, float(spec.get("scale", 1.0)))
    if kind == "haar":
        cube = DyadicCube(int(spec["level"]), int(spec["index"]), spec.get("shift", 0))
        return haar_function(cube, resolution, bool(spec.get("cancellative", True)))
    if kind == "random":
        rng = np.random.default_rng(int(spec.get("seed", 0)))
        return random_function(
            rng, resolution, spec.get("level"), float(spec.get("low", 0.0)), float(spec.get("high", 1.0)),
            float(spec.get("sparsity", 0.0)),
        )
    if kind == "csv":
        f = GridFunction.from_csv(spec["path"])
        if f.resolution != resolution:
            raise ConfigError(f"{spec['path']} has resolution {f.resolution}, expected {resolution}")
        return f
    raise ConfigError(f"unknown function kind {kind!r}")


def _functions(cfg, resolution, default):
    specs = cfg.get("functions", default)
    return [function_from_spec(s, resolution) for s in specs]


def _rng(cfg):
    return int(cfg.get("seed", 0))


def _tol(cfg):
    return {k: v for k, v in cfg.items() if k in TOLERANCES}


def _exponents(cfg):
    return extrapolation_exponents(int(cfg["m"]), cfg["eta"], cfg["p"], cfg["r"], cfg["s"])


def _run_haar(cfg):
    return verify.check_haar_system(cfg.get("lattice_depth", 8), cfg.get("resolution", 12), _rng(cfg), _tol(cfg))


def _run_sparse(cfg):
    return verify.check_sparse_constructor(
        int(cfg.get("cases", 200)), cfg.get("resolution", 10), tuple(cfg.get("ms", (1, 2))),
        tuple(cfg.get("deltas", (0.25, 0.5))), _rng(cfg), _tol(cfg),
    )


def _run_domination(cfg):
    m, eta = int(cfg.get("m", 1)), float(cfg.get("eta", 0.5))
    if "functions" in cfg:
        N = cfg.get("resolution", 10)
        fs = _functions(cfg, N, [])
        if len(fs) != m:
            raise ConfigError(f"expected {m} functions, got {len(fs)}")
        return verify.check_pointwise_domination(
            fs, KernelSpec(m, eta), float(cfg.get("delta", 0.5)), build_lattice(cfg.get("lattice_depth", N)),
            _tol(cfg),
        )
    return verify.check_pointwise_domination_sweep(
        m, eta, int(cfg.get("samples", 50)), cfg.get("resolution", 10), float(cfg.get("delta", 0.5)),
        int(cfg.get("function_level", 5)), _rng(cfg), _tol(cfg),
    )


def _run_weak(cfg):
    N = cfg.get("resolution", 12)
    fs = _functions(cfg, N, [{"kind": "power", "exponent": -0.5}])
    return verify.check_maximal_weak_type(
        fs, cfg.get("r", 1.0), cfg.get("eta", 0.0), build_lattice(cfg.get("lattice_depth", N)), _tol(cfg)
    )


def _run_arith(cfg):
    return verify.check_weight_arithmetic(
        int(cfg.get("exponent_cases", 1000)), int(cfg.get("norm_cases", 100)), cfg.get("resolution", 8),
        _rng(cfg), _tol(cfg),
    )


def _run_factorization(cfg):
    return verify.check_weight_factorization(
        int(cfg.get("cases", 50)), cfg.get("lattice_depth", 8), cfg.get("resolution", 10), _rng(cfg), _tol(cfg)
    )


def _power_family(cfg):
    base = [float(v) for v in cfg.get("weights", {}).get("exponents", [1.0])]

    def family(a, N):
        return WeightTuple(tuple(power_weight(a * e, N) for e in base))

    return family


def _run_sharp(cfg):
    N = cfg.get("resolution", 12)
    depth = cfg.get("lattice_depth", N)
    exps = _exponents(cfg)
    specs = cfg.get("functions", [{"kind": "power", "exponent": -0.125}] * exps.m)
    params = cfg.get("parameters", [0.25, 0.5, 1.0, 2.0, 4.0])

    def fns(n):
        return [function_from_spec(s, n) for s in specs]

    report = verify.check_sharp_weighted_bound(
        exps, _power_family(cfg), params, fns, build_lattice(depth), theta=cfg.get("theta"),
        stated_growth_exponent=cfg.get("stated_growth_exponent"), tolerances=_tol(cfg),
    )
    if cfg.get("example_oracle", exps.m == 1):
        report.measure("example_oracle", verify.sharpness_example_oracle(N))
    return report


def _run_fbmoo(cfg):
    return verify.check_fbmoo_conditions(
        cfg.get("operator", "fractional_integral"), int(cfg.get("m", 1)), float(cfg.get("eta", 0.5)),
        cfg.get("r", 1.0), cfg.get("resolution", 8), int(cfg.get("samples", 20)),
        int(cfg.get("function_level", 3)), _rng(cfg), _tol(cfg),
    )


def _run_shift(cfg):
    return verify.check_shift_paraproduct(
        int(cfg.get("cases", 10)), tuple(cfg.get("resolutions", (8, 9, 10))), float(cfg.get("eta", 0.5)),
        _rng(cfg), _tol(cfg),
    )


def _run_decay(cfg):
    return verify.check_local_decay_sweep(
        int(cfg.get("samples", 20)), cfg.get("resolution", 10), int(cfg.get("m", 1)), float(cfg.get("eta", 0.5)),
        int(cfg.get("points", 40)), int(cfg.get("function_level", 5)), _rng(cfg), _tol(cfg),
    )


def _run_mixed(cfg):
    N = cfg.get("resolution", 10)
    m, eta = int(cfg.get("m", 1)), float(cfg.get("eta", 0.5))
    fs = _functions(cfg, N, [{"kind": "indicator", "a": 0.25, "b": 0.5}] * m)
    wcfg = cfg.get("weights", {})
    w = power_weight(float(wcfg.get("w", 0.0)), N)
    v = power_weight(float(wcfg.get("v", 0.0)), N)
    return verify.check_mixed_weak(fs, KernelSpec(m, eta), w, v, build_lattice(cfg.get("lattice_depth", N)),
                                   tolerances=_tol(cfg))


def _run_bloom(cfg):
    return verify.check_bloom(cfg.get("resolution", 10), float(cfg.get("delta", 0.5)), int(cfg.get("k", 1)),
                              _rng(cfg), _tol(cfg))


CATALOG = {
    e.name: e
    for e in [
        Experiment("haar_system", "dyadic", "Haar orthonormality, Parseval and completeness", _run_haar),
        Experiment("sparse_constructor", "thm:d.s.d.", "stopping-time families are sparse", _run_sparse),
        Experiment("pointwise_domination", "zhang:th1.6",
                   "fractional integral dominated by a sparse operator", _run_domination),
        Experiment("maximal_weak_type", "lem:M_0", "weak type of the fractional maximal operator", _run_weak),
        Experiment("weight_arithmetic", "zeta", "exact exponent identities and norm identities", _run_arith),
        Experiment("weight_factorization", "lemma:main", "weight factorization inequalities", _run_factorization),
        Experiment("sharp_weighted_bound", "thm:sparse-dom_1", "sharp weighted norm growth", _run_sharp),
        Experiment("fbmoo_conditions", "def:FBMOO/ca:2.1", "truncation conditions of the operator class", _run_fbmoo),
        Experiment("shift_paraproduct", "key:shift/kuohao3.1", "shift and paraproduct constructors", _run_shift),
        Experiment("local_decay", "thm:local", "local exponential decay of I/M", _run_decay),
        Experiment("mixed_weak", "thm:weak", "mixed weak type ratio of I and M", _run_mixed),
        Experiment("bloom", "thm:bloom", "Bloom weights and symbol forms", _run_bloom),
    ]
}


def run_experiment(cfg: dict) -> verify.ExperimentReport:
    """Dispatch a validated config to its check and stamp the config into the report."""
    name = cfg.get("experiment")
    if name not in CATALOG:
        raise ConfigError(f"unknown experiment {name!r}; see 'fbmoo list'")
    report = CATALOG[name].runner(cfg)
    report.parameters = {"label": CATALOG[name].label, **report.parameters}
    if "seed" in cfg:
        report.seed = int(cfg["seed"])
    return report
