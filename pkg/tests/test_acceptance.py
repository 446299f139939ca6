"""Acceptance suite: one verdict line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the verdicts are printed
in the terminal summary.  ``python tests/test_acceptance.py`` prints them
directly.
"""

import json

import pytest

from fbmoo import verify
from fbmoo.dyadic import build_lattice
from fbmoo.experiments import run_experiment
from fbmoo.gridfn import power
from fbmoo.operators import KernelSpec

RESULTS = {}


def record(number, title, report_or_ok, detail=""):
    ok = report_or_ok.passed if isinstance(report_or_ok, verify.ExperimentReport) else bool(report_or_ok)
    RESULTS[number] = f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}: {detail}"
    return ok


def test_01_haar_system():
    rep = verify.check_haar_system(depth=8, resolution=12, rng=101)
    m = rep.measured
    detail = (f"orthonormality {m['orthonormality_error']:.1e}, parseval {m['parseval_error']:.1e}, "
              f"runtime {rep.runtime:.2f}s")
    assert record(1, "Haar system", rep, detail), rep.summary()


def test_02_sparse_constructor():
    rep = verify.check_sparse_constructor(cases=200, resolution=10, ms=(1, 2), deltas=(0.25, 0.5), rng=102)
    m = rep.measured
    detail = (f"200 cases, sparsity failures {m['sparsity_failures']}, Markov failures {m['markov_failures']}, "
              f"worst ratio/(1-delta) {m['max_markov_ratio_over_bound']:.3f}")
    assert record(2, "Sparse constructor", rep, detail), rep.summary()


def test_03_pointwise_domination():
    cases = [(1, 0.5), (2, 0.5), (2, 1.0)]
    parts, ok = [], True
    for m, eta in cases:
        rep = verify.check_pointwise_domination_sweep(m, eta, samples=50, resolution=10, rng=103)
        ok &= rep.passed
        parts.append(f"(m={m}, eta={eta}) supC {rep.measured['max_sup_C']:.2f}, "
                     f"change {rep.measured['max_relative_change']:.3f}, {rep.runtime:.0f}s")
    with pytest.raises(ValueError):
        KernelSpec(1, 1.0)
    parts.append("(m=1, eta=1) skipped: eta must lie in (0, m)")
    assert record(3, "Pointwise domination", ok, "; ".join(parts))


def test_04_maximal_weak_type():
    N = 12
    fs = [power(-0.5, N)]
    rep = verify.check_maximal_weak_type(fs, 1.0, 0.0, build_lattice(N), {"weak_c0": 1.0, "weak_tol": 0.1})
    detail = f"ratio {rep.measured['ratio']:.4f} <= {rep.measured['bound']:.2f}"
    assert record(4, "Maximal weak type", rep, detail), rep.summary()


def test_05_weight_arithmetic():
    rep = verify.check_weight_arithmetic(exponent_cases=1000, norm_cases=100, resolution=8, rng=105)
    m = rep.measured
    detail = (f"identity mismatches {m['identity_mismatches']} of 1000 tuples, "
              f"norm identity max rel error {m['norm_identity_max_rel_error']:.1e}")
    assert record(5, "Weight arithmetic", rep, detail), rep.summary()


def test_06_weight_factorization():
    rep = verify.check_weight_factorization(cases=50, depth=8, resolution=10, rng=106)
    m = rep.measured
    detail = (f"(i.1) failures {m['failures_i.1']}, (i.2) failures {m['failures_i.2']}, "
              f"round trip {m['roundtrip_max_rel_error']:.1e}")
    assert record(6, "Weight factorization", rep, detail), rep.summary()


def test_07_sharpness():
    cfg = {"experiment": "sharp_weighted_bound", "seed": 0, "m": 1, "eta": 0, "p": 4, "r": 2, "s": "inf",
           "resolution": 12, "theta": 2, "stated_growth_exponent": 2,
           "parameters": [0.25, 0.35, 0.5, 0.71, 1.0, 1.41, 2.0, 2.83, 4.0]}
    rep = run_experiment(cfg)
    m = rep.measured
    detail = (f"max log R/log K {m['max_log_ratio']:.3f} <= 2.15, fitted growth in delta "
              f"{m['fitted_growth_exponent_in_parameter']:.3f} (stated {m['stated_growth_exponent_in_parameter']}, "
              "not gated)")
    assert "example_oracle" in m
    assert record(7, "Sharpness study", rep, detail), rep.summary()


def test_08_shift_paraproduct():
    rep = verify.check_shift_paraproduct(cases=10, resolutions=(8, 9, 10), rng=108)
    m = rep.measured
    wrong = sum(v for k, v in m.items() if k.startswith("misclassified_"))
    detail = (f"misclassified {wrong} of 40, shift change {m['shift_max_change']:.4f}, "
              f"paraproduct change {m['paraproduct_max_change']:.4f}")
    assert record(8, "Shift and paraproduct", rep, detail), rep.summary()


def test_09_local_decay():
    rep = verify.check_local_decay_sweep(samples=20, resolution=10, m=1, eta=0.5, rng=109)
    m = rep.measured
    detail = f"monotonicity violations {m['monotonicity_violations']}, max tail slope {m['max_tail_slope']:.3f}"
    assert record(9, "Local decay", rep, detail), rep.summary()


DETERMINISM_CONFIGS = [
    {"experiment": "haar_system", "seed": 7, "resolution": 10, "lattice_depth": 6},
    {"experiment": "sparse_constructor", "seed": 7, "cases": 20, "resolution": 8},
    {"experiment": "pointwise_domination", "seed": 7, "m": 2, "eta": 1.0, "samples": 3, "resolution": 8},
    {"experiment": "maximal_weak_type", "resolution": 10},
    {"experiment": "weight_arithmetic", "seed": 7, "exponent_cases": 100, "norm_cases": 10},
    {"experiment": "weight_factorization", "seed": 7, "cases": 5, "lattice_depth": 6, "resolution": 8},
    {"experiment": "sharp_weighted_bound", "m": 1, "eta": 0, "p": 4, "r": 2, "s": "inf", "resolution": 9,
     "theta": 2},
    {"experiment": "fbmoo_conditions", "seed": 7, "operator": "fractional_integral", "samples": 4},
    {"experiment": "shift_paraproduct", "seed": 7, "cases": 3, "resolutions": [7, 8]},
    {"experiment": "local_decay", "seed": 7, "samples": 3, "resolution": 8},
    {"experiment": "mixed_weak", "resolution": 8, "weights": {"w": 0.2, "v": 0.25}},
    {"experiment": "bloom", "seed": 7, "resolution": 8},
]


def test_10_determinism():
    mismatched = []
    for cfg in DETERMINISM_CONFIGS:
        a = run_experiment(dict(cfg)).to_json(include_timestamp=False)
        b = run_experiment(dict(cfg)).to_json(include_timestamp=False)
        json.loads(a)
        if a != b:
            mismatched.append(cfg["experiment"])
    detail = f"{len(DETERMINISM_CONFIGS)} experiments re-run, mismatches: {mismatched or 'none'}"
    assert record(10, "Determinism", not mismatched, detail)


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                pass
    for number in sorted(RESULTS):
        print(RESULTS[number])
