"""Acceptance criteria 1-15.

Each test prints one ``PASS``/``FAIL`` line (collected into the pytest
terminal summary) and then asserts. Run directly with
``python3 tests/test_acceptance.py`` to get just the lines.
"""
import json
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gp_oracles import dense_gram, dense_predict, fd_gradient, random_instance, sample_prior  # noqa: E402

from jitlgpr import cli, correction, gpr, jitl, metrics, pipeline, synth  # noqa: E402
from jitlgpr.benchmarks import BenchmarkConfig, after, ets, run_benchmarks, sarima, stl  # noqa: E402
from jitlgpr.errors import DataError  # noqa: E402
from jitlgpr.timegrid import MonthlySeries  # noqa: E402

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # running as a script
    ACCEPTANCE_LINES = []


def verdict(n, ok, title, detail, started):
    line = f"{'PASS' if ok else 'FAIL'} {n}: {title} -- {detail} [{time.perf_counter() - started:.1f}s]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_01_local_set_selection():
    t0 = time.perf_counter()
    idx = jitl.select_local(108, 109, jitl.WindowPair(4, 3))
    ok = idx == [71, 72, 73, 83, 84, 85, 95, 96, 97, 107, 108] and {95, 96, 97} <= set(idx)
    cells = 0
    for wy in range(2, 9):
        for wm in range(2, 7):
            w = jitl.WindowPair(wy, wm)
            for q in range(12 * (wy - 1) + wm, 128):
                cells += 1
                ok &= len(jitl.select_local(q - 1, q, w)) == wy * wm - 1
    verdict(1, ok, "local-set selection", f"q=109 (4,3) -> {idx}; cardinality law on {cells} cases", t0)


def test_02_gp_oracle_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(50):
        X, y, p, n = random_instance(seed)
        xq = np.random.default_rng(seed + 500).normal(size=2)
        mean, var = gpr.predict(gpr.GprModel.build(X, y, p, n), xq)
        dm, dv = dense_predict(X, y, p, n, xq)
        worst = max(worst, abs(mean - dm), abs(var - dv))
    verdict(2, worst <= 1e-10, "GP vs dense inverse", f"max abs diff {worst:.2e} over 50 instances", t0)


def test_03_gradient_correctness():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(20):
        X, y, p, n = random_instance(seed + 100, n=int(np.random.default_rng(seed).integers(3, 13)))
        _, g = gpr.log_marginal_likelihood(X, y, p, n)
        fd = fd_gradient(X, y, p, n)
        worst = max(worst, np.max(np.abs(g - fd) / np.maximum(np.abs(fd), 1e-8)))
    verdict(3, worst <= 1e-5, "log-ML gradient", f"max relative error {worst:.2e} over 20 instances", t0)


def test_04_kernel_validity():
    t0 = time.perf_counter()
    worst = np.inf
    for seed in range(100):
        rng = np.random.default_rng(seed)
        X = rng.normal(scale=3.0, size=(int(rng.integers(2, 40)), 2))
        p = gpr.KernelParams(*np.exp(rng.uniform(-3, 3, 3)))
        K = gpr.cross_kernel(X, X, p)
        worst = min(worst, np.linalg.eigvalsh(K).min() / np.max(np.diag(K)))
    verdict(4, worst >= -1e-8, "kernel PSD", f"min eigenvalue / max diagonal {worst:.2e} over 100 sets", t0)


def test_05_noise_free_interpolation():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(8, 2))
        y = sample_prior(X, gpr.KernelParams(1.0, 1.5, 0.7), 0.0, rng)
        model = gpr.fit(X, y, fix_noise=1e-10)
        worst = max(worst, np.max(np.abs(gpr.predict(model, X)[0] - y)))
    verdict(5, worst <= 1e-6, "noise-free interpolation", f"max |mean - target| {worst:.2e}", t0)


def test_06_init_robustness():
    t0 = time.perf_counter()
    agree, disagreements = 0, []
    for seed in range(50):
        rng = np.random.default_rng(1000 + seed)
        v = synth.generate(synth.SynthConfig(seed=seed))[0].values
        q = int(rng.integers(61, 109))
        w = jitl.WindowPair(int(rng.integers(2, 9)), int(rng.integers(2, 7)))
        f = [jitl.forecast_one(v, q, w, init=(gpr.KernelParams(s, s, s), gpr.NoiseParam(1.0)))
             for s in (0.2, 1.0, 5.0)]
        spread = (max(f) - min(f)) / abs(np.mean(f))
        if spread <= 0.01:
            agree += 1
        else:
            disagreements.append((seed, q, (w.W_y, w.W_m), round(spread, 4)))
    detail = f"{agree}/50 agree within 1%; disagreements: {disagreements or 'none'}"
    verdict(6, agree >= 45, "init robustness", detail, t0)


def test_07_correction():
    t0 = time.perf_counter()
    feasible = monotone = True
    better = 0
    for seed in range(20):
        truth, obs = synth.generate(synth.SynthConfig(seed=seed))
        prob = correction.CorrectionProblem(obs.as_matrix())
        res = correction.correct_summer(prob)
        block = res.D_c[:6, 6:9]
        feasible &= bool(np.max(np.abs(block.sum(1) - prob.year_sums) / prob.year_sums) <= 1e-6)
        feasible &= res.min_value >= -1e-9
        monotone &= bool(np.all(np.diff(res.objective_trace) <= 0))
        T = truth.as_matrix()[:6, 6:9]
        better += np.sqrt(np.mean((block - T) ** 2)) < np.sqrt(np.mean((prob.block - T) ** 2))
    ok = feasible and monotone and better >= 18
    verdict(7, ok, "summer correction",
            f"constraints ok={feasible}, trace non-increasing={monotone}, improved {better}/20", t0)


def test_08_hat_matrix():
    t0 = time.perf_counter()
    H = correction.hat_matrix(9)
    v = np.arange(1.0, 10.0)
    sym = np.max(np.abs(H - H.T))
    idem = np.max(np.abs(H @ H - H))
    lin = np.max(np.abs(H @ (4.0 - 1.5 * v) - (4.0 - 1.5 * v)))
    verdict(8, sym <= 1e-10 and idem <= 1e-10 and lin <= 1e-10, "hat matrix",
            f"asymmetry {sym:.1e}, idempotency {idem:.1e}, line reproduction {lin:.1e}", t0)


def test_09_ets_exactness():
    t0 = time.perf_counter()
    pattern = 30 * np.sin(2 * np.pi * np.arange(12) / 12)
    pattern -= pattern.mean()
    y = 80.0 + 0.7 * np.arange(1, 121) + pattern[np.arange(120) % 12]
    params = ets.EtsParams(0.0, 0.0, 0.0, 80.0, 0.7, tuple(pattern))
    worst = np.max(np.abs(ets.ets_filter(params, y).errors))
    verdict(9, worst <= 1e-8, "ETS exactness", f"max one-step error {worst:.2e}", t0)


def test_10_sarima_recovery():
    t0 = time.perf_counter()
    ar_spec = sarima.SarimaSpec((1, 0, 0), ar=(0.7,))
    sma_spec = sarima.SarimaSpec((0, 0, 0), (0, 1, 1), sma=(0.5,))
    ar_hits = sum(abs(sarima.sarima_fit(sarima.simulate(600, ar_spec, seed=s), (1, 0, 0)).ar[0] - 0.7) <= 0.1
                  for s in range(20))
    sma_hits = sum(abs(sarima.sarima_fit(sarima.simulate(600, sma_spec, seed=s), (0, 0, 0), (0, 1, 1)).sma[0]
                       - 0.5) <= 0.1 for s in range(20))
    verdict(10, ar_hits >= 16 and sma_hits >= 16, "SARIMA recovery",
            f"AR(1) phi=0.7 {ar_hits}/20, seasonal MA Theta=0.5 {sma_hits}/20 within 0.1", t0)


def test_11_stl():
    t0 = time.perf_counter()
    worst_id = 0.0
    for seed in range(20):
        y = np.random.default_rng(seed).gamma(2.0, 25.0, 24 + 5 * seed)
        d = stl.stl_decompose(y, trend_window=13)
        worst_id = max(worst_id, np.max(np.abs(d.trend + d.seasonal + d.remainder - y)))
    pattern = 25 * np.sin(2 * np.pi * np.arange(12) / 12) + 10 * np.cos(4 * np.pi * np.arange(12) / 12)
    amp = pattern.max() - pattern.min()
    y = 40 + 0.5 * np.arange(108) + pattern[np.arange(108) % 12]
    d = stl.stl_decompose(y)
    shift = np.mean(d.seasonal[:12] - pattern)
    dev = np.max(np.abs(d.seasonal - shift - pattern[np.arange(108) % 12])) / amp
    verdict(11, worst_id <= 1e-9 and dev <= 0.05, "STL",
            f"identity error {worst_id:.1e}; seasonal deviation {100 * dev:.2f}% of amplitude", t0)


def test_12_metrics():
    t0 = time.perf_counter()
    r1 = metrics.evaluate([100.0], [90.0])
    r2 = metrics.evaluate([10.0, 20.0], [12.0, 16.0])
    ok = (r1.mae, r1.rmse, r1.mape) == (10.0, 10.0, 10.0)
    ok &= r2.mae == 3.0 and r2.rmse == pytest.approx(np.sqrt(10.0), abs=1e-12) and r2.mape == pytest.approx(20.0)
    pe_a = metrics.yearly_pe(816.8, 824.3)
    pe_b = metrics.yearly_pe(477.6, 473.6)
    # table totals are rounded to 0.1, so its PEs carry roughly +/-0.01 of slack
    ok &= abs(pe_a - 0.90) <= 0.025 and abs(pe_b - (-0.83)) <= 0.015
    verdict(12, bool(ok), "metrics", f"hand cases exact; yearly PE {pe_a:+.3f}% and {pe_b:+.3f}%", t0)


def test_13_after():
    t0 = time.perf_counter()
    y = np.random.default_rng(0).normal(60, 10, 24)
    _, trace = after.after_combine(np.vstack([y, y + 1.5]), y)
    simplex = all(s.weights.min() >= 0 and abs(s.weights.sum() - 1) <= 1e-12 for s in trace)
    w = trace[-1].weights[0]
    verdict(13, w >= 0.99 and simplex, "AFTER combiner", f"exact member weight {w:.4f} after 24 steps", t0)


def _e2e_seed(seed):
    truth, obs = synth.generate(synth.SynthConfig(seed=seed, extra_months=19))
    train, test = obs.head(108), truth.tail_from(108)
    started = time.perf_counter()
    res = pipeline.run_pipeline(train, test)
    mapes = {f"raw-{k}": v.mape for k, v in res.evaluation.items() if k != "jitl"}
    try:
        logged = run_benchmarks(res.corrected.values, 19, BenchmarkConfig(log_transform=True))
        fcs = {k: MonthlySeries(test.start, np.maximum(v.forecast, 0.0)) for k, v in logged.items()}
        mapes.update({f"log-{k}": v.mape for k, v in pipeline.evaluate_forecasts(test, fcs).items()})
    except DataError:
        pass  # corrected series has a zero month: log models undefined here
    return res.evaluation["jitl"].mape, abs(res.evaluation["jitl"].yearly_pe), mapes, time.perf_counter() - started


def test_14_end_to_end():
    t0 = time.perf_counter()
    runs = [_e2e_seed(s) for s in range(10)]
    jitl_mape = np.median([r[0] for r in runs])
    pe = np.median([r[1] for r in runs])
    names = sorted({k for r in runs for k in r[2]})
    per_model = {k: (np.median([r[2][k] for r in runs if k in r[2]]), sum(k in r[2] for r in runs))
                 for k in names}
    best = min(per_model, key=lambda k: per_model[k][0])
    ratio = jitl_mape / per_model[best][0]
    oracle = jitl_mape / np.median([min(r[2].values()) for r in runs])
    slowest = max(r[3] for r in runs)
    detail = (f"median JITL MAPE {jitl_mape:.2f}% vs best benchmark {best} {per_model[best][0]:.2f}% "
              f"({per_model[best][1]} seeds): ratio {ratio:.3f}; median |yearly PE| {pe:.2f}%; "
              f"per-seed best-of-all ratio {oracle:.3f}; slowest seed {slowest:.0f}s")
    verdict(14, ratio <= 1.1 and pe <= 3.0 and slowest < 60, "end-to-end pipeline", detail, t0)


def test_15_determinism():
    t0 = time.perf_counter()

    def run(out):
        data = out / "data"
        steps = [
            ["synth", "--seed", "11", "--output-dir", str(data)],
            ["correct", "--input", str(data / "train.csv")],
            ["tune", "--input", str(data / "train.csv"), "--wy", "2,3,5", "--wm", "2,3"],
            ["forecast", "--input", str(data / "train.csv"), "--wy", "2,3,5", "--wm", "2,3"],
            ["benchmark", "--input", str(data / "train.csv")],
            ["evaluate", "--actuals", str(data / "test.csv")],
            ["report", "--input", str(data / "train.csv"), "--actuals", str(data / "test.csv")],
        ]
        for s in steps:
            if "--output-dir" not in s:
                s += ["--output-dir", str(out)]
            assert cli.main(s) == 0, s
        return {str(p.relative_to(out)): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()}

    with tempfile.TemporaryDirectory() as tmp:
        a, b = run(Path(tmp) / "a"), run(Path(tmp) / "b")
    same = a.keys() == b.keys() and all(a[k] == b[k] for k in a)
    verdict(15, same, "determinism", f"{len(a)} artifacts compared byte-for-byte", t0)


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted((k, v) for k, v in globals().items() if k.startswith("test_")):
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
