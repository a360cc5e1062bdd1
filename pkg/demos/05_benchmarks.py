"""Classical forecasters on the same data, and their AFTER combination."""
import numpy as np

from jitlgpr import metrics, synth
from jitlgpr.benchmarks import BenchmarkConfig, run_benchmarks, stl_decompose

truth, _ = synth.generate(synth.SynthConfig(seed=1, extra_months=19))
train, test = truth.values[:108], truth.values[108:]

dec = stl_decompose(train)
print(f"STL: seasonal range {np.ptp(dec.seasonal[:12]):.1f}, "
      f"trend {dec.trend[0]:.1f} -> {dec.trend[-1]:.1f}, remainder sd {dec.remainder.std():.2f}\n")

for label, cfg in (("raw", BenchmarkConfig()), ("log", BenchmarkConfig(log_transform=True))):
    results = run_benchmarks(train, 19, cfg)
    print(f"{label} scale           RMSE    MAPE")
    for name, r in results.items():
        rep = metrics.evaluate(test, np.maximum(r.forecast, 0))
        print(f"  {name:14s} {rep.rmse:7.2f} {rep.mape:6.2f}%")
    print(f"  AFTER weights: " + ", ".join(
        f"{m}={w:.2f}" for m, w in zip(results['after'].info['members'], results['after'].info['weights'])))
    print()

spec = run_benchmarks(train, 1, BenchmarkConfig(models=("sarima", "snaive"), after=False))["sarima"].info["spec"]
fmt = lambda c: ", ".join(f"{v:.3f}" for v in c)
print(f"SARIMA{spec.order}{spec.seasonal_order}: phi=({fmt(spec.ar)}), Phi=({fmt(spec.sar)}), drift={spec.mu:.3f}")
