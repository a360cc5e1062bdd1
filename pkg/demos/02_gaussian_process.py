"""Fit one local Gaussian process and look inside it.

The kernel is a linear term in the year coordinate plus a quadratic term in
the month coordinate. Hyperparameters maximise the marginal likelihood.
"""
from jitlgpr import gpr, synth
from jitlgpr.jitl import WindowPair, local_model

truth, _ = synth.generate(synth.SynthConfig(seed=7))
values = truth.values
q = 100                              # April of year 9

for w in (WindowPair(3, 2), WindowPair(6, 4)):
    local, model = local_model(values, q, w)
    mean, var = gpr.predict(model, local.x_query)
    print(f"window {w}  (N = {len(local)})")
    print(f"  sigma_f2={model.params.sigma_f2:.3g}  beta2={model.params.beta2:.3g}  "
          f"alpha2={model.params.alpha2:.3g}  noise={model.noise.sigma_eps2:.3g}")
    print(f"  log-ML {model.log_ml:.3f}  converged={model.converged} after {model.n_iter} iterations")
    sd = var ** 0.5 * local.demand_std
    print(f"  forecast {local.unscale(mean):7.2f} +/- {1.96 * sd:5.2f}   actual {values[q - 1]:7.2f}\n")

# The fit barely depends on where the optimiser starts.
local, _ = local_model(values, q, WindowPair(4, 3))
for s in (0.2, 1.0, 5.0):
    m = gpr.fit(local.X, local.y, init=(gpr.KernelParams(s, s, s), gpr.NoiseParam(1.0)))
    print(f"init {s:>3}: forecast {local.unscale(gpr.predict(m, local.x_query)[0]):.4f}")
