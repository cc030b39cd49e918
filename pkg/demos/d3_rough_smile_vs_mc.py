"""Rough-kernel smile cross-checked against exact-law Monte Carlo.

For a fractional kernel with Hurst index H = 0.2 there is no Markovian
oracle, so the independent check is simulation: the volatility path is a
Gaussian process whose covariance the library knows in closed form, so
paths are drawn from the exact joint law (no discretization error in the
volatility itself). This script prices a short-dated smile by the Fourier
route and verifies every point sits inside the Monte Carlo 95% interval.

Run:  python3 demos/d3_rough_smile_vs_mc.py     (about a minute)
"""

import numpy as np

from gaussvol import (
    AffineCurve,
    ModelConfig,
    RiemannLiouvilleKernel,
    SimulationPlan,
    implied_vol,
    mc_call_price,
    smile,
)

MATURITY = 0.25
model = ModelConfig(
    s0=1.0,
    kernel=RiemannLiouvilleKernel(hurst=0.2),
    curve=AffineCurve(x0=0.1, theta=0.1),
    kappa=0.0,
    nu=0.25,
    rho=-0.7,
    horizon=MATURITY,
)

log_moneyness = np.linspace(-0.15, 0.15, 5)
strikes = np.exp(log_moneyness)

print(f"1) Fourier smile at H = 0.2, T = {MATURITY} (n = 512)")
points = smile(model, 512, strikes, MATURITY, n_cos=256, L=12.0)
for point in points:
    print(f"   k = {point.k:+.3f}   vol = {point.iv:.6f}")

print()
print("2) Monte Carlo bracket: 100,000 antithetic paths, 500 steps per path")
plan = SimulationPlan(n_steps=500, n_paths=100_000, seed=11, antithetic=True)
print("        k      cos vol    [mc 95% interval]      inside?")
all_inside = True
for point in points:
    strike = float(np.exp(point.k))
    _, _, (lo, hi) = mc_call_price(model, plan, strike, MATURITY)
    vol_lo = implied_vol(lo, 1.0, strike, MATURITY)
    vol_hi = implied_vol(hi, 1.0, strike, MATURITY)
    inside = vol_lo <= point.iv <= vol_hi
    all_inside = all_inside and inside
    print(
        f"   {point.k:+.3f}   {point.iv:.6f}   [{vol_lo:.6f}, {vol_hi:.6f}]   "
        f"{'yes' if inside else 'NO'}"
    )
print()
print(f"   every Fourier vol inside its interval: {all_inside}")
print("   Two error sources meet here: the Fourier route is first-order in")
print("   its grid, the simulation is exact in law but noisy; at these sizes")
print("   both land within a fraction of a vol point of each other.")
