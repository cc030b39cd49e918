"""Evaluate the joint transform of (log-price, integrated variance).

The central object of the library is the analytic joint Fourier-Laplace
transform E[exp(u ln S_T + w int_0^T X_s^2 ds)], computed by discretizing
the model's Volterra operators on an n-point grid (one complex LU
factorization per evaluation). This script shows the exact anchor values,
walks a characteristic curve with branch-tracked phase, and contrasts a
classical Brownian kernel with a rough fractional one.

Run:  python3 demos/d1_characteristic_curve.py     (about a second)
"""

import numpy as np

from gaussvol import (
    AffineCurve,
    ConstantKernel,
    ModelConfig,
    RiemannLiouvilleKernel,
    TransformQuery,
    joint_transform,
    transform_curve,
)


def make_model(kernel):
    return ModelConfig(
        s0=1.2,
        kernel=kernel,
        curve=AffineCurve(x0=0.1, theta=0.1),
        kappa=0.0,
        nu=0.25,
        rho=-0.7,
        horizon=1.0,
    )


print("1) Exact anchors (hold to rounding for every kernel)")
model = make_model(RiemannLiouvilleKernel(hurst=0.3))
unit = joint_transform(model, 64, TransformQuery(0.0, 0.0)).value
spot = joint_transform(model, 64, TransformQuery(1.0, 0.0)).value
print(f"   transform(0, 0) = {unit}            (should be exactly 1)")
print(f"   transform(1, 0) = {spot}            (should be the spot {model.s0})")

print()
print("2) A characteristic curve u = i z with branch-tracked log-determinant")
z_grid = np.linspace(0.0, 30.0, 7)
values = transform_curve(model, 64, z_grid)
for z, value in zip(z_grid, values):
    print(f"   z = {z:5.1f}   psi = {value.real:+.6f} {value.imag:+.6f}i"
          f"   |psi| = {abs(value):.6f}")
print("   The modulus decays and never exceeds 1: each exp(i z ln S) has")
print("   modulus one, so the expectation cannot be larger.")

print()
print("3) Rough (H = 0.2) versus classical (Brownian) kernels at z = 10")
for label, kernel in [
    ("H = 0.2 ", RiemannLiouvilleKernel(hurst=0.2)),
    ("H = 0.3 ", RiemannLiouvilleKernel(hurst=0.3)),
    ("constant", ConstantKernel()),
]:
    value = transform_curve(make_model(kernel), 64, np.array([0.0, 10.0]))[1]
    print(f"   {label}: psi(10) = {value.real:+.6f} {value.imag:+.6f}i")
print("   Rougher kernels concentrate variance at short times and damp the")
print("   transform more slowly in frequency.")

print()
print("4) Hermitian symmetry psi(-z) = conj(psi(z))")
forward = transform_curve(model, 64, np.array([0.0, 5.0, 10.0]))
mirrored = transform_curve(model, 64, -np.array([0.0, 5.0, 10.0]))
gap = np.max(np.abs(mirrored - np.conj(forward)))
print(f"   max |psi(-z) - conj(psi(z))| = {gap:.2e}")
