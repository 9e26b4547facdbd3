"""Tour of the elementary-symmetric-polynomial calculus.

Values, deleted-index variants, derivatives, the mixed (polarized) forms,
Newton-Maclaurin gaps, and the second derivative of sigma_k as a matrix
function.  Everything here is exact when fed exact rationals.
"""

from fractions import Fraction as F

import numpy as np

from symcurv import symfun

lam = (2, 3, 4)
print("vector lambda =", lam)
for m in range(4):
    print(f"  sigma_{m}(lambda) = {symfun.elem_sym(lam, m)}")

print("\ndeleted-index variants: sigma_m of the vector with entries removed")
print("  sigma_1(lambda | drop 2nd) =", symfun.elem_sym_deleted(lam, 1, [1]))
print("  sigma_2(lambda | drop 1st) =", symfun.elem_sym_deleted(lam, 2, [0]))

print("\ngradient of sigma_2 (component i is sigma_1 with entry i removed):")
print("  grad =", symfun.sigma_grad(lam, 2))
print("Euler identity: sum_i lambda_i * dsigma_k/dlambda_i = k * sigma_k")
for k in (1, 2, 3):
    lhs = sum(x * g for x, g in zip(lam, symfun.sigma_grad(lam, k)))
    print(f"  k={k}: {lhs} = {k} * {symfun.elem_sym(lam, k)}")

print("\nmixed forms: sigma_{l,k-l}(lam, mu) sums products over disjoint index sets,")
print("so blends expand with unit constants:")
mu = (1, -1, 2)
t = F(1, 3)
blend = tuple(t * a + (1 - t) * b for a, b in zip(lam, mu))
lhs = symfun.elem_sym(blend, 2)
rhs = sum(t**l * (1 - t) ** (2 - l) * symfun.polarized_sigma(lam, mu, l, 2) for l in range(3))
print(f"  sigma_2(t*lam + (1-t)*mu) = {lhs}  vs expansion = {rhs}  (exact match: {lhs == rhs})")

print("\nNewton-Maclaurin gap p_{k-1}^2 - p_k p_{k-2} (nonnegative for every real vector):")
print("  at (1,2,3), k=2:", symfun.newton_maclaurin_gap((1, 2, 3), 2))
print("  at (1,1,1,1), k=3:", symfun.newton_maclaurin_gap((1, 1, 1, 1), 3))
rng = np.random.default_rng(0)
worst = min(
    float(symfun.newton_maclaurin_gap(tuple(rng.uniform(-3, 3, 5)), k))
    for _ in range(2000) for k in (2, 3, 4)
)
print(f"  smallest gap over 6000 random real vectors: {worst:.3e} (never negative)")

print("\nsecond derivative of A -> sigma_k(eigenvalues(A)) at diagonal A, direction B:")
a_diag = (1.0, 2.0)
b = [[0.0, 1.0], [1.0, 0.0]]
got = symfun.matrix_symfun_second_derivative(2, a_diag, b)
print(f"  A = diag{a_diag}, B = offdiag: formula gives {got}")
print("  oracle: det(A + sB) = 2 - s^2, so the second derivative is -2")
