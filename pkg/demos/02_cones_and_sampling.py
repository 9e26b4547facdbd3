"""The cones behind the operators: membership, sampling, convexity,
ellipticity.

Gamma_k is the open cone where sigma_1..sigma_k are positive.  The
admissible set Gamma~_k enlarges it: sigma_1..sigma_{k-1} positive and
alpha*sigma_{k-1} + sigma_k positive, which admits points with sigma_k < 0.
"""

from symcurv import cones, symfun
from symcurv.combop import OperatorSpec
from symcurv.cones import ConeSpec

print("membership examples (n = 3):")
for lam, k in [((1, 1, 1), 3), ((1, 1, -1), 2), ((3, 1, -1), 1), ((3, 1, -1), 2)]:
    print(f"  {lam} in Gamma_{k}? {cones.in_gamma_k(lam, k)}")
print("  (1,1,-1) in Gamma~_2(alpha=2)?  ", cones.in_gamma_tilde((1, 1, -1), 2, 2))
print("  (1,1,-1) in Gamma~_2(alpha=0.5)?", cones.in_gamma_tilde((1, 1, -1), 2, 0.5))

print("\nsampling Gamma~_2(alpha=2): the boundary-leaning mix populates sigma_2 < 0")
spec = ConeSpec("tilde", 3, 2, alpha=2.0)
pts = cones.sample_cone(spec, 2000, seed=1)
neg = sum(1 for p in pts if symfun.elem_sym(p, 2) < 0)
print(f"  2000 samples, {neg} with sigma_2 < 0 ({100 * neg / len(pts):.1f}%)")
print("  sample margins are reproducible: same seed, same points:",
      pts[:1] == cones.sample_cone(spec, 1, seed=1))

print("\nconvexity: blends of in-cone points stay in-cone")
rep = cones.segment_convexity_check(spec, 5000, seed=3)
print(" ", rep)
print("  worst normalized margin over 45000 blend points:", f"{rep.worst_value:.3e}")

print("\nnot a true cone though: scaling UP can exit once sigma_2 < 0,")
print("because alpha*sigma_1 and sigma_2 scale with different powers:")
for p in pts:
    if symfun.elem_sym(p, 2) < 0:
        up = tuple(1e3 * v for v in p)
        shown = tuple(round(v, 3) for v in p)
        print(f"  {shown} in cone, 1000x scaled in cone? "
              f"{cones.in_gamma_tilde(up, 2, 2.0)}")
        break

print("\nellipticity of the sum-type operator inside the admissible cone:")
op = OperatorSpec.sum_type(3, 2, 2.0)
print("  min_i Q^ii at (1,1,-1):", cones.ellipticity_check(op, (1, 1, -1)))
rep = cones.ellipticity_scan(op, spec, 5000, seed=4)
print(f"  scan over 5000 samples: worst normalized min Q^ii = {rep.worst_value:.3e} "
      f"(positive everywhere: {rep.passed})")
