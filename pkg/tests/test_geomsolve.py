import numpy as np
import pytest

from symcurv import geomsolve as gs
from symcurv.combop import OperatorSpec, q_eval
from symcurv.errors import ConeExitError, ConvergenceError, DomainError

OP = OperatorSpec.sum_type(2, 2, 1.0)  # sigma_2 + sigma_1 on two curvatures


def test_grid_validation():
    with pytest.raises(DomainError):
        gs.SphereGrid(7, 8)   # odd longitude count
    with pytest.raises(DomainError):
        gs.SphereGrid(8, 1)
    g = gs.SphereGrid(16, 8)
    assert g.theta[0] == pytest.approx(np.pi / 16)
    assert g.theta[-1] == pytest.approx(np.pi - np.pi / 16)


def test_surface_validation():
    g = gs.SphereGrid(8, 4)
    with pytest.raises(DomainError):
        gs.RadialSurfaceField(np.zeros(g.shape), g)
    with pytest.raises(DomainError):
        gs.RadialSurfaceField(np.ones((3, 3)), g)


def test_sphere_geometry_exact():
    g = gs.SphereGrid(32, 16)
    geo = gs.surface_geometry(gs.RadialSurfaceField.sphere(g, 2.0))
    assert np.abs(geo.kappa - 0.5).max() == 0
    assert np.abs(geo.support - 2.0).max() == 0
    assert np.abs(geo.nu - geo.X / 2.0).max() == 0
    r = np.linalg.norm(geo.X, axis=-1)
    assert np.abs(r - 2.0).max() < 1e-14


def test_ellipsoid_curvature_oracle_against_sphere():
    # the closed-form ellipsoid curvature formula reduces to 1/r on spheres
    pts = np.array([[2.0, 0, 0], [0, 2.0, 0], [0, 0, 2.0], [2 / np.sqrt(2), 2 / np.sqrt(2), 0]])
    kappa = gs.ellipsoid_curvatures(pts, (2.0, 2.0, 2.0))
    assert np.allclose(kappa, 0.5)


def test_ellipsoid_geometry_second_order():
    axes = (1.0, 1.0, 1.2)
    errs = []
    for n_lon, n_lat in [(16, 8), (32, 16), (64, 32)]:
        g = gs.SphereGrid(n_lon, n_lat)
        r_hat, _, _ = g.unit_vectors()
        surf = gs.RadialSurfaceField(gs.ellipsoid_radial_graph(r_hat, axes), g)
        geo = gs.surface_geometry(surf)
        exact = gs.ellipsoid_curvatures(geo.X, axes)
        errs.append(np.abs(geo.kappa - exact).max())
    assert errs[0] / errs[1] > 2.5
    assert errs[1] / errs[2] > 2.5


def test_residual_examples():
    g = gs.SphereGrid(16, 8)
    sphere = gs.RadialSurfaceField.sphere(g, 2.0)
    psi = gs.PsiSpec("constant", c=float(q_eval(OP, (0.5, 0.5))))
    assert np.abs(gs.residual(sphere, OP, psi)).max() == 0
    unit = gs.RadialSurfaceField.sphere(g, 1.0)
    psi_q = gs.PsiSpec("constant", c=float(q_eval(OP, (1.0, 1.0))) / 4)
    want = float(q_eval(OP, (1.0, 1.0))) * (1 - 0.25)
    assert gs.residual(unit, OP, psi_q) == pytest.approx(want * np.ones(g.shape))


def test_residual_cone_exit():
    g = gs.SphereGrid(16, 8)
    # strongly non-convex dumbbell-ish surface exits the admissible cone
    th = g.theta[:, None] + 0 * g.phi[None, :]
    rho = 1.0 + 0.9 * np.cos(2 * th) ** 2
    surf = gs.RadialSurfaceField(rho, g)
    psi = gs.PsiSpec("constant", c=1.0)
    with pytest.raises(ConeExitError) as err:
        gs.residual(surf, OP, psi)
    assert len(err.value.nodes) > 0


def test_manufactured_residual_zero_on_reference():
    axes = (1.0, 1.0, 1.2)
    psi = gs.PsiSpec("manufactured-ellipsoid", axes=axes, op=OP)
    g = gs.SphereGrid(32, 16)
    r_hat, _, _ = g.unit_vectors()
    surf = gs.RadialSurfaceField(gs.ellipsoid_radial_graph(r_hat, axes), g)
    res = gs.residual(surf, OP, psi)
    # discrete curvature vs analytic curvature: O(h^2), not zero
    assert np.abs(res).max() < 0.1
    # and the discrete solution of this psi is the ellipsoid up to O(h^2)
    solved, diag = gs.newton_solve(surf, OP, psi)
    assert diag.converged
    assert np.abs(solved.rho - surf.rho).max() < 0.05


def test_newton_sphere_fixed_point():
    g = gs.SphereGrid(16, 8)
    psi = gs.PsiSpec("constant", c=float(q_eval(OP, (0.5, 0.5))))
    initial = gs.perturbed_sphere(g, 2.0, 0.05, seed=7)
    surf, diag = gs.newton_solve(initial, OP, psi)
    assert diag.converged
    assert np.abs(surf.rho - 2.0).max() <= 1e-8
    assert diag.n_iter - 1 <= 12


def test_newton_rejects_inadmissible_start():
    g = gs.SphereGrid(16, 8)
    th = g.theta[:, None] + 0 * g.phi[None, :]
    rho = 1.0 + 0.9 * np.cos(2 * th) ** 2
    with pytest.raises(ConeExitError):
        gs.newton_solve(gs.RadialSurfaceField(rho, g), OP, gs.PsiSpec("constant", c=1.0))


def test_newton_failure_reports_rather_than_wrong_answer():
    # a solve that cannot reach tolerance inside its budget must raise with
    # diagnostics and the last iterate attached, never return a surface
    g = gs.SphereGrid(8, 4)
    psi = gs.PsiSpec("radial-power", c=30.0, p=-2.0)
    initial = gs.RadialSurfaceField.sphere(g, 3.0)
    with pytest.raises(ConvergenceError) as err:
        gs.newton_solve(initial, OP, psi, gs.SolveOptions(max_iter=2))
    assert err.value.last_surface is not None
    assert err.value.diagnostics is not None
    assert not err.value.diagnostics.converged


def test_solver_scale_covariance():
    # constant psi matched to radius r solves to the sphere of radius r
    g = gs.SphereGrid(16, 8)
    for r in (0.5, 2.0, 4.0):
        psi = gs.PsiSpec("constant", c=float(q_eval(OP, (1 / r, 1 / r))))
        initial = gs.perturbed_sphere(g, r, 0.03, seed=11)
        surf, diag = gs.newton_solve(initial, OP, psi)
        assert np.abs(surf.rho - r).max() < 1e-7 * max(1.0, r)


def test_rotation_equivariance():
    # rotating the anisotropy axis by one longitude step rotates the solution
    g = gs.SphereGrid(16, 8)
    shift = 1
    angle = 2 * np.pi * shift / g.n_lon
    e1 = (1.0, 0.0, 0.0)
    e2 = (np.cos(angle), np.sin(angle), 0.0)
    sol = {}
    for name, e in (("a", e1), ("b", e2)):
        psi = gs.PsiSpec("anisotropic-radial", c=3.0, p=3.0, eps=0.1, axis=e)
        surf, _ = gs.newton_solve(gs.RadialSurfaceField.sphere(g, 1.0), OP, psi)
        sol[name] = surf.rho
    rotated = np.roll(sol["a"], shift, axis=1)
    assert np.abs(rotated - sol["b"]).max() <= 1e-6


def test_uniqueness_heuristic_two_starts():
    g = gs.SphereGrid(16, 8)
    psi = gs.PsiSpec("anisotropic-radial", c=3.0, p=3.0, eps=0.1, axis=(0, 0, 1))
    s1, _ = gs.newton_solve(gs.perturbed_sphere(g, 1.0, 0.04, seed=1), OP, psi)
    s2, _ = gs.newton_solve(gs.perturbed_sphere(g, 1.1, 0.04, seed=2), OP, psi)
    assert np.abs(s1.rho - s2.rho).max() <= 1e-7


def test_barrier_examples():
    q_round = float(q_eval(OP, (1.0, 1.0)))
    # exact cancellation: psi = Q(1,1)/|X|^k gives zero margins
    psi_eq = gs.PsiSpec("radial-power", c=q_round, p=2.0)
    rep = gs.barrier_check(psi_eq, OP, 0.5, 2.0)
    assert rep.passed
    assert abs(rep.worst_value) < 1e-10
    assert abs(rep.details["monotonicity_margin"]) < 1e-10
    # single-radius mode
    rep_single = gs.barrier_check(gs.PsiSpec("constant", c=q_round / 4), OP, 2.0)
    assert rep_single.passed
    assert abs(rep_single.worst_value) < 1e-12
    # psi growing with |X| violates radial monotonicity
    rep_bad = gs.barrier_check(gs.PsiSpec("radial-power", c=1.0, p=-1.0), OP, 0.5, 2.0)
    assert not rep_bad.passed
    assert rep_bad.witness is not None
    with pytest.raises(DomainError):
        gs.barrier_check(psi_eq, OP, 2.0, 0.5)


def test_homotopy_constant_sphere_path():
    # psi already matching a sphere: every accepted step stays round
    g = gs.SphereGrid(16, 8)
    q1 = float(q_eval(OP, (1.0, 1.0)))
    psi = gs.PsiSpec("radial-power", c=q1, p=2.0)
    path = gs.homotopy_solve(OP, psi, g, 0.5, 2.0, steps=5, eps=1e-2)
    assert path.ts[-1] == 1.0
    for surf in path.surfaces:
        assert np.ptp(surf.rho) <= 1e-7
    assert np.abs(path.surfaces[-1].rho - 1.0).max() <= 1e-7


def test_homotopy_refuses_bad_barrier():
    g = gs.SphereGrid(16, 8)
    psi = gs.PsiSpec("radial-power", c=1.0, p=-1.0)
    with pytest.raises(DomainError):
        gs.homotopy_solve(OP, psi, g, 0.5, 2.0)


def test_curvature_monitor_sphere():
    g = gs.SphereGrid(16, 8)
    rec = gs.curvature_monitor(gs.RadialSurfaceField.sphere(g, 2.0), z=0.5)
    assert rec["max_kappa1"] == pytest.approx(0.5)
    assert rec["min_support"] == pytest.approx(2.0)
    assert rec["is_convex"]
    for m in (2, 6, 10):
        assert rec["p_moments"][m] == pytest.approx(2 * 0.5**m)
        want = np.log(2 * 0.5**m) - m * 0.5 * np.log(2.0)
        assert rec["test_function"][m] == pytest.approx(want)
    rec0 = gs.curvature_monitor(gs.RadialSurfaceField.sphere(g, 2.0), z=0.0)
    for m in (2, 6, 10):
        assert rec0["test_function"][m] == pytest.approx(np.log(2 * 0.5**m))


def test_solution_csv_roundtrip(tmp_path):
    g = gs.SphereGrid(8, 4)
    psi = gs.PsiSpec("constant", c=float(q_eval(OP, (0.5, 0.5))))
    surf = gs.RadialSurfaceField.sphere(g, 2.0)
    out = tmp_path / "solution.csv"
    gs.write_solution_csv(out, surf, OP, psi)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "lon_index,lat_index,phi,theta,rho,kappa1,kappa2,support,residual"
    assert len(lines) == 1 + g.n_lat * g.n_lon
    row = lines[1].split(",")
    assert float(row[4]) == 2.0
    assert float(row[5]) == 0.5
    # identical rewrite is byte-identical
    out2 = tmp_path / "again.csv"
    gs.write_solution_csv(out2, surf, OP, psi)
    assert out.read_bytes() == out2.read_bytes()
