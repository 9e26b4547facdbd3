"""Prescribed-curvature solving on starshaped surfaces over S^2.

A surface is a radial graph rho over a latitude-longitude grid with
half-offset colatitudes (no node sits on a pole; the missing neighbors
across each pole are the antipodal-in-longitude nodes of the same row).
Geometry comes from the standard radial-graph formulas: with W^2 = rho^2 +
|grad rho|^2 (gradients on the round sphere),

    metric      g = rho^2 e + d rho (x) d rho
    normal      nu = (rho r_hat - grad rho) / W
    2nd form    h = (rho^2 e + 2 d rho (x) d rho - rho Hess rho) / W
    curvatures  kappa = eigenvalues of g^{-1} h   (sorted descending)

The equation Q(kappa) = psi(X, nu) is solved by damped Newton with a dense
forward-difference Jacobian, and by homotopy continuation from a round
start for data satisfying the barrier conditions.
"""

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import (
    ConeExitError,
    ContinuationError,
    ConvergenceError,
    DomainError,
)
from .symfun import sigma_all_batch
from .combop import OperatorSpec, q_eval, q_eval_batch
from .cones import VerificationReport

__all__ = [
    "SphereGrid",
    "RadialSurfaceField",
    "SurfaceGeometry",
    "PsiSpec",
    "SolveOptions",
    "NewtonDiagnostics",
    "HomotopyPath",
    "surface_geometry",
    "residual",
    "newton_solve",
    "homotopy_solve",
    "barrier_check",
    "curvature_monitor",
    "monitor_path",
    "ellipsoid_radial_graph",
    "ellipsoid_curvatures",
    "write_solution_csv",
    "write_path_csv",
]

_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class SphereGrid:
    """Half-offset latitude-longitude grid: colatitude theta_j = (j+1/2)pi/n_lat,
    longitude phi_i = 2pi i/n_lon.  n_lon must be even (cross-pole closure
    pairs each node with the one shifted by pi in longitude)."""

    n_lon: int
    n_lat: int

    def __post_init__(self):
        if self.n_lon < 4 or self.n_lon % 2:
            raise DomainError("n_lon must be even and >= 4")
        if self.n_lat < 2:
            raise DomainError("n_lat must be >= 2")

    @property
    def shape(self):
        return (self.n_lat, self.n_lon)

    @property
    def theta(self):
        return (np.arange(self.n_lat) + 0.5) * np.pi / self.n_lat

    @property
    def phi(self):
        return 2.0 * np.pi * np.arange(self.n_lon) / self.n_lon

    @property
    def d_theta(self):
        return np.pi / self.n_lat

    @property
    def d_phi(self):
        return 2.0 * np.pi / self.n_lon

    def unit_vectors(self):
        """r_hat, theta_hat, phi_hat with shape (n_lat, n_lon, 3)."""
        th = self.theta[:, None]
        ph = self.phi[None, :]
        st, ct = np.sin(th), np.cos(th)
        sp, cp = np.sin(ph), np.cos(ph)
        r_hat = np.stack(np.broadcast_arrays(st * cp, st * sp, ct * np.ones_like(ph)), axis=-1)
        t_hat = np.stack(np.broadcast_arrays(ct * cp, ct * sp, -st * np.ones_like(ph)), axis=-1)
        p_hat = np.stack(np.broadcast_arrays(-sp * np.ones_like(th), cp * np.ones_like(th),
                                             np.zeros((self.n_lat, self.n_lon))), axis=-1)
        return r_hat, t_hat, p_hat


@dataclass
class RadialSurfaceField:
    """Positive radial distances rho on a sphere grid (shape (n_lat, n_lon))."""

    rho: np.ndarray
    grid: SphereGrid

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        if self.rho.shape != self.grid.shape:
            raise DomainError(f"rho must have shape {self.grid.shape}")
        if not np.all(np.isfinite(self.rho)) or np.any(self.rho <= 0):
            raise DomainError("rho must be positive and finite everywhere")

    @classmethod
    def sphere(cls, grid, radius):
        return cls(np.full(grid.shape, float(radius)), grid)


def perturbed_sphere(grid, radius, amplitude, seed):
    """Sphere with a random smooth relative perturbation of the given
    amplitude: rho = radius * (1 + amplitude * f) where f is a random
    quadratic in the direction vector, scaled to max |f| = 1.  Smoothness
    keeps small perturbations inside the admissible cone at any resolution
    (nodewise white noise would not be: its discrete second differences
    grow like 1/h^2)."""
    from .cones import trial_rng

    rng = trial_rng(seed, 0)
    r_hat, _, _ = grid.unit_vectors()
    x, y, z = r_hat[..., 0], r_hat[..., 1], r_hat[..., 2]
    basis = [x, y, z, x * y, y * z, x * z, x * x - y * y, 3 * z * z - 1.0]
    coeff = rng.normal(size=len(basis))
    f = sum(c * b for c, b in zip(coeff, basis))
    f /= np.max(np.abs(f))
    return RadialSurfaceField(radius * (1.0 + amplitude * f), grid)


def _pole_pad(f, n_lon):
    """Add ghost rows across both poles: row -1 is row 0 shifted by pi in
    longitude, row n_lat is row n_lat-1 shifted by pi (axis -2 = latitude)."""
    north = np.roll(f[..., :1, :], n_lon // 2, axis=-1)
    south = np.roll(f[..., -1:, :], n_lon // 2, axis=-1)
    return np.concatenate([north, f, south], axis=-2)


def _derivatives(f, grid):
    """Second-order centered d/dtheta, d/dphi and the three second derivatives
    of a scalar grid field; broadcasts over leading axes."""
    dt, dp = grid.d_theta, grid.d_phi
    pad = _pole_pad(f, grid.n_lon)
    f_t = (pad[..., 2:, :] - pad[..., :-2, :]) / (2.0 * dt)
    f_tt = (pad[..., 2:, :] - 2.0 * f + pad[..., :-2, :]) / dt**2
    f_p = (np.roll(f, -1, axis=-1) - np.roll(f, 1, axis=-1)) / (2.0 * dp)
    f_pp = (np.roll(f, -1, axis=-1) - 2.0 * f + np.roll(f, 1, axis=-1)) / dp**2
    pad_p = _pole_pad(f_p, grid.n_lon)
    f_pt = (pad_p[..., 2:, :] - pad_p[..., :-2, :]) / (2.0 * dt)
    return f_t, f_p, f_tt, f_pp, f_pt


@dataclass
class SurfaceGeometry:
    """Per-node geometry arrays (leading axes broadcast over surfaces)."""

    X: np.ndarray         # (..., n_lat, n_lon, 3) positions
    nu: np.ndarray        # (..., n_lat, n_lon, 3) unit outward normals
    kappa: np.ndarray     # (..., n_lat, n_lon, 2) principal curvatures, descending
    support: np.ndarray   # (..., n_lat, n_lon) <X, nu>
    rho: np.ndarray
    grid: SphereGrid


def _geometry(rho, grid):
    """Geometry arrays for a batch of rho fields (shape (..., n_lat, n_lon))."""
    th = grid.theta[:, None]
    st, ct = np.sin(th), np.cos(th)
    cot = ct / st
    r_t, r_p, r_tt, r_pp, r_pt = _derivatives(rho, grid)

    grad2 = r_t**2 + (r_p / st) ** 2
    w2 = rho**2 + grad2
    w = np.sqrt(w2)

    g_tt = rho**2 + r_t**2
    g_tp = r_t * r_p
    g_pp = (rho * st) ** 2 + r_p**2

    hess_tt = r_tt
    hess_tp = r_pt - cot * r_p
    hess_pp = r_pp + st * ct * r_t

    h_tt = (rho**2 + 2.0 * r_t**2 - rho * hess_tt) / w
    h_tp = (2.0 * r_t * r_p - rho * hess_tp) / w
    h_pp = ((rho * st) ** 2 + 2.0 * r_p**2 - rho * hess_pp) / w

    det_g = g_tt * g_pp - g_tp**2
    det_h = h_tt * h_pp - h_tp**2
    tr = (g_pp * h_tt - 2.0 * g_tp * h_tp + g_tt * h_pp) / det_g
    det = det_h / det_g
    disc = np.sqrt(np.maximum(tr**2 - 4.0 * det, 0.0))
    kappa = np.stack([(tr + disc) / 2.0, (tr - disc) / 2.0], axis=-1)

    r_hat, t_hat, p_hat = grid.unit_vectors()
    grad_vec = r_t[..., None] * t_hat + (r_p / st)[..., None] * p_hat
    X = rho[..., None] * r_hat
    nu = (rho[..., None] * r_hat - grad_vec) / w[..., None]
    support = rho**2 / w
    return X, nu, kappa, support


def surface_geometry(surface):
    """Full geometry of one surface; curvatures sorted descending per node."""
    X, nu, kappa, support = _geometry(surface.rho, surface.grid)
    return SurfaceGeometry(X=X, nu=nu, kappa=kappa, support=support,
                           rho=surface.rho, grid=surface.grid)


# ---------------------------------------------------------------------------
# admissibility and residual

def _admissible_mask(op, kappa):
    """Nodewise admissibility of the curvature pair: Gamma~_k for sum-type
    operators (strict inequalities), Gamma_k otherwise."""
    e = sigma_all_batch(kappa, op.k)
    alpha = op.sum_type_alpha
    ok = np.ones(kappa.shape[:-1], dtype=bool)
    if alpha is not None:
        for m in range(1, op.k):
            ok &= e[..., m] > 0.0
        ok &= float(alpha) * e[..., op.k - 1] + e[..., op.k] > 0.0
    else:
        for m in range(1, op.k + 1):
            ok &= e[..., m] > 0.0
    return ok


def _residual_raw(rho, grid, op, psi):
    """Q(kappa) - psi per node, plus the admissibility mask (no raising)."""
    X, nu, kappa, _ = _geometry(rho, grid)
    res = q_eval_batch(op, kappa) - psi.evaluate(X, nu)
    return res, _admissible_mask(op, kappa)


def residual(surface, op, psi):
    """Per-node Q(kappa(X)) - psi(X, nu); raises ConeExitError (listing the
    offending nodes) if any node's curvatures leave the admissible cone."""
    if op.n != 2:
        raise DomainError("surface solving is fixed to n=2 (two principal curvatures)")
    res, ok = _residual_raw(surface.rho, surface.grid, op, psi)
    if not ok.all():
        bad = [tuple(idx) for idx in np.argwhere(~ok)]
        raise ConeExitError(
            f"curvatures leave the admissible cone at {len(bad)} node(s)", nodes=bad
        )
    return res


# ---------------------------------------------------------------------------
# right-hand sides

@dataclass(frozen=True)
class PsiSpec:
    """Closed catalog of right-hand sides psi(X, nu) > 0.

    families: 'constant' (c), 'radial-power' (c / |X|^p),
    'anisotropic-radial' (c/|X|^p * (1 + eps <nu, e>), |eps| < 1),
    'manufactured-ellipsoid' (Q(kappa) of the ellipsoid with the given axes,
    evaluated at the radial projection of X onto the ellipsoid).
    """

    family: str
    c: float = 1.0
    p: float = 0.0
    eps: float = 0.0
    axis: tuple = (0.0, 0.0, 1.0)
    axes: tuple = (1.0, 1.0, 1.0)
    op: OperatorSpec = None

    def __post_init__(self):
        if self.family not in (
            "constant", "radial-power", "anisotropic-radial", "manufactured-ellipsoid"
        ):
            raise DomainError(f"unknown psi family {self.family!r}")
        if self.family != "manufactured-ellipsoid" and self.c <= 0:
            raise DomainError("c must be positive")
        if self.family == "anisotropic-radial":
            if not abs(self.eps) < 1:
                raise DomainError("need |eps| < 1 so psi stays positive")
            norm = float(np.linalg.norm(self.axis))
            if norm == 0:
                raise DomainError("axis must be nonzero")
            object.__setattr__(self, "axis", tuple(np.asarray(self.axis, float) / norm))
        if self.family == "manufactured-ellipsoid":
            if self.op is None:
                raise DomainError("manufactured family needs the operator")
            if any(a <= 0 for a in self.axes):
                raise DomainError("axes must be positive")

    def evaluate(self, X, nu):
        """Vectorized over leading axes of X, nu (last axis = 3)."""
        X = np.asarray(X, float)
        nu = np.asarray(nu, float)
        r = np.linalg.norm(X, axis=-1)
        if self.family == "constant":
            return np.full_like(r, self.c)
        if self.family == "radial-power":
            return self.c / r**self.p
        if self.family == "anisotropic-radial":
            e = np.asarray(self.axis)
            return self.c / r**self.p * (1.0 + self.eps * (nu @ e))
        d = X / r[..., None]
        point = ellipsoid_radial_graph(d, self.axes)[..., None] * d
        kappa = ellipsoid_curvatures(point, self.axes)
        return q_eval_batch(self.op, kappa)


def ellipsoid_radial_graph(directions, axes):
    """Radial distance of the ellipsoid sum (x_i/a_i)^2 = 1 along unit directions."""
    d = np.asarray(directions, float)
    a = np.asarray(axes, float)
    return 1.0 / np.sqrt(((d / a) ** 2).sum(axis=-1))


def ellipsoid_curvatures(points, axes):
    """Principal curvatures (descending) of the ellipsoid at on-surface points.

    Closed-form via the implicit surface F = sum (x_i/a_i)^2 - 1: the shape
    operator is the tangential restriction of Hess F / |grad F|.
    """
    p = np.asarray(points, float)
    a2 = np.asarray(axes, float) ** 2
    grad = 2.0 * p / a2
    gn = np.linalg.norm(grad, axis=-1)
    m = grad / gn[..., None]
    # tangent frame: cross with whichever coordinate axis is far from m
    helper = np.zeros_like(m)
    use_z = np.abs(m[..., 2]) < 0.9
    helper[..., 2] = np.where(use_z, 1.0, 0.0)
    helper[..., 0] = np.where(use_z, 0.0, 1.0)
    t1 = np.cross(helper, m)
    t1 /= np.linalg.norm(t1, axis=-1, keepdims=True)
    t2 = np.cross(m, t1)
    # S_ij = t_i . (Hess F) t_j / |grad F|, Hess F = diag(2/a_i^2)
    h11 = (2.0 * t1 * t1 / a2).sum(axis=-1) / gn
    h12 = (2.0 * t1 * t2 / a2).sum(axis=-1) / gn
    h22 = (2.0 * t2 * t2 / a2).sum(axis=-1) / gn
    tr = h11 + h22
    disc = np.sqrt(np.maximum((h11 - h22) ** 2 + 4.0 * h12**2, 0.0))
    return np.stack([(tr + disc) / 2.0, (tr - disc) / 2.0], axis=-1)


# ---------------------------------------------------------------------------
# Newton solver

@dataclass
class SolveOptions:
    tol: float = None          # absolute; default 1e-10 * psi scale
    max_iter: int = 40
    max_halvings: int = 30
    jacobian_chunk: int = 256


@dataclass
class NewtonDiagnostics:
    iterations: list = field(default_factory=list)  # (residual_inf, step, halvings)
    converged: bool = False
    tol: float = None

    @property
    def n_iter(self):
        return len(self.iterations)


def _jacobian_fd(rho, grid, op, psi, base, chunk):
    """Dense forward-difference Jacobian of the residual in the rho unknowns."""
    n = rho.size
    flat = rho.ravel()
    deltas = np.sqrt(_EPS) * (1.0 + np.abs(flat))
    jac = np.empty((n, n))
    for start in range(0, n, chunk):
        idx = np.arange(start, min(start + chunk, n))
        batch = np.repeat(flat[None, :], idx.size, axis=0)
        batch[np.arange(idx.size), idx] += deltas[idx]
        res, _ = _residual_raw(batch.reshape(idx.size, *grid.shape), grid, op, psi)
        jac[:, idx] = (res.reshape(idx.size, n) - base.ravel()[None, :]).T / deltas[idx]
    return jac


def newton_solve(initial, op, psi, opts=None):
    """Damped Newton for Q(kappa) = psi on the grid of the initial surface.

    Backtracking halves the step until the sup-norm of the residual
    decreases and the iterate stays admissible (positive rho, curvatures in
    the cone).  Raises ConvergenceError when no acceptable step exists or
    the iteration budget is exhausted; the exception carries the last
    iterate and diagnostics.

    Returns (surface, NewtonDiagnostics).
    """
    if op.n != 2:
        raise DomainError("surface solving is fixed to n=2 (two principal curvatures)")
    opts = opts or SolveOptions()
    grid = initial.grid
    rho = initial.rho.copy()
    res, ok = _residual_raw(rho, grid, op, psi)
    if not ok.all():
        raise ConeExitError("initial surface is not admissible",
                            nodes=[tuple(i) for i in np.argwhere(~ok)])
    X, nu, _, _ = _geometry(rho, grid)
    psi_scale = float(np.max(np.abs(psi.evaluate(X, nu))))
    tol = opts.tol if opts.tol is not None else 1e-10 * psi_scale
    diag = NewtonDiagnostics(tol=tol)

    norm = float(np.max(np.abs(res)))
    for _ in range(opts.max_iter):
        diag.iterations.append((norm, 0.0, 0))
        if norm <= tol:
            diag.converged = True
            return RadialSurfaceField(rho, grid), diag
        jac = _jacobian_fd(rho, grid, op, psi, res, opts.jacobian_chunk)
        try:
            step = np.linalg.solve(jac, -res.ravel()).reshape(grid.shape)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular Jacobian: {exc}",
                                   last_surface=RadialSurfaceField(rho, grid),
                                   diagnostics=diag) from None
        scale = 1.0
        accepted = False
        for halving in range(opts.max_halvings + 1):
            cand = rho + scale * step
            if np.all(cand > 0):
                cand_res, cand_ok = _residual_raw(cand, grid, op, psi)
                cand_norm = float(np.max(np.abs(cand_res)))
                if cand_ok.all() and np.isfinite(cand_norm) and cand_norm < norm:
                    rho, res, norm = cand, cand_res, cand_norm
                    diag.iterations[-1] = (norm, scale, halving)
                    accepted = True
                    break
            scale *= 0.5
        if not accepted:
            raise ConvergenceError(
                f"line search failed after {opts.max_halvings} halvings "
                f"(residual {norm:.3e})",
                last_surface=RadialSurfaceField(rho, grid),
                diagnostics=diag,
            )
    raise ConvergenceError(
        f"no convergence in {opts.max_iter} iterations (residual {norm:.3e}, tol {tol:.3e})",
        last_surface=RadialSurfaceField(rho, grid),
        diagnostics=diag,
    )


# ---------------------------------------------------------------------------
# barriers, homotopy, monitoring

def _direction_grid(n_lon=16, n_lat=8):
    g = SphereGrid(n_lon, n_lat)
    r_hat, _, _ = g.unit_vectors()
    return r_hat.reshape(-1, 3)


def barrier_check(psi, op, r1, r2=None, n_rho=33, tol=1e-12):
    """Barrier margins for psi against the operator's round comparison data.

    Annulus mode (r2 given, r1 < r2): checks psi(X, X/|X|) >= Q(1,..,1)/r1^k
    on |X| = r1, <= Q(1,..,1)/r2^k on |X| = r2, and the radial monotonicity
    d/drho (rho^k psi) <= 0 along [r1, r2] at fixed direction and fixed nu.
    Single-radius mode (r2 None): only the upper bound at |X| = r1.

    worst_value is the minimum normalized margin over all samples.
    """
    if r2 is not None and not r1 < r2:
        raise DomainError("need r1 < r2 in annulus mode")
    theta = tuple([1.0] * op.n)
    q_round = float(q_eval(op, theta))
    dirs = _direction_grid()
    details = {}

    def sphere_margin(radius, sense):
        X = radius * dirs
        vals = psi.evaluate(X, dirs)
        bound = q_round / radius**op.k
        margins = (vals - bound) / bound if sense == "lower" else (bound - vals) / bound
        i = int(np.argmin(margins))
        return float(margins[i]), tuple(X[i])

    witness = None
    if r2 is None:
        worst, witness = sphere_margin(r1, "upper")
        details["upper_margin"] = worst
    else:
        m1, w1 = sphere_margin(r1, "lower")
        m2, w2 = sphere_margin(r2, "upper")
        details["inner_margin"], details["outer_margin"] = m1, m2
        # radial monotonicity: centered differences of rho^k psi at fixed nu
        rhos = np.linspace(r1, r2, n_rho)
        nus = np.concatenate([dirs, np.eye(3), -np.eye(3)], axis=0)
        worst_mono = np.inf
        w3 = None
        for nu in nus:
            nu_b = np.broadcast_to(nu, (dirs.shape[0], 3))
            g = np.stack(
                [r**op.k * psi.evaluate(r * dirs, nu_b) for r in rhos], axis=0
            )
            dg = (g[2:] - g[:-2]) / (2.0 * (rhos[1] - rhos[0]))
            scale = 1.0 + np.max(np.abs(g)) / (r2 - r1)
            m = float(np.min(-dg) / scale)
            if m < worst_mono:
                worst_mono = m
                bad = np.unravel_index(int(np.argmin(-dg)), dg.shape)
                w3 = (tuple(rhos[bad[0] + 1] * dirs[bad[1]]), tuple(nu))
        details["monotonicity_margin"] = worst_mono
        worst = min(m1, m2, worst_mono)
        witness = {m1: w1, m2: w2, worst_mono: w3}.get(worst)
    return VerificationReport(
        passed=bool(worst >= -tol),
        trials=dirs.shape[0],
        worst_value=float(worst),
        seed=0,
        witness=witness,
        details=details,
    )


class _BlendedPsi:
    """Interpolant between the round comparison datum and the target psi
    through inverse k-th-power blending."""

    def __init__(self, psi, op, t, eps):
        self.psi = psi
        self.op = op
        self.t = float(t)
        self.eps = float(eps)
        self.q_round = float(q_eval(op, tuple([1.0] * op.n)))

    def datum(self, r):
        k = self.op.k
        return self.q_round * ((1.0 + self.eps) / r**k - self.eps)

    def evaluate(self, X, nu):
        X = np.asarray(X, float)
        r = np.linalg.norm(X, axis=-1)
        d = self.datum(r)
        if np.any(d <= 0):
            raise DomainError("comparison datum not positive on this surface")
        k = self.op.k
        if self.t == 0.0:
            return d
        f = self.psi.evaluate(X, nu)
        return (self.t * f ** (-1.0 / k) + (1.0 - self.t) * d ** (-1.0 / k)) ** (-k)


@dataclass
class HomotopyPath:
    ts: list
    surfaces: list
    records: list          # curvature_monitor record per accepted step
    final_diagnostics: NewtonDiagnostics


def homotopy_solve(op, psi, grid, r1, r2, steps=20, eps=1e-2, opts=None,
                   check_barrier=True, min_step=1e-4):
    """Continuation from the round solution of the eps-modified radial
    problem to psi, warm-starting Newton at each accepted parameter value.

    The comparison datum is Q(1,..,1) * [(1+eps)/rho^k - eps]; its round
    solution (radius from a bracketed scalar solve) seeds t = 0, and the
    parameter advances with adaptive bisection of the step (halving on
    Newton failure, floor min_step; re-expanding after successes).

    psi must satisfy the annulus barrier unless check_barrier is False.
    """
    if check_barrier:
        rep = barrier_check(psi, op, r1, r2)
        if not rep.passed:
            raise DomainError(
                f"psi fails the barrier check (worst margin {rep.worst_value:.3e}); "
                "refusing to start the continuation"
            )
    probe = _BlendedPsi(psi, op, 0.0, eps)

    def round_residual(r):
        kappa = tuple([1.0 / r] * op.n)
        return float(q_eval(op, kappa)) - probe.datum(r)

    r0 = _bracketed_root(round_residual, 1e-3, 1e3)
    surface = RadialSurfaceField.sphere(grid, r0)

    ts, surfaces, records = [], [], []
    t = 0.0
    base_dt = 1.0 / steps
    dt = base_dt
    diag = None
    surface, diag = newton_solve(surface, op, _BlendedPsi(psi, op, 0.0, eps), opts)
    ts.append(0.0)
    surfaces.append(surface)
    records.append(curvature_monitor(surface))
    while t < 1.0:
        t_next = min(1.0, t + dt)
        try:
            nxt, diag = newton_solve(surface, op, _BlendedPsi(psi, op, t_next, eps), opts)
        except ConvergenceError:
            dt *= 0.5
            if dt < min_step:
                raise ContinuationError(
                    f"continuation step underflow below {min_step} at t={t:.6f}",
                    last_t=t,
                    path=HomotopyPath(ts, surfaces, records, diag),
                ) from None
            continue
        surface = nxt
        t = t_next
        ts.append(t)
        surfaces.append(surface)
        records.append(curvature_monitor(surface))
        dt = min(base_dt, dt * 2.0)
    return HomotopyPath(ts=ts, surfaces=surfaces, records=records, final_diagnostics=diag)


def _bracketed_root(f, lo, hi, samples=121):
    grid = np.geomspace(lo, hi, samples)
    vals = [f(r) for r in grid]
    for a, b, fa, fb in zip(grid, grid[1:], vals, vals[1:]):
        if fa == 0.0:
            return float(a)
        if fa * fb < 0:
            return float(brentq(f, a, b, xtol=1e-14, rtol=8.9e-16))
    raise DomainError("no round solution of the comparison problem in the bracket")


def curvature_monitor(surface, z=0.0, moments=(2, 6, 10)):
    """Diagnostics of one surface: max kappa_1, min support, power sums
    P_m = sum_j kappa_j^m (max over nodes) and max of log P_m - m*z*log u."""
    geo = surface_geometry(surface)
    kappa1 = float(np.max(geo.kappa[..., 0]))
    support_min = float(np.min(geo.support))
    record = {
        "max_kappa1": kappa1,
        "min_support": support_min,
        "is_convex": bool(np.all(geo.kappa[..., 1] > 0)),
        "p_moments": {},
        "test_function": {},
        "z": float(z),
    }
    log_u = np.log(geo.support)
    for m in moments:
        p_m = (geo.kappa**m).sum(axis=-1)
        record["p_moments"][m] = float(np.max(p_m))
        record["test_function"][m] = float(np.max(np.log(p_m) - m * z * log_u))
    return record


def monitor_path(path, z=0.0, moments=(2, 6, 10)):
    """Per-step records plus maxima over the whole continuation path."""
    records = [curvature_monitor(s, z, moments) for s in path.surfaces]
    summary = {
        "max_kappa1": max(r["max_kappa1"] for r in records),
        "min_support": min(r["min_support"] for r in records),
        "p_moments": {
            m: max(r["p_moments"][m] for r in records) for m in moments
        },
    }
    return records, summary


# ---------------------------------------------------------------------------
# CSV export (repr() of Python floats round-trips IEEE doubles exactly)

def _fmt(x):
    return repr(float(x))


def write_solution_csv(path, surface, op, psi):
    """One row per node: lon_index,lat_index,phi,theta,rho,kappa1,kappa2,support,residual."""
    geo = surface_geometry(surface)
    res = q_eval_batch(op, geo.kappa) - psi.evaluate(geo.X, geo.nu)
    grid = surface.grid
    theta, phi = grid.theta, grid.phi
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["lon_index", "lat_index", "phi", "theta", "rho",
             "kappa1", "kappa2", "support", "residual"]
        )
        for j in range(grid.n_lat):
            for i in range(grid.n_lon):
                w.writerow(
                    [i, j, _fmt(phi[i]), _fmt(theta[j]), _fmt(surface.rho[j, i]),
                     _fmt(geo.kappa[j, i, 0]), _fmt(geo.kappa[j, i, 1]),
                     _fmt(geo.support[j, i]), _fmt(res[j, i])]
                )


def write_path_csv(out_dir, path, op, psi, eps):
    """Per-step solution CSVs plus path.csv of t,max_kappa1,min_support,residual_norm."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for idx, (t, surface, record) in enumerate(zip(path.ts, path.surfaces, path.records)):
        blended = _BlendedPsi(psi, op, t, eps)
        write_solution_csv(
            os.path.join(out_dir, f"surface_{idx:04d}.csv"), surface, op, blended
        )
        res, _ = _residual_raw(surface.rho, surface.grid, op, blended)
        rows.append((t, record["max_kappa1"], record["min_support"],
                     float(np.max(np.abs(res)))))
    with open(os.path.join(out_dir, "path.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "max_kappa1", "min_support", "residual_norm"])
        for t, k1, u, rn in rows:
            w.writerow([_fmt(t), _fmt(k1), _fmt(u), _fmt(rn)])
