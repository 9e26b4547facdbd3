"""Numerical concavity verification.

Fields under test are scalar functions on an open cone.  Two instruments:
a midpoint test 2f(x) - f(x+eps*xi) - f(x-eps*xi) >= 0 (exact for concave f
at any admissible probe size, so it runs tight tolerances even near the
cone boundary) and a central-difference Hessian whose maximum eigenvalue
must be nonpositive (run at interior points, where floating-point noise is
controlled).

Residuals are normalized: midpoint defects by 1 + |f(x)|, Hessian
eigenvalues by (1 + |f(x)|) / (1 + |x|_inf)^2.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, DomainExitError, SingularityError
from .symfun import as_tuple, sigma_all, sigma_all_batch
from .combop import OperatorSpec, LowerOperatorSpec, q_eval, q_grad, q_hess, quotient_q
from .cones import (
    ConeSpec,
    VerificationReport,
    cone_contains,
    cone_margins_batch,
    _sample_one,
    _TrialStreams,
)

__all__ = [
    "ScalarField",
    "GuanCheckInput",
    "quotient_qk_field",
    "sigma_over_q_field",
    "sum_ratio_field",
    "sum_root_field",
    "root_q_field",
    "lower_quotient_field",
    "fd_hessian",
    "default_step",
    "concavity_scan",
    "q1_closed_form_check",
    "guan_inequality_check",
    "guan_scan",
]

_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class ScalarField:
    """A named scalar function with its domain cone (None = all of R^n).

    batch_fn, when provided, evaluates an (m, n) array of points at once;
    otherwise batches fall back to a Python loop over fn.
    """

    name: str
    n: int
    fn: object
    domain: ConeSpec = None
    batch_fn: object = None

    def __call__(self, x):
        return self.fn(x)

    def contains(self, x):
        return self.domain is None or cone_contains(self.domain, x)

    def values(self, points):
        pts = np.asarray(points, dtype=float)
        if self.batch_fn is not None:
            return np.asarray(self.batch_fn(pts), dtype=float)
        return np.array([self.fn(tuple(p)) for p in pts], dtype=float)

    def inside(self, points):
        """Boolean mask of strict domain membership for an (m, n) array."""
        pts = np.asarray(points, dtype=float)
        if self.domain is None:
            return np.ones(pts.shape[0], dtype=bool)
        return cone_margins_batch(self.domain, pts) > self.domain.tol


# ---------------------------------------------------------------------------
# field catalog

def quotient_qk_field(n, k, alpha, domain=None):
    """Sum-type quotient q_k = (sigma_{k+1}+alpha*sigma_k)/(sigma_k+alpha*sigma_{k-1}).

    Default domain Gamma_k; pass e.g. Gamma_{k+1} to test the smaller domain.
    """
    dom = domain or ConeSpec("garding", n, k)
    a = float(alpha)

    def batch(pts):
        e = sigma_all_batch(pts, k + 1)
        return (e[..., k + 1] + a * e[..., k]) / (e[..., k] + a * e[..., k - 1])

    return ScalarField(
        name=f"q_{k}[alpha={alpha}]",
        n=n,
        fn=lambda x: float(quotient_q(x, k, alpha)),
        domain=dom,
        batch_fn=batch,
    )


def sigma_over_q_field(n, k, alpha):
    """sigma_k / (sigma_k + alpha*sigma_{k-1}) on the admissible cone Gamma~_k."""
    a = float(alpha)

    def fn(x):
        e = sigma_all(as_tuple(x), k)
        den = float(e[k] + alpha * e[k - 1])
        if den == 0.0:
            raise SingularityError("sum-type denominator vanishes")
        return float(e[k]) / den

    def batch(pts):
        e = sigma_all_batch(pts, k)
        return e[..., k] / (e[..., k] + a * e[..., k - 1])

    return ScalarField(
        name=f"sigma_{k}/Q_S^{k}[alpha={alpha}]",
        n=n,
        fn=fn,
        domain=ConeSpec("tilde", n, k, alpha),
        batch_fn=batch,
    )


def sum_ratio_field(n, k, l, alpha):
    """(Q_S^k / Q_S^l)^(1/(k-l)) on Gamma~_k, 1 <= l < k."""
    if not 1 <= l < k:
        raise DomainError(f"need 1 <= l < k, got l={l}, k={k}")
    a = float(alpha)
    power = 1.0 / (k - l)

    def fn(x):
        e = sigma_all(as_tuple(x), k)
        num = float(e[k] + alpha * e[k - 1])
        den = float(e[l] + alpha * e[l - 1])
        if den <= 0.0 or num <= 0.0:
            raise SingularityError("sum-type ratio not positive at this point")
        return (num / den) ** power

    def batch(pts):
        e = sigma_all_batch(pts, k)
        return ((e[..., k] + a * e[..., k - 1]) / (e[..., l] + a * e[..., l - 1])) ** power

    return ScalarField(
        name=f"(Q_S^{k}/Q_S^{l})^(1/{k - l})[alpha={alpha}]",
        n=n,
        fn=fn,
        domain=ConeSpec("tilde", n, k, alpha),
        batch_fn=batch,
    )


def sum_root_field(n, k, alpha):
    """(Q_S^k)^(1/k) on Gamma~_k."""
    a = float(alpha)

    def fn(x):
        e = sigma_all(as_tuple(x), k)
        v = float(e[k] + alpha * e[k - 1])
        if v <= 0.0:
            raise SingularityError("sum-type operator not positive at this point")
        return v ** (1.0 / k)

    def batch(pts):
        e = sigma_all_batch(pts, k)
        return (e[..., k] + a * e[..., k - 1]) ** (1.0 / k)

    return ScalarField(
        name=f"(Q_S^{k})^(1/{k})[alpha={alpha}]",
        n=n,
        fn=fn,
        domain=ConeSpec("tilde", n, k, alpha),
        batch_fn=batch,
    )


def _q_batch(op):
    coeffs = np.array([float(a) for a in op.alphas])

    def batch(pts):
        return sigma_all_batch(pts, op.k) @ coeffs

    return batch


def root_q_field(op):
    """Q^(1/k) on Gamma_k."""
    qb = _q_batch(op)

    def fn(x):
        v = float(q_eval(op, x))
        if v <= 0.0:
            raise SingularityError("operator not positive at this point")
        return v ** (1.0 / op.k)

    return ScalarField(
        name=f"Q^(1/{op.k})",
        n=op.n,
        fn=fn,
        domain=ConeSpec("garding", op.n, op.k),
        batch_fn=lambda pts: qb(pts) ** (1.0 / op.k),
    )


def lower_quotient_field(op, lower):
    """(Q / Q^{N'}_l)^(1/(k-l)) on Gamma_k for a derived lower operator."""
    if not isinstance(lower, LowerOperatorSpec):
        raise DomainError("lower must be a LowerOperatorSpec from combop.lower_operator")
    low_op = lower.as_operator()
    power = 1.0 / (op.k - lower.l)
    qb, sb = _q_batch(op), _q_batch(low_op)

    def fn(x):
        num = float(q_eval(op, x))
        den = float(q_eval(low_op, x))
        if den <= 0.0 or num <= 0.0:
            raise SingularityError("quotient not positive at this point")
        return (num / den) ** power

    return ScalarField(
        name=f"(Q/Q^{lower.n_prime}_{lower.l})^(1/{op.k - lower.l})",
        n=op.n,
        fn=fn,
        domain=ConeSpec("garding", op.n, op.k),
        batch_fn=lambda pts: (qb(pts) / sb(pts)) ** power,
    )


# ---------------------------------------------------------------------------
# instruments

def default_step(x):
    """Central-second-difference step: eps^(1/4) * (1 + |x|_inf).

    The fourth-root scaling balances truncation against roundoff for second
    differences; the cube-root first-derivative step leaves ~1e-5 noise in
    the normalized eigenvalues, too coarse for the 1e-6 gate used here.
    """
    return _EPS**0.25 * (1.0 + max(abs(float(v)) for v in x))


@lru_cache(maxsize=None)
def _hessian_stencil(n):
    # displacement stencil (unit steps) for one central-difference Hessian:
    # row 0 is the base point, then +-e_i, then the four corners per (i, j)
    rows = [np.zeros(n)]
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        rows.extend([e, -e])
    for i in range(n):
        for j in range(i + 1, n):
            d = np.zeros(n)
            d[i], d[j] = 1.0, 1.0
            rows.append(d.copy())
            d[j] = -1.0
            rows.append(d.copy())
            d[i], d[j] = -1.0, 1.0
            rows.append(d.copy())
            d[j] = -1.0
            rows.append(d.copy())
    return np.array(rows)


def fd_hessian(field, x, h):
    """Symmetrized central-difference Hessian of the field at x, step h.

    Every probe point must stay inside the field's domain cone; a probe
    that exits raises DomainExitError carrying the offending point.
    """
    xv = np.array([float(v) for v in as_tuple(x)])
    n = xv.size
    if field.n != n:
        raise DomainError(f"field expects n={field.n}, got {n}")
    probes = xv[None, :] + h * _hessian_stencil(n)
    ok = field.inside(probes)
    if not ok.all():
        bad = probes[int(np.argmin(ok))]
        raise DomainExitError("finite-difference probe left the domain cone",
                              point=tuple(bad))
    vals = field.values(probes)
    fx = vals[0]
    hess = np.zeros((n, n))
    pos = 1
    for i in range(n):
        hess[i, i] = (vals[pos] - 2.0 * fx + vals[pos + 1]) / h**2
        pos += 2
    for i in range(n):
        for j in range(i + 1, n):
            fpp, fpm, fmp, fmm = vals[pos: pos + 4]
            hess[i, j] = hess[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h**2)
            pos += 4
    return 0.5 * (hess + hess.T)


def _validated_max_eig(field, x, gate):
    """Normalized max Hessian eigenvalue with a step-halving validity gate.

    Evaluates the central-difference Hessian at steps h and h/2 and accepts
    the Richardson extrapolate (4*H(h/2) - H(h))/3 only when the two
    max-eigenvalue estimates agree within `gate` (normalized); otherwise the
    step is refined, and None is returned when no trustworthy estimate
    exists (truncation-dominated probe, e.g. too close to the cone boundary).
    """
    fx = float(field.fn(x))
    scale = (1.0 + abs(fx)) / (1.0 + max(abs(v) for v in x)) ** 2
    h = 2.0 * default_step(x)
    for _ in range(3):
        try:
            coarse = fd_hessian(field, x, h)
            fine = fd_hessian(field, x, 0.5 * h)
        except DomainExitError:
            h *= 0.5
            continue
        e_coarse = float(np.linalg.eigvalsh(coarse)[-1]) / scale
        e_fine = float(np.linalg.eigvalsh(fine)[-1]) / scale
        if abs(e_coarse - e_fine) <= gate:
            extrap = (4.0 * fine - coarse) / 3.0
            return float(np.linalg.eigvalsh(extrap)[-1]) / scale
        h *= 0.5
    return None


def _midpoint_residuals(field, x, dirs):
    """Normalized 2f(x) - f(x+eps*xi) - f(x-eps*xi) for a (d, n) array of
    directions, with per-direction eps shrunk until both probes are inside
    the cone.  Returns (residuals, eps) arrays; directions with no
    admissible eps carry +inf residual."""
    xv = np.asarray(x, dtype=float)
    fx = float(field.values(xv[None, :])[0])
    d = dirs.shape[0]
    eps = np.full(d, 0.05 * (1.0 + np.max(np.abs(xv))))
    alive = np.ones(d, dtype=bool)
    for _ in range(60):
        if not alive.any():
            break
        probes = np.concatenate(
            [xv[None, :] + eps[alive, None] * dirs[alive],
             xv[None, :] - eps[alive, None] * dirs[alive]]
        )
        ok = field.inside(probes)
        m = int(alive.sum())
        good = ok[:m] & ok[m:]
        idx = np.nonzero(alive)[0]
        alive[idx[good]] = False
        eps[idx[~good]] *= 0.5
    usable = ~alive
    res = np.full(d, np.inf)
    if usable.any():
        probes = np.concatenate(
            [xv[None, :] + eps[usable, None] * dirs[usable],
             xv[None, :] - eps[usable, None] * dirs[usable]]
        )
        vals = field.values(probes)
        m = int(usable.sum())
        res[usable] = (2.0 * fx - vals[:m] - vals[m:]) / (1.0 + abs(fx))
    return res, eps


def concavity_scan(
    field,
    trials,
    seed,
    tol=1e-9,
    hessian_trials=None,
    hessian_tol=1e-6,
    directions=4,
    hessian_margin=1e-2,
):
    """Randomized concavity verification of a scalar field on its cone.

    Midpoint trials sample the full (boundary-biased) cone distribution and
    must stay >= -tol after normalization.  Hessian trials sample interior
    points (normalized cone margin >= hessian_margin), validate each
    eigenvalue estimate by step-halving agreement, and require the maximum
    eigenvalue <= hessian_tol after normalization.  Defaults:
    hessian_trials = max(1, trials // 10).

    Returns a VerificationReport; details carry the Hessian worst case and
    the number of validated Hessian probes.
    """
    if field.domain is None:
        raise DomainError("concavity_scan needs a field with a domain cone")
    if hessian_trials is None:
        hessian_trials = max(1, trials // 10)
    mid_worst = np.inf
    mid_witness = None
    mid_extra = None
    streams = _TrialStreams(seed)
    for i in range(trials):
        rng = streams.at(i)
        x = _sample_one(field.domain, rng)
        if x is None:
            continue
        dirs = rng.normal(size=(directions, field.n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        res, eps = _midpoint_residuals(field, x, dirs)
        j = int(np.argmin(res))
        if res[j] < mid_worst:
            mid_worst = float(res[j])
            mid_witness = x
            mid_extra = {"direction": tuple(dirs[j]), "eps": float(eps[j])}

    hess_worst = -np.inf
    hess_witness = None
    validated = 0
    gate = 0.3 * hessian_tol
    for i in range(hessian_trials):
        rng = streams.at(trials + i)
        value = None
        for _ in range(6):  # resample until the two-step estimates agree
            x = _sample_one(field.domain, rng, boundary_bias=0.5, min_margin=hessian_margin)
            if x is None:
                continue
            got = _validated_max_eig(field, x, gate)
            if got is not None:
                value = got
                break
        if value is None:
            continue
        validated += 1
        if value > hess_worst:
            hess_worst = value
            hess_witness = x

    passed = bool(mid_worst >= -tol) and bool(hess_worst <= hessian_tol)
    witness = hess_witness if (mid_worst >= -tol and hess_worst > hessian_tol) else mid_witness
    return VerificationReport(
        passed=passed,
        trials=trials,
        worst_value=float(mid_worst),
        seed=seed,
        witness=witness,
        witness_extra=mid_extra,
        details={
            "field": field.name,
            "midpoint_worst": float(mid_worst),
            "hessian_worst": float(hess_worst),
            "hessian_trials": hessian_trials,
            "hessian_validated": validated,
            "hessian_witness": hess_witness,
            "tol": tol,
            "hessian_tol": hessian_tol,
        },
    )


# ---------------------------------------------------------------------------
# closed-form identity for the first sum-type quotient

def _q1(lam, alpha):
    e = sigma_all(lam, 2)
    den = e[1] + alpha
    if den == 0:
        raise SingularityError("sigma_1 + alpha vanishes")
    return (e[2] + alpha * e[1]) / den


def q1_closed_form_check(lam, xi, alpha):
    """Both sides of the q_1 midpoint identity.

    Returns (direct, closed_form) with
    direct = 2 q_1(lam) - q_1(lam+xi) - q_1(lam-xi) and
    closed_form = [alpha^2 sigma_1(xi)^2 + sum_i ((alpha+sigma_1(lam)) xi_i
    - sigma_1(xi) lam_i)^2] / prod of the three denominators.
    """
    lv = as_tuple(lam)
    xv = as_tuple(xi)
    if len(lv) != len(xv):
        raise DomainError("lam and xi must have the same length")
    plus = tuple(a + b for a, b in zip(lv, xv))
    minus = tuple(a - b for a, b in zip(lv, xv))
    direct = 2 * _q1(lv, alpha) - _q1(plus, alpha) - _q1(minus, alpha)
    s1l = sum(lv)
    s1x = sum(xv)
    num = alpha * alpha * s1x * s1x
    for li, xi_i in zip(lv, xv):
        term = (alpha + s1l) * xi_i - s1x * li
        num = num + term * term
    den = (alpha + s1l) * (alpha + sum(plus)) * (alpha + sum(minus))
    if den == 0:
        raise SingularityError("a q_1 denominator vanishes")
    return direct, num / den


# ---------------------------------------------------------------------------
# quotient-concavity inequality on diagonal second fundamental forms

@dataclass(frozen=True)
class GuanCheckInput:
    """Diagonal specialization data for the quotient-concavity inequalities.

    w_diag: diagonal entries of the curvature tensor (must lie in Gamma_k);
    w_vec: the fixed-direction derivative components (one per diagonal
    entry); op and s_l: the operator and its derived lower operator;
    delta: the free positive parameter of the second inequality.
    """

    w_diag: tuple
    w_vec: tuple
    op: OperatorSpec
    s_l: LowerOperatorSpec
    delta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "w_diag", as_tuple(self.w_diag))
        object.__setattr__(self, "w_vec", as_tuple(self.w_vec))
        if len(self.w_diag) != self.op.n or len(self.w_vec) != self.op.n:
            raise DomainError("w_diag and w_vec must have length n")
        if self.delta <= 0:
            raise DomainError("delta must be positive")
        if not cone_contains(ConeSpec("garding", self.op.n, self.op.k), self.w_diag):
            raise DomainError("w_diag must lie in Gamma_k")

    @property
    def beta(self):
        return 1.0 / (self.op.k - self.s_l.l)


def _contract(mat, vec):
    return float(sum(mat[p][q] * vec[p] * vec[q] for p in range(len(vec)) for q in range(len(vec))))


def guan_inequality_check(inp):
    """LHS - RHS of the two quotient-concavity inequalities at one instance.

    Contractions are specialized to a diagonal curvature tensor and a single
    derivative direction (only the diagonal derivative components enter).
    Returns (residual_1, residual_2); residual_1 >= 0 is the certified
    direction, residual_2 is reported for inspection.
    """
    w = inp.w_diag
    v = [float(t) for t in inp.w_vec]
    op = inp.op
    low = inp.s_l.as_operator()
    beta = inp.beta
    delta = float(inp.delta)

    qv = float(q_eval(op, w))
    sv = float(q_eval(low, w))
    if qv == 0.0 or sv == 0.0:
        raise SingularityError("Q(W) or S_l(W) vanishes")
    a_q = _contract(q_hess(op, w), v)
    a_s = _contract(q_hess(low, w), v)
    dq = float(sum(g * t for g, t in zip(q_grad(op, w), v)))
    ds = float(sum(g * t for g, t in zip(q_grad(low, w), v)))
    gq = dq / qv
    gs = ds / sv

    lhs1 = -a_q / qv + a_s / sv
    rhs1 = (gq - gs) * ((beta - 1.0) * gq - (beta + 1.0) * gs)
    lhs2 = -a_q + (1.0 - beta + beta / delta) * dq * dq / qv
    rhs2 = qv * (beta + 1.0 - delta * beta) * gs * gs - (qv / sv) * a_s
    return lhs1 - rhs1, lhs2 - rhs2


def guan_scan(op, s_l, trials, seed, delta=1.0, tol=1e-9, w_scale=1.0):
    """Randomized scan of the first quotient-concavity inequality.

    Samples W in Gamma_k and normal derivative vectors; worst_value is the
    minimum of residual_1 / (1 + |lhs| + |rhs|).  The second inequality's
    worst normalized residual is reported in details, not asserted.
    """
    cone = ConeSpec("garding", op.n, op.k)
    worst1 = np.inf
    worst2 = np.inf
    witness = None
    extra = None
    streams = _TrialStreams(seed)
    for i in range(trials):
        rng = streams.at(i)
        w = _sample_one(cone, rng)
        if w is None:
            continue
        v = tuple(rng.normal(size=op.n) * w_scale * (1.0 + max(abs(t) for t in w)))
        inp = GuanCheckInput(w_diag=w, w_vec=v, op=op, s_l=s_l, delta=delta)
        r1, r2 = guan_inequality_check(inp)
        qv = float(q_eval(op, w))
        sv = float(q_eval(s_l.as_operator(), w))
        a_q = _contract(q_hess(op, w), list(v))
        scale1 = 1.0 + abs(a_q / qv) + abs(r1)
        n1 = r1 / scale1
        n2 = r2 / (1.0 + abs(a_q) + abs(r2) + qv * qv / max(sv, 1e-300))
        if n1 < worst1:
            worst1 = n1
            witness = w
            extra = {"w_vec": v, "delta": delta}
        worst2 = min(worst2, n2)
    return VerificationReport(
        passed=bool(worst1 >= -tol),
        trials=trials,
        worst_value=float(worst1),
        seed=seed,
        witness=witness,
        witness_extra=extra,
        details={"second_inequality_worst": float(worst2), "delta": delta},
    )
