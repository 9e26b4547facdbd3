"""Calculus of elementary symmetric polynomials.

Eigenvalue/curvature vectors are plain sequences (list, tuple or 1-d
ndarray).  Entries may be ints, floats or ``fractions.Fraction``; all
routines here use generic Python arithmetic, so results are exact whenever
the inputs are exact rationals.  No routine reorders its input.

``sigma_m`` conventions: sigma_0 = 1, and the recurrences treat sigma_m = 0
for m beyond the vector length.  The public ``elem_sym`` entry point
enforces 0 <= m <= n as a hard contract.
"""

import math
from math import comb

import numpy as np

from .errors import DegenerateInputError, DomainError

__all__ = [
    "elem_sym",
    "elem_sym_deleted",
    "sigma_all",
    "sigma_all_batch",
    "sigma_grad",
    "sigma_hess",
    "polarized_sigma",
    "newton_maclaurin_gap",
    "matrix_symfun_second_derivative",
    "delete_entries",
]


def as_tuple(lam):
    """Validate an eigenvalue vector and return it as a tuple."""
    values = tuple(lam)
    if len(values) < 1:
        raise DomainError("eigenvalue vector must have at least one entry")
    for x in values:
        if isinstance(x, (float, np.floating)) and not math.isfinite(x):
            raise DomainError(f"non-finite entry {x!r} in eigenvalue vector")
    return values


def sigma_all(lam, upto=None):
    """All sigma_0..sigma_upto of lam in one pass of the product recurrence.

    Expands prod_i (1 + t*lam_i); entry j of the result is sigma_j.  Cost
    O(n*upto), stable (no subtractions beyond those present in the data).
    """
    values = as_tuple(lam)
    n = len(values)
    m = n if upto is None else upto
    e = [1] + [0] * m
    for i, x in enumerate(values):
        for j in range(min(i + 1, m), 0, -1):
            e[j] = e[j] + x * e[j - 1]
    return e


def elem_sym(lam, m):
    """sigma_m(lam), the m-th elementary symmetric polynomial."""
    values = as_tuple(lam)
    n = len(values)
    if not 0 <= m <= n:
        raise DomainError(f"m={m} out of range 0..{n}")
    return sigma_all(values, m)[m]


def delete_entries(lam, omit):
    """Copy of lam with the 0-based indices in omit removed."""
    values = as_tuple(lam)
    n = len(values)
    omit = tuple(omit)
    seen = set()
    for i in omit:
        if not isinstance(i, (int, np.integer)) or not 0 <= i < n:
            raise DomainError(f"invalid index {i!r} for vector of length {n}")
        if i in seen:
            raise DomainError(f"repeated index {i} in omit set")
        seen.add(i)
    return tuple(x for i, x in enumerate(values) if i not in seen)


def elem_sym_deleted(lam, m, omit):
    """sigma_m(lam|omit): sigma_m of lam with the given entries removed."""
    rest = delete_entries(lam, omit)
    if not 0 <= m <= len(rest):
        raise DomainError(f"m={m} out of range 0..{len(rest)}")
    if len(rest) == 0:
        return 1 if m == 0 else 0
    return sigma_all(rest, m)[m]


def _sigmas_of(rest, upto):
    # sigma_0..sigma_upto of a possibly-empty tuple (sigma_0 = 1, overflow = 0)
    if not rest:
        return [1] + [0] * upto
    return sigma_all(rest, min(upto, len(rest))) + [0] * max(0, upto - len(rest))


def _deleted_sigmas(values, omit_idx, upto):
    rest = tuple(x for i, x in enumerate(values) if i != omit_idx)
    return _sigmas_of(rest, upto)


def sigma_grad(lam, k):
    """Gradient of sigma_k: component i is sigma_{k-1}(lam|i)."""
    values = as_tuple(lam)
    n = len(values)
    if not 1 <= k <= n:
        raise DomainError(f"k={k} out of range 1..{n}")
    return [_deleted_sigmas(values, i, k - 1)[k - 1] for i in range(n)]


def sigma_hess(lam, k):
    """Hessian of sigma_k: entry (p,q) is sigma_{k-2}(lam|pq) for p != q, 0 on the diagonal."""
    values = as_tuple(lam)
    n = len(values)
    if not 1 <= k <= n:
        raise DomainError(f"k={k} out of range 1..{n}")
    hess = [[0] * n for _ in range(n)]
    if k < 2:
        return hess
    for p in range(n):
        for q in range(p + 1, n):
            rest = tuple(x for i, x in enumerate(values) if i != p and i != q)
            v = _sigmas_of(rest, k - 2)[k - 2]
            hess[p][q] = v
            hess[q][p] = v
    return hess


def polarized_sigma(lam, mu, l, k):
    """Mixed form sigma_{l,k-l}(lam, mu): sum over disjoint index sets.

    Sums lam_I * mu_J over all disjoint pairs of index subsets with |I| = l
    and |J| = k - l.  With this (unit-constant) normalization the blend
    expansion holds exactly:

        sigma_k(t*lam + (1-t)*mu) = sum_l t^l (1-t)^(k-l) sigma_{l,k-l}(lam, mu)

    Computed as the coefficient of s^l u^(k-l) in prod_i (1 + s*lam_i + u*mu_i).
    """
    a = as_tuple(lam)
    b = as_tuple(mu)
    n = len(a)
    if len(b) != n:
        raise DomainError(f"dimension mismatch: {n} vs {len(b)}")
    if not (0 <= l <= k <= n):
        raise DomainError(f"need 0 <= l <= k <= n, got l={l}, k={k}, n={n}")
    r = k - l
    # table[p][q] = coefficient of s^p u^q, updated one factor at a time
    table = [[0] * (r + 1) for _ in range(l + 1)]
    table[0][0] = 1
    for i in range(n):
        ai, bi = a[i], b[i]
        for p in range(min(i + 1, l), -1, -1):
            for q in range(min(i + 1 - p, r), -1, -1):
                acc = 0
                if p > 0:
                    acc = acc + ai * table[p - 1][q]
                if q > 0:
                    acc = acc + bi * table[p][q - 1]
                if p or q:
                    table[p][q] = table[p][q] + acc
    return table[l][r]


def newton_maclaurin_gap(lam, k):
    """p_{k-1}^2 - p_k * p_{k-2} with p_m = sigma_m / C(n,m); >= 0 for all real lam."""
    values = as_tuple(lam)
    n = len(values)
    if not 2 <= k <= n:
        raise DomainError(f"k={k} out of range 2..{n}")
    e = sigma_all(values, k)
    exact = all(not isinstance(x, (float, np.floating)) for x in values)
    if exact:
        from fractions import Fraction

        p = [Fraction(e[m]) / comb(n, m) for m in range(k + 1)]
    else:
        p = [e[m] / comb(n, m) for m in range(k + 1)]
    return p[k - 1] * p[k - 1] - p[k] * p[k - 2]


def matrix_symfun_second_derivative(k, a_diag, b):
    """Second derivative of A -> sigma_k(eigenvalues(A)) at diagonal A in direction B.

    A is given by its diagonal (pairwise distinct entries required), B is a
    symmetric matrix.  Returns

        sum_{j,l} hess[j][l] B_jj B_ll
        + 2 sum_{j<l} (grad_j - grad_l)/(a_j - a_l) * B_jl^2

    with grad/hess the first and second derivatives of sigma_k.
    """
    values = as_tuple(a_diag)
    n = len(values)
    if not 1 <= k <= n:
        raise DomainError(f"k={k} out of range 1..{n}")
    rows = [list(row) for row in b]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise DomainError(f"direction matrix must be {n}x{n}")
    scale = max(1.0, max(abs(float(x)) for x in values))
    gap = min(
        abs(float(values[i]) - float(values[j]))
        for i in range(n)
        for j in range(i + 1, n)
    ) if n > 1 else math.inf
    if gap < 1e-8 * scale:
        raise DegenerateInputError(
            f"eigengap {gap:.3e} below 1e-8*scale; formula assumes distinct eigenvalues"
        )
    grad = sigma_grad(values, k)
    hess = sigma_hess(values, k)
    total = 0
    for j in range(n):
        for l in range(n):
            total = total + hess[j][l] * rows[j][j] * rows[l][l]
    for j in range(n):
        for l in range(j + 1, n):
            diff = (grad[j] - grad[l]) / (values[j] - values[l])
            total = total + 2 * diff * rows[j][l] * rows[j][l]
    return total


def sigma_all_batch(values, upto):
    """Vectorized sigma_0..sigma_upto along the last axis of an ndarray.

    values has shape (..., n); returns shape (..., upto+1), float dtype.
    """
    arr = np.asarray(values, dtype=float)
    n = arr.shape[-1]
    e = np.zeros(arr.shape[:-1] + (upto + 1,), dtype=float)
    e[..., 0] = 1.0
    for i in range(n):
        x = arr[..., i]
        for j in range(min(i + 1, upto), 0, -1):
            e[..., j] += x * e[..., j - 1]
    return e
