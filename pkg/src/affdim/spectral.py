"""Dominant eigendata of truncated transfer operators."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .ifs_model import IfsSystem
from .series import eval_poly
from .transfer import assemble_operator

EIG_TOL = 1e-14


class SpectralWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class SpectralResult:
    lambda1: complex
    right_vec: np.ndarray
    left_vec: np.ndarray
    gap: Optional[float] = None
    order_used: Optional[int] = None
    truncation_err: Optional[float] = None
    iterations: int = 0
    converged: bool = True
    flags: tuple = field(default_factory=tuple)

    @property
    def value(self) -> float:
        """``lambda1`` as a float when it is real (the usual case)."""
        return float(np.real(self.lambda1))


def _normalise(v: np.ndarray) -> np.ndarray:
    # scale by the entry of largest modulus: keeps the iteration analytic in the data
    return v / v[np.argmax(np.abs(v))]


def _power(M: np.ndarray, tol: float, max_iter: int, mnorm: float):
    v = np.ones(M.shape[0], dtype=M.dtype)
    lam = 0.0
    for it in range(1, max_iter + 1):
        y = M @ v
        lam = (v @ y) / (v @ v)
        resid = np.max(np.abs(y - lam * v))
        if resid <= tol * mnorm * np.max(np.abs(v)):
            return lam, _normalise(y), it, True
        if not np.any(y):
            return 0.0, v, it, True
        v = _normalise(y)
    return lam, v, max_iter, False


def dominant_eig(M: np.ndarray, tol: float = EIG_TOL, max_iter: int = 100_000) -> SpectralResult:
    """Power iteration from the all-ones vector, with the transpose for the left vector.

    The returned eigenvalue is the two-sided quotient ``l.M.r / l.r``, which is
    second order accurate in the eigenvector error.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("dominant_eig needs a square matrix")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    if tol <= 0:
        raise ValueError("tol must be positive")
    mnorm = float(np.max(np.sum(np.abs(M), axis=1))) or 1.0
    lam_r, r, it_r, ok_r = _power(M, tol, max_iter, mnorm)
    lam_l, l, it_l, ok_l = _power(M.T, tol, max_iter, mnorm)
    denom = l @ r
    lam = (l @ (M @ r)) / denom if denom != 0 else lam_r
    converged = ok_r and ok_l
    flags = ()
    if not converged:
        warnings.warn(f"power iteration did not converge in {max_iter} steps", SpectralWarning)
        flags = ("non_converged",)
    if np.iscomplexobj(lam) and not np.iscomplexobj(M):
        lam = lam.real
    return SpectralResult(lam.item() if hasattr(lam, "item") else lam, r, l,
                          iterations=max(it_r, it_l), converged=converged, flags=flags)


def spectral_gap_estimate(M: np.ndarray, result: SpectralResult,
                          max_iter: int = 5000, window: int = 40) -> float:
    """``|lambda_2| / |lambda_1|`` after deflating the dominant rank-one part."""
    M = np.asarray(M)
    lam, r, l = result.lambda1, result.right_vec, result.left_vec
    if lam == 0:
        return 1.0
    M2 = M - lam * np.outer(r, l) / (l @ r)
    rng = np.random.default_rng(12345)
    v = rng.standard_normal(M.shape[0]).astype(M2.dtype)
    v /= np.linalg.norm(v)
    logs = []
    est_prev = None
    for it in range(max_iter):
        y = M2 @ v
        nrm = np.linalg.norm(y)
        if nrm == 0:
            return 0.0
        logs.append(np.log(nrm))
        v = y / nrm
        if len(logs) >= 2 * window and len(logs) % window == 0:
            est = float(np.exp(np.mean(logs[-window:])))
            if est_prev is not None and abs(est - est_prev) <= 1e-8 * max(est, 1e-300):
                break
            est_prev = est
    est = float(np.exp(np.mean(logs[-window:]))) if len(logs) >= window else \
        float(np.exp(np.mean(logs)))
    return float(min(max(est / abs(lam), 0.0), 1.0))


def order_ladder(max_order: int, start: int = 8) -> list:
    orders, N = [], start
    while N <= max_order:
        orders.append(N)
        N *= 2
    return orders


def adaptive_lambda1(system: IfsSystem, s, tol: float = 1e-12, max_order: int = 256,
                     hull: Optional[tuple] = None, eig_tol: float = EIG_TOL,
                     branch: Optional[str] = None, with_gap: bool = True) -> SpectralResult:
    """Leading eigenvalue on the doubling ladder ``N = 8, 16, ...``.

    Stops at the first order whose eigenvalue differs from the previous level's
    by less than ``tol``. The right vector is normalised to 1 at the midpoint
    of ``hull`` (an interval in ``z`` containing the projective attractor).
    """
    prev = None
    res = None
    converged = False
    err = None
    N = None
    orders = order_ladder(max_order)
    if not orders:
        raise ValueError("max_order must be at least 8")
    for N in orders:
        M = assemble_operator(system, s, N, branch=branch).entries
        res = dominant_eig(M, tol=eig_tol)
        if prev is not None:
            err = abs(res.lambda1 - prev.lambda1)
            if err < tol:
                converged = True
                break
        prev = res
    flags = list(res.flags)
    if not converged:
        warnings.warn(f"truncation ladder reached N={N} without meeting tol={tol:g}",
                      SpectralWarning)
        flags.append("truncation_not_converged")
    gap = spectral_gap_estimate(M, res) if with_gap else None
    if gap is not None and gap >= 1 - 1e-9:
        flags.append("degenerate_gap")
    x_mid = 0.0 if hull is None else 2 * (0.5 * (hull[0] + hull[1]) - 0.5)
    h_mid = eval_poly(res.right_vec, x_mid)
    right = res.right_vec / h_mid if h_mid != 0 else res.right_vec
    return replace(res, right_vec=right, gap=gap, order_used=N, truncation_err=err,
                   converged=converged and res.converged, flags=tuple(flags))
