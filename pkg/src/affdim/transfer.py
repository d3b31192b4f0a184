"""Truncated matrices of the weighted composition operator.

For a generator ``A = [[a, b], [c, d]]`` the projective action on first
coordinates of ``(z, 1 - z)`` and its normalising weight are

    phi_A(z) = ((a - b) z + b) / w_A(z),    w_A(z) = (a + c - b - d) z + b + d.

In the scaled coordinate ``x = 2(z - 1/2)`` the composition part becomes
``u_A(x) = 2 phi_A - 1`` and the operator sends the monomial ``x^k`` to
``sum_A psi_{A,s} u_A^k``; column ``k`` of the truncated matrix is the
coefficient vector of that series.
"""

from __future__ import annotations

import cmath
import hashlib
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import toeplitz

from .ifs_model import IfsSystem, Mat2
from .series import PowerSeries, series_log, series_mul, series_pow

# Weak form of the disc-inclusion hypothesis: scalar maps send D onto itself
# (margin exactly 0) and are still served, with a degeneracy warning upstream.
DISC_SLACK = 1e-12


class OmegaViolation(ValueError):
    """A generator violates one of the hypotheses the operator needs."""

    def __init__(self, condition: str, index: int | None, margin: float, msg: str = ""):
        self.condition = condition
        self.index = index
        self.margin = margin
        where = "" if index is None else f"map {index}: "
        super().__init__(msg or f"{where}condition ({condition}) violated, margin {margin:.3e}")


@dataclass(frozen=True)
class MobiusData:
    """Affine pieces of ``phi_A`` in the ``x`` coordinate.

    ``num0 + num1 x`` is the numerator ``(a - b) z + b`` and ``den0 + den1 x``
    is ``w_A(z)``, both with ``z = 1/2 + x/2``.
    """

    num0: complex
    num1: complex
    den0: complex
    den1: complex

    @property
    def u_coeffs(self) -> tuple:
        """``(p, q, r, m)`` with ``u_A(x) = (p + q x) / (r + m x)``."""
        return (2 * self.num0 - self.den0, 2 * self.num1 - self.den1, self.den0, self.den1)

    def w(self, x):
        return self.den0 + self.den1 * x

    def u(self, x):
        p, q, r, m = self.u_coeffs
        return (p + q * x) / (r + m * x)

    @property
    def weight_margin(self) -> float:
        """``min Re w_A`` over the closed disc."""
        return float(np.real(self.den0) - abs(self.den1))

    def image_disc(self) -> tuple:
        """Centre and radius (``x`` coordinates) of ``u_A`` applied to the closed unit disc."""
        p, q, r, m = self.u_coeffs
        denom = abs(r) ** 2 - abs(m) ** 2
        if denom <= 0:
            return complex(np.nan), math.inf
        centre = (p * np.conj(r) - q * np.conj(m)) / denom
        radius = abs(q * r - p * m) / denom
        return complex(centre), float(radius)

    @property
    def disc_margin(self) -> float:
        """Gap (``z`` units) between ``phi_A(closed D)`` and the boundary of ``D``."""
        centre, radius = self.image_disc()
        if not math.isfinite(radius):
            return -math.inf
        return 0.5 * (1.0 - abs(centre) - radius)


def mobius_data(A: Mat2, check: bool = True) -> MobiusData:
    a, b, c, d = A.entries
    data = MobiusData(
        num0=(a + b) / 2, num1=(a - b) / 2,
        den0=(a + b + c + d) / 2, den1=(a + c - b - d) / 2,
    )
    if check and not data.weight_margin > 0:
        raise OmegaViolation("iii", None, data.weight_margin,
                             "w_A does not map the disc into the right half plane")
    return data


def signed_det(A: Mat2):
    """``det A`` or ``-det A``, whichever has positive real part.

    Equals ``|det A|`` for real matrices and stays analytic under small
    complex perturbations.
    """
    det = A.det
    return det if np.real(det) > 0 else -det


def _as_scalar(x):
    return complex(x) if isinstance(x, complex) or np.iscomplexobj(x) else float(x)


def _w_series(data: MobiusData, N: int) -> PowerSeries:
    return PowerSeries.affine(_as_scalar(data.den0), _as_scalar(data.den1), N)


def _checked(A: Mat2, index: int | None = None) -> MobiusData:
    data = mobius_data(A, check=False)
    if not data.weight_margin > 0:
        raise OmegaViolation("iii", index, data.weight_margin)
    if data.disc_margin < -DISC_SLACK:
        raise OmegaViolation("ii", index, data.disc_margin)
    return data


def phi_series(A: Mat2, N: int) -> PowerSeries:
    """Order-``N`` series of ``u_A(x) = 2(phi_A(z) - 1/2)``."""
    data = _checked(A)
    p, q, r, m = data.u_coeffs
    num = PowerSeries.affine(_as_scalar(p), _as_scalar(q), N)
    return series_mul(num, series_pow(_w_series(data, N), -1))


def _branch(s) -> str:
    return "low" if np.real(s) <= 1 else "high"


def weight_series(A: Mat2, s, N: int, branch: str | None = None) -> PowerSeries:
    """The weight ``psi_{A,s}`` as an order-``N`` series.

    ``w_A^s`` for ``s <= 1``; ``w_A^(2-s) |det A|^(s-1)`` for ``s > 1``.
    ``branch`` forces one of the two formulas.
    """
    if not 0 <= np.real(s) <= 2:
        raise ValueError(f"s = {s} outside [0, 2]")
    data = mobius_data(A)
    w = _w_series(data, N)
    branch = branch or _branch(s)
    if branch == "low":
        return series_pow(w, s)
    det = signed_det(A)
    if np.iscomplexobj(det) or isinstance(s, complex):
        factor = cmath.exp((s - 1) * cmath.log(det))
    else:
        factor = det ** (s - 1)
    return series_pow(w, 2 - s) * factor


def weight_s_derivative_series(A: Mat2, s, N: int, branch: str | None = None) -> PowerSeries:
    """Exact ``d psi_{A,s} / ds``: ``log(w) psi`` or ``(log|det| - log w) psi``."""
    psi = weight_series(A, s, N, branch)
    logw = series_log(_w_series(mobius_data(A), N))
    branch = branch or _branch(s)
    if branch == "low":
        return series_mul(logw, psi)
    det = signed_det(A)
    logdet = cmath.log(det) if np.iscomplexobj(det) else math.log(det)
    return series_mul(logdet - logw, psi)


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    entries: np.ndarray
    order: int
    s: complex
    branch: str
    system_digest: str


def system_digest(system: IfsSystem) -> str:
    return hashlib.sha1(repr(tuple(system.params.tolist())).encode()).hexdigest()[:16]


@lru_cache(maxsize=256)
def _composition_matrices(params: tuple, N: int) -> tuple:
    """Per-generator matrices whose column ``k`` holds the coefficients of ``u_A^k``."""
    mats = []
    for k in range(len(params) // 4):
        A = Mat2(*params[4 * k: 4 * k + 4])
        try:
            u = phi_series(A, N).coeffs
        except OmegaViolation as exc:
            raise OmegaViolation(exc.condition, k, exc.margin) from None
        U = np.zeros((N, N), dtype=u.dtype)
        col = np.zeros(N, dtype=u.dtype)
        col[0] = 1.0
        U[:, 0] = col
        for j in range(1, N):
            col = np.convolve(col, u)[:N]
            U[:, j] = col
        U.setflags(write=False)
        mats.append(U)
    return tuple(mats)


def _multiplication_matrix(coeffs: np.ndarray) -> np.ndarray:
    # multiplication by a series is lower-triangular Toeplitz in the monomial basis
    return toeplitz(coeffs, np.zeros_like(coeffs))


def _assemble(system: IfsSystem, N: int, weight_fn) -> np.ndarray:
    comps = _composition_matrices(tuple(system.params.tolist()), N)
    M = None
    for k, (A, U) in enumerate(zip(system.maps, comps)):
        try:
            psi = weight_fn(A).coeffs
        except OmegaViolation as exc:
            raise OmegaViolation(exc.condition, k, exc.margin) from None
        term = _multiplication_matrix(psi) @ U
        M = term if M is None else M + term
    return M


def assemble_operator(system: IfsSystem, s, N: int, branch: str | None = None) -> TruncatedOperator:
    """Order-``N`` matrix of the transfer operator at ``s``."""
    if N < 1:
        raise ValueError("order must be positive")
    branch = branch or _branch(s)
    M = _assemble(system, N, lambda A: weight_series(A, s, N, branch))
    return TruncatedOperator(M, N, s, branch, system_digest(system))


def assemble_operator_s_derivative(system: IfsSystem, s, N: int,
                                   branch: str | None = None) -> np.ndarray:
    """Entrywise ``d/ds`` of :func:`assemble_operator`; composition parts do not depend on ``s``."""
    branch = branch or _branch(s)
    return _assemble(system, N, lambda A: weight_s_derivative_series(A, s, N, branch))


def psi_value(A: Mat2, s, x, branch: str | None = None):
    """Pointwise ``psi_{A,s}(x)`` from the closed form (no series)."""
    data = mobius_data(A, check=False)
    w = data.w(np.asarray(x))
    branch = branch or _branch(s)
    if branch == "low":
        return w ** s
    return w ** (2 - s) * signed_det(A) ** (s - 1)
