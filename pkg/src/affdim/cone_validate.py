"""Checks for the standing hypotheses: disc conditions, irreducibility, cones, contraction."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ifs_model import IfsSystem, Mat2, conjugate_system, op_norm_batch
from .transfer import mobius_data

PROPORTIONAL_TOL = 1e-12
INVARIANCE_MARGIN = 1e-9
WORD_CAP = 10 ** 7


@dataclass(frozen=True)
class OmegaReport:
    cond_i: bool
    cond_ii: bool
    cond_iii: bool
    cond_iv: bool
    margins: tuple
    per_map_detail: tuple = ()

    @property
    def all_ok(self) -> bool:
        return self.cond_i and self.cond_ii and self.cond_iii and self.cond_iv

    def failing(self) -> list:
        names = ("i", "ii", "iii", "iv")
        flags = (self.cond_i, self.cond_ii, self.cond_iii, self.cond_iv)
        return [n for n, ok in zip(names, flags) if not ok]


@dataclass(frozen=True)
class ConeResult:
    status: str  # already_positive | conjugated | failed | indeterminate
    basis: Optional[Mat2] = None
    direction_arc: Optional[tuple] = None
    epsilon_gamma: Optional[float] = None
    detail: str = ""


@dataclass(frozen=True)
class ContractionCertificate:
    certified: bool
    word_length: int
    bound: float
    history: tuple = ()


@dataclass(frozen=True)
class GammaHull:
    lo: float
    hi: float
    epsilon: float
    depth: int

    @property
    def degenerate(self) -> bool:
        return self.epsilon >= 1

    @property
    def interval(self) -> tuple:
        return (self.lo, self.hi)

    def grid(self, n: int = 100) -> np.ndarray:
        return np.linspace(self.lo, self.hi, n)


# ---------------------------------------------------------------------------
# the four disc conditions


def _proportionality(A: Mat2, B: Mat2) -> float:
    """Sine of the angle between the entry vectors; 0 iff the Mobius maps coincide."""
    u = np.array(A.entries, dtype=complex)
    v = np.array(B.entries, dtype=complex)
    # Lagrange identity: the 2x2 minors avoid the cancellation in sqrt(1 - cos^2)
    wedge = math.sqrt(sum(abs(u[i] * v[j] - u[j] * v[i]) ** 2
                          for i, j in itertools.combinations(range(4), 2)))
    return float(wedge / (np.linalg.norm(u) * np.linalg.norm(v)))


def check_omega(system: IfsSystem) -> OmegaReport:
    """Evaluate conditions (i)-(iv) with their margins.

    The disc-image condition is decided exactly: ``u_A`` is a Mobius map whose
    pole lies outside the closed disc once (iii) holds, so the image of the
    disc is a disc with closed-form centre and radius. For positive matrices
    its real diameter is ``[b/(b+d), a/(a+c)]``.
    """
    details = []
    m_i = m_ii = m_iii = math.inf
    for k, A in enumerate(system.maps):
        data = mobius_data(A, check=False)
        det_re = float(np.real(A.det))
        wm = data.weight_margin
        dm = data.disc_margin if wm > 0 else -math.inf
        centre, radius = data.image_disc() if wm > 0 else (complex(np.nan), math.inf)
        details.append({
            "index": k,
            "det": det_re,
            "weight_margin": wm,
            "disc_margin": dm,
            "image_centre_z": 0.5 + 0.5 * centre.real if wm > 0 else None,
            "image_radius_z": 0.5 * radius if wm > 0 else None,
        })
        m_i = min(m_i, abs(det_re))
        m_ii = min(m_ii, dm)
        m_iii = min(m_iii, wm)
    m_iv = 0.0
    for A, B in itertools.combinations(system.maps, 2):
        m_iv = max(m_iv, _proportionality(A, B))
    cond_i = m_i > 0
    cond_ii = m_ii > 0
    cond_iii = m_iii > 0
    cond_iv = m_iv > PROPORTIONAL_TOL
    margins = tuple(max(x, 0.0) for x in (m_i, m_ii, m_iii, m_iv))
    return OmegaReport(cond_i, cond_ii, cond_iii, cond_iv, margins, tuple(details))


# ---------------------------------------------------------------------------
# irreducibility


def _real_eigendirections(A: np.ndarray) -> list:
    tr = A[0, 0] + A[1, 1]
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    disc = tr * tr - 4 * det
    scale = max(1.0, tr * tr)
    if disc < -1e-14 * scale:
        return []
    disc = max(disc, 0.0)
    dirs = []
    for lam in {(tr + math.sqrt(disc)) / 2, (tr - math.sqrt(disc)) / 2}:
        B = A - lam * np.eye(2)
        # null vector of B from whichever row is larger
        r = B[0] if np.linalg.norm(B[0]) >= np.linalg.norm(B[1]) else B[1]
        v = np.array([-r[1], r[0]])
        n = np.linalg.norm(v)
        if n > 0:
            dirs.append(v / n)
    return dirs


def _is_scalar(A: np.ndarray, tol: float = 1e-12) -> bool:
    s = np.max(np.abs(A))
    return abs(A[0, 1]) <= tol * s and abs(A[1, 0]) <= tol * s and abs(A[0, 0] - A[1, 1]) <= tol * s


def _is_eigendirection(A: np.ndarray, v: np.ndarray, tol: float = 1e-10) -> bool:
    Av = A @ v
    cross = Av[0] * v[1] - Av[1] * v[0]
    return abs(cross) <= tol * np.linalg.norm(A, 2)


def check_irreducible(system: IfsSystem) -> bool:
    """True iff no line through the origin is invariant under every map."""
    mats = [np.real(np.asarray(m.array, dtype=complex)) for m in system.maps]
    pivot = next((A for A in mats if not _is_scalar(A)), None)
    if pivot is None:
        return False
    for v in _real_eigendirections(pivot):
        if all(_is_eigendirection(A, v) for A in mats):
            return False
    return True


# ---------------------------------------------------------------------------
# invariant cones


def _angle(v: np.ndarray) -> float:
    return math.atan2(v[1], v[0]) % math.pi


def _dominant_direction(A: np.ndarray) -> Optional[float]:
    w, V = np.linalg.eig(A)
    if np.any(np.abs(np.imag(w)) > 1e-12 * np.max(np.abs(w))):
        return None
    w = np.real(w)
    i = int(np.argmax(np.abs(w)))
    if abs(abs(w[0]) - abs(w[1])) <= 1e-12 * abs(w[i]):
        return None
    return _angle(np.real(V[:, i]))


def _enclosing_arc(angles: list) -> tuple:
    """Smallest arc of the projective circle (length pi) containing all angles."""
    a = sorted(angles)
    gaps = [(a[(k + 1) % len(a)] - a[k]) % math.pi for k in range(len(a))]
    if len(a) == 1:
        return a[0], a[0]
    k = int(np.argmax(gaps))
    start = a[(k + 1) % len(a)]
    end = a[k]
    if end < start:
        end += math.pi
    return start, end


def _cone_basis(lo: float, hi: float) -> Mat2:
    v1 = np.array([math.cos(lo), math.sin(lo)])
    v2 = np.array([math.cos(hi), math.sin(hi)])
    return Mat2.from_array(np.linalg.inv(np.column_stack([v1, v2])))


def _strictly_invariant(mats: list, B: Mat2, margin: float) -> bool:
    Barr = B.array
    Binv = np.linalg.inv(Barr)
    for A in mats:
        C = Barr @ A @ Binv
        if not np.all(C > margin * np.max(np.abs(C))):
            return False
    return True


def _positive_arc(system: IfsSystem) -> tuple:
    angles = []
    for A in system.maps:
        arr = np.real(np.asarray(A.array, dtype=complex))
        angles += [math.atan2(arr[1, 0], arr[0, 0]), math.atan2(arr[1, 1], arr[0, 1])]
    return min(angles), max(angles)


def _epsilon_from_arc(lo: float, hi: float) -> float:
    xs = [math.cos(t) / (math.cos(t) + math.sin(t)) for t in (lo, hi)]
    return max(abs(2 * x - 1) for x in xs)


def find_invariant_cone(system: IfsSystem, max_depth: int = 6,
                        margin: float = INVARIANCE_MARGIN) -> ConeResult:
    """Look for a common strictly invariant cone and a basis making every map positive.

    Dominant eigendirections of all products up to ``max_depth`` are hulled
    into a projective arc, which is inflated and tested for strict invariance.
    This is a heuristic: ``indeterminate`` means nothing was found, not that
    no cone exists.
    """
    if all(m.is_positive() for m in system.maps):
        lo, hi = _positive_arc(system)
        return ConeResult("already_positive", None, (lo, hi), _epsilon_from_arc(lo, hi))

    mats = [np.real(np.asarray(m.array, dtype=complex)) for m in system.maps]
    angles = []
    prods = [np.eye(2)]
    last_detail = "no words examined"
    for depth in range(1, max_depth + 1):
        prods = [P @ A for P in prods for A in mats]
        for P in prods:
            theta = _dominant_direction(P)
            if theta is None:
                return ConeResult("failed", detail=f"a word of length {depth} has no real "
                                                   "simple dominant eigendirection")
            angles.append(theta)
        lo, hi = _enclosing_arc(angles)
        for inflate in (0.01, 0.05, 0.25):
            pad = max(inflate * (hi - lo), inflate * 1e-2)
            a, b = lo - pad, hi + pad
            if b - a >= math.pi:
                return ConeResult("failed", detail="eigendirections fill the projective line")
            B = _cone_basis(a, b)
            if _strictly_invariant(mats, B, margin):
                conj = conjugate_system(system, B)
                hull = gamma_hull(conj, depth=24)
                return ConeResult("conjugated", B, (a % math.pi, b % math.pi),
                                  hull.epsilon, detail=f"depth {depth}, inflation {inflate}")
        last_detail = f"inflated arc not invariant at depth {depth}"
        if len(prods) > 4096:
            break
    return ConeResult("indeterminate", detail=last_detail)


# ---------------------------------------------------------------------------
# contraction


def _word_products(mats: np.ndarray, n: int) -> np.ndarray:
    prods = mats
    for _ in range(n - 1):
        prods = np.einsum("pij,qjk->pqik", prods, mats).reshape(-1, 2, 2)
    return prods


def estimate_jsr_upper(system: IfsSystem, n_max: int = 10) -> ContractionCertificate:
    """Upper bounds ``max_w ||A_w||^(1/n)`` on the joint spectral radius, n = 1..n_max."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    mats = np.real(np.array([np.asarray(m.array, dtype=complex) for m in system.maps]))
    m = len(mats)
    history = []
    best, best_n = math.inf, 1
    for n in range(1, n_max + 1):
        if m ** n > WORD_CAP:
            break
        bound = float(np.max(op_norm_batch(_word_products(mats, n)))) ** (1.0 / n)
        history.append(bound)
        if bound < best:
            best, best_n = bound, n
        if bound < 1:
            return ContractionCertificate(True, n, bound, tuple(history))
    return ContractionCertificate(False, best_n, best, tuple(history))


# ---------------------------------------------------------------------------
# projective attractor


class GammaHullError(ValueError):
    pass


def _interval_map(A: Mat2):
    a, b, c, d = (float(np.real(x)) for x in A.entries)
    # first coordinate of A (x, 1 - x), normalised
    return lambda x: ((a - b) * x + b) / ((a + c - b - d) * x + b + d)


def gamma_hull(system: IfsSystem, depth: int = 16) -> GammaHull:
    """Nested interval hulls of the projective attractor in ``z``.

    ``H_0 = [0, 1]`` and ``H_n`` is the hull of ``phi_A(H_{n-1})`` over the
    generators; each real Mobius map is monotone on [0, 1], so the endpoint
    images suffice (swapped for orientation-reversing maps).
    """
    funcs = []
    for k, A in enumerate(system.maps):
        a, b, c, d = (float(np.real(x)) for x in A.entries)
        if not (a + c > 0 and b + d > 0):
            raise GammaHullError(f"map {k}: weight not positive on [0, 1]")
        lo_img, hi_img = sorted((b / (b + d), a / (a + c)))
        if lo_img < -1e-15 or hi_img > 1 + 1e-15:
            raise GammaHullError(f"map {k}: does not map [0, 1] into itself")
        funcs.append(_interval_map(A))
    lo, hi = 0.0, 1.0
    for _ in range(depth):
        ends = [f(x) for f in funcs for x in (lo, hi)]
        nlo, nhi = max(min(ends), lo), min(max(ends), hi)
        lo, hi = nlo, nhi
    eps = max(abs(2 * lo - 1), abs(2 * hi - 1))
    return GammaHull(lo, hi, eps, depth)
