"""Sub-additive pressure, affinity dimension and derivative checks."""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .cone_validate import (GammaHullError, check_omega,
                            estimate_jsr_upper, find_invariant_cone, gamma_hull)
from .ifs_model import (IfsSystem, InvalidSystemError, Mat2, conjugate_system,
                        phi_s_batch)
from .spectral import (SpectralResult, SpectralWarning, adaptive_lambda1,
                       dominant_eig)
from .transfer import (DISC_SLACK, OmegaViolation, assemble_operator,
                       assemble_operator_s_derivative)

SEAM_DELTA = 1e-9
SEAM_WARN = 1e-6
WORD_CAP = 10 ** 7


class ValidationError(ValueError):
    """The system does not meet the hypotheses the spectral method needs."""

    def __init__(self, msg: str, condition: Optional[str] = None, report: Optional[dict] = None):
        super().__init__(msg)
        self.condition = condition
        self.report = report or {}


class NotContractingError(ValidationError):
    pass


@dataclass(frozen=True)
class PressureValue:
    s: float
    value: float
    method: str  # spectral | brute_force | closed_form_high_s
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DimensionResult:
    s0: float
    residual: float
    dP_ds: float
    branch: str
    warnings: tuple = ()
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SweepRow:
    param_index: int
    param_value: float
    s0: float
    residual: float
    order_used: int
    status: str


# ---------------------------------------------------------------------------
# preparation: make the system fit the operator's hypotheses


@dataclass(frozen=True)
class Prepared:
    system: IfsSystem          # the system the operator is built from (positive if conjugated)
    basis: Optional[Mat2]      # conjugating matrix, if one was needed
    hull: Optional[tuple]
    warnings: tuple

    def transform(self, other: IfsSystem) -> IfsSystem:
        """Apply the same change of basis to a (possibly perturbed) system."""
        return other if self.basis is None else conjugate_system(other, self.basis)


def _operator_ready(report) -> bool:
    return report.cond_i and report.cond_iii and all(
        d["disc_margin"] >= -DISC_SLACK for d in report.per_map_detail)


def prepare(system: IfsSystem, max_depth: int = 6) -> Prepared:
    """Check the disc conditions, conjugating into a positive basis when needed."""
    report = check_omega(system)
    basis = None
    op_system = system
    if not _operator_ready(report):
        cone = find_invariant_cone(system, max_depth=max_depth)
        if cone.status != "conjugated":
            failing = ",".join(report.failing())
            raise ValidationError(
                f"condition ({failing}) violated and no invariant cone found ({cone.status})",
                condition=failing, report={"cone": cone.status, "detail": cone.detail})
        basis = cone.basis
        op_system = conjugate_system(system, basis)
        report = check_omega(op_system)
        if not _operator_ready(report):
            raise ValidationError("conjugated system still violates the disc conditions",
                                  condition=",".join(report.failing()))
    notes = []
    if not report.cond_iv:
        notes.append("system reducible: all maps projectively equal, spectral gap degenerate")
    if not report.cond_ii:
        notes.append("disc condition holds only weakly (margin 0)")
    try:
        hull = gamma_hull(op_system).interval
    except GammaHullError:
        hull = None
    return Prepared(op_system, basis, hull, tuple(notes))


def _branch_for(s: float) -> str:
    return "low" if s <= 1 else "high"


def closed_form_high_s(system: IfsSystem, s: float) -> float:
    """Exact pressure for ``s >= 2``: ``sum_i |det A_i|^(s/2)``."""
    dets = np.abs([float(np.real(m.det)) for m in system.maps])
    return float(np.sum(dets ** (s / 2)))


# ---------------------------------------------------------------------------
# two routes to the pressure


def brute_force_pressure(system: IfsSystem, s: float, n: int) -> PressureValue:
    """``(sum over words of length n of phi^s(A_w))^(1/n)``.

    Words are split into a prefix and a suffix half whose partial products are
    each computed once and reused across all combinations.
    """
    if n < 1:
        raise ValueError("word length must be at least 1")
    m = len(system.maps)
    if m ** n > WORD_CAP:
        raise ValueError(f"{m}^{n} words exceeds the cap of {WORD_CAP}")
    mats = np.real(system.arrays().astype(complex))

    def products(k):
        prods = np.eye(2)[None]
        for _ in range(k):
            prods = np.einsum("pij,qjk->pqik", prods, mats).reshape(-1, 2, 2)
        return prods

    n_pre = n // 2
    pre, suf = products(n_pre), products(n - n_pre)
    total = 0.0
    chunk = max(1, 2 ** 18 // len(suf))
    for start in range(0, len(pre), chunk):
        block = np.einsum("pij,qjk->pqik", pre[start:start + chunk], suf)
        total += float(np.sum(phi_s_batch(block, s)))
    return PressureValue(s, total ** (1.0 / n), "brute_force", {"word_length": n})


def _spectral_at(prep: Prepared, s: float, tol: float, max_order: int,
                 branch: Optional[str] = None) -> SpectralResult:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SpectralWarning)
        return adaptive_lambda1(prep.system, s, tol=tol, max_order=max_order,
                                hull=prep.hull, branch=branch)


def _value_and_meta(prep: Prepared, s: float, tol: float, max_order: int):
    if abs(s - 1) <= SEAM_DELTA:
        lo = _spectral_at(prep, s, tol, max_order, "low")
        hi = _spectral_at(prep, s, tol, max_order, "high")
        val = 0.5 * (lo.value + hi.value)
        res = lo
        meta = {"seam": True}
    else:
        res = _spectral_at(prep, s, tol, max_order)
        val = res.value
        meta = {}
    meta.update(order=res.order_used, truncation_err=res.truncation_err, gap=res.gap,
                flags=list(res.flags) + list(prep.warnings))
    return val, res, meta


def spectral_pressure(system: IfsSystem, s: float, tol: float = 1e-12,
                      max_order: int = 256, prep: Optional[Prepared] = None) -> PressureValue:
    """Pressure as the leading eigenvalue of the transfer operator (closed form beyond 2)."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    if s > 2:
        return PressureValue(s, closed_form_high_s(system, s), "closed_form_high_s", {})
    prep = prep or prepare(system)
    val, _, meta = _value_and_meta(prep, s, tol, max_order)
    return PressureValue(s, val, "spectral", meta)


def pressure_at_order(prep: Prepared, s: float, N: int, branch: Optional[str] = None,
                      system: Optional[IfsSystem] = None) -> complex:
    """Leading eigenvalue at a fixed truncation order (no ladder)."""
    sysm = prep.system if system is None else system
    M = assemble_operator(sysm, s, N, branch=branch or _branch_for(np.real(s))).entries
    return dominant_eig(M).lambda1


# ---------------------------------------------------------------------------
# derivatives


def _perturbation(l: np.ndarray, dM: np.ndarray, r: np.ndarray) -> complex:
    return (l @ (dM @ r)) / (l @ r)


def _s_derivative(prep: Prepared, s: float, tol: float, max_order: int,
                  res: Optional[SpectralResult] = None) -> float:
    res = res or _spectral_at(prep, s, tol, max_order)
    dM = assemble_operator_s_derivative(prep.system, s, res.order_used, branch=_branch_for(s))
    return float(np.real(_perturbation(res.left_vec, dM, res.right_vec)))


def pressure_s_derivative(system: IfsSystem, s: float, tol: float = 1e-12,
                          max_order: int = 256, prep: Optional[Prepared] = None) -> float:
    """``dP/ds`` by first-order eigenvalue perturbation.

    At ``s = 1`` the left derivative is returned. Falls back to central
    differences (with a warning) when the spectral gap is degenerate.
    """
    if not 0 <= s <= 2:
        raise ValueError("s must lie in [0, 2]")
    prep = prep or prepare(system)
    res = _spectral_at(prep, s, tol, max_order)
    if "degenerate_gap" in res.flags:
        warnings.warn("degenerate spectral gap: using central differences", SpectralWarning)
        return central_difference_s_derivative(system, s, prep=prep, order=res.order_used)
    return _s_derivative(prep, s, tol, max_order, res)


def central_difference_s_derivative(system: IfsSystem, s: float, h: float = 1e-5,
                                    prep: Optional[Prepared] = None,
                                    order: Optional[int] = None, tol: float = 1e-12,
                                    max_order: int = 256) -> float:
    prep = prep or prepare(system)
    if order is None:
        order = _spectral_at(prep, s, tol, max_order).order_used
    br = _branch_for(s)
    up = pressure_at_order(prep, s + h, order, br)
    dn = pressure_at_order(prep, s - h, order, br)
    return float(np.real(up - dn) / (2 * h))


def complex_step_s_derivative(system: IfsSystem, s: float, h: float = 1e-12,
                              tol: float = 1e-12, max_order: int = 256,
                              prep: Optional[Prepared] = None) -> float:
    """``Im P(s + ih) / h`` through the complex pipeline."""
    prep = prep or prepare(system)
    res = adaptive_lambda1(prep.system, complex(s, h), tol=tol, max_order=max_order,
                           hull=prep.hull, branch=_branch_for(s), with_gap=False)
    return float(np.imag(res.lambda1) / h)


def _perturbed(system: IfsSystem, entry_index: int, delta) -> IfsSystem:
    t = system.params.astype(complex)
    if not 0 <= entry_index < t.size:
        raise IndexError(f"entry index {entry_index} outside [0, {t.size})")
    t[entry_index] += delta
    vals = [complex(x) if isinstance(delta, complex) else float(x.real) for x in t]
    return system.with_params(vals)


def _check_perturbed(sysm: IfsSystem) -> None:
    report = check_omega(sysm)
    if not _operator_ready(report):
        raise ValidationError(
            "perturbation leaves the admissible parameter region",
            condition=",".join(report.failing()),
            report={"margins": list(report.margins)})


def complex_step_t_derivative(system: IfsSystem, s: float, entry_index: int,
                              h: float = 1e-12, tol: float = 1e-12, max_order: int = 256,
                              prep: Optional[Prepared] = None) -> float:
    """``dP/dt_j`` as ``Im lambda_1(s, t + i h e_j) / h``.

    The entry index runs over ``(a, b, c, d)`` of map 0, then map 1, and so on,
    in the coordinates of ``system`` (before any conjugation).
    """
    if not 1e-30 <= h <= 1e-6:
        raise ValueError("complex step h must lie in [1e-30, 1e-6]")
    prep = prep or prepare(system)
    pert = prep.transform(_perturbed(system, entry_index, 1j * h))
    _check_perturbed(pert)
    res = adaptive_lambda1(pert, s, tol=tol, max_order=max_order, hull=prep.hull,
                           with_gap=False)
    return float(np.imag(res.lambda1) / h)


def central_difference_t_derivative(system: IfsSystem, s: float, entry_index: int,
                                    h: float = 1e-5, prep: Optional[Prepared] = None,
                                    order: Optional[int] = None, tol: float = 1e-12,
                                    max_order: int = 256) -> float:
    prep = prep or prepare(system)
    if order is None:
        order = _spectral_at(prep, s, tol, max_order).order_used
    vals = []
    for sign in (1, -1):
        pert = prep.transform(_perturbed(system, entry_index, sign * h))
        _check_perturbed(pert)
        vals.append(pressure_at_order(prep, s, order, system=pert))
    return float(np.real(vals[0] - vals[1]) / (2 * h))


def perturbation_t_derivative(system: IfsSystem, s: float, entry_index: int,
                              prep: Optional[Prepared] = None, tol: float = 1e-12,
                              max_order: int = 256) -> float:
    """``l . (dM/dt_j) . r / l . r``; ``dM/dt_j`` comes from a complex step on the assembly alone."""
    prep = prep or prepare(system)
    res = _spectral_at(prep, s, tol, max_order)
    h = 1e-20
    pert = prep.transform(_perturbed(system, entry_index, 1j * h))
    dM = np.imag(assemble_operator(pert, s, res.order_used).entries) / h
    return float(np.real(_perturbation(res.left_vec, dM, res.right_vec)))


def derivative(system: IfsSystem, s: float, wrt: str = "s", method: str = "perturbation",
               tol: float = 1e-12, max_order: int = 256) -> float:
    """Dispatch on ``wrt`` (``"s"`` or ``"t:<k>"``) and ``method``."""
    prep = prepare(system)
    if wrt == "s":
        if method == "perturbation":
            return pressure_s_derivative(system, s, tol, max_order, prep)
        if method == "complex-step":
            return complex_step_s_derivative(system, s, tol=tol, max_order=max_order, prep=prep)
        if method == "central":
            return central_difference_s_derivative(system, s, prep=prep, tol=tol,
                                                   max_order=max_order)
    elif wrt.startswith("t:"):
        k = int(wrt[2:])
        if method == "perturbation":
            return perturbation_t_derivative(system, s, k, prep, tol, max_order)
        if method == "complex-step":
            return complex_step_t_derivative(system, s, k, tol=tol, max_order=max_order,
                                             prep=prep)
        if method == "central":
            return central_difference_t_derivative(system, s, k, prep=prep, tol=tol,
                                                   max_order=max_order)
    else:
        raise ValueError(f"unknown derivative target {wrt!r}")
    raise ValueError(f"unknown derivative method {method!r}")


# ---------------------------------------------------------------------------
# the affinity dimension


def _high_s_root(system: IfsSystem, tol: float) -> tuple:
    dets = np.abs([float(np.real(m.det)) for m in system.maps])
    f = lambda s: float(np.sum(dets ** (s / 2))) - 1.0
    hi = 4.0
    while f(hi) > 0:
        hi *= 2
        if hi > 1e6:
            raise NotContractingError("determinants too large for a finite root")
    s0 = brentq(f, 2.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    dP = float(np.sum(dets ** (s0 / 2) * np.log(dets) / 2))
    return s0, abs(f(s0)), dP


def _safeguarded_newton(f_df, lo: float, hi: float, x0: float, tol: float,
                        max_iter: int = 100) -> tuple:
    """Newton on a decreasing function with ``f(lo) > 0 > f(hi)``; bisects when a step leaves the bracket."""
    x = x0
    fx, dfx = f_df(x)
    for _ in range(max_iter):
        if abs(fx) <= tol:
            break
        if fx > 0:
            lo = x
        else:
            hi = x
        if hi - lo <= 4e-16 * max(1.0, abs(x)):
            break
        step_ok = dfx < 0 and np.isfinite(dfx)
        x_new = x - fx / dfx if step_ok else 0.5 * (lo + hi)
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        x = x_new
        fx, dfx = f_df(x)
    return x, fx, dfx


def affinity_dimension(system: IfsSystem, tol: float = 1e-12, max_order: int = 256,
                       method: str = "spectral", word_len: int = 12,
                       check_contraction: bool = True) -> DimensionResult:
    """The unique ``s0`` with ``P(s0) = 1``.

    The root is bracketed by ``P(0) = #maps`` and ``P(2) = sum |det|``; when
    ``P(2) > 1`` it lies beyond 2 and is solved from the closed form.
    """
    notes = []
    if check_contraction:
        cert = estimate_jsr_upper(system, n_max=12)
        if not cert.certified:
            raise NotContractingError(
                f"contraction not certified (best bound {cert.bound:.6g} at n={cert.word_length})")
    m = len(system.maps)
    if m == 1:
        return DimensionResult(0.0, 0.0, float("nan"), "low",
                               ("single map: P(0) = 1, so s0 = 0",), {"method": method})
    p2 = closed_form_high_s(system, 2.0)
    if p2 >= 1:
        s0, resid, dP = _high_s_root(system, tol)
        return DimensionResult(s0, resid, dP, "closed_form_high_s",
                               ("root >= 2 used closed form",), {"method": "closed_form"})

    x0 = 2 * math.log(m) / (math.log(m) - math.log(p2))

    if method == "brute":
        g = lambda s: brute_force_pressure(system, s, word_len).value - 1.0
        s0 = brentq(g, 0.0, 2.0, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        h = 1e-6
        dP = (g(min(s0 + h, 2.0)) - g(max(s0 - h, 0.0))) / (min(s0 + h, 2.0) - max(s0 - h, 0.0))
        return DimensionResult(s0, abs(g(s0)), dP, _branch_for(s0), tuple(notes),
                               {"method": "brute", "word_length": word_len})
    if method != "spectral":
        raise ValueError(f"unknown method {method!r}")

    prep = prepare(system)
    notes.extend(prep.warnings)
    last = {}

    def f_df(s):
        val, res, meta = _value_and_meta(prep, s, tol * 0.1, max_order)
        if meta.get("seam"):
            dP = 0.5 * (_s_derivative(prep, s, tol, max_order)
                        + _s_derivative(prep, 1 + 2 * SEAM_DELTA, tol, max_order))
        else:
            dP = _s_derivative(prep, s, tol, max_order, res)
        last.update(meta)
        return val - 1.0, dP

    s0, fx, dP = _safeguarded_newton(f_df, 0.0, 2.0, min(max(x0, 0.05), 1.95), tol)
    if abs(s0 - 1) < SEAM_WARN:
        notes.append("root at s=1: analyticity is not guaranteed there")
    if abs(fx) > tol:
        notes.append(f"residual {abs(fx):.3e} above tolerance")
    return DimensionResult(s0, abs(fx), dP, _branch_for(s0), tuple(dict.fromkeys(notes)),
                           {"method": "spectral", "order": last.get("order"),
                            "gap": last.get("gap"),
                            "truncation_err": last.get("truncation_err")})


# ---------------------------------------------------------------------------
# parameter sweeps


def _sweep_row(base: IfsSystem, k: int, value: float, tol: float, max_order: int) -> SweepRow:
    try:
        t = base.params.astype(float)
        t[k] = value
        sysm = base.with_params(t.tolist())
        res = affinity_dimension(sysm, tol=tol, max_order=max_order)
    except (InvalidSystemError, ValidationError, OmegaViolation) as exc:
        return SweepRow(k, value, float("nan"), float("nan"), 0, f"failed: {exc}")
    status = "ok" if not res.warnings else "ok (" + "; ".join(res.warnings) + ")"
    return SweepRow(k, value, res.s0, res.residual, res.meta.get("order") or 0, status)


def default_threads() -> int:
    env = os.environ.get("AFFDIM_THREADS")
    if env:
        return max(1, int(env))
    return 1


def sweep(base: IfsSystem, entry_index: int, lo: float, hi: float, steps: int,
          tol: float = 1e-12, max_order: int = 256, threads: Optional[int] = None) -> list:
    """Affinity dimension along a one-parameter family ``t_k in [lo, hi]``."""
    if not 0 <= entry_index < 4 * len(base.maps):
        raise IndexError(f"entry index {entry_index} out of range")
    if steps < 1:
        raise ValueError("steps must be positive")
    grid = [lo] if lo == hi else np.linspace(min(lo, hi), max(lo, hi), steps).tolist()
    threads = threads or default_threads()
    work = lambda v: _sweep_row(base, entry_index, v, tol, max_order)
    if threads == 1:
        return [work(v) for v in grid]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, grid))
