"""Chaos-game sampling of the self-affine attractor."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cone_validate import estimate_jsr_upper
from .ifs_model import IfsSystem, singular_values

BURN_IN = 100


@dataclass(frozen=True, eq=False)
class AttractorCloud:
    points: np.ndarray
    seed: int
    count: int


def invariant_radius(system: IfsSystem) -> float:
    """``max |b| / (1 - max alpha_1)``; infinite unless every map is a norm contraction."""
    amax = max(singular_values(m).alpha1 for m in system.maps)
    bmax = max(np.hypot(*b) for b in system.translations)
    return bmax / (1 - amax) if amax < 1 else float("inf")


def emit_attractor(system: IfsSystem, count: int, seed: int) -> AttractorCloud:
    """Random iteration of ``x -> A_i x + b_i`` from the origin, after a burn-in.

    Uses numpy's MT19937 bit generator so a given seed reproduces the same
    cloud on every platform.
    """
    if system.translations is None:
        raise ValueError("attractor sampling needs translations")
    if count < 0:
        raise ValueError("count must be nonnegative")
    cert = estimate_jsr_upper(system, n_max=12)
    if not cert.certified:
        raise ValueError(f"system not certified contracting (bound {cert.bound:.6g})")
    mats = np.real(system.arrays().astype(complex))
    shifts = np.array(system.translations, dtype=float)
    rng = np.random.Generator(np.random.MT19937(seed))
    choice = rng.integers(0, len(mats), size=BURN_IN + count)
    pts = np.empty((count, 2))
    x = np.zeros(2)
    for n, i in enumerate(choice):
        x = mats[i] @ x + shifts[i]
        if n >= BURN_IN:
            pts[n - BURN_IN] = x
    return AttractorCloud(pts, seed, count)
