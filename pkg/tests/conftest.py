import math

import numpy as np
import pytest

from affdim.ifs_model import IfsSystem, Mat2

RHO_SYM = (0.5 + math.sqrt(0.05)) / 2  # Perron root of [[0.3,0.1],[0.1,0.2]]


def standard_two_map():
    return IfsSystem((Mat2(0.3, 0.1, 0.1, 0.2), Mat2(0.2, 0.05, 0.15, 0.25)), label="standard")


def golden_pair():
    return IfsSystem((Mat2(2, 1, 1, 1) * 0.25, Mat2(1, 1, 1, 2) * 0.25), label="golden")


def single_map():
    return IfsSystem((Mat2(0.3, 0.1, 0.1, 0.2),), label="single")


def scalar_pair():
    return IfsSystem((Mat2.diag(1 / 3, 1 / 3), Mat2.diag(1 / 3, 1 / 3)), label="thirds")


def random_positive_system(rng, n_maps=2, lo=0.05, hi=0.45):
    """Entrywise-positive system whose generators all have norm < 1."""
    while True:
        mats = tuple(Mat2(*rng.uniform(lo, hi, 4)) for _ in range(n_maps))
        if all(np.linalg.norm(m.array, 2) < 1 for m in mats) and \
                all(abs(m.det) > 1e-3 for m in mats):
            return IfsSystem(mats)


def random_conditioned_basis(rng, max_cond=10.0):
    while True:
        B = rng.normal(size=(2, 2))
        if np.linalg.cond(B) <= max_cond:
            return Mat2.from_array(B)


@pytest.fixture
def two_map():
    return standard_two_map()


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


def near_diagonal_pair():
    """Weakly mixing positive pair: wide projective hull, slowest truncation convergence here."""
    return IfsSystem((Mat2(0.45, 0.005, 0.01, 0.4), Mat2(0.4, 0.01, 0.005, 0.45)),
                     label="near-diagonal")


def doubling_decays(errs, scale, factor=4.0):
    """True when each doubling error is a ``factor`` below its predecessor or already at round-off.

    Errors at or below ``64 eps scale`` carry no information about the decay
    rate and count as converged.
    """
    floor = 64 * np.finfo(float).eps * abs(scale)
    return all(b <= a / factor or b <= floor for a, b in zip(errs, errs[1:]))


ACCEPTANCE_LINES = []


def record_criterion(number, title, ok, detail):
    """Print and keep one pass/fail line; the terminal summary repeats them all."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
