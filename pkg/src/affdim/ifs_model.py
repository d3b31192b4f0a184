"""Planar affine IFS data types, singular values and the singular value function."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


class InvalidSystemError(ValueError):
    """Malformed or invalid IFS description."""


class DegenerateMatrixError(ValueError):
    """Raised when an operation needs an invertible matrix and gets a singular one."""


@dataclass(frozen=True)
class Mat2:
    """A 2x2 matrix ``[[a, b], [c, d]]``.

    Entries are normally real. Complex entries are tolerated so that the
    complex-step derivative can push a perturbed system through the pipeline.
    """

    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def from_array(cls, arr) -> "Mat2":
        arr = np.asarray(arr)
        if arr.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {arr.shape}")
        vals = [x.item() for x in arr.reshape(-1)]
        return cls(*vals)

    @classmethod
    def identity(cls) -> "Mat2":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def diag(cls, p, q) -> "Mat2":
        return cls(p, 0.0, 0.0, q)

    @property
    def entries(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    @property
    def array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    @property
    def is_real(self) -> bool:
        return all(not isinstance(x, complex) or x.imag == 0 for x in self.entries)

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __mul__(self, k) -> "Mat2":
        return Mat2(k * self.a, k * self.b, k * self.c, k * self.d)

    __rmul__ = __mul__

    def inverse(self) -> "Mat2":
        det = self.det
        if det == 0:
            raise DegenerateMatrixError("matrix is singular")
        return Mat2(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def is_positive(self) -> bool:
        """True when every entry is real and strictly positive."""
        return self.is_real and all(_re(x) > 0 for x in self.entries)


def _re(x) -> float:
    return x.real if isinstance(x, complex) else float(x)


@dataclass(frozen=True)
class SingularPair:
    alpha1: float
    alpha2: float


@dataclass(frozen=True)
class IfsSystem:
    """An ordered family of linear parts, with optional translations and basis."""

    maps: tuple
    translations: Optional[tuple] = None
    basis: Optional[Mat2] = None
    label: str = ""

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise InvalidSystemError("system needs at least one map")
        for i, m in enumerate(maps):
            if not isinstance(m, Mat2):
                raise InvalidSystemError(f"map {i} is not a Mat2")
            if m.det == 0:
                raise InvalidSystemError(f"map {i} singular")
        object.__setattr__(self, "maps", maps)
        if self.translations is not None:
            tr = tuple((float(t[0]), float(t[1])) for t in self.translations)
            if len(tr) != len(maps):
                raise InvalidSystemError(
                    f"translation count {len(tr)} does not match map count {len(maps)}"
                )
            object.__setattr__(self, "translations", tr)

    def __len__(self) -> int:
        return len(self.maps)

    @property
    def params(self) -> np.ndarray:
        """Flattened entries ``t`` (a, b, c, d of map 0, then map 1, ...)."""
        return np.array([x for m in self.maps for x in m.entries])

    @property
    def is_real(self) -> bool:
        return all(m.is_real for m in self.maps)

    def with_params(self, t: Sequence, label: Optional[str] = None) -> "IfsSystem":
        t = list(t)
        if len(t) != 4 * len(self.maps):
            raise ValueError("parameter vector has the wrong length")
        maps = tuple(Mat2(*t[4 * k: 4 * k + 4]) for k in range(len(self.maps)))
        return IfsSystem(maps, self.translations, self.basis,
                         self.label if label is None else label)

    def arrays(self) -> np.ndarray:
        """All linear parts stacked into an ``(m, 2, 2)`` array."""
        return np.array([m.array for m in self.maps])


# ---------------------------------------------------------------------------
# parsing / serialization


def _parse_matrix(obj, where: str) -> Mat2:
    try:
        rows = [[obj[0][0], obj[0][1]], [obj[1][0], obj[1][1]]]
        if len(obj) != 2 or len(obj[0]) != 2 or len(obj[1]) != 2:
            raise TypeError
    except (TypeError, IndexError, KeyError):
        raise InvalidSystemError(f"{where}: matrix must be [[a,b],[c,d]]") from None
    vals = []
    for x in (rows[0][0], rows[0][1], rows[1][0], rows[1][1]):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise InvalidSystemError(f"{where}: matrix entries must be numbers")
        x = float(x)
        if not math.isfinite(x):
            raise InvalidSystemError(f"{where}: matrix entries must be finite")
        vals.append(x)
    return Mat2(*vals)


def parse_system(text: str) -> IfsSystem:
    """Parse the JSON system description.

    Errors name the offending map index, e.g. ``"map 0 singular"``.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidSystemError(f"malformed document: {exc}") from None
    if not isinstance(doc, dict) or "maps" not in doc:
        raise InvalidSystemError("malformed document: top level must be an object with 'maps'")
    raw_maps = doc["maps"]
    if not isinstance(raw_maps, list) or not raw_maps:
        raise InvalidSystemError("malformed document: 'maps' must be a nonempty array")

    maps, translations = [], []
    for i, entry in enumerate(raw_maps):
        if not isinstance(entry, dict) or "matrix" not in entry:
            raise InvalidSystemError(f"map {i}: missing 'matrix'")
        m = _parse_matrix(entry["matrix"], f"map {i}")
        if m.det == 0:
            raise InvalidSystemError(f"map {i} singular")
        maps.append(m)
        if "translation" in entry:
            t = entry["translation"]
            if (not isinstance(t, list) or len(t) != 2
                    or not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                               and math.isfinite(x) for x in t)):
                raise InvalidSystemError(f"map {i}: translation must be [x, y]")
            translations.append((float(t[0]), float(t[1])))

    if translations and len(translations) != len(maps):
        missing = [i for i, e in enumerate(raw_maps) if "translation" not in e]
        raise InvalidSystemError(f"map {missing[0]}: translation missing (length mismatch)")

    basis = None
    if doc.get("basis") is not None:
        basis = _parse_matrix(doc["basis"], "basis")
        if basis.det == 0:
            raise InvalidSystemError("basis singular")
    label = doc.get("label", "")
    if not isinstance(label, str):
        raise InvalidSystemError("label must be a string")
    return IfsSystem(tuple(maps), tuple(translations) or None, basis, label)


def _mat_json(m: Mat2) -> list:
    return [[float(_re(m.a)), float(_re(m.b))], [float(_re(m.c)), float(_re(m.d))]]


def system_to_dict(system: IfsSystem) -> dict:
    maps = []
    for i, m in enumerate(system.maps):
        entry = {"matrix": _mat_json(m)}
        if system.translations is not None:
            entry["translation"] = list(system.translations[i])
        maps.append(entry)
    doc = {"maps": maps}
    if system.basis is not None:
        doc["basis"] = _mat_json(system.basis)
    if system.label:
        doc["label"] = system.label
    return doc


def serialize_system(system: IfsSystem) -> str:
    if not system.is_real:
        raise ValueError("only real systems can be serialized")
    return json.dumps(system_to_dict(system))


# ---------------------------------------------------------------------------
# singular values and the singular value function


def singular_values(A: Mat2) -> SingularPair:
    """Singular values of a real invertible 2x2 matrix, largest first.

    Uses the closed form for the eigenvalues of ``A^T A``; the smaller value
    is recovered as ``|det| / alpha1`` to avoid cancellation.
    """
    det = A.det
    if det == 0:
        raise DegenerateMatrixError("singular_values needs an invertible matrix")
    a, b, c, d = (_re(x) for x in A.entries)
    fro2 = a * a + b * b + c * c + d * d
    adet = abs(_re(det))
    disc = math.sqrt(max((fro2 - 2 * adet) * (fro2 + 2 * adet), 0.0))
    alpha1 = math.sqrt(0.5 * (fro2 + disc))
    return SingularPair(alpha1, adet / alpha1)


def op_norm_batch(arr: np.ndarray) -> np.ndarray:
    """Spectral norms of a stack of real 2x2 matrices, shape ``(..., 2, 2)``."""
    a, b = arr[..., 0, 0], arr[..., 0, 1]
    c, d = arr[..., 1, 0], arr[..., 1, 1]
    fro2 = a * a + b * b + c * c + d * d
    adet = np.abs(a * d - b * c)
    disc = np.sqrt(np.maximum((fro2 - 2 * adet) * (fro2 + 2 * adet), 0.0))
    return np.sqrt(0.5 * (fro2 + disc))


def phi_s_batch(arr: np.ndarray, s: float) -> np.ndarray:
    """Vectorised singular value function over a stack of 2x2 matrices."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    norm = op_norm_batch(arr)
    adet = np.abs(arr[..., 0, 0] * arr[..., 1, 1] - arr[..., 0, 1] * arr[..., 1, 0])
    if s < 1:
        return norm ** s
    if s <= 2:
        return norm ** (2 - s) * adet ** (s - 1)
    return adet ** (s / 2)


def phi_s(A: Mat2, s: float) -> float:
    """Singular value function ``phi^s(A)`` for a planar matrix.

    ``||A||^s`` on [0, 1), ``||A||^(2-s) |det A|^(s-1)`` on [1, 2] and
    ``|det A|^(s/2)`` beyond 2.
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    sv = singular_values(A)
    if s < 1:
        return sv.alpha1 ** s
    adet = abs(_re(A.det))
    if s <= 2:
        return sv.alpha1 ** (2 - s) * adet ** (s - 1)
    return adet ** (s / 2)


# ---------------------------------------------------------------------------
# words


def _check_word(system: IfsSystem, w: Sequence[int]) -> tuple:
    w = tuple(int(i) for i in w)
    if not w:
        raise ValueError("word must be nonempty")
    for i in w:
        if not 0 <= i < len(system.maps):
            raise IndexError(f"word index {i} out of range for {len(system.maps)} maps")
    return w


def word_product(system: IfsSystem, w: Sequence[int]) -> Mat2:
    """``A^(w_1) A^(w_2) ... A^(w_k)`` multiplied left to right."""
    w = _check_word(system, w)
    out = system.maps[w[0]]
    for i in w[1:]:
        out = out @ system.maps[i]
    return out


def conjugate_system(system: IfsSystem, B: Mat2) -> IfsSystem:
    """Replace every map ``A`` by ``B A B^{-1}``; translations are dropped."""
    if B.det == 0:
        raise DegenerateMatrixError("conjugating matrix is singular")
    Binv = B.inverse()
    maps = tuple(B @ A @ Binv for A in system.maps)
    label = f"{system.label} (conjugated)" if system.label else "conjugated"
    return IfsSystem(maps, None, B, label)
