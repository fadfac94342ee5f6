"""Structural sets and the one-parameter family psi^theta."""

from dataclasses import dataclass
import math
import re

import numpy as np

from .quaternion import I, J, K, ONE, conj, norm_c, qmul

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class StructuralSet:
    """Ordered triple of real quaternions, stored as a ``(3, 4)`` array.

    ``theta`` is set when the triple was built by :func:`make_psi_theta`.
    """

    psi: np.ndarray
    theta: float | None = None

    def __post_init__(self):
        psi = np.array(self.psi, dtype=float).reshape(3, 4)
        psi.setflags(write=False)
        object.__setattr__(self, "psi", psi)

    def __getitem__(self, k):
        return self.psi[k]

    def __eq__(self, other):
        return isinstance(other, StructuralSet) and np.array_equal(self.psi, other.psi)

    @property
    def matrix(self):
        """``(4, 3)`` matrix ``M`` with ``(x)_psi = M @ x``."""
        return self.psi.T

    def __repr__(self):
        tag = "" if self.theta is None else f", theta={self.theta:.6g}"
        return f"StructuralSet({self.psi.tolist()}{tag})"


STANDARD = StructuralSet(np.stack([I, J, K]))


def reduce_angle(theta):
    t = math.fmod(float(theta), TWO_PI)
    if t < 0:
        t += TWO_PI
    # fmod(2pi - tiny) can round to exactly 2pi
    return 0.0 if t >= TWO_PI else t


def make_psi_theta(theta):
    """``{i, i e^{i theta} j, e^{i theta} j}`` with ``e^{i theta} = cos + i sin``.

    The exponential is the *real-quaternion* one (``i`` the quaternion unit),
    so the set consists of real quaternions:
    ``psi2 = -sin j + cos k`` and ``psi3 = cos j + sin k``.
    """
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    theta = reduce_angle(theta)
    e = math.cos(theta) * ONE + math.sin(theta) * I
    psi2 = qmul(I, qmul(e, J))
    psi3 = qmul(e, J)
    return StructuralSet(np.stack([I, psi2, psi3]), theta=theta)


def verify_structural(psi):
    """Max norm of ``psi^j conj(psi^k) + psi^k conj(psi^j) - 2 delta_jk``."""
    p = np.asarray(psi.psi if isinstance(psi, StructuralSet) else psi, dtype=float)
    worst = 0.0
    for j in range(3):
        for k in range(3):
            r = qmul(p[j], conj(p[k])) + qmul(p[k], conj(p[j]))
            r = r - (2.0 if j == k else 0.0) * ONE
            worst = max(worst, float(norm_c(r)))
    return worst


def embed(psi, x):
    """``(x)_psi = sum_k x_k psi^k`` for points ``x`` of shape ``(..., 3)``."""
    return np.asarray(x, dtype=float) @ psi.psi


def conj_set(psi):
    return StructuralSet(conj(psi.psi), theta=None)


_NAMED = {"0": 0.0, "pi/2": math.pi / 2, "pi": math.pi, "3pi/2": 1.5 * math.pi, "2pi": TWO_PI}


def parse_theta(text):
    """Decimal radians or one of ``pi/2``, ``pi``, ``3pi/2``."""
    s = re.sub(r"\s+", "", str(text)).lower()
    if s in _NAMED:
        return _NAMED[s]
    try:
        return float(s)
    except ValueError:
        raise ValueError(f"cannot parse theta {text!r}") from None
