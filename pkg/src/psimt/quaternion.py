"""Real and complex quaternion arithmetic on numpy arrays.

A quaternion ``a0 + a1 i + a2 j + a3 k`` is stored as the last axis (length 4)
of an array.  Complex quaternions use ``complex128`` coefficients, real
quaternions use ``float64``; every function broadcasts over leading axes.
The complex imaginary unit commutes with ``i, j, k``, so complex coefficients
need no special treatment beyond complex arithmetic.
"""

import numpy as np

ZERO_DIVISOR_RTOL = 1e-12
PURE_VECTOR_ATOL = 1e-14


class ZeroDivisor(ArithmeticError):
    """Raised when inverting a (numerically) zero divisor of H(C)."""


class NotPureVector(ValueError):
    """Raised when an operation requires a vanishing scalar part."""


ONE = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])


def quat(a0=0.0, a1=0.0, a2=0.0, a3=0.0):
    """Build a quaternion from its four coefficients (complex if any is)."""
    coeffs = [a0, a1, a2, a3]
    dtype = complex if any(np.iscomplexobj(c) for c in coeffs) else float
    return np.stack(np.broadcast_arrays(*[np.asarray(c, dtype=dtype) for c in coeffs]), axis=-1)


def from_vector(v):
    """Pure quaternion with vector part ``v`` (shape ``(..., 3)``)."""
    v = np.asarray(v)
    out = np.zeros(v.shape[:-1] + (4,), dtype=np.result_type(v.dtype, float))
    out[..., 1:] = v
    return out


def sc(a):
    """Scalar part ``a0``."""
    return np.asarray(a)[..., 0]


def vec(a):
    """Vector part as a pure quaternion."""
    out = np.array(a, copy=True)
    out[..., 0] = 0
    return out


def qmul(a, b):
    """Quaternion product ``a b``.

    Uses ``a0 b0 - <a, b> + a0 b + b0 a + [a, b]`` with the bilinear dot and
    cross products of the vector parts.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    a0, a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    b0, b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + b0 * a1 + a2 * b3 - a3 * b2,
            a0 * b2 + b0 * a2 + a3 * b1 - a1 * b3,
            a0 * b3 + b0 * a3 + a1 * b2 - a2 * b1,
        ],
        axis=-1,
    )


def conj(a):
    """Quaternionic conjugate ``a0 - a_vec`` (coefficients are not conjugated)."""
    out = -np.asarray(a)
    out[..., 0] = -out[..., 0]
    return out


def norm_c(a):
    """Quaternionic norm of a complex quaternion: sqrt of the sum of |a_k|^2."""
    return np.sqrt(np.sum(np.abs(np.asarray(a)) ** 2, axis=-1))


def norm_r(a):
    """Euclidean norm ``sqrt(a conj(a))`` of a real quaternion."""
    a = np.asarray(a)
    if np.iscomplexobj(a):
        if np.any(np.abs(a.imag) > 0):
            raise ValueError("norm_r expects a real quaternion")
        a = a.real
    return np.sqrt(np.sum(a * a, axis=-1))


def inverse(a, rtol=ZERO_DIVISOR_RTOL):
    """Inverse ``conj(a) / (a conj(a))``.

    ``a conj(a)`` is the complex scalar ``a0^2 + a1^2 + a2^2 + a3^2``; it
    vanishes for zero divisors such as ``1 + i*i`` (complex unit times ``i``).
    """
    a = np.asarray(a)
    s = np.sum(a * a, axis=-1)
    scale = norm_c(a) ** 2
    if np.any(np.abs(s) <= rtol * scale) or np.any(scale == 0):
        raise ZeroDivisor("a * conj(a) vanishes: zero divisor")
    return conj(a) / s[..., None]


def _require_pure(a, atol):
    if np.any(np.abs(sc(a)) > atol):
        raise NotPureVector("scalar part is not zero")


def dot(a, b, atol=PURE_VECTOR_ATOL):
    """Bilinear inner product ``sum a_k b_k`` of two pure vectors (no conjugation)."""
    _require_pure(a, atol)
    _require_pure(b, atol)
    return np.sum(np.asarray(a)[..., 1:] * np.asarray(b)[..., 1:], axis=-1)


def cross(a, b, atol=PURE_VECTOR_ATOL):
    """Cross product ``[a, b]`` of two pure vectors, returned as a pure quaternion."""
    _require_pure(a, atol)
    _require_pure(b, atol)
    return from_vector(np.cross(np.asarray(a)[..., 1:], np.asarray(b)[..., 1:]))


def is_pure(a, atol=PURE_VECTOR_ATOL):
    return bool(np.all(np.abs(sc(a)) <= atol))


def to_reals(a):
    """Interleave real/imaginary parts: ``(..., 4)`` complex -> ``(..., 8)`` real."""
    a = np.asarray(a, dtype=complex)
    out = np.empty(a.shape[:-1] + (8,))
    out[..., 0::2] = a.real
    out[..., 1::2] = a.imag
    return out


def from_reals(r):
    r = np.asarray(r, dtype=float)
    return r[..., 0::2] + 1j * r[..., 1::2]
