"""Exact angular-momentum algebra for degenerate-level calculations.

Quantum numbers are stored as doubled integers (:class:`HalfInt`) so that
half-integer spins never touch floating point.  Clebsch-Gordan
coefficients follow the Condon-Shortley phase convention and are
evaluated from Racah's factorial formula in exact rational arithmetic
(one square root at the very end).  Wigner d-matrices use the factorial
sum form, so no eigensolver is involved anywhere.

Precession rotation matrices are restricted to rotation axes in the x-z
plane, the only geometry the rest of the package needs: the matrix of
``exp(-i*phi*(sin(theta) F_x + cos(theta) F_z))`` is assembled from the
Euler decomposition ``d(theta) @ diag(exp(-i m phi)) @ d(theta)^T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering

import numpy as np

__all__ = [
    "HalfInt",
    "RotationMatrix",
    "projections",
    "clebsch_gordan",
    "wigner_small_d",
    "rotation_matrix",
    "spin_x_matrix",
    "spin_z_matrix",
    "spin_xz_matrix",
]


@total_ordering
@dataclass(frozen=True)
class HalfInt:
    """An integer or half-integer quantum number stored as twice its value."""

    twice: int

    def __post_init__(self):
        if not isinstance(self.twice, (int, np.integer)):
            raise TypeError("HalfInt stores twice the value as an integer")
        object.__setattr__(self, "twice", int(self.twice))

    @classmethod
    def coerce(cls, x) -> "HalfInt":
        """Accept a HalfInt, an int, or a float that is an exact half-integer."""
        if isinstance(x, HalfInt):
            return x
        if isinstance(x, (int, np.integer)):
            return cls(2 * int(x))
        if isinstance(x, (float, np.floating)):
            doubled = 2.0 * float(x)
            if doubled != round(doubled):
                raise ValueError(f"{x!r} is not an integer or half-integer")
            return cls(int(round(doubled)))
        raise TypeError(f"cannot interpret {x!r} as a half-integer")

    @property
    def value(self) -> float:
        return self.twice / 2.0

    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __float__(self) -> float:
        return self.value

    def __add__(self, other) -> "HalfInt":
        return HalfInt(self.twice + HalfInt.coerce(other).twice)

    __radd__ = __add__

    def __sub__(self, other) -> "HalfInt":
        return HalfInt(self.twice - HalfInt.coerce(other).twice)

    def __rsub__(self, other) -> "HalfInt":
        return HalfInt(HalfInt.coerce(other).twice - self.twice)

    def __neg__(self) -> "HalfInt":
        return HalfInt(-self.twice)

    def __abs__(self) -> "HalfInt":
        return HalfInt(abs(self.twice))

    def __lt__(self, other) -> bool:
        return self.twice < HalfInt.coerce(other).twice

    def __repr__(self) -> str:
        if self.twice % 2 == 0:
            return f"HalfInt({self.twice // 2})"
        return f"HalfInt({self.twice}/2)"


def projections(F) -> list[HalfInt]:
    """Magnetic quantum numbers m = -F ... +F in ascending order."""
    F = HalfInt.coerce(F)
    if F.twice < 0:
        raise ValueError("angular momentum must be nonnegative")
    return [HalfInt(t) for t in range(-F.twice, F.twice + 1, 2)]


def _validate_pair(F: HalfInt, m: HalfInt, label: str) -> None:
    if F.twice < 0:
        raise ValueError(f"{label}: angular momentum must be nonnegative")
    if (F.twice - m.twice) % 2 != 0:
        raise ValueError(
            f"{label}: projection {m.value} has wrong parity for F={F.value}"
        )
    if abs(m.twice) > F.twice:
        raise ValueError(f"{label}: |m|={abs(m.value)} exceeds F={F.value}")


def clebsch_gordan(F1, F2, F, m1, m2, m) -> float:
    """Clebsch-Gordan coefficient <F1 m1; F2 m2 | F m>, Condon-Shortley phase.

    Returns 0 when m != m1+m2 or when (F1, F2, F) violate the triangle
    rule; raises ValueError for projections outside +-F or with parity
    inconsistent with their angular momentum.
    """
    F1, F2, F = HalfInt.coerce(F1), HalfInt.coerce(F2), HalfInt.coerce(F)
    m1, m2, m = HalfInt.coerce(m1), HalfInt.coerce(m2), HalfInt.coerce(m)
    _validate_pair(F1, m1, "(F1, m1)")
    _validate_pair(F2, m2, "(F2, m2)")
    _validate_pair(F, m, "(F, m)")
    if m1.twice + m2.twice != m.twice:
        return 0.0
    if (F1.twice + F2.twice + F.twice) % 2 != 0:
        return 0.0
    if not (abs(F1.twice - F2.twice) <= F.twice <= F1.twice + F2.twice):
        return 0.0

    # Integer factorial arguments, from doubled quantum numbers.
    def half(t: int) -> int:
        assert t % 2 == 0
        return t // 2

    t1, t2, tJ = F1.twice, F2.twice, F.twice
    u1, u2, uM = m1.twice, m2.twice, m.twice
    fac = math.factorial

    pref = Fraction(
        (tJ + 1)
        * fac(half(t1 + t2 - tJ))
        * fac(half(t1 - t2 + tJ))
        * fac(half(-t1 + t2 + tJ)),
        fac(half(t1 + t2 + tJ) + 1),
    )
    pref *= (
        fac(half(tJ + uM))
        * fac(half(tJ - uM))
        * fac(half(t1 - u1))
        * fac(half(t1 + u1))
        * fac(half(t2 - u2))
        * fac(half(t2 + u2))
    )

    k_min = max(0, half(t2 - tJ - u1), half(t1 + u2 - tJ))
    k_max = min(half(t1 + t2 - tJ), half(t1 - u1), half(t2 + u2))
    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        denom = (
            fac(k)
            * fac(half(t1 + t2 - tJ) - k)
            * fac(half(t1 - u1) - k)
            * fac(half(t2 + u2) - k)
            * fac(half(tJ - t2 + u1) + k)
            * fac(half(tJ - t1 - u2) + k)
        )
        total += Fraction((-1) ** k, denom)

    if total == 0:
        return 0.0
    magnitude = math.sqrt(float(pref * total * total))
    return magnitude if total > 0 else -magnitude


def _small_d_element(tj: int, tm_bra: int, tm_ket: int, cos_half: float,
                     sin_half: float) -> float:
    """<j m_bra| exp(-i beta J_y) |j m_ket> from the factorial sum."""
    fac = math.factorial
    jp_ket = (tj + tm_ket) // 2
    jm_ket = (tj - tm_ket) // 2
    jp_bra = (tj + tm_bra) // 2
    jm_bra = (tj - tm_bra) // 2
    norm = math.sqrt(fac(jp_ket) * fac(jm_ket) * fac(jp_bra) * fac(jm_bra))
    shift = (tm_bra - tm_ket) // 2  # m_bra - m_ket, always an integer
    k_min = max(0, -shift)
    k_max = min(jp_ket, jm_bra)
    out = 0.0
    for k in range(k_min, k_max + 1):
        denom = fac(jp_ket - k) * fac(k) * fac(jm_bra - k) * fac(k + shift)
        sign = -1.0 if (k + shift) % 2 else 1.0
        exp_c = tj - 2 * k - shift
        exp_s = 2 * k + shift
        out += sign * norm / denom * cos_half**exp_c * sin_half**exp_s
    return out


def wigner_small_d(F, beta: float) -> np.ndarray:
    """Wigner d-matrix for level F: the real orthogonal matrix of
    ``exp(-i*beta*F_y)`` with rows and columns ordered by ascending m.
    """
    F = HalfInt.coerce(F)
    beta = float(beta)
    if not math.isfinite(beta):
        raise ValueError("rotation angle must be finite")
    if F.twice < 0:
        raise ValueError("angular momentum must be nonnegative")
    twice_ms = range(-F.twice, F.twice + 1, 2)
    c, s = math.cos(beta / 2.0), math.sin(beta / 2.0)
    dim = F.twice + 1
    out = np.empty((dim, dim))
    for i, tbra in enumerate(twice_ms):
        for j, tket in enumerate(twice_ms):
            out[i, j] = _small_d_element(F.twice, tbra, tket, c, s)
    return out


@dataclass(frozen=True, eq=False)
class RotationMatrix:
    """Zeeman precession matrix on one hyperfine level.

    ``entries[i, j]`` is the (m_row, m_col) matrix element with both
    indices running over -F ... +F in ascending order.  Unitary by
    construction.
    """

    F: HalfInt
    entries: np.ndarray


def rotation_matrix(F, g_s: float, omega_B: float, theta: float,
                    t: float) -> RotationMatrix:
    """Precession matrix ``exp(-i g_s omega_B t n.F)`` for a field axis
    ``n = (sin(theta), 0, cos(theta))`` in the x-z plane.

    The accumulated phase is ``phi = g_s * omega_B * t``; the sign of the
    Lande factor is carried by phi.
    """
    F = HalfInt.coerce(F)
    phi = float(g_s) * float(omega_B) * float(t)
    w = wigner_small_d(F, theta)
    m_values = np.arange(-F.twice, F.twice + 1, 2) / 2.0
    phases = np.exp(-1j * m_values * phi)
    entries = (w * phases[None, :]) @ w.T
    return RotationMatrix(F, entries)


def spin_z_matrix(F) -> np.ndarray:
    """F_z in the ascending-m basis (diagonal)."""
    F = HalfInt.coerce(F)
    m_values = np.arange(-F.twice, F.twice + 1, 2) / 2.0
    return np.diag(m_values)


def spin_x_matrix(F) -> np.ndarray:
    """F_x in the ascending-m basis (real symmetric tridiagonal)."""
    F = HalfInt.coerce(F)
    fval = F.value
    m_values = np.arange(-F.twice, F.twice + 1, 2) / 2.0
    # <m+1|F_x|m> = sqrt(F(F+1) - m(m+1)) / 2
    off = 0.5 * np.sqrt(fval * (fval + 1.0) - m_values[:-1] * (m_values[:-1] + 1.0))
    dim = F.twice + 1
    out = np.zeros((dim, dim))
    idx = np.arange(dim - 1)
    out[idx + 1, idx] = off
    out[idx, idx + 1] = off
    return out


def spin_xz_matrix(F, theta: float) -> np.ndarray:
    """Projection ``sin(theta) F_x + cos(theta) F_z`` onto an axis in the
    x-z plane at angle theta from z.  Real symmetric."""
    return math.sin(theta) * spin_x_matrix(F) + math.cos(theta) * spin_z_matrix(F)
