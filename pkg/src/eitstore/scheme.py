"""Atomic level structure, field polarizations, sample geometry, magnetic
field, and the dipole-coupling tables derived from them.

The three-level-manifold system consists of two ground hyperfine levels
(g, the signal-coupled level, and g', the control-coupled level) and one
excited level e.  All per-sublevel transition strengths reduce to
Clebsch-Gordan factors; everything downstream (susceptibility, group
velocity, polariton projections, retrieval efficiency) consumes the
tables built here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .angmom import HalfInt, clebsch_gordan, projections
from .constants import C_LIGHT, LARMOR_RATE_PER_GAUSS
from .errors import ConfigurationError, InfeasibleSchemeError

__all__ = [
    "LevelScheme",
    "FieldPolarizations",
    "SampleGeometry",
    "MagneticField",
    "FeasibilityReport",
    "CouplingTables",
    "rb85_d1",
    "check_eit_feasibility",
    "build_coupling_tables",
    "optical_thickness",
    "calibrate_coupling",
    "atoms_from_optical_thickness",
]


@dataclass(frozen=True)
class LevelScheme:
    """Hyperfine levels, decay rate, Lande factors and branching fraction.

    Energies are referenced to the g level (omega_g = 0).  ``eta`` is the
    fraction of excited-state decays that return population to level g.
    """

    F_g: HalfInt
    F_gp: HalfInt
    F_e: HalfInt
    Gamma_e: float
    g_g: float
    g_gp: float
    g_e: float
    eta: float = 0.5
    omega_e: float = 2.0 * math.pi * C_LIGHT / 794.979e-9
    omega_gp: float = 2.0 * math.pi * 3.0357e9
    omega_g: float = 0.0

    def __post_init__(self):
        for name in ("F_g", "F_gp", "F_e"):
            object.__setattr__(self, name, HalfInt.coerce(getattr(self, name)))
        if self.Gamma_e <= 0:
            raise ConfigurationError("Gamma_e must be positive")
        if not 0.0 <= self.eta <= 1.0:
            raise ConfigurationError("branching fraction eta must lie in [0, 1]")
        for lower, label in ((self.F_g, "g"), (self.F_gp, "g'")):
            if (lower.twice - self.F_e.twice) % 2 != 0:
                raise ConfigurationError(
                    f"F_e and F_{label} must differ by an integer"
                )
            if not (abs(lower.twice - 2) <= self.F_e.twice <= lower.twice + 2):
                raise ConfigurationError(
                    f"transition {label} <-> e is not dipole-allowed: "
                    f"F={lower.value} to F_e={self.F_e.value}"
                )

    @property
    def dim_g(self) -> int:
        return self.F_g.twice + 1

    @property
    def dim_gp(self) -> int:
        return self.F_gp.twice + 1

    @property
    def dim_e(self) -> int:
        return self.F_e.twice + 1

    @property
    def p_unpolarized(self) -> float:
        """Population per g sublevel of the initially unpolarized sample."""
        return 1.0 / (self.F_g.twice + 1)


def rb85_d1() -> LevelScheme:
    """85Rb D1-line scheme: g = 5S1/2 F=2, g' = 5S1/2 F=3, e = 5P1/2 F=3.

    Lande factors are the standard ground-level values g(F=2) = -1/3,
    g(F=3) = +1/3 and g_e = 1/9; the branching fraction defaults to 1/2.
    """
    return LevelScheme(
        F_g=HalfInt(4),
        F_gp=HalfInt(6),
        F_e=HalfInt(6),
        Gamma_e=2.0 * math.pi * 5.98e6,
        g_g=-1.0 / 3.0,
        g_gp=1.0 / 3.0,
        g_e=1.0 / 9.0,
    )


@dataclass(frozen=True)
class FieldPolarizations:
    """Circular polarizations of the signal (alpha) and control (beta)."""

    alpha: int
    beta: int

    def __post_init__(self):
        if self.alpha not in (1, -1) or self.beta not in (1, -1):
            raise ConfigurationError("polarizations must be +1 or -1")


@dataclass(frozen=True)
class SampleGeometry:
    """Pencil-shaped sample: length, cross section, atom number, and the
    per-sublevel population fraction p of the unpolarized initial state."""

    length: float
    area: float
    n_atoms: float
    p: float

    def __post_init__(self):
        if self.length <= 0 or self.area <= 0 or self.n_atoms <= 0:
            raise ConfigurationError("length, area and atom number must be positive")
        if not 0 < self.p <= 1:
            raise ConfigurationError("p must lie in (0, 1]")

    @classmethod
    def for_scheme(cls, scheme: LevelScheme, length: float, area: float,
                   n_atoms: float) -> "SampleGeometry":
        return cls(length=length, area=area, n_atoms=n_atoms,
                   p=scheme.p_unpolarized)


@dataclass(frozen=True)
class MagneticField:
    """Static field of given magnitude (gauss), tilted by theta from the
    propagation axis; the axis stays in the x-z plane."""

    b_gauss: float
    theta: float = 0.0

    def __post_init__(self):
        if self.b_gauss < 0:
            raise ConfigurationError("field magnitude must be nonnegative")
        if not 0.0 <= self.theta <= math.pi / 2.0 + 1e-12:
            raise ConfigurationError("theta must lie in [0, pi/2]")

    @property
    def omega_B(self) -> float:
        """Bare precession rate mu_B B / hbar in rad/s."""
        return LARMOR_RATE_PER_GAUSS * self.b_gauss

    def larmor_period(self, g_g: float) -> float:
        """Full precession period of the g level; inf for zero field."""
        rate = abs(g_g) * self.omega_B
        return math.inf if rate == 0.0 else 2.0 * math.pi / rate

    @classmethod
    def from_larmor_period(cls, period: float, g_g: float,
                           theta: float = 0.0) -> "MagneticField":
        if period <= 0 or g_g == 0:
            raise ConfigurationError(
                "Larmor period must be positive and g_g nonzero"
            )
        omega_b = 2.0 * math.pi / (abs(g_g) * period)
        return cls(b_gauss=omega_b / LARMOR_RATE_PER_GAUSS, theta=theta)


def _cg_or_zero(F1, F2, F, m1, m2, m) -> float:
    """Clebsch-Gordan coefficient, with out-of-range projections read as 0."""
    for Fq, mq in ((F1, m1), (F2, m2), (F, m)):
        if abs(HalfInt.coerce(mq).twice) > HalfInt.coerce(Fq).twice:
            return 0.0
    return clebsch_gordan(F1, F2, F, m1, m2, m)


def signal_cg(scheme: LevelScheme, alpha: int, m: HalfInt) -> float:
    """Signal coupling <F_g m; 1 alpha | F_e m+alpha>."""
    return _cg_or_zero(scheme.F_g, HalfInt(2), scheme.F_e,
                       m, HalfInt(2 * alpha), m + HalfInt(2 * alpha))


def control_cg(scheme: LevelScheme, beta: int, m: HalfInt) -> float:
    """Control coupling <F_g' m; 1 beta | F_e m+beta>."""
    return _cg_or_zero(scheme.F_gp, HalfInt(2), scheme.F_e,
                       m, HalfInt(2 * beta), m + HalfInt(2 * beta))


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of the unconnected-lambda check.

    ``orphaned`` lists every g sublevel m that the signal couples to the
    excited level while the control field cannot couple the corresponding
    excited sublevel back down to g'.
    """

    ok: bool
    orphaned: tuple[HalfInt, ...] = ()

    def __str__(self) -> str:
        if self.ok:
            return "feasible: every signal-coupled sublevel has a control partner"
        ms = ", ".join(f"{hm.value:g}" for hm in self.orphaned)
        return f"infeasible: unconnected lambda at m = {ms}"


def check_eit_feasibility(scheme: LevelScheme,
                          pol: FieldPolarizations) -> FeasibilityReport:
    """Report whether every signal-coupled g sublevel is part of a closed
    lambda configuration.

    A sublevel m is orphaned when its signal coupling is nonzero but the
    control coupling of the partner sublevel m+alpha-beta in g' vanishes;
    atoms in such a sublevel absorb the signal as if no control field were
    present.  Sublevels with zero signal coupling are simply skipped.
    """
    shift = HalfInt(2 * (pol.alpha - pol.beta))
    orphaned = []
    for m in projections(scheme.F_g):
        if signal_cg(scheme, pol.alpha, m) == 0.0:
            continue
        if control_cg(scheme, pol.beta, m + shift) == 0.0:
            orphaned.append(m)
    return FeasibilityReport(ok=not orphaned, orphaned=tuple(orphaned))


@dataclass(frozen=True, eq=False)
class CouplingTables:
    """Per-sublevel coupling strengths for one (scheme, polarization) pair.

    Arrays are indexed by ascending m.  ``C`` holds the signal couplings
    over the g sublevels, ``Cp`` the control couplings over the g'
    sublevels, ``R`` the signal/control ratio ``C[m] / Cp[m+alpha-beta]``
    (zero wherever ``C`` vanishes), and ``X`` is ``C`` normalized to unit
    sum of squares.
    """

    alpha: int
    beta: int
    F_g: HalfInt
    F_gp: HalfInt
    F_e: HalfInt
    C: np.ndarray
    Cp: np.ndarray
    R: np.ndarray
    X: np.ndarray

    @property
    def sum_C2(self) -> float:
        return float(np.sum(self.C**2))

    @property
    def sum_R2(self) -> float:
        return float(np.sum(self.R**2))

    @property
    def m_values_g(self) -> np.ndarray:
        return np.arange(-self.F_g.twice, self.F_g.twice + 1, 2) / 2.0

    @property
    def m_values_gp(self) -> np.ndarray:
        return np.arange(-self.F_gp.twice, self.F_gp.twice + 1, 2) / 2.0

    def cp_at_signal_m(self) -> np.ndarray:
        """Control coupling of the lambda partner, aligned with the g grid:
        entry m holds ``Cp[m+alpha-beta]`` (zero when out of range)."""
        return self.placement_matrix() @ self.Cp

    def signal_matrix(self) -> np.ndarray:
        """(dim_g, dim_e) matrix with ``C[m]`` at column ``m+alpha``."""
        dim_g = self.F_g.twice + 1
        dim_e = self.F_e.twice + 1
        out = np.zeros((dim_g, dim_e))
        for i in range(dim_g):
            tm = -self.F_g.twice + 2 * i
            te = tm + 2 * self.alpha
            j = (te + self.F_e.twice) // 2
            if 0 <= j < dim_e:
                out[i, j] = self.C[i]
        return out

    def control_matrix(self) -> np.ndarray:
        """(dim_gp, dim_e) matrix with ``Cp[m']`` at column ``m'+beta``."""
        dim_gp = self.F_gp.twice + 1
        dim_e = self.F_e.twice + 1
        out = np.zeros((dim_gp, dim_e))
        for i in range(dim_gp):
            tm = -self.F_gp.twice + 2 * i
            te = tm + 2 * self.beta
            j = (te + self.F_e.twice) // 2
            if 0 <= j < dim_e:
                out[i, j] = self.Cp[i]
        return out

    def placement_matrix(self) -> np.ndarray:
        """(dim_g, dim_gp) selector with a 1 at (m, m+alpha-beta)."""
        dim_g = self.F_g.twice + 1
        dim_gp = self.F_gp.twice + 1
        out = np.zeros((dim_g, dim_gp))
        shift = 2 * (self.alpha - self.beta)
        for i in range(dim_g):
            tm = -self.F_g.twice + 2 * i
            tp = tm + shift
            j = (tp + self.F_gp.twice) // 2
            if 0 <= j < dim_gp:
                out[i, j] = 1.0
        return out


def build_coupling_tables(scheme: LevelScheme,
                          pol: FieldPolarizations) -> CouplingTables:
    """Populate the coupling tables; raises InfeasibleSchemeError when the
    scheme has an unconnected lambda configuration."""
    report = check_eit_feasibility(scheme, pol)
    if not report.ok:
        raise InfeasibleSchemeError(report)

    shift = HalfInt(2 * (pol.alpha - pol.beta))
    C = np.array([signal_cg(scheme, pol.alpha, m)
                  for m in projections(scheme.F_g)])
    Cp = np.array([control_cg(scheme, pol.beta, m)
                   for m in projections(scheme.F_gp)])
    R = np.zeros_like(C)
    for i, m in enumerate(projections(scheme.F_g)):
        if C[i] != 0.0:
            R[i] = C[i] / control_cg(scheme, pol.beta, m + shift)
    norm = math.sqrt(float(np.sum(C**2)))
    X = C / norm
    return CouplingTables(alpha=pol.alpha, beta=pol.beta, F_g=scheme.F_g,
                          F_gp=scheme.F_gp, F_e=scheme.F_e,
                          C=C, Cp=Cp, R=R, X=X)


def optical_thickness(scheme: LevelScheme, geometry: SampleGeometry,
                      pol: FieldPolarizations) -> float:
    """Resonant optical thickness of the control-free medium:
    ``6 pi eta (N/A) (c/omega_e)^2 p sum_m C_m^2``.

    ``exp(-d)`` is then the on-resonance intensity transmittance without
    a control field.
    """
    sum_c2 = sum(signal_cg(scheme, pol.alpha, m) ** 2
                 for m in projections(scheme.F_g))
    return (6.0 * math.pi * scheme.eta * (geometry.n_atoms / geometry.area)
            * (C_LIGHT / scheme.omega_e) ** 2 * geometry.p * sum_c2)


def calibrate_coupling(d_alpha: float, scheme: LevelScheme,
                       geometry: SampleGeometry,
                       pol: FieldPolarizations) -> float:
    """Collective coupling strength N|kappa|^2 (rad^2/s^2) fixed by the
    optical thickness.

    ``N|kappa|^2 = d c Gamma_e / (4 L p sum_m C_m^2)`` is the unique value
    for which steady-state resonant absorption with the control off gives
    intensity transmittance exp(-d).
    """
    if d_alpha < 0:
        raise ConfigurationError("optical thickness must be nonnegative")
    sum_c2 = sum(signal_cg(scheme, pol.alpha, m) ** 2
                 for m in projections(scheme.F_g))
    if sum_c2 == 0.0:
        raise ConfigurationError(
            "signal couples to no sublevel; cannot calibrate the coupling"
        )
    return (d_alpha * C_LIGHT * scheme.Gamma_e
            / (4.0 * geometry.length * geometry.p * sum_c2))


def atoms_from_optical_thickness(d_alpha: float, scheme: LevelScheme,
                                 area: float, pol: FieldPolarizations) -> float:
    """Atom number that realizes a requested optical thickness at the given
    cross section (inversion of :func:`optical_thickness`)."""
    sum_c2 = sum(signal_cg(scheme, pol.alpha, m) ** 2
                 for m in projections(scheme.F_g))
    denom = (6.0 * math.pi * scheme.eta * (C_LIGHT / scheme.omega_e) ** 2
             * scheme.p_unpolarized * sum_c2)
    if denom == 0.0:
        raise ConfigurationError(
            "optical thickness cannot be realized: no signal coupling or eta=0"
        )
    return d_alpha * area / denom
