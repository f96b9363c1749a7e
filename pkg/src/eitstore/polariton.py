"""Dark/bright polariton decomposition of simulation states and the
analytic collapse/revival retrieval-efficiency calculator.

The state of the medium at one position is summarized by a coherence
vector in a (2F_g + 2)-dimensional space: one component for the signal
field and one for each lambda-chain hyperfine coherence (the g-sublevel-m
coherence with its partner m+alpha-beta in g').  The dark-state direction
in this space is set by the control amplitude and the coupling ratios
R_m; projecting a state onto it splits the excitation into the part that
retrieves into the signal field (dark) and the part that is lost to
spontaneous emission when the control returns (bright).  Hyperfine
coherences outside the lambda chains (populated by tilted-field
precession) belong to neither and are reported separately so the norm
ledger still closes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .angmom import rotation_matrix, wigner_small_d
from .errors import UndefinedPolaritonBasisError
from .output import format_float
from .scheme import CouplingTables, LevelScheme, MagneticField, SampleGeometry

__all__ = [
    "PolaritonDecomposition",
    "EfficiencyCurve",
    "polariton_unit_vector",
    "decompose",
    "decompose_profile",
    "retrieval_efficiency",
    "efficiency_curve",
    "collapse_rate",
    "transverse_half_period_revival",
    "revival_surface",
    "write_curve_csv",
    "write_surface_csv",
]


@dataclass(frozen=True)
class PolaritonDecomposition:
    """Orthogonal split of one coherence vector: dark + bright equals the
    in-basis norm, and adding the out-of-basis coherences recovers the
    total coherence norm."""

    p_dark: float
    p_bright: float
    p_outside: float
    v_norm_sq: float


def polariton_unit_vector(omega_rabi: float, coupling: float, p: float,
                          tables: CouplingTables) -> np.ndarray:
    """Unit vector along the dark-state direction, ordered as
    [field component, m = -F_g ... +F_g spin components].

    The spin components are proportional to R_m with the relative sign
    that annihilates the excited-state coupling for a real positive
    collective coupling constant, so a state lying exactly on this
    direction is transparent to the control field.
    """
    u = np.empty(tables.R.size + 1)
    u[0] = omega_rabi
    u[1:] = -math.sqrt(max(p * coupling, 0.0)) * tables.R
    norm = np.linalg.norm(u)
    if norm == 0.0:
        raise UndefinedPolaritonBasisError(
            "dark-state direction undefined: control and coupling both zero"
        )
    return u / norm


def decompose_profile(phi: np.ndarray, q_hf: np.ndarray, omega_rabi: float,
                      coupling: float, geometry: SampleGeometry,
                      tables: CouplingTables):
    """Vectorized decomposition along a z profile.

    ``phi`` has shape (nz,), ``q_hf`` shape (nz, dim_g, dim_gp).  Returns
    arrays (p_dark, p_bright, p_outside, v_norm_sq) of shape (nz,).
    """
    e = polariton_unit_vector(omega_rabi, coupling, geometry.p, tables)
    scale = math.sqrt(geometry.n_atoms / geometry.p)
    chain = scale * np.einsum("zgp,gp->zg", q_hf, tables.placement_matrix())

    dots = np.conj(e[0]) * phi + chain @ e[1:]
    p_dark = np.abs(dots) ** 2
    v_norm_sq = np.abs(phi) ** 2 + np.sum(np.abs(chain) ** 2, axis=-1)
    p_bright = np.maximum(v_norm_sq - p_dark, 0.0)
    total = np.abs(phi) ** 2 + scale**2 * np.sum(np.abs(q_hf) ** 2, axis=(-2, -1))
    p_outside = np.maximum(total - v_norm_sq, 0.0)
    return p_dark, p_bright, p_outside, v_norm_sq


def decompose(phi_value: complex, q_hf: np.ndarray, omega_rabi: float,
              coupling: float, geometry: SampleGeometry,
              tables: CouplingTables) -> PolaritonDecomposition:
    """Dark/bright split of a single state slice (one z position)."""
    p_d, p_b, p_o, v2 = decompose_profile(
        np.asarray([phi_value], dtype=complex), q_hf[None, :, :],
        omega_rabi, coupling, geometry, tables)
    return PolaritonDecomposition(p_dark=float(p_d[0]), p_bright=float(p_b[0]),
                                  p_outside=float(p_o[0]),
                                  v_norm_sq=float(v2[0]))


def _efficiency_amplitude(tables: CouplingTables, d_g: np.ndarray,
                          d_gp: np.ndarray) -> complex:
    """Overlap of the precessed dark-state spin wave with its initial
    direction, given the two level rotation matrices."""
    pl = tables.placement_matrix()
    d_gp_sub = pl @ d_gp @ pl.T
    r = tables.R
    amp = np.einsum("a,b,ba,ba->", r, r, d_g, np.conj(d_gp_sub))
    return complex(amp / tables.sum_R2)


def retrieval_efficiency(scheme: LevelScheme, tables: CouplingTables,
                         bfield: MagneticField, t_s: float) -> float:
    """Fraction of the stored dark-state excitation that survives a dark
    storage interval t_s in the magnetic field.

    Each hyperfine level precesses at its own Lande-scaled rate; the
    surviving fraction is the squared overlap of the rotated spin wave
    with the dark-state direction.  Equals 1 at t_s = 0 and revives fully
    every Larmor period when the two ground Lande factors are opposite.
    """
    d_g = rotation_matrix(scheme.F_g, scheme.g_g, bfield.omega_B,
                          bfield.theta, t_s).entries
    d_gp = rotation_matrix(scheme.F_gp, scheme.g_gp, bfield.omega_B,
                           bfield.theta, t_s).entries
    return abs(_efficiency_amplitude(tables, d_g, d_gp)) ** 2


@dataclass(frozen=True, eq=False)
class EfficiencyCurve:
    """Retrieval efficiency sampled over storage time at one field tilt."""

    theta: float
    t_values: np.ndarray
    f_values: np.ndarray


def efficiency_curve(scheme: LevelScheme, tables: CouplingTables,
                     bfield: MagneticField,
                     t_values: np.ndarray) -> EfficiencyCurve:
    """Retrieval efficiency over a grid of storage times.

    The tilt rotation is factored out once; only the precession phases
    are rebuilt per sample.
    """
    w_g = wigner_small_d(scheme.F_g, bfield.theta)
    w_gp = wigner_small_d(scheme.F_gp, bfield.theta)
    m_g = tables.m_values_g
    m_gp = tables.m_values_gp
    f = np.empty(len(t_values))
    for i, t in enumerate(t_values):
        ph_g = np.exp(-1j * m_g * (scheme.g_g * bfield.omega_B * t))
        ph_gp = np.exp(-1j * m_gp * (scheme.g_gp * bfield.omega_B * t))
        d_g = (w_g * ph_g[None, :]) @ w_g.T
        d_gp = (w_gp * ph_gp[None, :]) @ w_gp.T
        f[i] = abs(_efficiency_amplitude(tables, d_g, d_gp)) ** 2
    return EfficiencyCurve(theta=bfield.theta,
                           t_values=np.asarray(t_values, dtype=float),
                           f_values=f)


def collapse_rate(tables: CouplingTables) -> float:
    """Dimensionless collapse rate for a field along the propagation axis.

    Short storage times obey f(t) ~ exp(-eta^2 (Omega_L t)^2 / 2) with
    Omega_L = |g_g| omega_B; eta^2 is four times the R^2-weighted double
    sum of (m1 - m2)^2, i.e. eight times the weighted variance of m.  A
    single-sublevel (nondegenerate-lambda) scheme gives zero.
    """
    weights = tables.R**2 / tables.sum_R2
    m = tables.m_values_g
    dm2 = (m[:, None] - m[None, :]) ** 2
    eta_sq = 4.0 * float((weights[:, None] * weights[None, :] * dm2).sum())
    return math.sqrt(eta_sq)


def transverse_half_period_revival(tables: CouplingTables) -> float:
    """Closed-form retrieval efficiency at half the Larmor period for a
    field perpendicular to the propagation axis with equal polarizations:
    ``(sum_m R_m R_{-m} / sum_m R_m^2)^2``.

    Valid for alpha = beta, where the half-period transverse rotation maps
    each lambda-chain coherence onto the m -> -m one up to a phase.
    """
    if tables.alpha != tables.beta:
        raise ValueError("closed form requires equal signal and control "
                         "polarizations")
    r = tables.R
    return float((np.sum(r * r[::-1]) / np.sum(r * r)) ** 2)


def revival_surface(scheme: LevelScheme, tables: CouplingTables,
                    b_gauss: float, thetas: np.ndarray,
                    t_values: np.ndarray) -> np.ndarray:
    """Retrieval efficiency on the (storage time) x (tilt angle) grid.

    Returns an array of shape (len(t_values), len(thetas)).
    """
    thetas = np.asarray(thetas, dtype=float)
    t_values = np.asarray(t_values, dtype=float)
    if thetas.size == 0 or t_values.size == 0:
        raise ValueError("grids must be non-empty")
    out = np.empty((t_values.size, thetas.size))
    for j, theta in enumerate(thetas):
        curve = efficiency_curve(scheme, tables,
                                 MagneticField(b_gauss=b_gauss, theta=theta),
                                 t_values)
        out[:, j] = curve.f_values
    return out


def write_curve_csv(curve: EfficiencyCurve, larmor_period: float, fh) -> None:
    fh.write("t_over_TL,f\n")
    for t, f in zip(curve.t_values, curve.f_values):
        fh.write(f"{format_float(t / larmor_period)},{format_float(f)}\n")


def write_surface_csv(thetas: np.ndarray, t_values: np.ndarray,
                      surface: np.ndarray, larmor_period: float, fh) -> None:
    """Header row carries the tilt angles; the first column is storage time
    in Larmor periods."""
    fh.write("t_over_TL," + ",".join(format_float(th) for th in thetas) + "\n")
    for i, t in enumerate(t_values):
        row = ",".join(format_float(v) for v in surface[i])
        fh.write(f"{format_float(t / larmor_period)},{row}\n")
