"""Frequency-domain EIT observables: susceptibility, transparency window,
group velocity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import C_LIGHT
from .output import format_float
from .scheme import CouplingTables, LevelScheme, SampleGeometry

__all__ = [
    "SusceptibilityResult",
    "susceptibility",
    "group_velocity",
    "transparency_scan",
]


def susceptibility(scheme: LevelScheme, tables: CouplingTables,
                   d_alpha: float, length: float, omega_rabi: float,
                   delta):
    """Linear susceptibility of the signal at detuning delta from the bare
    atomic resonance, for a constant-amplitude control field of Rabi
    frequency omega_rabi.

    Sum over the g sublevels of the per-lambda lineshape

        Gamma * Delta * X_m^2 * (W_m - Delta^2 + i Delta Gamma / 2)
        -----------------------------------------------------------
              (W_m - Delta^2)^2 + (Delta Gamma / 2)^2

    with ``W_m = (omega_rabi * Cp[m+alpha-beta])^2``, scaled by
    ``c d / (2 omega_e L)``.  At the removable 0/0 point (Delta = 0 with
    W_m = 0) the on-resonance limit ``2i X_m^2`` is substituted, which
    reproduces the transmittance exp(-d) of the bare absorber.

    Accepts a scalar or array of detunings; returns complex of the same
    shape.
    """
    if omega_rabi < 0:
        raise ValueError("control Rabi frequency must be nonnegative")
    delta_arr = np.asarray(delta, dtype=float)
    scalar = delta_arr.ndim == 0
    d_col = delta_arr.reshape(-1, 1)

    gamma = scheme.Gamma_e
    x2 = tables.X**2
    w = (omega_rabi * tables.cp_at_signal_m()) ** 2

    num = gamma * d_col * x2 * (w - d_col**2 + 0.5j * d_col * gamma)
    den = (w - d_col**2) ** 2 + (0.5 * d_col * gamma) ** 2
    singular = den == 0.0
    terms = np.where(singular, 2.0j * x2, num / np.where(singular, 1.0, den))

    chi = (C_LIGHT * d_alpha / (2.0 * scheme.omega_e * length)) * terms.sum(axis=1)
    return complex(chi[0]) if scalar else chi.reshape(delta_arr.shape)


def group_velocity(tables: CouplingTables, geometry: SampleGeometry,
                   coupling: float, omega_rabi: float) -> float:
    """Group velocity of the signal under EIT,
    ``c W^2 / (W^2 + N p |kappa|^2 sum_m R_m^2)`` with W = omega_rabi.

    Zero when the control is off (the excitation stops propagating) and
    approaches c for a strong control field.
    """
    if omega_rabi < 0:
        raise ValueError("control Rabi frequency must be nonnegative")
    w2 = omega_rabi**2
    return C_LIGHT * w2 / (w2 + coupling * geometry.p * tables.sum_R2)


@dataclass(frozen=True, eq=False)
class SusceptibilityResult:
    """Susceptibility scan over a uniform detuning grid, with the implied
    intensity transmittance through a sample of the scanned length."""

    detuning: np.ndarray
    chi: np.ndarray
    transmittance: np.ndarray

    def write_csv(self, fh) -> None:
        fh.write("delta_rad_s,re_chi,im_chi,transmittance\n")
        for d, c, t in zip(self.detuning, self.chi, self.transmittance):
            fh.write(f"{format_float(d)},{format_float(c.real)},"
                     f"{format_float(c.imag)},{format_float(t)}\n")


def transparency_scan(scheme: LevelScheme, tables: CouplingTables,
                      d_alpha: float, length: float, omega_rabi: float,
                      delta_min: float, delta_max: float,
                      n_points: int) -> SusceptibilityResult:
    """Scan the susceptibility over an endpoint-inclusive uniform detuning
    grid and convert to intensity transmittance.

    The medium is dilute (|chi| << 1), so the refractive index is taken
    as 1 + chi/2 and the transmittance is exp(-(omega_e/c) Im(chi) L).
    """
    if n_points < 2:
        raise ValueError("a scan needs at least two grid points")
    detuning = np.linspace(delta_min, delta_max, n_points)
    chi = susceptibility(scheme, tables, d_alpha, length, omega_rabi, detuning)
    transmittance = np.exp(-(scheme.omega_e / C_LIGHT) * chi.imag * length)
    return SusceptibilityResult(detuning=detuning, chi=chi,
                                transmittance=transmittance)
