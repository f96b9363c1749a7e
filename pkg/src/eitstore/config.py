"""Experiment configuration: JSON ingestion, validation, and assembly of
the physics objects consumed by the simulator and analysis commands.

Keys carry their units explicitly (``_s``, ``_m``, ``_rad`` ...).  Unknown
keys are rejected and missing required keys are reported by name, so a
config file either parses completely or fails loudly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Any

from .constants import C_LIGHT
from .dynamics import ControlEnvelope, SignalEnvelope
from .errors import ConfigurationError
from .polariton import collapse_rate
from .scheme import (CouplingTables, FieldPolarizations, LevelScheme,
                     MagneticField, SampleGeometry,
                     atoms_from_optical_thickness, build_coupling_tables,
                     calibrate_coupling, rb85_d1)
from .spectra import group_velocity

__all__ = ["ExperimentConfig", "ResolvedExperiment", "load_config",
           "parse_config", "resolve"]

SCHEME_PRESETS = {"rb85_d1": rb85_d1}


def _check_keys(section: dict, context: str, required: set[str],
                optional: set[str] = frozenset()) -> None:
    if not isinstance(section, dict):
        raise ConfigurationError(f"{context} must be a JSON object")
    for key in section:
        if key not in required and key not in optional:
            raise ConfigurationError(f"unknown key: {context}.{key}")
    for key in required:
        if key not in section:
            raise ConfigurationError(f"missing required key: {context}.{key}")


def _number(section: dict, context: str, key: str, default=None) -> float:
    if key not in section:
        if default is None:
            raise ConfigurationError(f"missing required key: {context}.{key}")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{context}.{key} must be a number")
    return float(value)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, unit-resolved experiment description."""

    scheme: LevelScheme
    pol: FieldPolarizations
    length: float
    area: float
    d_alpha: float
    control: ControlEnvelope
    signal: SignalEnvelope
    bfield: MagneticField
    nz: int
    dt: float
    t_start: float
    t_end: float
    observation_fraction: float


def _parse_scheme(section: dict) -> LevelScheme:
    if "preset" in section:
        _check_keys(section, "scheme", {"preset"},
                    {"g_g", "g_gp", "g_e", "eta_branching"})
        name = section["preset"]
        if name not in SCHEME_PRESETS:
            raise ConfigurationError(
                f"unknown scheme preset {name!r}; available: "
                + ", ".join(sorted(SCHEME_PRESETS))
            )
        base = SCHEME_PRESETS[name]()
        overrides = {}
        if "g_g" in section:
            overrides["g_g"] = _number(section, "scheme", "g_g")
        if "g_gp" in section:
            overrides["g_gp"] = _number(section, "scheme", "g_gp")
        if "g_e" in section:
            overrides["g_e"] = _number(section, "scheme", "g_e")
        if "eta_branching" in section:
            overrides["eta"] = _number(section, "scheme", "eta_branching")
        return replace(base, **overrides) if overrides else base

    required = {"f_g", "f_gp", "f_e", "gamma_e_rad_s", "g_g", "g_gp", "g_e"}
    optional = {"eta_branching", "omega_e_rad_s", "omega_gp_rad_s"}
    _check_keys(section, "scheme", required, optional)
    kwargs = dict(
        F_g=_number(section, "scheme", "f_g"),
        F_gp=_number(section, "scheme", "f_gp"),
        F_e=_number(section, "scheme", "f_e"),
        Gamma_e=_number(section, "scheme", "gamma_e_rad_s"),
        g_g=_number(section, "scheme", "g_g"),
        g_gp=_number(section, "scheme", "g_gp"),
        g_e=_number(section, "scheme", "g_e"),
    )
    if "eta_branching" in section:
        kwargs["eta"] = _number(section, "scheme", "eta_branching")
    if "omega_e_rad_s" in section:
        kwargs["omega_e"] = _number(section, "scheme", "omega_e_rad_s")
    if "omega_gp_rad_s" in section:
        kwargs["omega_gp"] = _number(section, "scheme", "omega_gp_rad_s")
    try:
        return LevelScheme(**kwargs)
    except ValueError as exc:
        raise ConfigurationError(f"scheme: {exc}") from exc


def _parse_bfield(section: dict, g_g: float) -> MagneticField:
    _check_keys(section, "bfield", set(),
                {"b_gauss", "larmor_period_s", "theta_rad"})
    theta = _number(section, "bfield", "theta_rad", 0.0)
    has_b = "b_gauss" in section
    has_tl = "larmor_period_s" in section
    if has_b == has_tl:
        raise ConfigurationError(
            "bfield requires exactly one of b_gauss or larmor_period_s"
        )
    if has_b:
        return MagneticField(b_gauss=_number(section, "bfield", "b_gauss"),
                             theta=theta)
    return MagneticField.from_larmor_period(
        _number(section, "bfield", "larmor_period_s"), g_g, theta=theta)


def parse_config(data: dict, source: str = "<config>") -> ExperimentConfig:
    """Validate a raw JSON document and build the typed configuration."""
    top_required = {"scheme", "polarizations", "geometry", "d_alpha",
                    "control", "signal", "bfield"}
    top_optional = {"grid", "observation_z_fraction"}
    _check_keys(data, source, top_required, top_optional)

    scheme = _parse_scheme(data["scheme"])

    pol_sec = data["polarizations"]
    _check_keys(pol_sec, "polarizations", {"alpha", "beta"})
    if pol_sec["alpha"] not in (1, -1) or pol_sec["beta"] not in (1, -1):
        raise ConfigurationError("polarizations.alpha and .beta must be +-1")
    pol = FieldPolarizations(alpha=int(pol_sec["alpha"]),
                             beta=int(pol_sec["beta"]))

    geo_sec = data["geometry"]
    _check_keys(geo_sec, "geometry", {"length_m"}, {"area_m2"})
    length = _number(geo_sec, "geometry", "length_m")
    area = _number(geo_sec, "geometry", "area_m2", 1.0e-6)

    d_alpha = _number(data, source, "d_alpha")
    if d_alpha <= 0:
        raise ConfigurationError("d_alpha must be positive")

    ctl_sec = data["control"]
    _check_keys(ctl_sec, "control", {"t_off_s", "ramp_s", "t_on_s"},
                {"omega_on_rad_s", "omega_on_over_gamma"})
    has_abs = "omega_on_rad_s" in ctl_sec
    has_rel = "omega_on_over_gamma" in ctl_sec
    if has_abs == has_rel:
        raise ConfigurationError(
            "control requires exactly one of omega_on_rad_s or "
            "omega_on_over_gamma"
        )
    omega_on = (_number(ctl_sec, "control", "omega_on_rad_s") if has_abs
                else _number(ctl_sec, "control", "omega_on_over_gamma")
                * scheme.Gamma_e)
    control = ControlEnvelope(
        omega_on=omega_on,
        t_off=_number(ctl_sec, "control", "t_off_s"),
        ramp=_number(ctl_sec, "control", "ramp_s"),
        t_on=_number(ctl_sec, "control", "t_on_s"),
    )

    sig_sec = data["signal"]
    _check_keys(sig_sec, "signal", {"fwhm_s", "peak_entry_time_s"},
                {"amplitude"})
    signal = SignalEnvelope(
        fwhm=_number(sig_sec, "signal", "fwhm_s"),
        peak_entry_time=_number(sig_sec, "signal", "peak_entry_time_s"),
        amplitude=_number(sig_sec, "signal", "amplitude", 1.0),
    )

    bfield = _parse_bfield(data["bfield"], scheme.g_g)

    grid_sec = data.get("grid", {})
    _check_keys(grid_sec, "grid", set(),
                {"nz", "dt_s", "t_start_s", "t_end_s"})
    nz = int(_number(grid_sec, "grid", "nz", 200))
    dt = _number(grid_sec, "grid", "dt_s", 2.5e-10)
    t_start = _number(grid_sec, "grid", "t_start_s",
                      signal.peak_entry_time - 3.0 * signal.fwhm)
    t_end = _number(grid_sec, "grid", "t_end_s", control.t_on + 8.0e-7)

    obs = _number(data, source, "observation_z_fraction", 0.5)
    if not 0.0 <= obs <= 1.0:
        raise ConfigurationError("observation_z_fraction must lie in [0, 1]")

    return ExperimentConfig(scheme=scheme, pol=pol, length=length, area=area,
                            d_alpha=d_alpha, control=control, signal=signal,
                            bfield=bfield, nz=nz, dt=dt, t_start=t_start,
                            t_end=t_end, observation_fraction=obs)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
    return parse_config(data, source=str(path))


def apply_overrides(config: ExperimentConfig, b_gauss: float | None = None,
                    larmor_period: float | None = None,
                    storage: float | None = None, nz: int | None = None,
                    dt: float | None = None) -> ExperimentConfig:
    """Apply command-line overrides on top of a parsed configuration."""
    if b_gauss is not None and larmor_period is not None:
        raise ConfigurationError(
            "b_gauss and larmor_period are mutually exclusive"
        )
    bfield = config.bfield
    if b_gauss is not None:
        bfield = MagneticField(b_gauss=b_gauss, theta=config.bfield.theta)
    elif larmor_period is not None:
        bfield = MagneticField.from_larmor_period(
            larmor_period, config.scheme.g_g, theta=config.bfield.theta)
    control = config.control
    t_end = config.t_end
    if storage is not None:
        if storage <= 0:
            raise ConfigurationError("storage duration must be positive")
        shift = (control.t_off + storage) - control.t_on
        control = ControlEnvelope(omega_on=control.omega_on,
                                  t_off=control.t_off, ramp=control.ramp,
                                  t_on=control.t_off + storage)
        t_end = config.t_end + shift
    return replace(config, bfield=bfield, control=control, t_end=t_end,
                   nz=nz if nz is not None else config.nz,
                   dt=dt if dt is not None else config.dt)


@dataclass(frozen=True)
class ResolvedExperiment:
    """Fully assembled experiment: typed physics objects plus the derived
    constants, ready to feed the integrator and the analysis commands."""

    scheme: LevelScheme
    pol: FieldPolarizations
    tables: CouplingTables
    geometry: SampleGeometry
    d_alpha: float
    control: ControlEnvelope
    signal: SignalEnvelope
    bfield: MagneticField
    nz: int
    dt: float
    t_start: float
    t_end: float
    observation_fraction: float

    def derived(self) -> dict:
        coupling = calibrate_coupling(self.d_alpha, self.scheme,
                                      self.geometry, self.pol)
        return {
            "d_alpha": self.d_alpha,
            "n_atoms": self.geometry.n_atoms,
            "n_kappa_sq_rad2_s2": coupling,
            "v_g_m_s": group_velocity(self.tables, self.geometry, coupling,
                                      self.control.omega_on),
            "larmor_period_s": self.bfield.larmor_period(self.scheme.g_g),
            "b_gauss": self.bfield.b_gauss,
            "collapse_rate": collapse_rate(self.tables),
        }

    def echo(self) -> dict:
        s = self.scheme
        return {
            "scheme": {
                "f_g": s.F_g.value, "f_gp": s.F_gp.value, "f_e": s.F_e.value,
                "gamma_e_rad_s": s.Gamma_e,
                "g_g": s.g_g, "g_gp": s.g_gp, "g_e": s.g_e,
                "eta_branching": s.eta,
                "omega_e_rad_s": s.omega_e,
                "omega_gp_rad_s": s.omega_gp,
            },
            "polarizations": {"alpha": self.pol.alpha, "beta": self.pol.beta},
            "geometry": {
                "length_m": self.geometry.length,
                "area_m2": self.geometry.area,
                "n_atoms": self.geometry.n_atoms,
                "p": self.geometry.p,
            },
            "d_alpha": self.d_alpha,
            "control": {
                "omega_on_rad_s": self.control.omega_on,
                "t_off_s": self.control.t_off,
                "ramp_s": self.control.ramp,
                "t_on_s": self.control.t_on,
            },
            "signal": {
                "fwhm_s": self.signal.fwhm,
                "peak_entry_time_s": self.signal.peak_entry_time,
                "amplitude": self.signal.amplitude,
            },
            "bfield": {
                "b_gauss": self.bfield.b_gauss,
                "theta_rad": self.bfield.theta,
            },
            "grid": {"nz": self.nz, "dt_s": self.dt,
                     "t_start_s": self.t_start, "t_end_s": self.t_end},
            "observation_z_fraction": self.observation_fraction,
        }


def resolve(config: ExperimentConfig) -> ResolvedExperiment:
    """Build coupling tables and geometry; raises InfeasibleSchemeError for
    an unconnected-lambda scheme."""
    tables = build_coupling_tables(config.scheme, config.pol)
    n_atoms = atoms_from_optical_thickness(config.d_alpha, config.scheme,
                                           config.area, config.pol)
    geometry = SampleGeometry.for_scheme(config.scheme, config.length,
                                         config.area, n_atoms)
    return ResolvedExperiment(
        scheme=config.scheme, pol=config.pol, tables=tables,
        geometry=geometry, d_alpha=config.d_alpha, control=config.control,
        signal=config.signal, bfield=config.bfield, nz=config.nz,
        dt=config.dt, t_start=config.t_start, t_end=config.t_end,
        observation_fraction=config.observation_fraction,
    )
