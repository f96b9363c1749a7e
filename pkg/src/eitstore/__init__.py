"""Simulation and analysis of light storage in a degenerate EIT medium.

The package covers the full chain from exact angular-momentum algebra
through frequency-domain EIT observables and time-domain Maxwell-Bloch
storage/retrieval dynamics to the dark-state-polariton collapse/revival
efficiency analysis.
"""

from .angmom import (HalfInt, RotationMatrix, clebsch_gordan, projections,
                     rotation_matrix, spin_x_matrix, spin_xz_matrix,
                     spin_z_matrix, wigner_small_d)
from .config import (ExperimentConfig, ResolvedExperiment, load_config,
                     parse_config, resolve)
from .constants import C_LIGHT, LARMOR_RATE_PER_GAUSS
from .dynamics import (CoherenceState, ControlEnvelope, FlatTopEnvelope,
                       SignalEnvelope, SimulationRecord,
                       StorageRetrievalSimulation, evolve_storage_analytic,
                       measure_resonant_transmittance, run_protocol)
from .errors import (ConfigurationError, InfeasibleSchemeError,
                     NumericalInstabilityError, UndefinedPolaritonBasisError)
from .polariton import (EfficiencyCurve, PolaritonDecomposition,
                        collapse_rate, decompose, decompose_profile,
                        efficiency_curve, polariton_unit_vector,
                        retrieval_efficiency, revival_surface,
                        transverse_half_period_revival)
from .scheme import (CouplingTables, FeasibilityReport, FieldPolarizations,
                     LevelScheme, MagneticField, SampleGeometry,
                     atoms_from_optical_thickness, build_coupling_tables,
                     calibrate_coupling, check_eit_feasibility,
                     optical_thickness, rb85_d1)
from .spectra import (SusceptibilityResult, group_velocity, susceptibility,
                      transparency_scan)

__version__ = "0.1.0"
