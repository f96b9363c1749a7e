"""Physical constants used across the package.

Lengths and times are SI.  Magnetic fields are specified in gauss at the
boundary, so the Larmor conversion constant is pinned per gauss.
"""

import math

#: Speed of light in vacuum (m/s).
C_LIGHT = 2.99792458e8

#: Bohr magneton divided by hbar, per gauss: 2*pi * 1.399624 MHz/G.
#: Multiplying by a field magnitude in gauss gives the bare precession
#: rate omega_B in rad/s (Lande factor not included).
LARMOR_RATE_PER_GAUSS = 2.0 * math.pi * 1.399624e6
