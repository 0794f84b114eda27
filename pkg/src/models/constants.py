# CODATA 2018 values, SI units
HBAR = 1.054571817e-34   # J s
C = 299792458.0          # m / s
KB = 1.380649e-23        # J / K

# Perturbative validity bound on epsilon = delta_L0 / L
EPSILON_MAX = 1e-2

# Drive ramp must exceed the mirror frequency by this factor
DRIVE_RAMP_FACTOR = 10.0

# Resonance detection tolerance, in units of the fundamental cavity frequency
RESONANCE_TOLERANCE = 1e-6

DEFAULT_NUM_MODES = 64
