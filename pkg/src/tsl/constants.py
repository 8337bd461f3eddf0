"""Physical constants, kept in one place so every formula agrees."""

# Speed of light, m/s. Deliberately rounded to 4 significant figures: the
# reference numbers this package reproduces were computed with this value.
C_LIGHT = 2.998e8

# CODATA 2018
HBAR = 1.054571817e-34         # reduced Planck constant, J s
K_BOLTZMANN = 1.380649e-23     # Boltzmann constant, J/K (exact)
ATOMIC_MASS = 1.66053906660e-27  # unified atomic mass unit, kg

# Molecular nitrogen, the default residual gas species, kg
M_NITROGEN = 28.0134 * ATOMIC_MASS
