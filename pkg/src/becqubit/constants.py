"""Physical constants (CODATA 2018, 10 significant digits) and the reference scenario scales.

Everything downstream converts to SI internally; these are the only hard-coded
numbers in the package.
"""

# Reduced Planck constant, J*s (exact by SI definition of h)
HBAR = 1.054571817e-34

# Atomic mass unit, kg
ATOMIC_MASS_KG = 1.660539067e-27

# Bohr radius, m
BOHR_RADIUS = 5.291772109e-11

# Isotope masses in atomic mass units
MASS_RB87_U = 86.909
MASS_NA23_U = 22.990

# Natural s-wave scattering length of 87Rb, m.  Used as the reference unit
# a_Rb when quoting scattering lengths as dimensionless ratios.
A_RB = 5.3e-9
