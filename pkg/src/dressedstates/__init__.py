"""Dressed bound states of a 1D soft-core atom in a strong laser field.

Field-free spectrum, Crank-Nicolson TDSE propagation, four families of
dressed bound states and a first-order model for attosecond-probe
transitions between them, with full two-pulse TDSE runs as the reference.
"""

__version__ = "0.1.0"
