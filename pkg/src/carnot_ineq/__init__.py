"""Step-two Carnot groups, homogeneous norms, Boltzmann measures and
empirical tests of coercive inequalities (Poincare, U-bound, Log^beta-Sobolev)."""

__version__ = "0.1.0"
