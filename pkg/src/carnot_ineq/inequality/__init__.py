"""Functionals, test-function catalogs and constant fitting."""

from .catalog import CATALOGS, InequalityReport, catalog_functions, run_catalog
from .estimators import beta_entropy, energy, lq_mean_deviation, mass, phi_entropy, ubound_lhs
from .fit import fit_constants, is_feasible
from .functions import TestFunction, apply_exterior_cutoff, base_catalog
from .phi import PhiProfile, phi_from_dict
