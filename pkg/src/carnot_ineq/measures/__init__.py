"""Radial potentials, growth conditions, Boltzmann measures and sampling."""

from .conditions import (
    ConditionReport,
    check_eta_unbounded,
    check_theorem1_condition,
    check_theorem11_conditions,
)
from .profiles import GProfile, g_d1, g_d2, g_eval, profile_from_dict
from .quadrature import (
    BoltzmannMeasure,
    estimate_log_z,
    radial_moments,
    radial_quadrature,
    sphere_area,
)
from .sampler import Chain, effective_sample_size, integrated_autocorr_time, mcmc_sample
