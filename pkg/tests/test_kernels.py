import os
import subprocess
import sys

import numpy as np
import pytest

from carnot_ineq import _kernels
from carnot_ineq.group import make_heisenberg, random_step_two
from carnot_ineq.measures import BoltzmannMeasure, GProfile, mcmc_sample

needs_compiled = pytest.mark.skipif(not _kernels.compiled_available(), reason="compiled kernel not built")

PROFILES = [GProfile.power(4), GProfile.cosh_power(2), GProfile.power_log(3), GProfile.alpha_power(2.5, 0.7)]


def test_profile_codes_cover_builtins():
    assert set(_kernels.PROFILE_CODES) == {"power", "cosh_power", "power_log", "alpha_power"}
    assert _kernels.get_backend("python").run_segment is not None
    with pytest.raises(ValueError):
        _kernels.get_backend("fortran")


@needs_compiled
@pytest.mark.parametrize("prof", PROFILES, ids=lambda p: p.label)
def test_backends_bit_identical(prof):
    for G in (make_heisenberg(1), random_step_two(4, 2, seed=3)):
        mu = BoltzmannMeasure(G, prof)
        a = mcmc_sample(mu, 10_000, seed=5, backend="cython")
        b = mcmc_sample(mu, 10_000, seed=5, backend="python")
        assert a.backend == "cython" and b.backend == "python"
        assert np.array_equal(a.x, b.x) and np.array_equal(a.z, b.z)
        assert a.acceptance_rate == b.acceptance_rate


def test_pure_python_fallback_env():
    code = (
        "from carnot_ineq import _kernels; from carnot_ineq.measures import *; "
        "from carnot_ineq.group import make_heisenberg; "
        "ch = mcmc_sample(BoltzmannMeasure(make_heisenberg(1), GProfile.power(4)), 10000, 0); "
        "print(_kernels.BACKEND, ch.backend)"
    )
    env = dict(os.environ, CARNOT_INEQ_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["python", "python"]
    assert not out.stderr
