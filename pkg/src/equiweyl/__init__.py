"""Numerical experiments on spectral asymptotics under group symmetry.

Model manifolds (round sphere, flat torus, surfaces of revolution) carry
circle or finite-cyclic actions; the package measures reduced spectral
functions, counting asymptotics, eigenfunction concentration, cluster
L^p growth, and the oscillatory-integral machinery behind them, and
compares each against closed-form or independently derived predictions.
"""

from . import (  # noqa: F401
    cli,
    eigensolve,
    errors,
    geometry,
    lab,
    specfun,
    spectral,
    statphase,
    util,
    weylcoef,
)
from .errors import EquiweylError  # noqa: F401
from .lab import (  # noqa: F401
    EXPERIMENTS,
    PowerLawFit,
    fit_power_law,
    run_experiment,
    run_suite,
)

__version__ = "0.1.0"
