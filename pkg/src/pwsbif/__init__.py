"""Analysis toolkit for regularized planar two-zone systems.

Covers the singular-limit (Filippov) analysis of focus-boundary collisions,
blow-up coordinate charts with the desingularized unfolding system,
analytic and numeric bifurcation curves, relaxation-oscillation convergence
studies, and two worked application models (a predator-prey system with a
sharp functional response and a friction oscillator).
"""

from . import applications, bifurcation, blowup, cli, dynamics, filippov, normalform, regfun
from .errors import (
    BudgetError,
    ConfigurationError,
    DegenerateError,
    DetectionError,
    NoCycleError,
    OutOfChartError,
    PwsbifError,
    StiffnessError,
)

__version__ = "0.1.0"
