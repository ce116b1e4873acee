"""Meta distribution of the SIR in Poisson bipolar and cellular networks."""

__version__ = "0.1.0"

from . import (beta_approx, bipolar_model, cellular_model, cli, gil_pelaez, mc_simulator,  # noqa: E402
               moment_bounds, special_functions)
from .errors import *  # noqa: E402,F401,F403
