"""L1-scheme / P1 finite element solver for time-fractional diffusion in 1D with
a posteriori error estimators based on linear and quadratic space-time
reconstructions."""
from .core import (ConfigError, ProblemSpec, RunConfig, SpaceMesh, TimeMesh, auto_grading,
                   load_run_config, make_graded_time_mesh, make_uniform_space_mesh, validate)
from .fem1d import FESpace, Tridiag
from .l1_stepper import Trajectory, discrete_caputo, eval_Uh, l1_coefficient, march
from .reconstruct import ReconPack, build_recon_pack, eval_Uhat, hat_W

__version__ = "0.1.0"
