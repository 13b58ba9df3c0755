import math

import numpy as np
import pytest

from fracpost.cli import example_problem
from fracpost.core import ProblemSpec, make_graded_time_mesh, make_uniform_space_mesh
from fracpost.l1_stepper import march


def zero(x, *args):
    return np.zeros_like(np.asarray(x, dtype=float))


def one(x, *args):
    return np.ones_like(np.asarray(x, dtype=float))


def zero_problem(alpha=0.5):
    return ProblemSpec(alpha=alpha, T=1.0, diffusion=one, source=zero, initial=zero,
                       exact=zero, diffusion_prime=zero, name="zero")


def steady_problem(alpha=0.5, c=1.0):
    """u(x, t) = c sin(pi x), f = c pi^2 sin(pi x): time independent."""
    return ProblemSpec(alpha=alpha, T=1.0, diffusion=one,
                       source=lambda x, t: c * math.pi ** 2 * np.sin(math.pi * x),
                       initial=lambda x: c * np.sin(math.pi * x),
                       exact=lambda x, t: c * np.sin(math.pi * x) + 0 * t,
                       diffusion_prime=zero, name="steady")


def scaled_problem(base, c):
    return ProblemSpec(alpha=base.alpha, T=base.T, diffusion=base.diffusion,
                       source=lambda x, t: c * base.source(x, t),
                       initial=lambda x: c * base.initial(x),
                       exact=lambda x, t: c * base.exact(x, t),
                       diffusion_prime=base.diffusion_prime, name="scaled")


def run(spec, N=8, M=16, r=1.0):
    return march(spec, make_graded_time_mesh(spec.T, N, r), make_uniform_space_mesh(M))


@pytest.fixture(scope="session")
def smooth_traj():
    return run(example_problem("smooth", 0.5), N=16, M=32)


@pytest.fixture(scope="session")
def graded_traj():
    return run(example_problem("nonsmooth", 0.4), N=12, M=24, r=3.0)
