"""Shared fixtures: the reference parameter set and its spreading variant."""

import numpy as np
import pytest

from pulsefront import GrowthSpec, ModelParams, PulseSpec, bump_kernel


@pytest.fixture(scope="session")
def kernel():
    return bump_kernel(3.0)


@pytest.fixture(scope="session")
def params51():
    """Reference rate set: weak growth slope, vanishing-dominated."""
    return ModelParams(
        d1=0.10, d2=0.10, a11=0.35, a12=0.11, a22=0.10,
        mu1=20.0, mu2=200.0, tau=1.0, h0=2.0,
    )


@pytest.fixture(scope="session")
def growth51():
    return GrowthSpec.saturating(0.5, 10.0)


@pytest.fixture(scope="session")
def growth_spread():
    """Steep growth slope G'(0)=0.5: the dispersal-free eigenvalue turns
    negative and outcomes depend on domain size and expansion capacities."""
    return GrowthSpec.saturating(0.5, 1.0)


@pytest.fixture(scope="session")
def identity_pulse():
    return PulseSpec.identity()


@pytest.fixture(scope="session")
def bh_pulse():
    """Saturating pulse with derivative 0.01 at zero."""
    return PulseSpec.beverton_holt(0.1, 10.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
