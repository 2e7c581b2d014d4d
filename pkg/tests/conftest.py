import random

import pytest
from mpmath import mp, mpc, workprec


@pytest.fixture
def prec128():
    with workprec(128):
        yield


@pytest.fixture
def rng():
    return random.Random(20240811)


def rand_point(rng, x_span=0.5, y_lo=0.6, y_hi=1.8):
    return mpc(
        (rng.random() - 0.5) * 2 * x_span,
        y_lo + rng.random() * (y_hi - y_lo),
    )


def rand_pair_with_r(rng, r_lo=0.15, r_hi=0.92):
    """Random (z, base) whose disk-coordinate separation is moderate."""
    from polar_maass.geometry import r_theta

    while True:
        z = rand_point(rng)
        zz = rand_point(rng)
        r, _ = r_theta(zz, z)
        if r_lo <= r <= r_hi:
            return z, zz
