"""Shared fixtures: the two worked example networks, their published
equivalent forms (7-digit values), and a random connected-network generator."""

import numpy as np
import pytest

from porous_equiv import NetworkSpec, build_state_space

# Example 1: four compartments, non-controllable by eigenvector coincidence.
EXAMPLE1_SPEC = NetworkSpec(
    volumes=(1.0, 1.0, 2.0, 3.0),
    edges=((1, 2, 1.0), (1, 3, 2.0), (1, 4, 3.0), (2, 3, 3.0), (2, 4, 3.0)),
    flow=1.0,
)
EXAMPLE1_A = np.array([
    [-7.0, 1.0, 2.0, 3.0],
    [1.0, -7.0, 3.0, 3.0],
    [1.0, 1.5, -2.5, 0.0],
    [1.0, 1.0, 0.0, -2.0],
])
EXAMPLE1_REDUCED_A = np.array([[-7.0, 6.0], [1.0, -1.0]])

# Example 2: five equal-volume compartments, controllable.
EXAMPLE2_SPEC = NetworkSpec(
    volumes=(1.0, 1.0, 1.0, 1.0, 1.0),
    edges=((1, 2, 1.0), (1, 3, 2.0), (3, 4, 1.0), (3, 5, 3.0), (4, 5, 1.0)),
    flow=1.0,
)
EXAMPLE2_A = np.array([
    [-4.0, 1.0, 2.0, 0.0, 0.0],
    [1.0, -1.0, 0.0, 0.0, 0.0],
    [2.0, 0.0, -6.0, 1.0, 3.0],
    [0.0, 0.0, 1.0, -2.0, 1.0],
    [0.0, 0.0, 3.0, 1.0, -4.0],
])
EXAMPLE2_CTRB = np.array([
    [1.0, -4.0, 21.0, -129.0, 906.0],
    [0.0, 1.0, -5.0, 26.0, -155.0],
    [0.0, 2.0, -20.0, 182.0, -1614.0],
    [0.0, 0.0, 2.0, -18.0, 136.0],
    [0.0, 0.0, 6.0, -82.0, 856.0],
])

# Published equivalent star form of Example 2 (zones ordered by descending
# rate there; our canonical order is ascending).
EXAMPLE2_MRMT = np.array([
    [-4.0, 0.3256267, 0.1692779, 1.0, 1.5050954],
    [8.1710298, -8.1710298, 0.0, 0.0, 0.0],
    [3.3115831, 0.0, -3.3115831, 0.0, 0.0],
    [1.0, 0.0, 0.0, -1.0, 0.0],
    [0.5173871, 0.0, 0.0, 0.0, -0.5173871],
])
EXAMPLE2_MRMT_RATES = (8.1710298, 3.3115831, 1.0, 0.5173871)
EXAMPLE2_MRMT_VOLUMES = (1.0, 0.0398514, 0.0511169, 1.0, 2.9090317)

# Published equivalent chain form of Example 2 (canonical ordering).
EXAMPLE2_MINC = np.array([
    [-4.0, 3.0, 0.0, 0.0, 0.0],
    [1.6666667, -5.0, 3.3333333, 0.0, 0.0],
    [0.0, 3.6, -4.1333333, 0.5333333, 0.0],
    [0.0, 0.0, 2.4666667, -2.9207207, 0.4540541],
    [0.0, 0.0, 0.0, 0.9459459, -0.9459459],
])
EXAMPLE2_MINC_VOLUMES = (1.0, 1.8, 1.6666667, 0.3603604, 0.1729730)
EXAMPLE2_MINC_RATES = (3.0, 6.0, 0.8888889, 0.1636231)

EXAMPLE2_TF_NUM = (14.0, 47.0, 45.0, 13.0, 1.0)
EXAMPLE2_TF_DEN = (14.0, 117.0, 187.0, 92.0, 17.0, 1.0)

# Published 3-compartment reductions of Example 2 and their transfer
# functions (ascending coefficients).
REDUCED_MRMT_TF = (
    (0.5173871, 1.5173871, 1.0),
    (0.5173871, 4.8359736, 5.0224825, 1.0),
)
REDUCED_MINC_A = np.array([
    [-4.0, 3.0, 0.0],
    [1.6666667, -5.0, 3.3333333],
    [0.0, 3.6, -3.6],
])
REDUCED_MINC_TF = ((6.0, 8.6, 1.0), (6.0, 35.4, 12.6, 1.0))


@pytest.fixture
def example1():
    ss, dec = build_state_space(EXAMPLE1_SPEC)
    return ss, dec


@pytest.fixture
def example2():
    ss, dec = build_state_space(EXAMPLE2_SPEC)
    return ss, dec


def random_network(rng, n=None, vol_range=(1e-2, 1e2), rate_range=(1e-2, 1e2),
                   extra_edge_prob=0.35) -> NetworkSpec:
    """Random connected network: a spanning tree plus optional chords."""
    if n is None:
        n = int(rng.integers(2, 9))
    log_lo, log_hi = np.log10(vol_range[0]), np.log10(vol_range[1])
    volumes = 10.0 ** rng.uniform(log_lo, log_hi, size=n)
    volumes[0] = 1.0  # keep the normalized convention in the fixtures
    r_lo, r_hi = np.log10(rate_range[0]), np.log10(rate_range[1])

    edges = []
    present = set()
    for child in range(1, n):
        parent = int(rng.integers(0, child))
        d = float(10.0 ** rng.uniform(r_lo, r_hi))
        edges.append((parent + 1, child + 1, d))
        present.add((parent, child))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) in present:
                continue
            if rng.random() < extra_edge_prob:
                d = float(10.0 ** rng.uniform(r_lo, r_hi))
                edges.append((i + 1, j + 1, d))
    return NetworkSpec(volumes=tuple(volumes), edges=tuple(edges), flow=1.0)
