import math

import numpy as np
import pytest

from shearlab import build_surface


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def s11():
    return build_surface("s_1_1")


BUILTIN_NAMES = ["s_1_1", "s_0_3", "s_0_4", "s_1_2"]


def mutation_oracle(sv, edge_id):
    """Derived closed-form flip rule, used only as an oracle against the
    geometric implementation: the diagonal negates, the ccw quad sides f12 and
    f34 gain ln(1+e^E), f23 and f41 lose ln(1+e^-E), with multiplicity when an
    edge occupies several slots."""
    T = sv.triangulation
    fd = T.flip_data(edge_id)
    E = sv.values[fd.edge]
    vals = list(sv.values)
    vals[fd.edge] = -E
    deltas = (
        math.log1p(math.exp(E)),
        -math.log1p(math.exp(-E)),
        math.log1p(math.exp(E)),
        -math.log1p(math.exp(-E)),
    )
    acc = {}
    for slot, d in zip(fd.slots, deltas):
        f = T.side_edge(slot)
        acc[f] = acc.get(f, 0.0) + d
    for f, d in acc.items():
        vals[f] = sv.values[f] + d
    return vals
