import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fnn.logic import (
    BoundaryMode,
    LogicNeuron,
    NeuronKind,
    Uninorm,
    activations,
    andneuron_eval,
    neuron_eval,
    orneuron_eval,
    s_norm,
    t_norm,
    unineuron_eval,
    uninorm_eval,
    weighted_transform,
)

unit = st.floats(0.0, 1.0, allow_nan=False)


def test_t_norm_examples():
    assert t_norm(0.3, 1.0) == 0.3
    assert t_norm(0.3, 0.0) == 0.0
    assert t_norm(0.5, 0.8) == pytest.approx(0.4, abs=1e-15)


def test_s_norm_examples():
    assert s_norm(0.3, 0.0) == 0.3
    assert s_norm(0.3, 1.0) == 1.0
    assert s_norm(0.5, 0.8) == pytest.approx(0.9, abs=1e-15)


@pytest.mark.parametrize("fn", [t_norm, s_norm])
@pytest.mark.parametrize("bad", [(-0.1, 0.5), (0.5, 1.2), (float("nan"), 0.5)])
def test_norms_reject_out_of_range(fn, bad):
    with pytest.raises(ValueError):
        fn(*bad)


def test_uninorm_examples():
    u = Uninorm(0.5)
    assert uninorm_eval(u, 0.4, 0.4) == pytest.approx(0.32, abs=1e-15)
    assert uninorm_eval(u, 0.6, 0.8) == pytest.approx(0.84, abs=1e-15)
    assert uninorm_eval(u, 0.2, 0.8) == 0.8
    assert uninorm_eval(Uninorm(0.5, BoundaryMode.MIN), 0.2, 0.8) == 0.2


def test_uninorm_rejects_bad_identity():
    with pytest.raises(ValueError):
        Uninorm(1.5)
    with pytest.raises(ValueError):
        uninorm_eval(Uninorm(0.5), 0.2, 1.1)


@given(unit, unit)
def test_uninorm_identity(g, x):
    assert uninorm_eval(Uninorm(g), x, g) == pytest.approx(x, abs=1e-12)


@given(unit, unit, unit, st.sampled_from(list(BoundaryMode)))
def test_uninorm_commutative_and_closed(g, x, y, mode):
    u = Uninorm(g, mode)
    a, b = uninorm_eval(u, x, y), uninorm_eval(u, y, x)
    assert a == pytest.approx(b, abs=1e-12)
    assert -1e-12 <= a <= 1 + 1e-12


@given(unit, unit, unit, unit)
def test_uninorm_monotone_within_region(g, x, y1, y2):
    y1, y2 = sorted((y1, y2))
    u = Uninorm(g)
    # same branch region for both evaluations
    same = (max(x, y2) <= g) or (min(x, y1) >= g)
    if same:
        assert uninorm_eval(u, x, y1) <= uninorm_eval(u, x, y2) + 1e-12


def test_uninorm_boundary_reductions_on_grid():
    grid = np.linspace(0, 1, 41)
    X, Y = np.meshgrid(grid, grid)
    np.testing.assert_allclose(uninorm_eval(Uninorm(1.0), X, Y), X * Y, atol=1e-12)
    np.testing.assert_allclose(uninorm_eval(Uninorm(0.0), X, Y), X + Y - X * Y, atol=1e-12)


def test_weighted_transform_examples():
    assert weighted_transform(1.0, 0.7, 0.3) == 0.7
    assert weighted_transform(0.0, 0.7, 0.3) == 0.3
    assert weighted_transform(0.5, 0.8, 0.2) == pytest.approx(0.5, abs=1e-15)


@given(unit, unit, unit)
def test_weighted_transform_is_convex(w, a, g):
    h = weighted_transform(w, a, g)
    assert min(a, g) - 1e-12 <= h <= max(a, g) + 1e-12


def _mem(values):
    """Membership matrix with one row per feature and the given value in column 0."""
    m = np.full((len(values), 2), 0.5)
    m[:, 0] = values
    return m


def test_unineuron_examples():
    mem = _mem([0.3, 0.7])
    single = LogicNeuron(NeuronKind.UNI, ((0, 0),), (1.0,), 0.4)
    assert unineuron_eval(single, mem) == 0.3
    both = [(0, 0), (1, 0)]
    t_reg = LogicNeuron(NeuronKind.UNI, both, (1.0, 1.0), 1.0)
    s_reg = LogicNeuron(NeuronKind.UNI, both, (1.0, 1.0), 0.0)
    assert unineuron_eval(t_reg, mem) == pytest.approx(0.21, abs=1e-15)
    assert unineuron_eval(s_reg, mem) == pytest.approx(0.3 + 0.7 - 0.21, abs=1e-15)


def test_andneuron_examples():
    mem = _mem([0.5, 0.8])
    ants = ((0, 0), (1, 0))
    assert andneuron_eval(LogicNeuron("and", ants, (0, 0)), mem) == pytest.approx(0.4, abs=1e-15)
    assert andneuron_eval(LogicNeuron("and", ants, (1, 0)), mem) == pytest.approx(0.8, abs=1e-15)


def test_orneuron_examples():
    mem = _mem([0.5, 0.8])
    ants = ((0, 0), (1, 0))
    assert orneuron_eval(LogicNeuron("or", ants, (0, 0)), mem) == 0.0
    assert orneuron_eval(LogicNeuron("or", ants, (1, 1)), mem) == pytest.approx(0.9, abs=1e-15)
    assert orneuron_eval(LogicNeuron("or", ((0, 0),), (1,)), mem) == 0.5


def test_neuron_validation():
    with pytest.raises(ValueError):
        LogicNeuron("uni", (), ())
    with pytest.raises(ValueError):
        LogicNeuron("uni", ((0, 0), (0, 0)), (0.5, 0.5))
    with pytest.raises(ValueError):
        LogicNeuron("uni", ((0, 0),), (1.5,))
    with pytest.raises(ValueError):
        unineuron_eval(LogicNeuron("uni", ((3, 0),), (1.0,)), np.ones((2, 2)))


@settings(max_examples=50)
@given(st.lists(unit, min_size=4, max_size=4), st.lists(unit, min_size=2, max_size=2))
def test_and_or_bounds(a, w):
    mem = np.array(a).reshape(2, 2)
    ants = ((0, 0), (1, 1))
    pairs = [(mem[0, 0], w[0]), (mem[1, 1], w[1])]
    z_and = andneuron_eval(LogicNeuron("and", ants, w), mem)
    z_or = orneuron_eval(LogicNeuron("or", ants, w), mem)
    assert z_and <= min(ai + wi - ai * wi for ai, wi in pairs) + 1e-12
    assert z_or >= max(ai * wi for ai, wi in pairs) - 1e-12


def test_unineuron_order_invariant_within_one_region():
    rng = np.random.default_rng(3)
    for _ in range(200):
        g = rng.uniform(0.2, 0.8)
        n = 4
        # all transformed values below g -> pure scaled t-norm region
        vals = rng.uniform(0, g, size=n)
        mem = vals.reshape(n, 1)
        ants = [(j, 0) for j in range(n)]
        z = unineuron_eval(LogicNeuron("uni", ants, (1.0,) * n, g), mem)
        for perm in itertools.islice(itertools.permutations(range(n)), 6):
            z2 = unineuron_eval(LogicNeuron("uni", [ants[i] for i in perm], (1.0,) * n, g), mem)
            assert z2 == pytest.approx(z, abs=1e-12)


def test_batch_activations_match_scalar_eval():
    rng = np.random.default_rng(0)
    mem = rng.uniform(size=(7, 3, 2))
    neurons = []
    for kind in NeuronKind:
        for _ in range(4):
            n = int(rng.integers(1, 4))
            feats = rng.choice(3, size=n, replace=False)
            ants = tuple((int(j), int(rng.integers(0, 2))) for j in feats)
            neurons.append(LogicNeuron(kind, ants, tuple(rng.uniform(size=n)), float(rng.uniform())))
    for mode in BoundaryMode:
        A = activations(neurons, mem, mode)
        for i, nrn in enumerate(neurons):
            for k in range(mem.shape[0]):
                assert A[k, i] == pytest.approx(neuron_eval(nrn, mem[k], mode), abs=1e-14)
        assert np.all((A >= 0) & (A <= 1))
