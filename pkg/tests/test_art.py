import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sfem import art
from oracles import fuzzy_choice

unit = st.floats(0.0, 1.0, allow_nan=False)
vec = st.lists(unit, min_size=1, max_size=8)


@given(vec)
def test_complement_code_has_norm_d(v):
    x = art.complement_code(v)
    assert x.size == 2 * len(v)
    assert np.sum(x) == pytest.approx(len(v), abs=1e-12)


@pytest.mark.parametrize("bad", [[-0.1], [1.5], [float("nan")]])
def test_complement_code_rejects_out_of_range(bad):
    with pytest.raises(art.DomainError):
        art.complement_code(bad)


def test_params_validation():
    with pytest.raises(art.DomainError):
        art.ArtParams(alpha=0.0)
    with pytest.raises(art.DomainError):
        art.ArtParams(gamma=(0.5, 0.5), rho=(0.9,))
    with pytest.raises(art.DomainError):
        art.ArtParams(beta=1.2)


@settings(max_examples=60)
@given(st.lists(st.tuples(unit, unit, unit), min_size=1, max_size=5), st.tuples(unit, unit, unit))
def test_choice_matches_direct_formula(ws, xin):
    params = art.ArtParams((1.0,), 0.01, 0.5, (0.9,))
    x = art.complement_code(xin)
    nodes = [art.commit_new([art.complement_code(w)], i) for i, w in enumerate(ws)]
    T = art.choice_activation([x], nodes, params)
    want = [fuzzy_choice(list(x), list(art.complement_code(w)), 0.01) for w in ws]
    assert T == pytest.approx(want, rel=1e-12)


def test_compete_lowest_index_on_ties():
    assert art.compete([0.3, 0.7, 0.7, 0.1]) == 1
    assert art.compete([]) is None


def test_template_match_boundary_is_inclusive():
    # 9 of 10 ones overlap: match is exactly 0.9 with these values
    x = np.ones(10)
    w = np.ones(10)
    w[0] = 0.0
    m, ok = art.template_match([x], art.CategoryNode([w]), (0.9,))
    assert m[0] == 0.9
    assert ok


def test_template_match_zero_width_channel():
    m, ok = art.template_match([np.array([1.0, 0.0]), np.zeros(0)], art.CategoryNode([np.array([1.0, 0.0]), np.zeros(0)]), (1.0, 1.0))
    assert m == [1.0, 1.0] and ok


@given(st.lists(st.tuples(unit, unit), min_size=1, max_size=6), st.floats(0.0, 1.0))
def test_learning_never_increases_weights(inputs, beta):
    node = art.commit_new([art.complement_code(inputs[0])])
    for xin in inputs[1:]:
        before = node.weights[0].copy()
        art.template_learn([art.complement_code(xin)], node, beta)
        assert np.all(node.weights[0] <= before + 1e-15)


def test_fast_learning_gives_fuzzy_and():
    node = art.commit_new([np.array([0.6, 0.4])])
    art.template_learn([np.array([0.3, 0.7])], node, 1.0)
    assert node.weights[0].tolist() == [0.3, 0.4]


def test_dimension_mismatch_raises():
    node = art.commit_new([np.zeros(4)])
    with pytest.raises(art.DomainError):
        art.choice_activation([np.zeros(3)], [node], art.ArtParams())


@settings(max_examples=60)
@given(st.lists(st.floats(0.5, 1.0), min_size=2, max_size=5), st.data())
def test_vigilance_modulation_scales_and_can_reorder(rhos, data):
    params = art.ArtParams((1.0,), 0.01, 0.5, (0.9,))
    ws = [data.draw(st.tuples(unit, unit)) for _ in rhos]
    nodes = [art.commit_new([art.complement_code(w)], i) for i, w in enumerate(ws)]
    x = [art.complement_code(data.draw(st.tuples(unit, unit)))]
    plain = art.choice_activation(x, nodes, params)
    mod = art.choice_activation(x, nodes, params, vigilances=rhos, rho_init=0.9)
    assert mod == pytest.approx([t * 0.9 / r for t, r in zip(plain, rhos)], rel=1e-12)
    # equal vigilances reduce to the plain choice
    same = art.choice_activation(x, nodes, params, vigilances=[0.9] * len(rhos), rho_init=0.9)
    assert same == pytest.approx(plain, rel=1e-15)


def test_lower_vigilance_boosts_winner():
    params = art.ArtParams((1.0,), 0.01, 0.5, (0.9,))
    x = [art.complement_code([0.5])]
    nodes = [art.commit_new([art.complement_code([0.5])], 0), art.commit_new([art.complement_code([0.45])], 1)]
    assert art.compete(art.choice_activation(x, nodes, params)) == 0
    T = art.choice_activation(x, nodes, params, vigilances=[0.99, 0.9 * 0.95], rho_init=0.9)
    assert art.compete(T) == 1
