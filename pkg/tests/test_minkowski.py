import numpy as np
import pytest

from minkhelix.errors import NullVector
from minkhelix.minkowski import (
    CausalCharacter,
    causal_character,
    euclid_norm,
    gram_matrix,
    inner,
    normalize,
    pseudo_norm,
    vec4,
)


@pytest.mark.parametrize("u, expected", [
    ((1, 0, 0, 0), -1.0),
    ((0, 1, 0, 0), 1.0),
    ((1, 1, 0, 0), 0.0),
])
def test_inner_examples(u, expected):
    assert inner(u, u) == expected


def test_standard_basis_signature():
    assert np.array_equal(gram_matrix(np.eye(4)), np.diag([-1.0, 1, 1, 1]))


@pytest.mark.parametrize("v, expected", [((2, 0, 0, 0), 2.0), ((1, 1, 0, 0), 0.0), ((0, 3, 4, 0), 5.0)])
def test_pseudo_norm(v, expected):
    assert pseudo_norm(v) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("v, expected", [
    ((0, 0, 1, 0), CausalCharacter.SPACELIKE),
    ((2, 1, 0, 0), CausalCharacter.TIMELIKE),
    ((1, 1, 0, 0), CausalCharacter.NULL),
    ((0, 0, 0, 0), CausalCharacter.SPACELIKE),
])
def test_causal_character(v, expected):
    assert causal_character(v, 1e-12) is expected


def test_causal_character_relative_tolerance():
    # g = 1e-4 is null for a big vector but not for a unit-sized one
    big = np.array([1e3, 1e3, 0, 0]) + np.array([0, 5e-8, 0, 0])
    assert causal_character(big, 1e-6) is CausalCharacter.NULL
    assert causal_character((0, 1e-2, 0, 0), 1e-6) is CausalCharacter.SPACELIKE


def test_negative_tolerance_rejected():
    with pytest.raises(ValueError):
        causal_character((0, 1, 0, 0), -1.0)


@pytest.mark.parametrize("v, expected", [((2, 0, 0, 0), (1, 0, 0, 0)), ((0, 0, 0, 5), (0, 0, 0, 1))])
def test_normalize(v, expected):
    assert np.allclose(normalize(v), expected, atol=1e-15)


def test_normalize_null_raises():
    with pytest.raises(NullVector):
        normalize((1, 1, 0, 0))
    with pytest.raises(NullVector):
        normalize((0, 0, 0, 0))


def test_vec4_validation():
    assert vec4(1, 2, 3, 4).tolist() == [1, 2, 3, 4]
    assert vec4([1, 2, 3, 4]).shape == (4,)
    with pytest.raises(ValueError):
        vec4(1, 2, 3)
    with pytest.raises(ValueError):
        vec4(1, 2, np.nan, 4)


def test_euclid_norm_vectorized():
    v = np.array([[3, 4, 0, 0], [0, 0, 0, 2]], dtype=float)
    assert euclid_norm(v).tolist() == [5.0, 2.0]
