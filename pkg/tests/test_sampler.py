# tests/test_sampler.py

import numpy as np
import pytest

from src.errors import ArgumentError
from src.sampler import BoxDomain, Rng, lhs, sample_initial_boundary, subsample, subsample_indices


@pytest.fixture
def unit_square():
    return BoxDomain((0.0, 0.0), (1.0, 1.0))


def test_single_point_lies_in_box(unit_square):
    points = lhs(unit_square, 1, Rng(0))
    assert points.shape == (1, 2)
    assert unit_square.contains(points)


def test_one_point_per_stratum():
    points = lhs(BoxDomain((0.0,), (1.0,)), 10, Rng(3))
    strata = np.floor(np.sort(points[:, 0]) * 10).astype(int)
    np.testing.assert_array_equal(strata, np.arange(10))


def test_histogram_is_exactly_flat():
    domain = BoxDomain((0.0, -1.0), (1.0, 1.0))
    points = lhs(domain, 10000, Rng(1234))
    for d in range(2):
        counts, _ = np.histogram(points[:, d], bins=100, range=(domain.lower[d], domain.upper[d]))
        assert np.all(counts == 100)


def test_lhs_is_deterministic(unit_square):
    np.testing.assert_array_equal(lhs(unit_square, 50, Rng(8)), lhs(unit_square, 50, Rng(8)))


def test_lhs_needs_a_point(unit_square):
    with pytest.raises(ArgumentError):
        lhs(unit_square, 0, Rng(0))


def test_inverted_box_raises():
    with pytest.raises(ArgumentError):
        BoxDomain((1.0,), (0.0,))


def test_full_subsample_is_a_permutation():
    items = list(range(20))
    assert sorted(subsample(items, 20, Rng(2))) == items


def test_empty_subsample():
    assert len(subsample(np.arange(5.0), 0, Rng(2))) == 0


def test_subsample_is_deterministic_and_distinct():
    first = subsample_indices(256, 50, Rng(77))
    second = subsample_indices(256, 50, Rng(77))
    np.testing.assert_array_equal(first, second)
    assert len(set(first.tolist())) == 50


def test_subsample_too_many_raises():
    with pytest.raises(ArgumentError):
        subsample([1, 2, 3], 4, Rng(0))


def test_derived_streams_use_offset_seeds():
    assert Rng(10).derive(3).seed == 13
    np.testing.assert_array_equal(Rng(10).derive(3).uniform(size=4), Rng(13).uniform(size=4))


def test_initial_boundary_split():
    t = np.linspace(0.0, 1.0, 11)
    x = np.linspace(-1.0, 1.0, 21)
    points = sample_initial_boundary(t, x, 40, Rng(5), ic_fraction=0.25)
    assert points.shape == (40, 2)
    initial = points[:10]
    boundary = points[10:]
    assert np.all(initial[:, 0] == 0.0)
    assert np.all(np.abs(boundary[:, 1]) == 1.0)
