import itertools
import math
from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from robust_l0 import (DataError, Point, add_near_duplicates, group_alpha, make_points, noisy_dataset,
                       random_dataset, rescale_min_distance)


def brute_min_distance(rows):
    return min(math.dist(a, b) for a, b in itertools.combinations(rows, 2))


def test_rescale_examples():
    got = rescale_min_distance(make_points([[0, 0], [0, 2]]))
    assert [p.coords for p in got] == [(0.0, 0.0), (0.0, 1.0)]
    rows = [[0, 0], [3, 4], [0, 10]]
    delta = brute_min_distance(rows)
    assert delta == 5.0
    got = rescale_min_distance(make_points(rows))
    assert [p.coords for p in got] == [tuple(x / delta for x in r) for r in rows]
    with pytest.raises(DataError):
        rescale_min_distance(make_points([[1, 1], [1, 1]]))
    with pytest.raises(DataError):
        rescale_min_distance(make_points([[1, 1]]))


def test_rescaled_min_distance_is_one():
    pts = rescale_min_distance(random_dataset(60, 3, 4))
    assert brute_min_distance([p.coords for p in pts]) == pytest.approx(1.0, rel=1e-9)


def test_one_center_uniform():
    d = 3
    radius = 1 / (2 * d ** 1.5)
    for seed in range(30):
        st_ = add_near_duplicates(make_points([[1.0, 2.0, 3.0]]), "uniform", seed)
        assert 2 <= len(st_) <= 101
        assert set(st_.labels) == {0}
        assert all(math.dist(p.coords, (1.0, 2.0, 3.0)) <= radius for p in st_.points)


def test_powerlaw_counts_for_four_centers():
    centers = rescale_min_distance(random_dataset(4, 2, 0))
    st_ = add_near_duplicates(centers, "powerlaw", seed=3)
    sizes = Counter(st_.labels)
    # each group is its center plus ceil(4 / i) duplicates
    assert sorted(v - 1 for v in sizes.values()) == [1, 2, 2, 4]


def test_errors():
    with pytest.raises(DataError):
        add_near_duplicates([], "uniform", 0)
    with pytest.raises(DataError):
        add_near_duplicates(make_points([[0.0]]), "zipf", 0)
    with pytest.raises(DataError):
        random_dataset(1, 2, 0)
    with pytest.raises(DataError):
        add_near_duplicates([Point((0.0,), 0), Point((1.0, 2.0), 1)], "uniform", 0)


def test_rand5_scale_and_separation():
    st_ = noisy_dataset(500, 5, 1, "uniform")
    mean = 500 + 500 * 50.5
    sd = math.sqrt(500 * (100 ** 2 - 1) / 12)
    assert abs(len(st_) - mean) <= 4 * sd
    alpha = group_alpha(5)
    arr = st_.coords()
    labels = np.array(st_.labels)
    rng = np.random.default_rng(0)
    idx = rng.choice(len(arr), 1500, replace=False)
    sub, lab = arr[idx], labels[idx]
    for i in range(len(sub)):
        dd = np.linalg.norm(sub[i + 1:] - sub[i], axis=1)
        same = lab[i + 1:] == lab[i]
        assert (dd[same] <= alpha + 1e-12).all()
        assert (dd[~same] >= 1 - alpha - 1e-12).all()


def test_label_fidelity():
    centers = rescale_min_distance(random_dataset(50, 4, 2))
    st_ = add_near_duplicates(centers, "powerlaw", seed=5)
    radius = group_alpha(4) / 2
    for p, g in st_.pairs():
        assert math.dist(p.coords, centers[g].coords) <= radius + 1e-12
    assert st_.n_groups == 50 and st_.dim == 4
    assert [p.index for p in st_.points] == list(range(len(st_)))


@pytest.mark.parametrize("dim", [5, 20])
def test_random_dataset_recipe(dim):
    pts = random_dataset(500, dim, 1)
    arr = np.array([p.coords for p in pts])
    assert arr.shape == (500, dim)
    assert ((arr > 0) & (arr < 1)).all()
    assert random_dataset(500, dim, 1) == pts
    assert random_dataset(500, dim, 2) != pts


def test_noisy_dataset_is_deterministic():
    a = noisy_dataset(20, 3, 9, "uniform", 5)
    b = noisy_dataset(20, 3, 9, "uniform", 5)
    assert a == b
    assert noisy_dataset(20, 3, 10, "uniform", 5) != a


def test_shuffle_positions_are_uniform():
    # two centers with one duplicate each: the position of center 0 is uniform over 4 slots
    centers = [Point((0.0, 0.0), 0), Point((5.0, 5.0), 1)]
    pos = Counter()
    for seed in range(4000):
        st_ = add_near_duplicates(centers, "uniform", seed, max_dups=1)
        pos[next(i for i, p in enumerate(st_.points) if p.coords == (0.0, 0.0))] += 1
    assert chisquare([pos[i] for i in range(4)]).pvalue > 1e-3


def test_window_groups():
    st_ = noisy_dataset(10, 2, 1, "uniform", 3)
    assert st_.window_groups(len(st_)) == set(range(10))
    assert st_.window_groups(1) == {st_.labels[-1]}
    assert st_.window_groups(2, end=2) == set(st_.labels[:2])
