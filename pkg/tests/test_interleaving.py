import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from turboeq.interleaving import (Permutation, default_drp, default_prime, deinterleave,
                                  interleave, load_permutation, make_drp, random_permutation,
                                  save_permutation)


def test_identity():
    p = make_drp(16)
    assert np.array_equal(p.forward, np.arange(16))
    x = np.arange(16) * 1.5
    assert np.array_equal(interleave(p, x), x)


def test_relative_prime_map():
    assert make_drp(8, prime=3).forward.tolist() == [0, 3, 6, 1, 4, 7, 2, 5]


def test_dithers_by_hand():
    # read dither (1,0) swaps pairs before the map, write dither (1,0) after it
    p = make_drp(4, read_dither=(1, 0), write_dither=(1, 0), prime=1, offset=1)
    read = [1, 0, 3, 2]
    write = [1, 0, 3, 2]
    assert p.forward.tolist() == [write[(1 + r) % 4] for r in read]


@pytest.mark.parametrize("size", [1024, 4096])
def test_default_is_bijection_with_spread(size):
    p = default_drp(size)
    counts = np.bincount(p.forward, minlength=size)
    assert np.all(counts == 1)
    assert p.spread() >= 2


def test_default_prime_near_golden_ratio():
    assert default_prime(1024) == 633
    assert np.gcd(default_prime(4096), 4096) == 1


def test_rejects_non_coprime_prime():
    with pytest.raises(ValueError, match="coprime"):
        make_drp(8, prime=2)


def test_rejects_bad_dither():
    with pytest.raises(ValueError):
        make_drp(10, read_dither=(0, 1, 2))
    with pytest.raises(ValueError):
        make_drp(8, read_dither=(0, 0))


def test_rejects_non_bijection():
    with pytest.raises(ValueError):
        Permutation(np.array([0, 0, 1]))


def test_swap():
    p = Permutation(np.array([1, 0]))
    assert interleave(p, np.array([7, 9])).tolist() == [9, 7]
    assert deinterleave(p, np.array([7, 9])).tolist() == [9, 7]


def test_inverse():
    p = random_permutation(50, 3)
    assert np.array_equal(p.forward[p.inverse], np.arange(50))


def test_round_trip_many():
    rng = np.random.default_rng(0)
    for i in range(1000):
        size = int(rng.integers(1, 100))
        p = random_permutation(size, i)
        x = rng.normal(size=size)
        assert np.array_equal(deinterleave(p, interleave(p, x)), x)
        assert np.array_equal(interleave(p, deinterleave(p, x)), x)


@settings(max_examples=50, deadline=None)
@given(st.permutations(list(range(12))))
def test_round_trip_property(perm):
    p = Permutation(np.array(perm))
    x = np.arange(12) * 0.25 - 1
    assert np.array_equal(deinterleave(p, interleave(p, x)), x)


def test_length_mismatch():
    p = default_drp(16)
    with pytest.raises(ValueError):
        interleave(p, np.zeros(15))
    with pytest.raises(ValueError):
        deinterleave(p, np.zeros(17))


def test_random_permutation_seeded():
    assert random_permutation(64, 5) == random_permutation(64, 5)
    assert random_permutation(64, 5) != random_permutation(64, 6)


def test_file_round_trip(tmp_path):
    p = default_drp(1024)
    path = tmp_path / "perm.txt"
    save_permutation(p, path)
    assert load_permutation(path) == p


def test_file_whitespace(tmp_path):
    path = tmp_path / "perm.txt"
    path.write_text("2 0\n1\t3")
    assert load_permutation(path).forward.tolist() == [2, 0, 1, 3]
