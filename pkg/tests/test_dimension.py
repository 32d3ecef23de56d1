import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import GOLDEN
from oracles import all_words, cylinder_sup_xu
from skewspectra import (Cocycle, EmbeddingSpec, LinearSurface, SkewSystem, SubSFT, TransitionMatrix,
                         box_dimension, cylinder_sampler, hd_sft, linear_cos, profile_L, spectral_radius,
                         sub_sft_for_threshold)
from skewspectra.observables import surface_observable
from skewspectra.symbolic import DomainError, admissible_words

FULL2 = TransitionMatrix.full(2)
GM = TransitionMatrix.golden_mean()
SPEC3 = EmbeddingSpec.default(2, 3)
PHI = (1 + math.sqrt(5)) / 2


def system(F, sft=FULL2):
    return SkewSystem(sft, SPEC3, Cocycle.rotation(GOLDEN), F)


# --- spectral radius -------------------------------------------------------------------------

def test_spectral_radius_examples():
    assert spectral_radius(np.array([[1, 1], [1, 1]]))[0] == pytest.approx(2.0, abs=1e-12)
    assert spectral_radius(np.array([[1, 1], [1, 0]]))[0] == pytest.approx(PHI, abs=1e-12)
    assert spectral_radius(np.array([[0, 1], [1, 0]]))[0] == pytest.approx(1.0, abs=1e-12)
    assert spectral_radius(np.zeros((3, 3), dtype=int))[0] == 0.0


def test_spectral_radius_reducible():
    # a golden-mean component feeding a single loop
    A = np.array([[1, 1, 1], [1, 0, 0], [0, 0, 1]])
    assert spectral_radius(A)[0] == pytest.approx(PHI, abs=1e-12)


@given(st.integers(2, 6), st.integers(0, 10 ** 6))
def test_spectral_radius_matches_eigvals(n, seed):
    A = np.random.default_rng(seed).integers(0, 2, (n, n))
    rho, width = spectral_radius(A)
    assert abs(rho - max(abs(np.linalg.eigvals(A)))) <= max(width, 1e-9)


# --- exact dimensions ---------------------------------------------------------------------------

def test_full_shift_dimension_is_exact():
    d = hd_sft(FULL2, SPEC3, "both")
    assert d.value == pytest.approx(2 * math.log(2) / math.log(3), abs=1e-12)
    assert d.method == "spectral_radius"


def test_golden_mean_unstable_dimension():
    d = hd_sft(GM, SPEC3, "unstable")
    assert abs(d.value - math.log(PHI) / math.log(3)) <= 1e-9
    assert hd_sft(GM, SPEC3, "stable").value == d.value
    assert hd_sft(GM, SPEC3, "both").value == pytest.approx(2 * d.value, abs=1e-12)


def test_sub_sft_of_all_blocks_matches_parent():
    for w in (2, 3, 5):
        sub = SubSFT(GM, w, [tuple(int(a) for a in b) for b in admissible_words(GM, w)])
        assert hd_sft(sub, SPEC3).value == pytest.approx(hd_sft(GM, SPEC3).value, abs=1e-10)


def test_bad_axes_rejected():
    with pytest.raises(DomainError):
        hd_sft(FULL2, SPEC3, "diagonal")


# --- sub-shifts ----------------------------------------------------------------------------------

def test_empty_sub_sft():
    sub = SubSFT(FULL2, 3, [])
    assert sub.empty
    d = hd_sft(sub, SPEC3)
    assert d.value == 0.0 and d.method == "empty"


def test_single_cycle_has_dimension_zero():
    sub = SubSFT(FULL2, 3, [(0, 1, 1), (1, 1, 0), (1, 0, 1)])
    assert not sub.empty and sub.is_transitive()
    assert hd_sft(sub, SPEC3).value == 0.0


def test_trimming_removes_dead_ends():
    # (0,0,1) has no successor block, (1,1,0) no predecessor
    sub = SubSFT(FULL2, 3, [(0, 0, 0), (0, 0, 1), (1, 1, 0)])
    assert sub.blocks == [(0, 0, 0)]


def test_sub_sft_interface():
    sub = SubSFT(FULL2, 3, [w for w in all_words(2, 3) if w != (1, 1, 1)])
    assert sub.memory == 2 and sub.size == 2
    assert sub.is_admissible([1, 1, 0, 1, 1])
    assert not sub.is_admissible([0, 1, 1, 1])
    assert sub.successors([0, 1, 1]) == [0]
    words = sub.admissible_words(6)
    assert all(sub.is_admissible(w) for w in words)
    brute = [w for w in all_words(2, 6) if sub.is_admissible(w)]
    assert len(brute) == len(words)
    again = SubSFT.from_dict(FULL2, sub.to_dict())
    assert again.blocks == sub.blocks


def test_sub_sft_validates_blocks():
    with pytest.raises(DomainError):
        SubSFT(GM, 2, [(1, 1)])
    with pytest.raises(DomainError):
        SubSFT(FULL2, 3, [(0, 1)])
    with pytest.raises(DomainError):
        SubSFT(FULL2, 1, [(0,)])


# --- box counting ---------------------------------------------------------------------------------

def test_box_dimension_full_shift():
    d = box_dimension(cylinder_sampler(FULL2, SPEC3), range(3, 9), 3)
    assert abs(d.value - 2 * math.log(2) / math.log(3)) <= 0.02


def test_box_dimension_golden_mean_unstable():
    d = box_dimension(cylinder_sampler(GM, SPEC3, "unstable"), range(4, 11), 3)
    assert abs(d.value - math.log(PHI) / math.log(3)) <= 0.02


def test_box_dimension_unit_square():
    def grid(k):
        n = 4 ** k
        i, j = np.meshgrid(np.arange(n), np.arange(n))
        return i.ravel() / n, j.ravel() / n

    assert box_dimension(grid, [1, 2, 3, 4], 4).value == pytest.approx(2.0, abs=1e-12)


def test_box_dimension_empty_and_errors():
    empty = lambda k: (np.zeros(0), np.zeros(0))
    assert box_dimension(empty, [1, 2, 3], 3).method == "empty"
    with pytest.raises(DomainError):
        box_dimension(empty, [1, 2], 3)
    one = lambda k: (np.zeros(1), np.zeros(1)) if k == 3 else (np.zeros(0), np.zeros(0))
    with pytest.raises(DomainError):
        box_dimension(one, [1, 2, 3], 3)


# --- threshold sets ---------------------------------------------------------------------------------

@pytest.mark.parametrize("window", [2, 3, 4, 6])
def test_inner_blocks_match_exact_cylinder_sup(window):
    sys = system(surface_observable(LinearSurface(0.0, 1.0)))
    sub = sub_sft_for_threshold(sys, 0.4, window, "inner")
    raw = {w for w in all_words(2, window) if cylinder_sup_xu(w[window // 2:], SPEC3.digits, 3) <= 0.4}
    assert set(sub.blocks) == set(SubSFT(FULL2, window, raw).blocks)


def test_threshold_modes_rejected():
    sys = system(linear_cos(1, 1, 0.2))
    with pytest.raises(DomainError):
        sub_sft_for_threshold(sys, 1.0, 4, "middle")
    with pytest.raises(DomainError):
        sub_sft_for_threshold(sys, 1.0, 1)


def test_sandwich_across_windows():
    sys = system(linear_cos(1.0, 1.0, 0.2))
    for t in (0.9, 1.2, 1.6, 2.0):
        lowers = [hd_sft(sub_sft_for_threshold(sys, t, w, "inner"), SPEC3).value for w in (2, 3, 4)]
        uppers = [hd_sft(sub_sft_for_threshold(sys, t, w, "outer"), SPEC3).value for w in (2, 3, 4)]
        assert max(lowers) <= min(uppers) + 1e-12


def test_threshold_above_maximum_is_full():
    sys = system(linear_cos(1.0, 1.0, 0.2))
    sub = sub_sft_for_threshold(sys, 2.2 + 1e-9, 4, "inner")
    assert len(sub.blocks) == 16
    assert hd_sft(sub, SPEC3).value == pytest.approx(hd_sft(FULL2, SPEC3).value, abs=1e-12)


def test_threshold_below_minimum_is_empty():
    sys = system(linear_cos(1.0, 1.0, 0.2))
    assert sub_sft_for_threshold(sys, 0.19, 4, "outer").empty


def test_profile_is_monotone():
    sys = system(linear_cos(1.0, 1.0, 0.2))
    prof = profile_L(sys, np.linspace(0.1, 2.3, 20), window=4)
    lo = [r.dim_lower for r in prof.rows]
    hi = [r.dim_upper for r in prof.rows]
    assert all(b >= a - 1e-12 for a, b in zip(lo, lo[1:]))
    assert all(b >= a - 1e-12 for a, b in zip(hi, hi[1:]))
    assert all(a <= b + 1e-12 for a, b in zip(lo, hi))
    # below min f_F = 0.2 only the empty set survives, above max f_F = 2.2 everything does
    assert prof.c_estimate is not None and 0.2 <= prof.c_estimate < 2.2
    assert hi[-1] == pytest.approx(2 * math.log(2) / math.log(3), abs=1e-12)


def test_profile_needs_sorted_grid():
    with pytest.raises(DomainError):
        profile_L(system(linear_cos(1, 1, 0.2)), [1.0, 0.5, 2.0])


def test_profile_classifier_column():
    prof = profile_L(system(linear_cos(1, 1, 0.2)), [0.5, 1.0], window=3,
                     classifier=lambda t: "low" if t < 0.7 else "high")
    assert [r.classification for r in prof.rows] == ["low", "high"]
