import math
import os
from fractions import Fraction

import numpy as np
import pytest

from conftest import GOLDEN
from oracles import exact_embed, periodic_xu_exact
from skewspectra import (Cocycle, EmbeddingSpec, FiberPoly, LinearSurface, SkewSystem, TransitionMatrix,
                         classify_fg_sublevel, ell_nonnegative_profile, heteroclinic_point, load_model,
                         product_fg, spectra_difference_witness)
from skewspectra.classical import periodic_words
from skewspectra.symbolic import DomainError, minimal_period
from skewspectra.witnesses import random_cycle

MODELS = os.path.join(os.path.dirname(__file__), os.pardir, "models")
FULL2 = TransitionMatrix.full(2)
SPEC17 = EmbeddingSpec.default(2, 17)
F_SURF = LinearSurface(1.0, math.pi)


@pytest.fixture(scope="module")
def witness():
    return spectra_difference_witness(FULL2, SPEC17, F_SURF, FiberPoly.cos(), GOLDEN, horizon=1000)


@pytest.fixture(scope="module")
def fg_model():
    sys, d = load_model(os.path.join(MODELS, "fg_product.json"))
    o = d["observable"]
    return sys, LinearSurface(**o["f"]), FiberPoly(tuple(o["g"]["a"]), tuple(o["g"]["b"])), o["c"]


def exact_orbit_max(z, reach=12, depth=30):
    """``max_n f(sigma^n z)`` from exact base-17 digit sums."""
    best = None
    for n in range(-reach, reach + 1):
        xs, xu = exact_embed(z.window(n, n + depth).tolist(), z.window(n - depth, n)[::-1].tolist(),
                             SPEC17.digits, 17)
        v = float(xs) + math.pi * float(xu)
        if best is None or v > best[0]:
            best = (v, n)
    return best


def exact_periodic_values(max_period=10):
    r = Fraction(1, 17)
    out = {}
    for w in periodic_words(range(2), max_period):
        w = minimal_period(w)
        if w in out:
            continue
        p = len(w)
        best = -1.0
        for k in range(p):
            fwd = [2 * w[(k + i) % p] for i in range(p)]
            bwd = [2 * w[(k - 1 - i) % p] for i in range(p)]
            xu = periodic_xu_exact(fwd, 17)
            xs = periodic_xu_exact(bwd, 17)
            best = max(best, float(xs) + math.pi * float(xu))
        out[w] = best
    return out


# --- separation witness -----------------------------------------------------------------------

def test_heteroclinic_point_layout():
    z = heteroclinic_point()
    assert z.window(-4, 4).tolist() == [0, 0, 1, 1, 1, 1, 0, 0]
    assert z.is_structural


def test_skew_markov_equals_surface_markov(witness):
    w = witness
    assert w.agree
    assert abs(w.m_skew - w.m_surface) <= w.horizon_error
    assert w.m_skew == pytest.approx(w.f_at_i0, abs=w.horizon_error)


def test_witness_matches_exact_orbit_maximum(witness):
    top, n = exact_orbit_max(heteroclinic_point())
    assert witness.i0 == n
    assert witness.m_surface == pytest.approx(top, abs=1e-12)


def test_witness_is_separated(witness):
    w = witness
    assert w.separated and w.separation > w.margin >= 10 * w.horizon_error
    assert w.beta > 0 and w.alpha_fg == pytest.approx(w.beta / 2)
    assert w.t_bar == pytest.approx(0.5, abs=1e-9)


def test_separation_against_exact_periodic_values(witness):
    vals = exact_periodic_values()
    assert len(vals) == witness.n_periodic
    d = min(abs(v + witness.beta - witness.m_skew) for v in vals.values())
    assert d == pytest.approx(witness.separation, abs=1e-9)


def test_zero_beta_is_degenerate():
    w = spectra_difference_witness(FULL2, SPEC17, F_SURF, FiberPoly.cos(), GOLDEN, horizon=200,
                                   beta_fraction=0.0)
    assert w.alpha_fg == 0.0 and w.agree
    assert w.m_skew == pytest.approx(w.m_surface, abs=w.horizon_error)


def test_witness_errors():
    with pytest.raises(DomainError, match="beta interval is empty"):
        spectra_difference_witness(FULL2, SPEC17, LinearSurface(const=1.0), FiberPoly.cos(), GOLDEN, horizon=50)
    with pytest.raises(DomainError):
        spectra_difference_witness(FULL2, SPEC17, F_SURF, FiberPoly(), GOLDEN, horizon=50)
    with pytest.raises(DomainError):
        spectra_difference_witness(FULL2, SPEC17, F_SURF, FiberPoly.cos(), GOLDEN, beta_fraction=1.0)


def test_witness_serializes(witness):
    d = witness.to_dict()
    assert d["separated"] is True and d["horizon"] == 1000


# --- l >= 0 -----------------------------------------------------------------------------------------

def test_random_cycles_are_admissible():
    rng = np.random.default_rng(1)
    gm = TransitionMatrix.golden_mean()
    for _ in range(50):
        w = random_cycle(gm, rng)
        assert 4 <= len(w) <= 12 and gm.is_admissible(w + w)


def test_zero_observable_gives_zero():
    g = FiberPoly.cos()
    f = LinearSurface(const=0.3)
    sys = SkewSystem(FULL2, EmbeddingSpec.default(2, 3), Cocycle.rotation(GOLDEN), product_fg(f, g, 0.3))
    prof = ell_nonnegative_profile(sys, 0.3, f, g, samples=10)
    assert all(s.limsup_estimate == 0.0 and s.ell_exact == 0.0 for s in prof.samples)


def test_ell_nonnegative_for_x_u():
    g, f = FiberPoly.cos(), LinearSurface(0.0, 1.0)
    sys = SkewSystem(FULL2, EmbeddingSpec.default(2, 3), Cocycle.rotation(GOLDEN), product_fg(f, g, 0.0))
    prof = ell_nonnegative_profile(sys, 0.0, f, g, samples=40)
    assert prof.ok and prof.min_estimate >= -1e-6
    # f > c at some cycle point: steering to the g maximizer gives a positive value
    for s in prof.samples:
        if s.ell_exact > 0:
            assert s.limsup_estimate > 0


def test_ell_needs_irrational_rotation():
    g, f = FiberPoly.cos(), LinearSurface(0.0, 1.0)
    sys = SkewSystem(FULL2, EmbeddingSpec.default(2, 3), Cocycle.rotation(0.5), product_fg(f, g, 0.0))
    with pytest.raises(DomainError):
        ell_nonnegative_profile(sys, 0.0, f, g, samples=2)


def test_ell_on_fg_model(fg_model):
    sys, f, g, c = fg_model
    prof = ell_nonnegative_profile(sys, c, f, g, samples=30, seed=4)
    assert prof.ok
    for s in prof.samples:
        assert s.limsup_estimate <= s.ell_exact + 1e-9


# --- sublevel classification ----------------------------------------------------------------------

def test_negative_level_is_empty(fg_model):
    sys, f, g, c = fg_model
    r = classify_fg_sublevel(sys, f, g, c, -0.1)
    assert r.label == "empty" and r.dimension == 0 and r.certificate is None


def test_positive_level_has_interval(fg_model):
    sys, f, g, c = fg_model
    r = classify_fg_sublevel(sys, f, g, c, 0.1)
    assert r.label == "interval" and r.dimension == 1
    lo, hi = r.certificate.interval
    assert 0 < lo < hi < 0.1
    assert r.certificate.fraction_validated >= 0.99
