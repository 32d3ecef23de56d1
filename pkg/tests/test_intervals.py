import copy
import json
import math
import os

import numpy as np
import pytest

from conftest import GOLDEN
from skewspectra import (BiSequence, Cocycle, EmbeddingSpec, IntervalCertificate, LinearSurface, SkewSystem,
                         TransitionMatrix, construct_interval_nonperiodic_case,
                         construct_interval_periodic_case, linear_cos, load_model,
                         revalidate_certificate, validate_membership_R)
from skewspectra.observables import surface_observable
from skewspectra.symbolic import DomainError

MODELS = os.path.join(os.path.dirname(__file__), os.pardir, "models")


@pytest.fixture(scope="module")
def periodic_cert(worked_system, worked_report):
    return construct_interval_periodic_case(worked_system, [0], [1] * 8, 4, report=worked_report)


@pytest.fixture(scope="module")
def closer_cert(worked_system, worked_report):
    return construct_interval_periodic_case(worked_system, [0], [1] * 12, 6, report=worked_report)


@pytest.fixture(scope="module")
def golden_system():
    sys, d = load_model(os.path.join(MODELS, "golden_nonperiodic.json"))
    return sys, d["interval"]


@pytest.fixture(scope="module")
def nonperiodic_cert(golden_system):
    sys, iv = golden_system
    return construct_interval_nonperiodic_case(sys, iv["X1"], iv["X2"], iv["Q"], iv["H"], iv["j"])


# --- periodic case --------------------------------------------------------------------------

def test_periodic_certificate_is_nontrivial(periodic_cert):
    c = periodic_cert
    lo, hi = c.interval
    assert c.construction == "rphi1"
    assert hi - lo > 1e-3
    assert len(c.grid) >= 200
    assert c.fraction_validated >= 0.99
    assert c.parameters["horizon_blocks"] >= 10
    assert all(g.error_bound <= 1e-4 for g in c.grid if g.validated)


def test_periodic_certificate_sits_below_the_maximum(periodic_cert, worked_report):
    lo, hi = periodic_cert.interval
    assert hi < worked_report.value
    assert lo > periodic_cert.parameters["q_bound"]


def test_periodic_targets_lie_in_interval(periodic_cert):
    lo, hi = periodic_cert.interval
    for g in periodic_cert.grid:
        assert lo - 1e-12 <= g.target <= hi + 1e-12


def test_periodic_certificate_revalidates(periodic_cert):
    res = revalidate_certificate(json.loads(periodic_cert.to_json()))
    assert res["fraction"] >= 0.99
    own = {g.t: g.estimate for g in periodic_cert.grid}
    for p in res["points"]:
        assert abs(p["estimate"] - own[p["t"]]) <= 1e-9


def test_tampered_certificate_fails_revalidation(periodic_cert):
    d = periodic_cert.to_dict()
    bad = copy.deepcopy(d)
    for g in bad["grid"]:
        g["target"] += 1e-2
    assert revalidate_certificate(bad)["fraction"] == 0.0


def test_certificate_json_round_trip(periodic_cert):
    d = json.loads(periodic_cert.to_json())
    again = IntervalCertificate.from_dict(d)
    assert again.to_dict() == periodic_cert.to_dict()


def test_closer_base_point_raises_right_endpoint(periodic_cert, closer_cert, worked_report):
    hi1, hi2 = periodic_cert.interval[1], closer_cert.interval[1]
    assert hi2 > hi1
    assert worked_report.value - hi2 < 1e-2
    assert closer_cert.fraction_validated >= 0.99


def test_t_independent_observable_is_rejected():
    sys = SkewSystem(TransitionMatrix.full(2), EmbeddingSpec.default(2, 3), Cocycle.rotation(GOLDEN),
                     surface_observable(LinearSurface(1.0, 1.0)))
    with pytest.raises(DomainError, match="non-unique argmax"):
        construct_interval_periodic_case(sys, [0], [1] * 8, 4)


def test_periodic_argument_checks(worked_system, worked_report):
    with pytest.raises(DomainError, match="degenerate"):
        construct_interval_periodic_case(worked_system, [0], [1] * 8, 4, I=(0.1, 0.1), report=worked_report)
    with pytest.raises(DomainError):
        construct_interval_periodic_case(worked_system, [1], [1] * 8, 4, report=worked_report)
    with pytest.raises(DomainError):
        construct_interval_periodic_case(worked_system, [0], [1] * 8, 9, report=worked_report)
    with pytest.raises(DomainError):
        construct_interval_periodic_case(worked_system, [0], [0, 0, 0], 1, report=worked_report)


def test_inadmissible_blocks_rejected():
    sys = SkewSystem(TransitionMatrix.golden_mean(), EmbeddingSpec.default(2, 3), Cocycle.rotation(GOLDEN),
                     linear_cos(-1.0, 1.0, 0.2))
    with pytest.raises(DomainError, match="not admissible"):
        construct_interval_periodic_case(sys, [0], [1, 1], 0)


def test_rational_rotation_rejected():
    sys = SkewSystem(TransitionMatrix.full(2), EmbeddingSpec.default(2, 3), Cocycle.rotation(0.25),
                     linear_cos(1.0, 1.0, 0.2))
    with pytest.raises(DomainError, match="irrational"):
        construct_interval_periodic_case(sys, [0], [1] * 8, 4)


# --- non-periodic case ----------------------------------------------------------------------

def test_nonperiodic_certificate(nonperiodic_cert, golden_system):
    c = nonperiodic_cert
    lo, hi = c.interval
    assert c.construction == "rphi2"
    assert hi > lo
    assert len(c.grid) >= 200 and c.fraction_validated >= 0.99
    report = validate_membership_R(golden_system[0])
    assert abs(hi - report.value) <= 1e-6


def test_nonperiodic_certificate_revalidates(nonperiodic_cert):
    assert revalidate_certificate(nonperiodic_cert.to_dict())["fraction"] >= 0.99


def test_nonperiodic_right_endpoint_is_the_fiber_maximum(nonperiodic_cert):
    p = nonperiodic_cert.parameters
    # x~ = 0^inf; (10)^inf: x_s = 0, x_u = 3/4, F max = -0 + 3/4 + 0.2
    assert p["x_max"][1] == pytest.approx(0.75, abs=1e-12)
    assert nonperiodic_cert.interval[1] == pytest.approx(0.95, abs=1e-12)


def test_zero_width_arc_rejected(golden_system):
    sys, iv = golden_system
    with pytest.raises(DomainError, match="degenerate"):
        construct_interval_nonperiodic_case(sys, iv["X1"], iv["X2"], iv["Q"], iv["H"], iv["j"], I=(0.0, 0.0))


def test_periodic_maximizer_redirected(worked_system):
    with pytest.raises(DomainError, match="use periodic case"):
        construct_interval_nonperiodic_case(worked_system, [1], [1], [], [1], 0)


def test_arc_too_wide_rejected(golden_system):
    sys, iv = golden_system
    with pytest.raises(DomainError):
        construct_interval_nonperiodic_case(sys, iv["X1"], iv["X2"], iv["Q"], iv["H"], iv["j"], I=(-0.4, 0.4))
