"""Theoretical guide bands for -log P[Hole(r)] across the three regimes."""

import math
import warnings

import numpy as np
import pytest

from gafholes import envelopes
from gafholes.coeffs import constant_unit, explicit, hyperbolic
from gafholes.errors import (InvalidIntensity, InvalidRadius, NotMonotone,
                             PreAsymptotic)


def test_flat_regime_envelope_is_pi_squared_twelfth():
    env = envelopes.hyperbolic_envelope(1.0, 0.9)
    assert env.regime == "crit"
    ref = (math.pi ** 2 / 12.0) / 0.1
    assert env.lower == pytest.approx(ref, rel=1e-12)
    assert env.upper == pytest.approx(ref, rel=1e-12)
    assert env.lower == pytest.approx(8.224670334241134, rel=1e-12)


def test_decaying_regime_envelope():
    env = envelopes.hyperbolic_envelope(0.5, 0.99)
    assert env.regime == "sub1"
    delta = 0.01
    ref = (1.0 - 0.5) / 2.0 ** 1.5 * delta ** -0.5 * math.log(1.0 / delta)
    assert env.lower == pytest.approx(ref, rel=1e-12)
    assert env.upper == pytest.approx(2.0 * ref, rel=1e-12)
    assert env.lower == pytest.approx(8.14086766757573, rel=1e-12)


def test_growing_regime_envelope():
    env = envelopes.hyperbolic_envelope(2.0, 0.99)
    assert env.regime == "super1"
    delta = 0.01
    ref = 0.25 * math.log(1.0 / delta) ** 2 / delta
    assert env.lower == pytest.approx(ref, rel=1e-12)
    assert env.upper == env.lower
    assert env.lower == pytest.approx(530.1898110478392, rel=1e-12)


def test_envelope_record_and_note():
    env = envelopes.hyperbolic_envelope(2.0, 0.9)
    rec = env.to_record()
    assert set(rec) == {"L", "r", "regime", "lower", "upper"}
    assert env.note == envelopes.ASYMPTOTIC_NOTE


def test_pre_asymptotic_warning_close_to_the_origin():
    with pytest.warns(PreAsymptotic):
        env = envelopes.hyperbolic_envelope(0.5, 0.5)
    assert env.pre_asymptotic
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        env = envelopes.hyperbolic_envelope(0.5, 0.9)
    assert not env.pre_asymptotic


def test_decaying_band_from_model():
    env = envelopes.decaying_band(hyperbolic(0.5), 0.9)
    s2 = (1.0 - 0.81) ** -0.5
    ref = 0.25 * s2 * math.log(10.0)
    assert env.lower == pytest.approx(ref, rel=1e-10)
    assert env.upper == pytest.approx(2.0 * ref, rel=1e-10)


def test_decaying_band_guards():
    with pytest.raises(NotMonotone):
        envelopes.decaying_band(hyperbolic(2.0), 0.9)
    with pytest.raises(InvalidIntensity):
        envelopes.decaying_band(explicit([2.0, 1.0]), 0.9)
    with pytest.raises(InvalidIntensity):
        # explicit sequences carry no decay exponent of their own
        envelopes.decaying_band(explicit([1.0, 0.5, 0.25]), 0.9)


def test_flat_band_constants():
    env = envelopes.flat_band(0.9)
    assert env.lower == pytest.approx(1.0, rel=1e-12)
    assert env.upper == pytest.approx(100.0, rel=1e-12)
    # contains the exactly solvable point of the family
    assert env.lower <= (math.pi ** 2 / 12.0) / 0.1 <= env.upper
    with pytest.raises(InvalidRadius):
        envelopes.flat_band(0.4)
    with pytest.raises(InvalidIntensity):
        envelopes.flat_band(0.9, c_cfg=2.0, C_cfg=1.0)


def test_certificate_frozen_values_and_trend():
    v3 = envelopes.moment_exponent_certificate(2.0, 1.0 - 1e-3)
    v5 = envelopes.moment_exponent_certificate(2.0, 1.0 - 1e-5)
    assert v3 == pytest.approx(0.21659032966508887, rel=1e-10)
    assert v5 == pytest.approx(0.0803357549213218, rel=1e-10)
    # drifts toward the limiting value -1/4 as the radius approaches 1
    assert abs(v5 + 0.25) < abs(v3 + 0.25)


def test_certificate_guards():
    with pytest.raises(InvalidIntensity):
        envelopes.moment_exponent_certificate(1.0, 0.999)
    with pytest.raises(InvalidRadius):
        envelopes.moment_exponent_certificate(2.0, 0.5)


def test_envelope_rejects_inverted_band():
    with pytest.raises(InvalidIntensity):
        envelopes.BoundEnvelope(1.0, 0.9, 2.0, 1.0, "crit")
