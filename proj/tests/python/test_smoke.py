import math

import numpy as np
import pytest

import transwave as tw


def test_theory_on_ring23():
    r = tw.theory_report(tw.presets.ring23())
    assert r.h_s_per_km == pytest.approx(12.545, abs=1e-3)
    assert r.v_mech_kms == pytest.approx(339.97, abs=0.5)
    assert r.v_em_ms < tw.LIGHT_SPEED


def test_speed_formula_scaling():
    base = dict(omega=2 * math.pi * 60, v_pu=1.0, theta=math.pi / 2, z_abs=0.325 / 2500)
    v1 = tw.speed_mech_theory(h=10.0, **base)
    v4 = tw.speed_mech_theory(h=40.0, **base)
    assert v1 / v4 == pytest.approx(2.0)


def test_swing_fault_speed():
    model = tw.presets.ring23()
    cfg = tw.SwingConfig()
    cfg.t_end = 6.0
    series = tw.run_swing(model, cfg, tw.presets.scenario("ring23-fault"))
    t = series.times
    assert isinstance(t, np.ndarray)
    assert len(t) == series.sample_count == 6001
    rep = tw.detect_arrivals(series, tw.Quantity.Domega, 1, model, 1e-4)
    assert rep.detected == 23
    assert 289.0 < rep.fitted_speed_kms < 391.0


def test_classify_generation_trip():
    cfg = tw.SwingConfig()
    cfg.t_end = 10.0
    cfg.record_every = 10
    series = tw.run_swing(tw.presets.ring23(), cfg, tw.presets.scenario("ring23-gen-trip"))
    assert tw.classify_event(series).kind == tw.EventClass.GenerationTrip


def test_locate_round_trip():
    sensors = [(0, 0), (400, 0), (0, 400), (400, 400), (200, 200)]
    arr = tw.synthetic_arrivals([tw.Point2(*p) for p in sensors], tw.Point2(130, 270), 1.0, 350.0)
    est = tw.estimate_speed_and_locate(arr)
    x, y = est.position
    assert math.hypot(x - 130, y - 270) < 1e-3
    assert est.speed_used == pytest.approx(350.0, rel=1e-3)


def test_errors_carry_a_kind():
    arr = [tw.SensorArrival("a", tw.Point2(0, 0), 0.0), tw.SensorArrival("b", tw.Point2(1, 0), 0.1)]
    with pytest.raises(tw.TranswaveError) as info:
        tw.locate(arr, 350.0)
    assert info.value.kind == "underdetermined"


def test_json_round_trip():
    model = tw.presets.mesh(3, 3, 50.0)
    again = tw.NetworkModel.from_json(model.to_json())
    assert again.to_json() == model.to_json()
    assert tw.validate(again) == []
