from dataclasses import replace

import pytest

from moldgate.errors import MaterialError
from moldgate.rheology import (
    MaterialParams,
    gate_radius,
    mean_front_velocity,
    pressure_drop,
    rectangular_gate,
    size_gate,
)

PP = MaterialParams("PP", n=0.2718, T_melt=230, T_wall=50, gamma_opt=10000, mu_opt=9.88, kappa=0.15)
ABS = MaterialParams("ABS", n=0.2354, T_melt=230, T_wall=50, gamma_opt=5000, mu_opt=30.93, kappa=0.18)
PC = MaterialParams("PC", n=0.1869, T_melt=305, T_wall=95, gamma_opt=8000, mu_opt=42.85, kappa=0.24)


def test_mean_front_velocity_rows():
    assert mean_front_velocity(PP) == pytest.approx(2134.2, abs=0.1)
    assert mean_front_velocity(ABS) == pytest.approx(1321.3, abs=0.1)
    assert mean_front_velocity(PC) == pytest.approx(1400.1, abs=0.1)


def test_gate_radius_reproduces_table_values():
    for material, printed in ((PP, 1.4), (ABS, 1.9), (PC, 1.5)):
        radius = gate_radius(material)
        assert round(radius, 1) == printed
        assert abs(radius - printed) <= 0.06


def test_gate_radius_two_decimals():
    assert gate_radius(PP) == pytest.approx(1.43, abs=0.005)
    assert gate_radius(ABS) == pytest.approx(1.92, abs=0.005)
    assert gate_radius(PC) == pytest.approx(1.46, abs=0.005)


def test_gate_radius_monotonicity():
    base = gate_radius(PP)
    assert gate_radius(replace(PP, gamma_opt=12000)) < base
    assert gate_radius(replace(PP, T_melt=250)) > base
    assert gate_radius(replace(PP, kappa=0.2)) > base
    assert gate_radius(replace(PP, mu_opt=12.0)) < base


def test_rectangular_gate_examples():
    width, height = rectangular_gate(1.4, 4)
    assert height == pytest.approx(3.5)
    assert width == pytest.approx(14.0)
    assert width * height / (2 * (width + height)) == pytest.approx(1.4, rel=1e-12)

    width, height = rectangular_gate(1.4, 1)
    assert width == pytest.approx(5.6)
    assert height == pytest.approx(5.6)

    assert rectangular_gate(0.0, 4) == (0.0, 0.0)


def test_rectangular_gate_hydraulic_radius_matches():
    for radius in (0.3, 1.43, 1.92, 7.0):
        for aspect in (1.0, 2.5, 4.0, 10.0):
            w, h = rectangular_gate(radius, aspect)
            assert abs(w * h / (2 * (w + h)) - radius) <= 1e-12 * radius


def test_rectangular_gate_rejects_bad_aspect():
    with pytest.raises(ValueError):
        rectangular_gate(1.4, 0.5)
    with pytest.raises(ValueError):
        rectangular_gate(1.4, float("nan"))
    with pytest.raises(ValueError):
        rectangular_gate(float("nan"), 4)


def test_pressure_drop_examples():
    assert pressure_drop(9.88, 0.0, 2134.2, 2.0) == 0.0
    assert pressure_drop(9.88, 100.0, 2134.2, 2.0) == pytest.approx(6.33, abs=0.005)
    thin = pressure_drop(9.88, 100.0, 2134.2, 2.0)
    assert pressure_drop(9.88, 100.0, 2134.2, 4.0) == pytest.approx(thin / 4)


def test_pressure_drop_is_linear_in_each_factor():
    base = pressure_drop(9.88, 100.0, 2134.2, 2.0)
    assert pressure_drop(2 * 9.88, 100.0, 2134.2, 2.0) == pytest.approx(2 * base)
    assert pressure_drop(9.88, 300.0, 2134.2, 2.0) == pytest.approx(3 * base)
    assert pressure_drop(9.88, 100.0, 0.5 * 2134.2, 2.0) == pytest.approx(0.5 * base)


def test_pressure_drop_rejects_bad_thickness():
    with pytest.raises(ValueError):
        pressure_drop(9.88, 100.0, 2134.2, 0.0)


def test_invalid_material_is_rejected():
    with pytest.raises(MaterialError, match="n must be in"):
        replace(PP, n=0.0)
    with pytest.raises(MaterialError, match="T_melt must exceed T_wall"):
        replace(PP, T_wall=300)


def test_size_gate_with_rectangular_equivalent():
    sizing = size_gate(PP, aspect=4)
    assert sizing.R_gate == pytest.approx(gate_radius(PP))
    assert sizing.v_bar == pytest.approx(mean_front_velocity(PP))
    width, height = sizing.rectangular
    assert width == pytest.approx(4 * height)
    assert size_gate(PP).rectangular is None
