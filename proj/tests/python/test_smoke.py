import math

import pytest

import cqed


def test_unit_conversions_round_trip():
    e = cqed.wavelength_to_energy(936.35)
    assert e == pytest.approx(1.32412e6, rel=1e-5)
    assert cqed.energy_to_wavelength(e) == pytest.approx(936.35, rel=1e-12)
    assert cqed.linewidth_to_lifetime(85.0) == pytest.approx(7.74, rel=1e-3)


def test_reference_device():
    assert cqed.vacuum_rabi_splitting() == pytest.approx(55.98, abs=0.01)
    upper, lower = cqed.eigen_energies()
    assert upper.real - lower.real == pytest.approx(55.98, abs=0.01)
    f = cqed.figures_of_merit()
    assert f["purcell"] == pytest.approx(61.3, abs=0.1)
    assert f["strongly_coupled"]
    assert cqed.coupling_from_splitting(56.0, 85.0, 1.0) == pytest.approx(35.0, abs=1e-12)
    tau = cqed.exciton_branch_lifetime(993.0)
    assert 615.0 < tau < 635.0
    assert cqed.infer_bare_lifetime(tau, 993.0) == pytest.approx(700.0, rel=1e-9)


def test_cw_g2_relaxes_to_one():
    g2 = cqed.cw_g2([0.0, 20.0, 400.0], channel="X")
    assert abs(g2[0]) < 1e-6
    assert g2[-1] == pytest.approx(1.0, abs=1e-3)


def test_simulation_is_seeded_and_antibunched():
    a = cqed.simulate('{"seed": 3}', duration_ps=13000.0 * 3000)
    b = cqed.simulate('{"seed": 3}', duration_ps=13000.0 * 3000, threads=2)
    assert a["times_ps"] == b["times_ps"]
    assert a["channels"] == b["channels"]
    assert len(a["times_ps"]) > 2900
    g, err = cqed.pulsed_g2(a["times_ps"], a["times_ps"], a["duration_ps"])
    assert g < 0.01 and err < 0.05


def test_config_errors_are_value_errors():
    with pytest.raises(ValueError, match="device.gamma_c_uev"):
        cqed.simulate('{"device": {"gamma_c_uev": 85}}')


def test_noiseless_series_recovers_coupling():
    r = cqed.fit_synthetic_series(noise=0.0)
    assert r["coupling_ueV"] == pytest.approx(35.0, rel=1e-3)
    assert r["gamma_c_ueV"] == pytest.approx(85.0, rel=1e-3)
    assert math.isfinite(r["splitting_ueV"])
