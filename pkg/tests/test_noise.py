"""PSD model, RMS quadrature, SNR scaling, and colored-noise synthesis."""

import math
import warnings

import numpy as np
import pytest
from scipy import signal as sps
from scipy import stats

from porebench import noise as ns
from porebench import physics as ph

KB = 1.38e-23


def table_model(**overrides):
    pore = ph.open_pore_current(ph.PoreGeometry(), ph.ElectrolyteConfig(),
                                ph.BiasConfig())
    kwargs = dict(params=ns.NoiseParams(),
                  open_pore_current=pore.open_pore_current,
                  resistance=pore.resistance,
                  carrier_count=ns.carrier_count(ph.PoreGeometry(), 100.0))
    kwargs.update(overrides)
    return ns.NoisePsdModel(**kwargs)


def white_only_model(resistance=8.2e8):
    params = ns.NoiseParams(hooge=0.0, electrode_coefficient=0.0,
                            dielectric_loss=0.0)
    return table_model(params=params, resistance=resistance)


class TestCarrierCount:
    def test_table_fixture(self):
        got = ns.carrier_count(ph.PoreGeometry(20e-9, 20e-9), 100.0)
        # (1/2) pi d^2 h c0 NA evaluated independently
        want = 0.5 * math.pi * (20e-9) ** 2 * 20e-9 * 100.0 * 6.02e23
        assert got == pytest.approx(want, rel=1e-15)
        assert got == pytest.approx(757, rel=0.01)

    def test_zero_concentration(self):
        assert ns.carrier_count(ph.PoreGeometry(), 0.0) == 0.0

    def test_linear_in_thickness(self):
        one = ns.carrier_count(ph.PoreGeometry(20e-9, 10e-9), 100.0)
        two = ns.carrier_count(ph.PoreGeometry(20e-9, 20e-9), 100.0)
        assert two == pytest.approx(2 * one, rel=1e-15)


class TestPsdTotal:
    def test_thermal_fixture(self):
        model = white_only_model(resistance=8.2e8)
        want = 4 * KB * 300.0 / 8.2e8
        assert ns.psd_total(123.0, model) == pytest.approx(want, rel=1e-12)
        assert want == pytest.approx(2.0e-29, rel=0.01)

    def test_dielectric_fixture_at_1khz(self):
        model = table_model()
        s_d = 8 * math.pi * KB * 300.0 * 0.27 * 52e-9 * 1000.0
        assert s_d == pytest.approx(1.46e-24, rel=0.01)
        # dielectric dominates the table model at 1 kHz
        assert ns.psd_total(1000.0, model) == pytest.approx(s_d, rel=0.01)

    def test_white_only_constant(self):
        model = white_only_model()
        vals = ns.psd_total(np.array([1.0, 10.0, 1000.0, 4999.0]), model)
        assert np.all(vals == vals[0])

    def test_rejects_nonpositive_frequency(self):
        with pytest.raises(ph.PhysicsDomainError):
            ns.psd_total(0.0, table_model())

    def test_component_sum(self):
        model = table_model()
        f = 37.0
        p = model.params
        want = (p.hooge * model.open_pore_current ** 2
                / (model.carrier_count * f)
                + p.electrode_coefficient / f ** 1.5
                + 4 * KB * 300.0 / model.resistance
                + 8 * math.pi * KB * 300.0 * 0.27 * 52e-9 * f)
        assert ns.psd_total(f, model) == pytest.approx(want, rel=1e-12)


class TestModelRms:
    def test_white_only_closed_form(self):
        model = white_only_model()
        s0 = ns.psd_total(1.0, model)
        got = ns.model_rms(model, 0.1)
        assert got == pytest.approx(math.sqrt(s0 * (5000.0 - 0.1)), rel=1e-6)

    def test_dielectric_dominated_bound(self):
        # full table model over 10 s: the f-linear dielectric term wins,
        # integral ~ 8 pi kB T dL C BW^2 / 2
        model = table_model()
        got = ns.model_rms(model, 0.1)
        dominant = math.sqrt(8 * math.pi * KB * 300.0 * 0.27 * 52e-9
                             * 5000.0 ** 2 / 2)
        assert got == pytest.approx(dominant, rel=0.05)

    def test_rms_scales_with_bandwidth(self):
        full = ns.model_rms(table_model(bandwidth=5000.0), 0.1)
        half = ns.model_rms(table_model(bandwidth=2500.0), 0.1)
        assert half == pytest.approx(full / 2, rel=0.05)

    def test_rejects_bad_band(self):
        with pytest.raises(ph.PhysicsDomainError):
            ns.model_rms(table_model(), 6000.0)
        with pytest.raises(ph.PhysicsDomainError):
            ns.model_rms(table_model(), 0.0)


class TestSnrScale:
    def test_identity(self):
        assert ns.snr_scale_factor(6.0, 1.0, 1.0) == pytest.approx(1.0)

    def test_inverse_in_snr(self):
        assert ns.snr_scale_factor(1e-10, 4.0, 1e-12) == pytest.approx(
            ns.snr_scale_factor(1e-10, 2.0, 1e-12) / 2, rel=1e-15)

    def test_arithmetic_fixture(self):
        # 127 pA spike at SNR 4 puts the scaled RMS near 5.3 pA
        rms0 = 2e-12
        s = ns.snr_scale_factor(127e-12, 4.0, rms0)
        assert s * rms0 == pytest.approx(127e-12 / 24, rel=1e-12)
        assert s * rms0 == pytest.approx(5.3e-12, rel=0.01)

    def test_zero_denominator(self):
        with pytest.raises(ph.PhysicsDomainError):
            ns.snr_scale_factor(1e-10, 4.0, 0.0)


class TestSynthesis:
    def test_exact_rms_contract(self):
        model = table_model()
        target = model.scale * ns.model_rms(model, 10_000.0 / 100_000)
        x = ns.synthesize_colored_noise(model, 100_000, 10_000.0,
                                        np.random.default_rng(1))
        rms = math.sqrt(np.mean(x ** 2))
        assert abs(rms - target) <= np.spacing(target)

    def test_determinism(self):
        model = table_model()
        a = ns.synthesize_colored_noise(model, 10_000, 10_000.0,
                                        np.random.default_rng(42))
        b = ns.synthesize_colored_noise(model, 10_000, 10_000.0,
                                        np.random.default_rng(42))
        assert np.array_equal(a, b)

    def test_flat_psd_is_white(self):
        model = white_only_model()
        x = ns.synthesize_colored_noise(model, 1_000_000, 10_000.0,
                                        np.random.default_rng(8))
        r1 = np.corrcoef(x[:-1], x[1:])[0, 1]
        assert abs(r1) < 0.01

    def test_spectral_shape_band_averaged(self):
        model = table_model()
        x = ns.synthesize_colored_noise(model, 1_000_000, 10_000.0,
                                        np.random.default_rng(99))
        f, pxx = sps.welch(x, fs=10_000.0, nperseg=8192)
        for lo, hi in ((10, 100), (100, 1000), (1000, 5000)):
            sel = (f >= lo) & (f < hi)
            want = ns.psd_total(f[sel], model).mean()
            assert pxx[sel].mean() == pytest.approx(want, rel=0.2)

    def test_gaussianity(self):
        model = table_model()
        x = ns.synthesize_colored_noise(model, 1_000_000, 10_000.0,
                                        np.random.default_rng(7))
        assert abs(stats.kurtosis(x)) < 0.05

    def test_zero_model_flagged(self):
        params = ns.NoiseParams(hooge=0.0, electrode_coefficient=0.0,
                                dielectric_loss=0.0)
        model = table_model(params=params, temperature=0.0)
        with pytest.warns(UserWarning, match="identically zero"):
            x = ns.synthesize_colored_noise(model, 1000, 10_000.0,
                                            np.random.default_rng(0))
        assert np.all(x == 0.0)

    def test_too_short(self):
        with pytest.raises(ValueError):
            ns.synthesize_colored_noise(table_model(), 1, 10_000.0,
                                        np.random.default_rng(0))
