import math
import warnings

import numpy as np
import pytest

from phasor.touchstone import (
    BandEdgePeak,
    HALF_POWER_DB,
    MalformedOptionLine,
    NoLinearRegion,
    NonMonotonicFrequency,
    RowArityError,
    TouchstoneDataset,
    TwoToneSweep,
    UnsupportedVersion,
    extract_metrics,
    fit_two_tone,
    load_nf_csv,
    load_two_tone_csv,
    parse_touchstone,
    write_touchstone,
    write_two_tone_csv,
)

from oracles import cubic_sweep, lorentzian_s2p_text


def random_dataset(rng, fmt="MA", n=200, n_ports=2, unit="GHZ"):
    freqs = np.sort(rng.uniform(1.0, 40.0, n))
    while np.any(np.diff(freqs) <= 0):
        freqs = np.sort(rng.uniform(1.0, 40.0, n))
    vals = rng.normal(0.1, 0.4, (n, n_ports, n_ports)) + 1j * rng.normal(
        0.0, 0.4, (n, n_ports, n_ports)
    )
    return TouchstoneDataset(
        freq_unit=unit,
        parameter="S",
        format=fmt,
        resistance=50.0,
        n_ports=n_ports,
        freqs_raw=freqs,
        values=vals,
        option_line=f"# {unit} S {fmt} R 50",
    )


class TestParsing:
    def test_minimal_two_port_row(self):
        ds = parse_touchstone("# GHz S MA R 50\n1 0.5 0 0.5 0 0.01 0 0.5 0\n")
        assert ds.n_ports == 2
        assert ds.freqs_hz[0] == pytest.approx(1e9)
        assert abs(ds.values[0, 0, 0]) == pytest.approx(0.5)
        assert abs(ds.values[0, 1, 0]) == pytest.approx(0.5)  # S21 is second
        assert abs(ds.values[0, 0, 1]) == pytest.approx(0.01)  # S12 is third

    def test_bare_option_line_defaults(self):
        ds = parse_touchstone("#\n2 0.25 45\n")
        assert (ds.freq_unit, ds.parameter, ds.format, ds.resistance) == (
            "GHZ", "S", "MA", 50.0,
        )
        assert ds.n_ports == 1
        assert ds.values[0, 0, 0] == pytest.approx(0.25 * np.exp(1j * np.pi / 4))

    def test_case_insensitive_tokens(self):
        ds = parse_touchstone("# mhz s ri r 75\n10 0.1 -0.2\n")
        assert ds.freq_unit == "MHZ" and ds.resistance == 75.0
        assert ds.values[0, 0, 0] == pytest.approx(0.1 - 0.2j)

    def test_comments_preserved(self):
        text = "! created on a bench\n# GHz S MA R 50\n1 0.5 0\n! trailing note\n"
        ds = parse_touchstone(text)
        assert ds.comments == ("! created on a bench", "! trailing note")

    def test_inline_comment(self):
        ds = parse_touchstone("# GHz S MA R 50\n1 0.5 0 ! inline\n")
        assert abs(ds.values[0, 0, 0]) == pytest.approx(0.5)
        assert any("inline" in c for c in ds.comments)

    def test_v2_rejected_by_keyword(self):
        with pytest.raises(UnsupportedVersion, match=r"\[Version\]"):
            parse_touchstone("[Version] 2.0\n# GHz S MA R 50\n")

    def test_malformed_option_line_names_token(self):
        with pytest.raises(MalformedOptionLine, match="XX"):
            parse_touchstone("# GHz S XX R 50\n1 0.5 0\n")
        with pytest.raises(MalformedOptionLine, match="line 1"):
            parse_touchstone("# GHz S MA R\n1 0.5 0\n")

    def test_non_monotonic_names_line(self):
        with pytest.raises(NonMonotonicFrequency, match="line 3"):
            parse_touchstone("# GHz S MA R 50\n2 0.5 0\n1 0.5 0\n")

    def test_row_arity_names_line_and_token(self):
        with pytest.raises(RowArityError, match="line 2"):
            parse_touchstone("# GHz S MA R 50\n1 0.5 0 0.5\n")
        with pytest.raises(RowArityError, match="abc"):
            parse_touchstone("# GHz S MA R 50\n1 abc 0\n")

    def test_empty_document(self):
        with pytest.raises(RowArityError):
            parse_touchstone("# GHz S MA R 50\n")

    def test_db_format(self):
        ds = parse_touchstone("# GHz S DB R 50\n1 -6.0206 90\n")
        assert ds.values[0, 0, 0] == pytest.approx(0.5j, abs=1e-5)


class TestRoundTrip:
    @pytest.mark.parametrize("fmt", ["MA", "DB", "RI"])
    def test_write_parse_identity(self, fmt):
        rng = np.random.default_rng(hash(fmt) % 2**32)
        ds = random_dataset(rng, fmt)
        back = parse_touchstone(write_touchstone(ds))
        assert back.format == fmt
        assert back.option_line == ds.option_line
        assert np.allclose(back.freqs_raw, ds.freqs_raw, rtol=1e-8)
        assert np.allclose(back.values, ds.values, rtol=1e-8, atol=1e-10)
        # serialization is idempotent once the values are grid-quantized
        text = write_touchstone(back)
        assert write_touchstone(parse_touchstone(text)) == text

    def test_one_port_round_trip(self):
        rng = np.random.default_rng(5)
        ds = random_dataset(rng, "RI", n=40, n_ports=1)
        back = parse_touchstone(write_touchstone(ds))
        assert np.allclose(back.values, ds.values, rtol=1e-8, atol=1e-12)

    def test_comments_survive(self):
        ds = parse_touchstone("! one\n# GHz S MA R 50\n1 0.5 0\n")
        assert "! one" in write_touchstone(ds).splitlines()[0]


class TestExtraction:
    def test_lorentzian_recovery(self):
        ds = parse_touchstone(lorentzian_s2p_text())
        m = extract_metrics(ds)
        assert m.f_c_hz == pytest.approx(30.1e9, abs=5e6)
        assert m.bw3db_hz == pytest.approx(7.1e9, abs=20e6)
        assert m.peak_gain_db == pytest.approx(16.0, abs=0.01)
        assert not m.band_edge_peak
        assert m.s12_max_db == pytest.approx(-35.0, abs=0.01)

    def test_half_power_threshold_constant(self):
        assert HALF_POWER_DB == pytest.approx(3.0103, abs=1e-4)

    def test_unit_invariance(self):
        ds_ghz = parse_touchstone(lorentzian_s2p_text(unit="GHZ"))
        ds_mhz = parse_touchstone(lorentzian_s2p_text(unit="MHZ"))
        m1 = extract_metrics(ds_ghz)
        m2 = extract_metrics(ds_mhz)
        # identical up to the last-ulp effect of decimal re-encoding
        assert m1.f_c_hz == pytest.approx(m2.f_c_hz, rel=1e-12)
        assert m1.bw3db_hz == pytest.approx(m2.bw3db_hz, rel=1e-9)
        assert m1.peak_gain_db == pytest.approx(m2.peak_gain_db, rel=1e-12)

    def test_flat_trace_flags_band_edge(self):
        rows = "\n".join(f"{f} 0.1 0 1.0 0 0.01 0 0.1 0" for f in range(1, 11))
        ds = parse_touchstone("# GHz S MA R 50\n" + rows + "\n")
        m = extract_metrics(ds)
        assert m.band_edge_peak

    def test_synthetic_high_gain_state_curve(self):
        # synthetic stand-in built to the summary numbers of the high-gain state
        ds = parse_touchstone(
            lorentzian_s2p_text(fc_hz=31.2e9, bw_hz=5.7e9, peak_db=15.7,
                                f_lo_hz=26e9, f_hi_hz=36e9)
        )
        m = extract_metrics(ds)
        assert m.peak_gain_db == pytest.approx(15.7, abs=0.01)
        assert m.f_c_hz == pytest.approx(31.2e9, abs=5e6)

    def test_nf_sidecar_exact_grid(self):
        ds = parse_touchstone(lorentzian_s2p_text())
        freqs = ds.freqs_hz
        nf = 5.5 + 2.0 * ((freqs - 30.1e9) / 10e9) ** 2
        table = np.column_stack([freqs, nf])
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            m = extract_metrics(ds, table)
        assert m.min_nf_db == pytest.approx(5.5, abs=1e-9)

    def test_nf_sidecar_interpolation_warns(self):
        ds = parse_touchstone(lorentzian_s2p_text())
        table = np.array([[25e9, 7.0], [30e9, 5.5], [35e9, 7.0]])
        with pytest.warns(UserWarning, match="interpolating"):
            m = extract_metrics(ds, table)
        assert m.min_nf_db == pytest.approx(5.5, abs=0.01)

    def test_nf_csv_loader(self):
        table = load_nf_csv("freq_hz,nf_db\n1e9,3.0\n2e9,2.5\n")
        assert table.shape == (2, 2)
        with pytest.raises(ValueError):
            load_nf_csv("freq_hz,nf_db\n")

    def test_requires_two_port_s_data(self):
        ds = parse_touchstone("# GHz S MA R 50\n1 0.5 0\n")
        with pytest.raises(ValueError):
            extract_metrics(ds)


class TestTwoTone:
    def test_cubic_fit_accuracy_sample(self):
        fit = fit_two_tone(cubic_sweep(12.0, -20.0))
        assert fit.iip3_dbm == pytest.approx(-20.0, abs=0.1)
        assert fit.ip1db_dbm == pytest.approx(-20.0 - 9.6357, abs=0.3)
        assert fit.small_signal_gain_db == pytest.approx(12.0, abs=0.05)
        assert fit.im3_slope_free == pytest.approx(3.0, abs=0.05)

    def test_cubic_fit_accuracy_randomized(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            a1_db = rng.uniform(5.0, 25.0)
            iip3 = rng.uniform(-35.0, -5.0)
            fit = fit_two_tone(cubic_sweep(a1_db, iip3))
            assert abs(fit.iip3_dbm - iip3) <= 0.1
            assert abs(fit.ip1db_dbm - (iip3 - 9.6357)) <= 0.3

    def test_pure_linear_device(self):
        pins = np.arange(-50.0, -20.0, 1.0)
        sweep = TwoToneSweep(30e9, 30.05e9, pins, pins + 12.0,
                             np.full_like(pins, -170.0))
        with pytest.warns(UserWarning, match="no 1 dB compression"):
            fit = fit_two_tone(sweep)
        assert fit.iip3_dbm is None
        assert fit.ip1db_dbm is None
        assert fit.small_signal_gain_db == pytest.approx(12.0)

    def test_no_linear_region(self):
        # sweep starts deep in compression: slopes well under 0.9
        sweep = cubic_sweep(12.0, -20.0)
        pins = sweep.pin_dbm[-6:]
        with pytest.raises(NoLinearRegion):
            fit_two_tone(TwoToneSweep(30e9, 30.05e9, pins,
                                      sweep.pfund_dbm[-6:], sweep.pim3_dbm[-6:]))

    def test_input_shift_moves_iip3_exactly(self):
        base = cubic_sweep(12.0, -20.0)
        fit0 = fit_two_tone(base)
        delta = 7.0
        shifted = TwoToneSweep(base.f1_hz, base.f2_hz, base.pin_dbm + delta,
                               base.pfund_dbm, base.pim3_dbm)
        fit1 = fit_two_tone(shifted)
        assert fit1.iip3_dbm - fit0.iip3_dbm == pytest.approx(delta, abs=1e-9)

    def test_ip1db_bracketed_by_samples(self):
        sweep = cubic_sweep(15.0, -15.0)
        fit = fit_two_tone(sweep)
        dev = (sweep.pin_dbm + fit.small_signal_gain_db) - sweep.pfund_dbm
        i = int(np.searchsorted(sweep.pin_dbm, fit.ip1db_dbm))
        assert dev[i - 1] < 1.0 <= dev[i]

    def test_sweep_validation(self):
        pins = np.arange(-30.0, -26.0, 1.0)
        with pytest.raises(ValueError):
            TwoToneSweep(30e9, 29e9, pins, pins, pins)  # f2 <= f1
        with pytest.raises(ValueError):
            TwoToneSweep(30e9, 31e9, pins[::-1], pins, pins)
        with pytest.raises(ValueError):
            TwoToneSweep(30e9, 31e9, pins[:3], pins[:3], pins[:3])

    def test_csv_round_trip(self):
        sweep = cubic_sweep(12.0, -20.0)
        text = write_two_tone_csv(sweep)
        back = load_two_tone_csv(text)
        assert back.f1_hz == pytest.approx(sweep.f1_hz)
        assert back.f2_hz == pytest.approx(sweep.f2_hz)
        assert np.allclose(back.pin_dbm, sweep.pin_dbm)
        assert np.allclose(back.pim3_dbm, sweep.pim3_dbm, rtol=1e-8)

    def test_csv_requires_tone_header(self):
        with pytest.raises(ValueError, match="f1"):
            load_two_tone_csv("pin_dbm,pfund_dbm,pim3_dbm\n-30,-18,-90\n")
