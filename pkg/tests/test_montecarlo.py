import math

import numpy as np
import pytest

from fsolink.channel import dbm_to_watts
from fsolink.errorrates import avg_ser_exact, conditional_ser_pam, crossing_power, sweep_curve
from fsolink.montecarlo import (McConfig, brgc_decode, brgc_encode, ml_detect,
                                simulate)
from support import make_geometry, make_fading, make_op

PINK = (0.35, 0.1)


# ---------------------------------------------------------------------------
# Gray code

def test_brgc_two_bit_table():
    words = ["".join(map(str, brgc_encode(j, 2))) for j in range(4)]
    assert words == ["00", "01", "11", "10"]


def test_brgc_adjacent_hamming_distance_one():
    for m in range(1, 9):
        for j in range(2**m - 1):
            a = brgc_encode(j, m)
            b = brgc_encode(j + 1, m)
            assert int(np.sum(a != b)) == 1, (m, j)


def test_brgc_bijection_exhaustive():
    for m in range(1, 11):
        seen = set()
        for j in range(2**m):
            bits = brgc_encode(j, m)
            assert brgc_decode(bits) == j
            seen.add(tuple(int(b) for b in bits))
        assert len(seen) == 2**m


def test_brgc_rejects_out_of_range():
    with pytest.raises(ValueError):
        brgc_encode(4, 2)
    with pytest.raises(ValueError):
        brgc_encode(-1, 3)


def test_brgc_vectorized():
    bits = brgc_encode(np.arange(8), 3)
    assert bits.shape == (8, 3)
    assert brgc_decode(bits[5]) == 5


# ---------------------------------------------------------------------------
# detection

def test_detect_exact_levels():
    m, p = 8, 2e-3
    eta_h = 3.7e-4
    spacing = 2.0 * p / (m - 1)
    for j in range(m):
        y = eta_h * j * spacing
        assert ml_detect(y, eta_h, m, p) == j


def test_detect_midpoint_tie_breaks_low():
    m, p = 4, 1e-3
    eta_h = 1.0
    spacing = 2.0 * p / (m - 1)
    y_mid = eta_h * spacing * 1.5  # exactly between levels 1 and 2
    assert ml_detect(y_mid, eta_h, m, p) == 1


def test_detect_clips_to_constellation():
    m, p = 4, 1e-3
    assert ml_detect(-1.0, 1.0, m, p) == 0
    assert ml_detect(1.0, 1.0, m, p) == m - 1


def test_detect_noiseless_loop():
    rng = np.random.default_rng(3)
    m, p = 16, 5e-3
    spacing = 2.0 * p / (m - 1)
    for _ in range(50):
        h = rng.lognormal(-0.1, 0.3)
        j = rng.integers(0, m)
        assert ml_detect(0.5 * h * j * spacing, 0.5 * h, m, p) == j


# ---------------------------------------------------------------------------
# simulation

def test_simulate_noiseless_zero_errors():
    geo = make_geometry(noise_sigma_n=1e-30)
    fm = make_fading(*PINK, geo)
    from fsolink.channel import OperatingPoint
    op = OperatingPoint(geo, fm, 8, 1e-3)
    est = simulate(op, McConfig(n_symbols=100_000, seed=11))
    assert est.ser_hat == 0.0
    assert est.bit_errors == 0


def test_simulate_vanishing_power_guess_rate():
    op = make_op(*PINK, 8, 0.0).with_power(1e-30)
    est = simulate(op, McConfig(n_symbols=300_000, seed=11))
    assert est.ser_hat == pytest.approx(7.0 / 8.0, abs=3.0 * est.ci95_ser / 1.96)


def test_simulate_deterministic_across_worker_counts():
    op = make_op(*PINK, 4, 4.0)
    base = McConfig(n_symbols=1_200_000, seed=99, batch_size=250_000, workers=1)
    est1 = simulate(op, base)
    est2 = simulate(op, McConfig(n_symbols=1_200_000, seed=99, batch_size=250_000,
                                 workers=4))
    est3 = simulate(op, McConfig(n_symbols=1_200_000, seed=99, batch_size=250_000,
                                 workers=7))
    assert est1 == est2 == est3


def test_simulate_seed_sensitivity():
    op = make_op(*PINK, 4, 4.0)
    est1 = simulate(op, McConfig(n_symbols=500_000, seed=1))
    est2 = simulate(op, McConfig(n_symbols=500_000, seed=2))
    assert est1.symbol_errors != est2.symbol_errors


def test_bit_symbol_error_bracket():
    op = make_op(*PINK, 16, 6.0)
    est = simulate(op, McConfig(n_symbols=1_000_000, seed=5))
    m = 4
    assert est.ber_hat <= est.ser_hat <= m * est.ber_hat + 1e-15
    assert est.symbol_errors <= est.n_symbols
    assert est.bit_errors <= m * est.n_symbols


def test_conditional_error_rate_frozen_channel():
    # freeze the gain and compare against the conditional SER formula
    op = make_op(*PINK, 4, 0.0)
    h = op.fading.h_hat
    a = 2.0 * op.transmit_power_p * op.geometry.eta * h / op.geometry.noise_sigma_n
    expect = conditional_ser_pam(4, a)
    est = simulate(op, McConfig(n_symbols=10_000_000, seed=17, workers=4),
                   fixed_gain=h)
    se = est.ci95_ser / 1.96
    assert abs(est.ser_hat - expect) < 3.0 * se


def test_simulate_matches_quadrature_at_crossing():
    op = make_op(*PINK, 4, 0.0)
    grid = [g * 2.0 for g in range(-5, 16)]
    pstar = crossing_power(sweep_curve(op, avg_ser_exact, grid), 1e-3)
    op2 = op.with_power(dbm_to_watts(pstar))
    est = simulate(op2, McConfig(n_symbols=10_000_000, seed=23, workers=4))
    se = est.ci95_ser / 1.96
    assert abs(est.ser_hat - 1e-3) < 3.0 * se


def test_early_stop_reports_actual_trials():
    op = make_op(*PINK, 2, -5.0)  # high error rate, stops at first check
    cfg = McConfig(n_symbols=2_000_000, seed=31, batch_size=100_000,
                   min_errors=100, early_stop=True)
    est = simulate(op, cfg)
    assert est.n_symbols == 100_000
    assert est.symbol_errors >= 100
    # stopping point is worker-count independent
    est2 = simulate(op, McConfig(n_symbols=2_000_000, seed=31, batch_size=100_000,
                                 min_errors=100, early_stop=True, workers=3))
    assert est == est2


def test_early_stop_disabled_runs_full_n():
    op = make_op(*PINK, 2, -5.0)
    est = simulate(op, McConfig(n_symbols=400_000, seed=31, batch_size=100_000))
    assert est.n_symbols == 400_000


def test_ci_wilson_at_low_counts():
    # a run with very few errors still reports a usable positive half-width
    op = make_op(*PINK, 2, 4.0)
    est = simulate(op, McConfig(n_symbols=200_000, seed=2))
    assert est.ci95_ser > 0.0
    assert est.ci95_ber > 0.0


def test_mcconfig_validation():
    with pytest.raises(ValueError):
        McConfig(n_symbols=0, seed=1)
    with pytest.raises(ValueError):
        McConfig(n_symbols=10, seed=-1)
    with pytest.raises(ValueError):
        McConfig(n_symbols=10, seed=1, batch_size=0)
    with pytest.raises(ValueError):
        McConfig(n_symbols=10, seed=1, workers=0)
