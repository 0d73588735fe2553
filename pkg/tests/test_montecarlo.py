import math

import numpy as np
import pytest

from wprelay.channel import ChannelState, SystemParams, sample_channel_block
from wprelay.montecarlo import (MC_STRATEGIES, METRICS, PerformanceEstimate,
                                SimulationError, estimate, sweep)
from wprelay.sysmodel import snr_exact, throughput

PARAMS = SystemParams(n_antennas=4, d1=20.0, d2=15.0, d3=15.0, ps_dbm=30.0)


def test_estimate_returns_metadata():
    est = estimate(PARAMS, "mrt-user", 5000, 11, metric="throughput", tau=0.5)
    assert isinstance(est, PerformanceEstimate)
    assert est.n_trials == 5000
    assert est.master_seed == 11
    assert est.params_digest == PARAMS.digest()
    assert est.std_err > 0


def test_worker_and_chunk_invariance():
    ref = estimate(PARAMS, "mrt-user", 100_000, 3, metric="outage", tau=0.5)
    for workers, chunk in [(1, 7777), (2, 32768), (4, 11111)]:
        got = estimate(PARAMS, "mrt-user", 100_000, 3, metric="outage",
                       tau=0.5, workers=workers, chunk_size=chunk)
        assert got == ref


def test_fast_path_matches_per_trial_evaluation():
    n = 200
    tau = 0.45
    h1, h2, h3 = sample_channel_block(PARAMS, 21, 0, n)
    vals = []
    for t in range(n):
        ch = ChannelState(h1=h1[t], h2=h2[t], h3=complex(h3[t]))
        w = np.conj(ch.h1) / np.linalg.norm(ch.h1)
        vals.append(throughput(snr_exact(PARAMS, ch, w, tau).gamma_total, tau))
    est = estimate(PARAMS, "mrt-user", n, 21, metric="throughput", tau=tau)
    assert est.value == pytest.approx(float(np.mean(vals)), rel=1e-12)


def test_optimized_strategies_ordered():
    kw = dict(n_trials=300, master_seed=5, metric="throughput")
    t_exact = estimate(PARAMS, "exact", **kw).value
    t_sub = estimate(PARAMS, "suboptimal", **kw).value
    t_mrt = estimate(PARAMS, "mrt-user", **kw).value
    assert t_exact >= t_sub >= 0.9 * t_exact
    assert t_exact >= t_mrt


def test_tau_metric():
    est = estimate(PARAMS, "suboptimal", 500, 9, metric="tau")
    assert 0.0 < est.value < 1.0
    fixed = estimate(PARAMS, "mrt-user", 500, 9, metric="tau", tau=0.3)
    assert fixed.value == pytest.approx(0.3)
    assert fixed.std_err < 1e-9


def test_no_relay_baseline():
    # without the relay the direct-link SNR loses the relayed term but
    # gains the full data phase
    est_fix = estimate(PARAMS, "no-relay", 5000, 13, metric="throughput",
                       tau=0.5)
    est_opt = estimate(PARAMS, "no-relay", 500, 13, metric="throughput")
    assert est_fix.value > 0
    assert est_opt.value > 0


def test_outage_standard_error():
    est = estimate(PARAMS, "mrt-user", 50_000,
                   17, metric="outage", tau=0.5)
    expected_se = math.sqrt(est.value * (1 - est.value) / est.n_trials)
    assert est.std_err == pytest.approx(expected_se, rel=1e-12)


def test_input_validation():
    with pytest.raises(ValueError):
        estimate(PARAMS, "beam-hopping", 100, 1)
    with pytest.raises(ValueError):
        estimate(PARAMS, "exact", 100, 1, metric="latency")
    with pytest.raises(ValueError):
        estimate(PARAMS, "exact", 1, 1)
    with pytest.raises(ValueError):
        estimate(PARAMS, "mrt-user", 100, 1, tau=1.5)
    assert "no-relay" in MC_STRATEGIES and "tau" in METRICS


def test_sweep_rows_and_common_randomness():
    rows = sweep(PARAMS, "ps_dbm", [10.0, 20.0], ["mrt-user", "no-relay"],
                 2000, 23, metric="throughput", tau=0.5)
    assert [(r["axis"], r["strategy"]) for r in rows] == [
        (10.0, "mrt-user"), (10.0, "no-relay"),
        (20.0, "mrt-user"), (20.0, "no-relay")]
    again = sweep(PARAMS, "ps_dbm", [10.0, 20.0], ["mrt-user", "no-relay"],
                  2000, 23, metric="throughput", tau=0.5)
    assert rows == again
