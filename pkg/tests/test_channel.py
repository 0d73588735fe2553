import math

import numpy as np
import pytest

from wprelay.channel import (DEFAULT_NOISE_DBM, ChannelState,
                             DegenerateChannelError, SystemParams,
                             build_beamformer, dbm_to_watt, decompose,
                             sample_channel, sample_channel_block)

PARAMS = SystemParams(n_antennas=6, d1=20.0, d2=15.0, d3=15.0, ps_dbm=40.0)


def test_default_noise_matches_20mhz_band():
    assert DEFAULT_NOISE_DBM == pytest.approx(-174.0 + 10 * math.log10(20e6))


def test_dbm_conversion():
    assert dbm_to_watt(30.0) == pytest.approx(1.0)
    assert dbm_to_watt(0.0) == pytest.approx(1e-3)


def test_params_validation():
    with pytest.raises(ValueError):
        SystemParams(n_antennas=0, d1=1, d2=1, d3=1)
    with pytest.raises(ValueError):
        SystemParams(n_antennas=2, d1=-1, d2=1, d3=1)
    with pytest.raises(ValueError):
        SystemParams(n_antennas=2, d1=1, d2=1, d3=1, alpha=1.5)
    with pytest.raises(ValueError):
        SystemParams(n_antennas=2, d1=1, d2=1, d3=1, eta=0.0)


def test_params_linear_properties():
    assert PARAMS.rho == pytest.approx(10 ** ((40.0 - PARAMS.noise_dbm) / 10))
    assert PARAMS.gamma_th == pytest.approx(1.0)
    assert PARAMS.pc_watt == 0.0
    p = SystemParams(n_antennas=2, d1=1, d2=1, d3=1, pc_dbm=-30.0)
    assert p.pc_watt == pytest.approx(1e-6)


def test_digest_stable_and_sensitive():
    twin = SystemParams(n_antennas=6, d1=20.0, d2=15.0, d3=15.0, ps_dbm=40.0)
    assert PARAMS.digest() == twin.digest()
    other = SystemParams(n_antennas=6, d1=20.0, d2=15.0, d3=15.0, ps_dbm=41.0)
    assert PARAMS.digest() != other.digest()


def test_from_config_roundtrip(tmp_path):
    cfg = tmp_path / "scenario.cfg"
    cfg.write_text("# comment\nn_antennas = 4\nd1 = 10\nd2 = 5\nd3 = 5\n"
                   "ps_dbm = 30\npc_dbm = none\n")
    p = SystemParams.from_config(cfg)
    assert p.n_antennas == 4 and p.d1 == 10.0 and p.pc_dbm is None
    q = SystemParams.from_config(cfg, ps_dbm=20.0)
    assert q.ps_dbm == 20.0


def test_from_config_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n_antennas = 4\nbandwidth = 20\n")
    with pytest.raises(ValueError, match="bandwidth"):
        SystemParams.from_config(cfg)


def test_sample_channel_statistics():
    rng = np.random.default_rng(0)
    h1 = np.array([sample_channel(PARAMS, rng).h1 for _ in range(4000)])
    assert abs(h1.mean()) < 0.02
    assert np.var(h1.real) == pytest.approx(0.5, abs=0.02)
    assert np.var(h1.imag) == pytest.approx(0.5, abs=0.02)


def test_block_sampling_chunk_invariant():
    full = sample_channel_block(PARAMS, 123, 0, 500)
    for start, stop in [(0, 100), (100, 350), (350, 500), (137, 138)]:
        part = sample_channel_block(PARAMS, 123, start, stop)
        for a, b in zip(full, part):
            assert np.array_equal(a[start:stop], b)


def test_block_sampling_seed_sensitivity():
    a = sample_channel_block(PARAMS, 1, 0, 10)[0]
    b = sample_channel_block(PARAMS, 2, 0, 10)[0]
    assert not np.array_equal(a, b)


def test_block_sampling_statistics():
    h1, h2, h3 = sample_channel_block(PARAMS, 7, 0, 50000)
    for h in (h1.ravel(), h2.ravel(), h3):
        assert np.var(h.real) == pytest.approx(0.5, abs=0.01)
        assert np.var(h.imag) == pytest.approx(0.5, abs=0.01)
    with pytest.raises(ValueError):
        sample_channel_block(PARAMS, 7, 5, 5)


def test_decompose_identities():
    rng = np.random.default_rng(3)
    for _ in range(50):
        ch = sample_channel(PARAMS, rng)
        dec = decompose(PARAMS, ch, 0.4)
        assert dec.a == pytest.approx(np.linalg.norm(ch.h1), rel=1e-12)
        assert dec.b <= np.linalg.norm(ch.h2) + 1e-12
        assert math.hypot(dec.b, dec.c) == pytest.approx(np.linalg.norm(ch.h2),
                                                         rel=1e-12)
        assert dec.b0 == pytest.approx(dec.c0 * dec.d0, rel=1e-12)


def test_decompose_rejects_bad_tau():
    rng = np.random.default_rng(4)
    ch = sample_channel(PARAMS, rng)
    for tau in (0.0, 1.0, -0.2):
        with pytest.raises(ValueError):
            decompose(PARAMS, ch, tau)


def test_beamformer_projection_scalars():
    rng = np.random.default_rng(5)
    for x_bar in (0.0, 0.25, 0.6, 1.0):
        ch = sample_channel(PARAMS, rng)
        dec = decompose(PARAMS, ch, 0.5)
        w = build_beamformer(ch, x_bar)
        assert np.linalg.norm(w) == pytest.approx(1.0, abs=1e-12)
        assert abs(ch.h1 @ w) == pytest.approx(dec.a * x_bar, abs=1e-10)
        proj = ch.h2 @ w
        expect = dec.b * x_bar + dec.c * math.sqrt(1 - x_bar ** 2)
        assert proj.real == pytest.approx(expect, rel=1e-10)
        assert abs(proj.imag) < 1e-10 * max(1.0, expect)


def test_beamformer_collinear_channel():
    h1 = np.array([1.0 + 0j, 2.0 - 1j, 0.5j])
    ch = ChannelState(h1=h1, h2=2.5 * h1, h3=0.3 + 0.1j)
    w = build_beamformer(ch, 0.2)  # no perpendicular direction exists
    assert np.linalg.norm(w) == pytest.approx(1.0, abs=1e-12)
    assert abs(ch.h1 @ w) == pytest.approx(np.linalg.norm(h1), rel=1e-12)


def test_beamformer_rejects_bad_inputs():
    rng = np.random.default_rng(6)
    ch = sample_channel(PARAMS, rng)
    with pytest.raises(ValueError):
        build_beamformer(ch, 1.5)
    zero = ChannelState(h1=np.zeros(3, complex), h2=np.ones(3, complex), h3=1j)
    with pytest.raises(DegenerateChannelError):
        build_beamformer(zero, 0.5)
    with pytest.raises(DegenerateChannelError):
        decompose(PARAMS, ChannelState(h1=np.zeros(6, complex),
                                       h2=np.ones(6, complex), h3=1j), 0.5)


def test_channel_state_validation():
    with pytest.raises(ValueError):
        ChannelState(h1=np.ones(3, complex), h2=np.ones(4, complex), h3=0j)
    with pytest.raises(ValueError):
        ChannelState(h1=np.array([np.inf + 0j, 0j]), h2=np.ones(2, complex), h3=0j)
