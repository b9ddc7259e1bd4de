import dataclasses

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import make_bank
from wbansync.frame import FrameLayout, Modulation
from wbansync.synchronizer import LoopConfig, Mode, run_loop, s_curve, step, timing_error
from wbansync.synchronizer import run_loop_batch
from wbansync.waveform import noise_sigma2

STANDARD = FrameLayout.standard()


@pytest.mark.parametrize("d, dz, e", [(1j, 2j, 2.0), (0, 3 + 4j, 0.0),
                                      (np.exp(1j * np.pi / 4), np.exp(1j * np.pi / 4), 1.0)])
def test_timing_error_examples(d, dz, e):
    assert timing_error(d, dz) == pytest.approx(e, abs=1e-15)


def test_step_examples():
    assert step(0.1, 0.2, LoopConfig(mu=0.05)) == (pytest.approx(0.11), False)
    assert step(0.1, 0.0, LoopConfig(mu=0.05)) == (0.1, False)
    assert step(0.49, 1.0, LoopConfig(mu=0.05)) == (0.5, True)
    assert step(-0.49, -1.0, LoopConfig(mu=0.05)) == (-0.5, True)


@pytest.mark.parametrize("kwargs", [dict(mu=0.0), dict(mu=1.5), dict(tau0=0.6), dict(clamp=0.7),
                                    dict(tanh_threshold=0.0), dict(payload_mode="hard")])
def test_loop_config_validation(kwargs):
    with pytest.raises(ValueError):
        LoopConfig(**kwargs)


def test_mode_parse():
    assert Mode.parse("soft") is Mode.SOFT and Mode.parse(Mode.DA) is Mode.DA


def test_preamble_always_data_aided():
    cfg = LoopConfig(payload_mode="NDA")
    bank, stream = make_bank(STANDARD, 0.1, seed=1, es_n0_db=10)
    tr = run_loop(bank, STANDARD, stream, noise_sigma2(10), cfg)
    assert tr.modes[:90] == (Mode.DA,) * 90 and set(tr.modes[90:]) == {Mode.NDA}


def trajectories(tau, mu=0.005, frames=50, mode="DA"):
    out = []
    for seed in range(frames):
        bank, stream = make_bank(STANDARD, tau, seed=seed)
        out.append(run_loop(bank, STANDARD, stream, 1e-3, LoopConfig(mu=mu, payload_mode=mode)).estimates)
    return np.array(out)


@pytest.mark.parametrize("tau", [0.0, 0.1])
def test_noise_free_da_loop_settles(tau):
    est = trajectories(tau)
    assert np.max(np.abs(est.mean(axis=0)[89:] - tau)) < 0.01
    # pattern-dependent self-noise keeps single frames within a couple of hundredths
    assert np.max(np.abs(est[:, 89:] - tau)) < 0.02


@pytest.mark.xfail(strict=True, reason="self-noise of the detector moves single frames by >0.005; see ledger")
def test_noise_free_da_loop_at_equilibrium_listed_bound():
    assert np.max(np.abs(trajectories(0.0, frames=5))) < 0.005


@pytest.mark.xfail(strict=True, reason="mu = 0.05 amplifies self-noise beyond 0.01; see ledger")
def test_noise_free_da_loop_listed_step_size():
    assert np.max(np.abs(trajectories(0.1, mu=0.05, frames=5)[:, 89:] - 0.1)) < 0.01


def test_noise_free_equilibrium_mean_error():
    layout = FrameLayout.block(200, Modulation.DBPSK)
    for seed in range(5):
        bank, stream = make_bank(layout, 0.1, seed=seed)
        assert abs(s_curve(bank, layout, stream, [0.1], Mode.DA, 1e-3)[0]) < 5e-2


def test_trajectory_update_rule():
    bank, stream = make_bank(STANDARD, 0.2, seed=3, es_n0_db=0)
    cfg = LoopConfig(mu=0.05, payload_mode="Soft")
    tr = run_loop(bank, STANDARD, stream, noise_sigma2(0), cfg)
    prev = np.concatenate([[tr.initial], tr.estimates[:-1]])
    free = ~tr.clamped
    assert len(tr) == STANDARD.total_symbols
    assert np.allclose(tr.estimates[free] - prev[free], cfg.mu * tr.errors[free], atol=1e-15)
    assert np.all(np.abs(tr.estimates) <= 0.5)


def test_clamp_events_recorded():
    bank, stream = make_bank(STANDARD, 0.4, seed=0, es_n0_db=0)
    tr = run_loop(bank, STANDARD, stream, noise_sigma2(0), LoopConfig(mu=0.5, tau0=0.45))
    assert tr.clamp_events > 0
    assert np.all(np.abs(tr.estimates[tr.clamped]) == 0.5)


def test_determinism_and_batch_equivalence():
    pairs = [make_bank(STANDARD, 0.1, seed=s, es_n0_db=5) for s in range(4)]
    banks, streams = zip(*pairs)
    cfg = LoopConfig(payload_mode="Soft")
    batch = run_loop_batch(banks, STANDARD, streams, noise_sigma2(5), cfg)
    for seed, tr in enumerate(batch):
        bank, stream = make_bank(STANDARD, 0.1, seed=seed, es_n0_db=5)
        single = run_loop(bank, STANDARD, stream, noise_sigma2(5), cfg)
        assert np.array_equal(single.estimates, tr.estimates)
        assert np.array_equal(single.errors, tr.errors)


def test_run_loop_rejections():
    bank, stream = make_bank(STANDARD, 0.1)
    with pytest.raises(ValueError):
        run_loop(bank, STANDARD, stream, 0.0, LoopConfig())
    short = FrameLayout.block(50, Modulation.DBPSK)
    with pytest.raises(ValueError):
        run_loop(bank, short, stream, 1e-2, LoopConfig())
    longer = FrameLayout.block(300, Modulation.DBPSK)
    other_bank, other_stream = make_bank(short, 0.1)
    with pytest.raises(ValueError):
        run_loop(other_bank, longer, dataclasses.replace(
            other_stream, increments=np.ones(300, complex)), 1e-2, LoopConfig())


def zero_crossing(u, g):
    i = np.nonzero(np.sign(g[:-1]) != np.sign(g[1:]))[0]
    assert len(i) >= 1
    j = i[np.argmin(np.abs(u[i] - u[len(u) // 2]))]
    return u[j] - g[j] * (u[j + 1] - u[j]) / (g[j + 1] - g[j]), (g[j + 1] - g[j]) / (u[j + 1] - u[j])


@pytest.mark.parametrize("mod", list(Modulation))
@pytest.mark.parametrize("tau", [-0.3, 0.0, 0.1, 0.3])
def test_s_curve_zero_crossing(mod, tau):
    layout = FrameLayout.block(300, mod)
    pairs = [make_bank(layout, tau, seed=s) for s in range(4)]
    u = np.linspace(tau - 0.05, tau + 0.05, 21)
    g = s_curve([b for b, _ in pairs], layout, [s for _, s in pairs], u, Mode.DA, 1e-3)
    u0, slope = zero_crossing(u, g)
    assert abs(u0 - tau) < 0.005
    # restoring force: positive below the delay, negative above
    assert slope < 0
    assert g[0] > 0 > g[-1]


@given(st.floats(-0.4, 0.4))
def test_s_curve_single_point_matches_grid(u):
    layout = FrameLayout.block(40, Modulation.DQPSK)
    bank, stream = make_bank(layout, 0.0, seed=2)
    a = s_curve(bank, layout, stream, [u, 0.0], Mode.NDA, 0.1)
    b = s_curve(bank, layout, stream, u, Mode.NDA, 0.1)
    assert a[0] == b[0]


def s_curve_slopes(mod, frames=200):
    layout = FrameLayout.block(100, mod)
    pairs = [make_bank(layout, 0.1, seed=s, es_n0_db=5.0) for s in range(frames)]
    u = np.array([0.08, 0.12])
    out = {}
    for m in Mode:
        g = s_curve([b for b, _ in pairs], layout, [s for _, s in pairs], u, m, noise_sigma2(5.0))
        out[m] = (g[1] - g[0]) / (u[1] - u[0])
    return out


@pytest.mark.parametrize("mod", list(Modulation))
def test_s_curve_all_modes_restoring_at_5db(mod):
    assert all(s < 0 for s in s_curve_slopes(mod, frames=50).values())


@pytest.mark.xfail(strict=True, reason="soft symbols shrink the detector gain below NDA's; see ledger")
@pytest.mark.parametrize("mod", list(Modulation))
def test_soft_slope_between_nda_and_da_at_5db(mod):
    s = s_curve_slopes(mod)
    assert min(s[Mode.DA], s[Mode.NDA]) <= s[Mode.SOFT] <= max(s[Mode.DA], s[Mode.NDA])


def test_low_complexity_profile_runs():
    bank, stream = make_bank(STANDARD, 0.1, seed=0, es_n0_db=10)
    exact = run_loop(bank, STANDARD, stream, noise_sigma2(10), LoopConfig())
    approx = run_loop(bank, STANDARD, stream, noise_sigma2(10), LoopConfig(low_complexity_tanh=True))
    assert np.array_equal(exact.estimates[:90], approx.estimates[:90])
    assert abs(approx.final - 0.1) < 0.05
