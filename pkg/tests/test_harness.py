import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wbansync.crb import crb_reference
from wbansync.harness import (Cell, ConfigError, Scenario, TrialError, monte_carlo, ordering_confidence,
                              paired_difference_bounds, run_group, run_trial, trial_seeds)
from wbansync.synchronizer import Mode

SMALL = Scenario(snr_db=(0.0, 10.0), tau=(0.1, 0.2), trials=40, bootstrap=200)


@pytest.mark.parametrize("kwargs", [
    dict(trials=0), dict(tau=(0.5,)), dict(tau=()), dict(snr_db=()), dict(modes=()),
    dict(modes=("hard",)), dict(modulations=("8PSK",)), dict(frame="long"),
    dict(snr_db=(float("inf"),)), dict(mu=0.0), dict(sps=2), dict(bootstrap=0),
    dict(frame="block", preamble_symbols=50),  # 63-bit m-sequence + 27-bit extension = 90
])
def test_scenario_validation(kwargs):
    with pytest.raises(ConfigError):
        Scenario(**kwargs)


def test_from_mapping():
    s = Scenario.from_mapping({"snr_db": [5], "tau": 0.3, "modes": ["soft", "da"], "trials": 3})
    assert s.snr_db == (5.0,) and s.tau == (0.3,) and s.modes == (Mode.SOFT, Mode.DA)
    with pytest.raises(ConfigError, match="bogus"):
        Scenario.from_mapping({"bogus": 1})
    with pytest.raises(ConfigError):
        Scenario.from_mapping({"trials": "many"})


def test_to_dict_round_trip():
    assert Scenario.from_mapping(SMALL.to_dict()) == SMALL


def test_trial_seeds_distinct_and_stable():
    g = ("DBPSK", 10.0, 0.1)
    a = trial_seeds(SMALL, g, 3)
    assert a[0].generate_state(2).tolist() == trial_seeds(SMALL, g, 3)[0].generate_state(2).tolist()
    states = {tuple(s.generate_state(2)) for t in range(20) for s in trial_seeds(SMALL, g, t)}
    assert len(states) == 40


def test_run_trial_determinism():
    cell = Cell(Mode.SOFT, "DBPSK", 10.0, 0.1)
    (t1, e1), (t2, e2) = run_trial(SMALL, cell, 7), run_trial(SMALL, cell, 7)
    assert e1 == e2 and np.array_equal(t1.estimates, t2.estimates)
    assert e1 == pytest.approx(t1.final - 0.1)


def test_run_trial_matches_monte_carlo():
    report = monte_carlo(dataclasses.replace(SMALL, snr_db=(10.0,), tau=(0.1,)))
    _, err = run_trial(SMALL, Cell(Mode.NDA, "DBPSK", 10.0, 0.1), 5)
    assert report.cell("NDA", "DBPSK", 10.0, 0.1).final_errors[5] == err


def test_near_noise_free_da_trials():
    s = Scenario(snr_db=(200.0,), modes=("DA",), trials=20, frame="standard")
    final = monte_carlo(s).cells[0].final_errors
    assert abs(final.mean()) < 0.01
    assert np.max(np.abs(final)) < 0.02


@pytest.mark.xfail(strict=True, reason="block-end transient and self-noise offset bias the mean; see ledger")
@pytest.mark.parametrize("frame", ["block", "standard"])
def test_soft_final_error_mean_zero(frame):
    c = monte_carlo(Scenario(snr_db=(10.0,), modes=("Soft",), trials=500, frame=frame)).cells[0]
    assert abs(c.final_errors.mean()) < 3 * c.final_errors.std(ddof=1) / np.sqrt(c.trials)


def test_report_shape_and_invariants():
    report = monte_carlo(SMALL)
    assert len(report.cells) == len(SMALL.modes) * 2 * 2
    for c in report.cells:
        assert c.trials == SMALL.trials and len(c.final_errors) == SMALL.trials
        assert len(c.bias_mean) == 100
        assert c.mse >= 0 and c.mse_ci_lo <= c.mse <= c.mse_ci_hi
        assert np.all(c.bias_ci_lo <= c.bias_ci_hi)
        assert c.mse == pytest.approx(np.mean(c.final_errors ** 2))
        assert c.crb == pytest.approx(crb_reference(c.snr_db, 100))
        assert c.mse_stderr <= c.mse * np.sqrt(2 / c.trials) * 1.2 or c.trials < 100
    meta = report.metadata
    assert meta["master_seed"] == SMALL.master_seed and "numpy" in meta["versions"]


def test_standard_frame_curves_cover_the_frame():
    report = monte_carlo(Scenario(snr_db=(10.0,), trials=8, frame="standard", bootstrap=50))
    assert {c.modulation for c in report.cells} == {"DBPSK+DQPSK"}
    assert all(len(c.bias_mean) == 201 for c in report.cells)


def test_mse_stderr_sanity_bound():
    report = monte_carlo(Scenario(snr_db=(5.0, 10.0), trials=500, bootstrap=100))
    for c in report.cells:
        assert c.mse_stderr <= c.mse * np.sqrt(2 / c.trials) * 1.2


def test_invariant_to_batching_and_workers():
    base = monte_carlo(SMALL)
    assert monte_carlo(dataclasses.replace(SMALL, batch_size=7)).cells == base.cells
    assert monte_carlo(SMALL, workers=2).cells == base.cells


def test_modes_share_realisations():
    # DA does not depend on decisions, so identical realisations give identical DA cells
    a = monte_carlo(dataclasses.replace(SMALL, modes=("DA",)))
    b = monte_carlo(SMALL)
    for c in a.cells:
        assert b.cell(c.mode, c.modulation, c.snr_db, c.tau_over_t) == c


def test_trial_failure_is_reported(monkeypatch):
    import wbansync.harness as h

    def boom(*args, **kwargs):
        raise FloatingPointError("synthetic")

    monkeypatch.setattr(h, "run_loop_batch", boom)
    with pytest.raises(TrialError, match="synthetic"):
        run_group(SMALL, ("DBPSK", 0.0, 0.1), SMALL.modes)


def test_crb_examples():
    assert crb_reference(10.0, 100) == pytest.approx(1.4459e-4, rel=1e-4)
    assert crb_reference(10.0, 200) == pytest.approx(crb_reference(10.0, 100) / 2)
    assert np.allclose(crb_reference([0, 10], 100), [crb_reference(0, 100), crb_reference(10, 100)])
    with pytest.raises(ValueError):
        crb_reference(10.0, 0)


@given(st.floats(-10, 40), st.integers(1, 10_000), st.floats(0.05, 1.0))
@settings(max_examples=50)
def test_crb_formula(snr, L, a):
    xi = 1 / 12 + a * a * (0.25 - 2 / np.pi**2)
    assert crb_reference(snr, L, a) == pytest.approx(1 / (8 * np.pi**2 * xi * L * 10 ** (snr / 10)))


def test_ordering_confidence():
    rng = np.random.default_rng(0)
    e = rng.standard_normal(500)
    assert ordering_confidence(0.5 * e, e, 2 * e, resamples=200) == 1.0
    assert ordering_confidence(2 * e, e, resamples=200) == 0.0
    lo, hi = paired_difference_bounds(e, 2 * e, resamples=200)
    assert 0 < lo < 3 * np.mean(e**2) < hi


def test_soft_matches_da_at_high_snr():
    report = monte_carlo(Scenario(snr_db=(15.0, 20.0), trials=500, modulations=("DBPSK", "DQPSK"),
                                  modes=("DA", "Soft"), bootstrap=100))
    for c in report.cells:
        if c.mode == "Soft":
            da = report.cell("DA", c.modulation, c.snr_db, c.tau_over_t)
            assert abs(c.mse - da.mse) <= 0.25 * da.mse


def test_self_noise_floor():
    report = monte_carlo(Scenario(snr_db=(20.0, 25.0, 30.0), modes=("DA",), trials=500, bootstrap=100,
                                  modulations=("DBPSK", "DQPSK")))
    for mod in ("DBPSK", "DQPSK"):
        m = [report.cell("DA", mod, s, 0.1).mse for s in (20.0, 25.0, 30.0)]
        # the bound keeps falling by 10**-0.5 per step; the measured curve does not
        assert m[2] / m[1] > 0.5
        assert m[2] > 5 * crb_reference(30.0, 100)
