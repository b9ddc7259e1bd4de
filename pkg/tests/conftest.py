import numpy as np
import pytest

from wbansync.frame import FrameLayout, Modulation, build_frame_bits
from wbansync.mapping import map_stream
from wbansync.waveform import add_noise, matched_filter, shape, srrc_taps


def make_bank(layout, tau, seed=0, es_n0_db=np.inf, pulse=None):
    pulse = pulse or srrc_taps()
    ss = np.random.SeedSequence(seed)
    bseed, nseed = ss.spawn(2)
    stream = map_stream(build_frame_bits(layout, bseed), layout)
    return matched_filter(add_noise(shape(stream, pulse, tau), es_n0_db, nseed), pulse), stream


@pytest.fixture(scope="session")
def pulse():
    return srrc_taps()


@pytest.fixture
def dbpsk200():
    return FrameLayout.block(200, Modulation.DBPSK)


ACCEPTANCE: dict[str, tuple[str, list[tuple[str, bool, str]]]] = {}


def record_criterion(key, title, checks):
    """Store ``(name, ok, detail)`` checks for the end-of-run acceptance summary."""
    ACCEPTANCE[key] = (title, checks)
    failed = [f"{name}: {detail}" for name, ok, detail in checks if not ok]
    return failed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        title, checks = ACCEPTANCE[key]
        ok = all(c[1] for c in checks)
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  {key}  {title}")
        for name, good, detail in checks:
            tr.write_line(f"        [{'ok' if good else 'xx'}] {name}: {detail}")
