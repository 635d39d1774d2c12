import numpy as np
import pytest

from vmdeeg.signal_io import SignalCollection, synth_multitone

TWO_TONE_FREQS = (0.05, 0.2)
TWO_TONE_AMPS = (1.0, 0.5)
TWO_TONE_N = 2048


@pytest.fixture
def two_tone():
    return synth_multitone(TWO_TONE_FREQS, TWO_TONE_AMPS, TWO_TONE_N)


def tone_components(n=TWO_TONE_N):
    t = np.arange(n)
    return [a * np.cos(2 * np.pi * f * t) for f, a in zip(TWO_TONE_FREQS, TWO_TONE_AMPS)]


def tone_corpus(amplitudes, per_set=20, n=512, seed=0):
    """Sets of random three-tone signals; ``amplitudes`` maps set id to tone amplitude."""
    rng = np.random.default_rng(seed)
    data = {}
    for sid, amp in amplitudes.items():
        signals = []
        for i in range(per_set):
            freqs = rng.uniform(0.02, 0.4, 3)
            signals.append(
                synth_multitone(
                    list(freqs),
                    [amp] * 3,
                    n,
                    noise_std=0.05 * amp,
                    seed=int(rng.integers(2**31)),
                    sample_rate_hz=173.61,
                    label=sid,
                    source_id=f"{sid}{i:03d}",
                )
            )
        data[sid] = SignalCollection(sid, signals)
    return data


_acceptance_results = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if item.get_closest_marker("acceptance") is None:
        return
    if report.when == "call" or (report.when == "setup" and report.skipped):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        status = "PASS" if report.passed else "SKIP" if report.skipped else "FAIL"
        _acceptance_results.append((status, doc))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for status, doc in _acceptance_results:
        terminalreporter.write_line(f"{status}  {doc}")
