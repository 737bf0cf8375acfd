import numpy as np
import pytest

from randbasis.sampling import derive_stream


@pytest.fixture
def stream():
    return derive_stream(12345, 0)


def orbit_cycle_lengths(images):
    """Cycle lengths by walking every orbit; slow but obviously correct."""
    images = list(images)
    seen = [False] * len(images)
    lengths = []
    for start in range(len(images)):
        if seen[start]:
            continue
        k, length = start, 0
        while not seen[k]:
            seen[k] = True
            k = images[k]
            length += 1
        lengths.append(length)
    return sorted(lengths, reverse=True)


def within_se(values, target, k=3.0):
    values = np.asarray(values, dtype=np.float64)
    se = values.std(ddof=1) / np.sqrt(values.size)
    return abs(values.mean() - target) <= k * se


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def report(criterion: str, ok: bool, detail: str) -> bool:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
