from __future__ import annotations

import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(label: str, passed: bool, detail: str = "") -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] {label}" + (f" -- {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def nearest_on_samples(samples: np.ndarray, p) -> tuple[np.ndarray, float]:
    """Brute-force nearest point among densely sampled set points."""
    d = np.linalg.norm(samples - np.asarray(p, dtype=float), axis=1)
    k = int(np.argmin(d))
    return samples[k], float(d[k])


def line_samples(point, direction, half_length=10.0, n=400_001) -> np.ndarray:
    s = np.linspace(-half_length, half_length, n)
    return np.asarray(point, float)[None, :] + s[:, None] * np.asarray(direction, float)[None, :]


def circle_samples(center, radius, n=720_000) -> np.ndarray:
    th = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    return np.asarray(center, float)[None, :] + radius * np.stack([np.cos(th), np.sin(th)], axis=1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
