import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

KINDS = ("T", "O", "I")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_rotation(rng) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


# --- acceptance summary ---------------------------------------------------------

RESULTS: dict = {}
TITLES = {
    1: "total-collision bounds",
    2: "multi-collision bound rows",
    3: "tetrahedral edge integral",
    4: "test-loop actions",
    5: "four-body level gap",
    6: "actions below collision bounds",
    7: "Kepler arc ratio",
    8: "group structure",
    9: "invariant round trips",
    10: "gradient-flow properties",
    11: "large-exponent limit",
    12: "gradient correctness",
}


def record(criterion: int, part: str, ok: bool, detail: str = "") -> None:
    RESULTS.setdefault(criterion, []).append((part, bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(TITLES):
        parts = RESULTS.get(k)
        if not parts:
            tr.write_line(f"criterion {k:2d} NOT RUN  {TITLES[k]}")
            continue
        ok = all(p[1] for p in parts)
        bad = "; ".join(f"{p[0]}: {p[2]}" for p in parts if not p[1])
        good = "; ".join(f"{p[0]}: {p[2]}" for p in parts if p[1] and p[2])
        tr.write_line(f"criterion {k:2d} {'PASS' if ok else 'FAIL'}  {TITLES[k]}"
                      + (f"  [failed: {bad}]" if bad else "") + (f"  [{good}]" if good and ok else ""))
