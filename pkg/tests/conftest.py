import numpy as np
import pytest

from gaugegap.blocks import all_sectors, build_block, full_hamiltonian_dense
from gaugegap.f2core import BitMatrix
from gaugegap.gaugecode import CssCode

# acceptance criteria report here; printed once at the end of the session
CRITERIA: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        ok, text = CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {text}")


def make_code(n, xs, zs, name="fixture"):
    return CssCode(n, BitMatrix.from_strings(xs, n), BitMatrix.from_strings(zs, n), name=name)


@pytest.fixture
def ex2():
    # XXI + IXX + ZZZ
    return make_code(3, ["110", "011"], ["111"], "ex2")


@pytest.fixture
def ex3():
    # XXII + IIXX + ZIZI + IZIZ
    return make_code(4, ["1100", "0011"], ["1010", "0101"], "ex3")


def ex2_code():
    return make_code(3, ["110", "011"], ["111"], "ex2")


def ex3_code():
    return make_code(4, ["1100", "0011"], ["1010", "0101"], "ex3")


def sector_union(code, dec):
    """All sector block eigenvalues, each repeated 2^k times, ascending."""
    parts = [np.linalg.eigvalsh(build_block(code, dec, s).dense(16)) for s in all_sectors(dec)]
    return np.sort(np.repeat(np.concatenate(parts), 1 << dec.k))


def full_spectrum(code):
    return np.sort(np.linalg.eigvalsh(full_hamiltonian_dense(code, 12)))
