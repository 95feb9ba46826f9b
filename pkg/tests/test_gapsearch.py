import numpy as np
import pytest

from gaugegap.blocks import SectorLabel, build_block, gamma_component
from gaugegap.decompose import decompose
from gaugegap.eigen import EigenResult, NoConvergence, positivity_check
from gaugegap.gapsearch import (
    FRUSTRATED_GROUND,
    SECOND_OF_GROUND,
    dense_gap,
    format_csv,
    frustrated_weight,
    ground_energy,
    perron_diagnostics,
    single_frustration_sectors,
    spectral_gap,
    stabilizer_generators,
)
from gaugegap.gaugecode import (
    compass_2d,
    compass_3d,
    gauge_color_code_15,
    ising_1d,
    xy_1d,
    xy_plaquette_2d,
)

from conftest import ex2_code, ex3_code


@pytest.mark.parametrize("code,value", [
    (compass_2d(4), 19.012903), (xy_plaquette_2d(4), 22.627417), (gauge_color_code_15(), 25.455844),
])
def test_ground_energy_table_values(code, value):
    assert ground_energy(code) == pytest.approx(value, abs=1e-4)


def test_compass_16_sector_table():
    rep = spectral_gap(compass_2d(4))
    assert rep.lambda1 == pytest.approx(19.012903, abs=1e-4)
    second = [c for c in rep.candidates if c.kind == SECOND_OF_GROUND][0]
    assert second.value == pytest.approx(16.335705, abs=1e-4)
    best = rep.argmin_candidate
    assert best.kind == FRUSTRATED_GROUND and best.w_frustrated == 8
    assert best.value == pytest.approx(18.369300, abs=1e-4)
    assert rep.gap == pytest.approx(0.643603, abs=1e-4)
    assert rep.meta["strict_below_ground"]


def test_gcc_gap():
    rep = spectral_gap(gauge_color_code_15())
    assert rep.gap == pytest.approx(3.241089, abs=1e-4)
    assert rep.argmin_candidate.w_frustrated == 8
    frustrated = [c for c in rep.candidates if c.kind == FRUSTRATED_GROUND]
    assert len(frustrated) == 4  # one per body; the X side mirrors it
    assert rep.meta["ideals"] == 6


@pytest.mark.parametrize("code", [ising_1d(6), ising_1d(9), xy_1d(6), xy_1d(10), compass_2d(3), compass_3d(2),
                                  xy_plaquette_2d(2), ex2_code(), ex3_code()], ids=lambda c: c.name)
@pytest.mark.parametrize("mode", ["single", "full"])
def test_gap_matches_dense_oracle(code, mode):
    rep = spectral_gap(code, mode=mode)
    lam1, gap = dense_gap(code)
    assert rep.lambda1 == pytest.approx(lam1, abs=1e-8)
    assert rep.gap == pytest.approx(gap, abs=1e-8)


def test_non_self_dual_code_sweeps_both_sides():
    rep = spectral_gap(ising_1d(6), mode="full")
    assert not rep.meta["weakly_self_dual"]
    assert any(c.sector.tz for c in rep.candidates)


def test_symmetry_merging_keeps_the_answer():
    code = compass_2d(4)
    plain = spectral_gap(code, mode="full", symmetries=[])
    merged = spectral_gap(code, mode="full")
    assert merged.gap == pytest.approx(plain.gap, abs=1e-10)
    assert len(merged.candidates) < len(plain.candidates)
    assert sum(c.multiplicity for c in merged.candidates if c.kind == FRUSTRATED_GROUND) == 7


def test_bad_symmetry_rejected():
    with pytest.raises(ValueError):
        spectral_gap(compass_2d(3), symmetries=[(1, 0, 2, 3, 4, 5, 6, 7, 8)])
    with pytest.raises(ValueError):
        spectral_gap(compass_2d(3), mode="half")


def test_failed_sectors_are_flagged(monkeypatch):
    from gaugegap import gapsearch

    real = gapsearch.solve_sector

    def flaky(code, dec, sector, k=1, config=None, partition=None):
        if not sector.is_zero:
            raise NoConvergence("forced", EigenResult(np.array([1.0]), np.array([1.0]), 0, converged=False))
        return real(code, dec, sector, k, config, partition)

    monkeypatch.setattr(gapsearch, "solve_sector", flaky)
    rep = spectral_gap(compass_2d(3))
    assert not rep.ok
    assert all(c.failed for c in rep.candidates if c.kind == FRUSTRATED_GROUND)
    assert rep.argmin_candidate.kind == SECOND_OF_GROUND


def test_frustrated_weight():
    code = compass_2d(4)
    dec = decompose(code)
    assert frustrated_weight(SectorLabel.zero(dec), dec, code) == 0
    for c, g in single_frustration_sectors(code, dec):
        assert frustrated_weight(SectorLabel(c, 0, dec.m_z, dec.m_x), dec, code) == 8
    gcc = gauge_color_code_15()
    gdec = decompose(gcc)
    for c, g in single_frustration_sectors(gcc, gdec):
        assert frustrated_weight(SectorLabel(c, 0, gdec.m_z, gdec.m_x), gdec, gcc) == 8


def test_single_frustration_hits_exactly_one_generator():
    for code in (compass_2d(4), xy_plaquette_2d(4), gauge_color_code_15(), compass_3d(2)):
        dec = decompose(code)
        gens = stabilizer_generators(code, dec)
        assert len(gens) == dec.m_z
        for i, (c, g) in enumerate(single_frustration_sectors(code, dec)):
            t_x = 0
            for j in range(dec.m_z):
                if (c >> j) & 1:
                    t_x ^= dec.t_x.rows[j]
            hits = [bin(h & t_x).count("1") & 1 for h in gens]
            assert hits == [int(j == i) for j in range(len(gens))]


def test_csv_layout():
    rep = spectral_gap(xy_plaquette_2d(4))
    text = format_csv(rep.csv_rows())
    lines = text.strip().splitlines()
    assert lines[0] == "n,sector,w_sZ,lambda,is_argmin,gap"
    assert any(line.endswith(",1,3.313708") for line in lines)
    assert lines[1].split(",")[4] == "22.627417"


@pytest.mark.parametrize("code", [ex2_code(), ex3_code(), xy_1d(6), ising_1d(7), compass_2d(3), xy_plaquette_2d(2)],
                         ids=lambda c: c.name)
def test_perron_diagnostics_pass(code):
    rep = perron_diagnostics(code)
    assert rep["ok"], rep


def test_ex3_sector_tops():
    code = ex3_code()
    dec = decompose(code)
    tops = {(tx, tz): np.linalg.eigvalsh(build_block(code, dec, SectorLabel(tx, tz, 1, 1)).dense())[-1]
            for tx in (0, 1) for tz in (0, 1)}
    assert tops[0, 0] == pytest.approx(2 * np.sqrt(2))
    assert tops[1, 0] == pytest.approx(2) and tops[0, 1] == pytest.approx(2)
    assert tops[1, 1] == pytest.approx(0)


def test_flipped_sign_breaks_positivity():
    code = ex3_code()
    dec = decompose(code)
    m = gamma_component(code, dec).dense()
    assert positivity_check(np.linalg.eigh(m)[1][:, -1]) == "positive"
    block = build_block(code, dec).dense().copy()
    assert positivity_check(np.linalg.eigh(block)[1][:, -1]) == "positive"
    block[0, 1] = block[1, 0] = -block[0, 1]
    assert positivity_check(np.linalg.eigh(block)[1][:, -1], 1e-12) == "mixed"
