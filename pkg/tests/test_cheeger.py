import numpy as np
import pytest

from gaugegap.blocks import build_block
from gaugegap.cheeger import (
    all_bipartitions,
    count_zero_entries,
    cut_crossings,
    double_well,
    nu_bound,
    protofact_check,
    random_stoquastic,
    sector_cut,
    sign_cut,
    variational_gap_bound,
)
from gaugegap.decompose import decompose
from gaugegap.gaugecode import compass_2d, gauge_color_code_15, xy_1d


def top_two(h):
    vals, vecs = np.linalg.eigh(h)
    return vals[-1], vals[-2], vecs


def test_double_well_matrix():
    np.testing.assert_array_equal(double_well(3), [[2, 1, 0], [1, 0, 1], [0, 1, 2]])
    with pytest.raises(ValueError):
        double_well(2)


def test_double_well_ground_energy():
    lam1, _, _ = top_two(double_well(12))
    assert lam1 == pytest.approx(2.5, abs=0.05)
    lam1, _, _ = top_two(double_well(32))
    assert 2.45 <= lam1 <= 2.51


@pytest.mark.parametrize("d", [24, 32, 48])
def test_double_well_edge_decay(d):
    # amplitude halves with each step in from either end
    _, _, vecs = top_two(double_well(d))
    v = np.abs(vecs[:, -1])
    for i in range(4):
        assert 1.8 <= v[i] / v[i + 1] <= 2.2
        assert 1.8 <= v[d - 1 - i] / v[d - 2 - i] <= 2.2


def test_double_well_gap_closes():
    gaps = []
    for d in (8, 16, 32, 64):
        lam1, lam2, _ = top_two(double_well(d))
        gaps.append(lam1 - lam2)
    # at d=64 the gap is below double precision, so the last step is not strict
    assert gaps[0] > gaps[1] > gaps[2] >= gaps[3]
    assert gaps[-1] < 0.01


def test_sign_cut_basics():
    assert sign_cut(np.array([0.3, 0.1, 0.2])).all()
    np.testing.assert_array_equal(sign_cut(np.array([1.0, -1.0])), [True, False])
    v = np.array([1e-14, -1e-13, -0.5])
    np.testing.assert_array_equal(sign_cut(v), [True, True, False])
    assert count_zero_entries(v) == 2


def test_sign_cut_double_well_midpoint():
    _, _, vecs = top_two(double_well(12))
    mask = sign_cut(vecs[:, -2])
    assert mask.sum() == 6
    assert len(set(mask[:6])) == 1 and len(set(mask[6:])) == 1 and mask[0] != mask[-1]


def test_variational_bound_double_well():
    h = double_well(32)
    lam1, lam2, vecs = top_two(h)
    bound = variational_gap_bound(h, vecs[:, -1], sign_cut(vecs[:, -2]))
    assert not bound.degenerate
    assert lam1 - bound.rayleigh_value < 0.05
    assert bound.rayleigh_value <= lam2 + 1e-8


def test_variational_bound_one_sided_is_degenerate():
    h = double_well(6)
    _, _, vecs = top_two(h)
    bound = variational_gap_bound(h, vecs[:, -1], np.ones(6, dtype=bool))
    assert bound.degenerate and bound.rayleigh_value is None
    with pytest.raises(ValueError):
        variational_gap_bound(h, vecs[:, -1], np.ones(5, dtype=bool))


def test_variational_bound_gcc_ground_sector():
    code = gauge_color_code_15()
    dec = decompose(code)
    h = build_block(code, dec).dense()
    lam1, lam2, vecs = top_two(h)
    bound = variational_gap_bound(h, vecs[:, -1], sign_cut(vecs[:, -2]))
    assert bound.rayleigh_value <= lam2 + 1e-8
    assert bound.meta["gap_upper_estimate"] >= 3.241089 - 1e-4
    # the matrix-free operator gives the same number
    op = variational_gap_bound(build_block(code, dec), vecs[:, -1], sign_cut(vecs[:, -2]))
    assert op.rayleigh_value == pytest.approx(bound.rayleigh_value, abs=1e-10)


def test_nu_two_by_two():
    bound = nu_bound(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert bound.nu_value == 0.0
    assert -1 <= bound.nu_value <= 1


@pytest.mark.parametrize("seed", range(20))
def test_nu_sandwich_random(seed):
    h = random_stoquastic(10, seed)
    lam1, lam2, vecs = top_two(h)
    nu = nu_bound(h, workers=2)
    assert lam2 - 1e-8 <= nu.nu_value <= lam1 + 1e-8
    var = variational_gap_bound(h, vecs[:, -1], sign_cut(vecs[:, -2]))
    if not var.degenerate:
        assert var.rayleigh_value <= lam2 + 1e-8
    local = nu_bound(h, "sign-cut-local-search")
    assert local.heuristic and local.nu_value <= nu.nu_value + 1e-12


def test_nu_exhaustive_matches_brute_force():
    h = random_stoquastic(7, 3)
    brute = max(
        min(np.linalg.eigvalsh(h[np.ix_(m, m)])[-1], np.linalg.eigvalsh(h[np.ix_(~m, ~m)])[-1])
        for m in all_bipartitions(7)
    )
    assert nu_bound(h).nu_value == pytest.approx(brute)
    assert nu_bound(h, workers=3).nu_value == nu_bound(h, workers=1).nu_value
    assert len(list(all_bipartitions(7))) == 2 ** 6 - 1


def test_nu_double_well():
    h = double_well(12)
    _, lam2, _ = top_two(h)
    assert abs(nu_bound(h).nu_value - lam2) < 0.1


def test_nu_errors():
    with pytest.raises(ValueError):
        nu_bound(np.eye(17))
    with pytest.raises(ValueError):
        nu_bound(np.eye(1))
    with pytest.raises(ValueError):
        nu_bound(np.eye(4), strategy="annealing")


def test_local_search_budget():
    h = random_stoquastic(40, 1)
    res = nu_bound(h, "sign-cut-local-search")
    assert res.meta["moves"] <= 50 * 40
    assert res.nu_value <= res.meta["lambda1"] + 1e-12
    assert nu_bound(h, "sign-cut-local-search", move_budget=3).meta["moves"] <= 3


def test_sector_cut_report():
    out = sector_cut(compass_2d(3))
    assert out["variational"]["rayleigh_value"] <= out["lambda2"] + 1e-8
    assert out["lambda2"] - 1e-8 <= out["nu"]["nu_value"] <= out["lambda1"] + 1e-8


def test_cut_crossings_counts():
    code = compass_2d(3)
    out = cut_crossings(code)
    dec = decompose(code)
    assert out["dim"] == 1 << (dec.m_x + dec.r)
    assert len(out["per_stabilizer"]) == dec.m_z
    for row in out["per_stabilizer"]:
        assert row["odd"] + row["even"] == out["dim"]


@pytest.mark.parametrize("code", [compass_2d(3), xy_1d(6)], ids=lambda c: c.name)
def test_protofact_reports_both_extremes(code):
    out = protofact_check(code)
    assert out["min_frustrated_top"] <= out["max_frustrated_top"]
    assert out["lambda2"] <= out["lambda1"]
    assert isinstance(out["min_frustrated_agrees"], bool)
