import numpy as np
import pytest

from gibbstree.errors import DomainError, NumericalFailure
from gibbstree.model import ModelParams, theta_critical
from gibbstree import phase
from gibbstree.phase import CSV_HEADER, PhaseRow, detect_theta_c, positive_root_exists, row_to_csv, scan_theta


def jump_index(values):
    changes = [i for i in range(1, len(values)) if values[i] != values[i - 1]]
    assert len(changes) == 1
    return changes[0]


def test_scan_k4_n1_positive_count_jump():
    rows = scan_theta(4, 1, 0.0, 0.99, 100)
    assert len(rows) == 100 and rows[0].theta == 0.0 and rows[-1].theta == 0.99
    j = jump_index([r.positive_law_count for r in rows])
    assert (rows[j - 1].positive_law_count, rows[j].positive_law_count) == (1, 3)
    assert rows[j - 1].theta < 5 / 12 < rows[j].theta
    assert {r.fixed_point_count for r in rows} == {2, 4}


def test_scan_k3_n1_count_jump():
    rows = scan_theta(3, 1, 0.0, 0.99, 100)
    j = jump_index([r.fixed_point_count for r in rows])
    assert (rows[j - 1].fixed_point_count, rows[j].fixed_point_count) == (3, 7)
    assert rows[j - 1].theta < 5 / 9 < rows[j].theta


def test_scan_unreachable_threshold_is_flat():
    rows = scan_theta(2, 0, 0.0, 0.99, 100)
    assert {r.fixed_point_count for r in rows} == {2}
    assert {r.positive_law_count for r in rows} == {1}
    assert all(r.z0 is None and r.order_param is None for r in rows)


@pytest.mark.parametrize("k,n", [(2, 1), (3, 2), (4, 0), (5, 3), (6, 1)])
def test_scan_row_invariants(k, n):
    theta_c, _ = theta_critical(k, n)
    trivial = 3 if k % 2 else 2
    bound = 2.0 ** (-1.0 / (2 * n + 1))
    for r in scan_theta(k, n, 0.0, 0.99, 40):
        assert r.positive_law_count in (1, 3)
        assert (r.z0 is not None) == (r.fixed_point_count > trivial)
        assert r.residual_max <= 1e-8
        if r.theta > theta_c:
            assert None not in (r.z0, r.x0, r.y0)
            assert 0 < r.z0 < bound and r.order_param > 0
        else:
            assert r.positive_law_count == 1


def test_scan_includes_threshold_as_uniqueness():
    # theta_c(2, 1) = 5/6 is hit exactly by this grid
    rows = scan_theta(2, 1, 0.5, 5 / 6, 2)
    assert rows[-1].theta == 5 / 6
    assert rows[-1].positive_law_count == 1 and rows[-1].z0 is None


@pytest.mark.parametrize("k,n", [(2, 1), (4, 0), (3, 3)])
def test_branch_vanishes_at_threshold(k, n):
    theta_c, _ = theta_critical(k, n)
    rows = scan_theta(k, n, theta_c + 1e-6, theta_c + 5e-3, 50)
    z = [r.z0 for r in rows[:5]]
    assert all(a < b for a, b in zip(z, z[1:]))
    assert z[0] < 0.01 * rows[-1].z0 + 1e-2
    # z0 ~ sqrt(theta - theta_c) near onset
    slope = z[0] / np.sqrt(rows[0].theta - theta_c)
    assert slope == pytest.approx(rows[4].z0 / np.sqrt(rows[4].theta - theta_c), rel=1e-2)


def test_scan_parallel_matches_serial():
    assert scan_theta(3, 1, 0.0, 0.99, 30, workers=4) == scan_theta(3, 1, 0.0, 0.99, 30, workers=1)


@pytest.mark.parametrize("lo,hi,steps", [(-0.1, 0.5, 10), (0.5, 0.5, 10), (0.2, 1.0, 10), (0.0, 0.5, 1), (0.0, 0.5, 2.5)])
def test_scan_rejects_ranges(lo, hi, steps):
    with pytest.raises(DomainError):
        scan_theta(2, 1, lo, hi, steps)


def test_scan_error_names_theta(monkeypatch):
    def broken(k, n, theta, grid):
        raise NumericalFailure("boom")

    monkeypatch.setattr(phase, "_row", broken)
    with pytest.raises(NumericalFailure, match="theta=0.25"):
        scan_theta(2, 1, 0.25, 0.5, 2, workers=1)


def test_detect_examples():
    assert abs(detect_theta_c(2, 1, 1e-6) - 5 / 6) <= 1e-6
    assert abs(detect_theta_c(4, 0, 1e-6) - 0.75) <= 1e-6
    assert detect_theta_c(2, 0) is None
    assert detect_theta_c(3, 0) is None


@pytest.mark.parametrize("k", range(2, 7))
@pytest.mark.parametrize("n", range(4))
def test_detect_agrees_with_formula(k, n):
    theta_c, reachable = theta_critical(k, n)
    got = detect_theta_c(k, n, 1e-6)
    if not reachable:
        assert got is None
    else:
        assert abs(got - theta_c) <= 1e-6


def test_detect_rejects_tolerance():
    with pytest.raises(DomainError):
        detect_theta_c(2, 1, 0.0)


def test_positive_root_predicate_independent_of_sign_count():
    for k, n in [(2, 1), (5, 2), (8, 4)]:
        theta_c, _ = theta_critical(k, n)
        assert not positive_root_exists(ModelParams(k, n, theta_c * 0.99))
        assert positive_root_exists(ModelParams(k, n, min(0.999, theta_c * 1.01)))


def test_csv_row_format():
    row = PhaseRow(0.1, 2, 1, residual_max=1e-17)
    assert row_to_csv(row) == "0.10000000000000001,2,1,,,,,1.0000000000000001e-17"
    assert len(row_to_csv(row).split(",")) == len(CSV_HEADER.split(","))
    full = scan_theta(2, 1, 0.9, 0.95, 2)[0]
    fields = row_to_csv(full).split(",")
    assert all(fields) and float(fields[3]) == full.z0
