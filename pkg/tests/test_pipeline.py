import math

import numpy as np
import pytest

from bezier_isotopy.errors import GeometryError, UnsupportedTopology
from bezier_isotopy.intersect import Verdict
from bezier_isotopy.nets import folded_sheet_net, flat_net, torus_net, wavy_net
from bezier_isotopy.pipeline import (EXACT_ZERO, RunConfig, convergence_summary, first_certified, run)


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(max_level=9)
    with pytest.raises(ValueError):
        RunConfig(epsilon=0.0)
    with pytest.raises(ValueError):
        RunConfig(samples=8)
    with pytest.raises(ValueError):
        RunConfig(quad_nodes=4)


def test_flat_run():
    records = run(flat_net(3, 3), RunConfig(max_level=2))
    assert [r.level for r in records] == [0, 1, 2]
    assert [r.patch_count for r in records] == [1, 4, 16]
    for r in records:
        assert r.certificate.verdict is Verdict.CERTIFIED
        assert abs(r.curvature.interior_defect_sum + r.curvature.boundary_exterior_sum - 2 * math.pi) <= 1e-8
    summary = convergence_summary(records)
    assert summary.ratios["theta_n"] == [EXACT_ZERO, EXACT_ZERO]
    assert summary.series["theorem2_residual"][0] <= 1e-10
    assert summary.certified_level == 0 and summary.monotone_certification


def test_torus_run():
    records = run(torus_net(), RunConfig(max_level=4))
    k_star = first_certified(records)
    assert k_star is not None and k_star <= 4
    assert all(abs(r.curvature.interior_defect_sum) <= 1e-8 for r in records)
    assert all(r.certificate.verdict is Verdict.CERTIFIED for r in records[k_star:])
    assert records[0].curvature.theorem2_residual is None


def test_stop_on_certify():
    records = run(folded_sheet_net(), RunConfig(max_level=5, stop_on_certify=True))
    assert records[-1].certificate.verdict is Verdict.CERTIFIED
    assert len(records) == first_certified(records) + 1


def test_bicubic_series():
    records = run(wavy_net(), RunConfig(max_level=4))
    summary = convergence_summary(records)
    ratios = summary.ratios["hausdorff"]
    assert all(r <= 0.5 for r in ratios[1:])
    assert "hausdorff" not in summary.non_decreasing


def test_non_decreasing_series_are_flagged():
    records = run(wavy_net(), RunConfig(max_level=3))
    # the curved-boundary residual does not converge to zero; it is reported, not hidden
    summary = convergence_summary(records)
    assert set(summary.non_decreasing) <= {"theorem2_residual", "theta_n", "theta_u", "theta_v"}
    with pytest.raises(ValueError):
        convergence_summary(records[:1])


def test_determinism():
    a = run(folded_sheet_net(), RunConfig(max_level=2))
    b = run(folded_sheet_net(), RunConfig(max_level=2))
    assert a == b


def test_errors_carry_level_context():
    pts = flat_net(3, 3)
    pts[0, -1] = pts[0, 0]
    with pytest.raises(UnsupportedTopology, match="level 0"):
        run(pts, RunConfig(max_level=1))


def test_patch_domains_tile_square():
    from bezier_isotopy.bezier import patches_at_level
    for k in range(4):
        patches = patches_at_level(wavy_net(), k)
        assert sum(p.width_u * p.width_v for p in patches) == 1.0
        assert len({p.domain for p in patches}) == 4**k
