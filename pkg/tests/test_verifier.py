import numpy as np
import pytest

import reachbound as rb
from reachbound.verifier import (
    CellBatch,
    boundary_cell_batch,
    grid_cell_batch,
    propagate_cells,
)
from reachbound.topology import partition
from conftest import identity_net, linear_net, make_net, MIXED, sample_box


def problem(net, input_box, safe_box, **kwargs):
    return rb.VerificationProblem(net, input_box, safe_box, **kwargs)


# ---------------------------------------------------------------------------
# inclusion checking


def test_check_inclusion_inside(unit_square, invertible_net):
    sets = [rb.propagate(invertible_net, unit_square, "box")]
    hull = sets[0].hull()
    safe = rb.Box.from_arrays(hull.lo - 0.1, hull.hi + 0.1)
    assert rb.check_inclusion(sets, safe)


def test_check_inclusion_rejects_small_excess(unit_square):
    reach = rb.ReachSet("box", rb.Box.from_bounds([(0, 1 + 1e-6), (0, 1)]), unit_square)
    assert not rb.check_inclusion([reach], unit_square)


def test_check_inclusion_example_style_safe_set(unit_square, invertible_net):
    # a published-style safe window; the verdict depends on the seeded weights
    safe = rb.Box.from_bounds([(-3.85, -1.85), (-0.9, 1.7)])
    sets = [rb.propagate(invertible_net, unit_square, "box")]
    assert rb.check_inclusion(sets, safe) in (True, False)


def test_check_inclusion_dimension_mismatch(unit_square):
    reach = rb.ReachSet("box", rb.Box.from_bounds([(0, 1)] * 3), unit_square)
    with pytest.raises(ValueError):
        rb.check_inclusion([reach], unit_square)


# ---------------------------------------------------------------------------
# boundary mode


def test_boundary_identity_safe(unit_square):
    p = problem(
        identity_net(),
        unit_square,
        rb.Box.from_bounds([(-0.1, 1.1), (-0.1, 1.1)]),
        mode="boundary",
        grid=(7, 7),
    )
    v = rb.verify_boundary(p)
    assert v.status == rb.SAFE
    assert v.stats["cells_propagated"] == 4 * 7
    assert v.stats["assumes_invertible"] is True


def test_boundary_identity_unknown(unit_square):
    p = problem(
        identity_net(),
        unit_square,
        rb.Box.from_bounds([(0.2, 0.8), (0.2, 0.8)]),
        mode="boundary",
        grid=(10, 10),
    )
    assert rb.verify_boundary(p).status == rb.UNKNOWN


def test_boundary_cell_ratio_vs_full(invertible_net, unit_square):
    full = rb.verify_full(
        problem(invertible_net, unit_square, _mc_safe(invertible_net, unit_square, 1.3),
                mode="full", grid=(100, 100))
    )
    bound = rb.verify_boundary(
        problem(invertible_net, unit_square, _mc_safe(invertible_net, unit_square, 1.3),
                mode="boundary", grid=(100, 100))
    )
    assert full.stats["cells_propagated"] == 10_000
    assert bound.stats["cells_propagated"] == 400
    assert bound.status == full.status == rb.SAFE


def _mc_safe(net, box, inflate, n=20_000, seed=0):
    hull = rb.monte_carlo(net, box, n, seed).image_hull
    c = hull.midpoint()
    half = np.maximum((hull.hi - hull.lo) * 0.5 * inflate, 1e-6)
    return rb.Box.from_arrays(c - half, c + half)


# ---------------------------------------------------------------------------
# full mode


def test_full_identity_safe(unit_square):
    p = problem(
        identity_net(), unit_square, rb.Box.from_bounds([(-1, 2), (-1, 2)]),
        mode="full", grid=(5, 5),
    )
    v = rb.verify_full(p)
    assert v.status == rb.SAFE and v.stats["cells_propagated"] == 25


def test_full_single_cell_equals_direct_propagation(invertible_net, unit_square):
    p = problem(invertible_net, unit_square, _mc_safe(invertible_net, unit_square, 2.0),
                mode="full", grid=(1, 1))
    v = rb.verify_full(p)
    direct = rb.box_propagate(invertible_net, unit_square)
    assert v.stats["cells_propagated"] == 1
    assert np.allclose(v.output_hull.lo, direct.lo, rtol=0, atol=1e-12)
    assert np.allclose(v.output_hull.hi, direct.hi, rtol=0, atol=1e-12)


def test_full_hull_contains_boundary_hull(invertible_net, unit_square):
    safe = _mc_safe(invertible_net, unit_square, 2.0)
    full = rb.verify_full(problem(invertible_net, unit_square, safe, mode="full", grid=(20, 20)))
    bound = rb.verify_boundary(
        problem(invertible_net, unit_square, safe, mode="boundary", grid=(20, 20))
    )
    assert np.all(full.output_hull.lo <= bound.output_hull.lo + 1e-9)
    assert np.all(bound.output_hull.hi <= full.output_hull.hi + 1e-9)


# ---------------------------------------------------------------------------
# subset mode


def test_subset_linear_invertible_propagates_ring(unit_square):
    net = linear_net([[1.0, 0.5], [0.0, 1.0]])
    p = problem(net, unit_square, rb.Box.from_bounds([(-2, 3), (-2, 3)]),
                mode="subset", grid=(6, 6))
    v = rb.verify_subset(p)
    assert v.status == rb.SAFE
    assert v.stats["cells_total"] == 36
    assert v.stats["cells_certified"] == 16
    assert v.stats["cells_propagated"] == v.stats["cells_kept"] == 20


def test_subset_zero_certified_equals_full(unit_square):
    net = linear_net([[1.0, 1.0], [1.0, 1.0]])
    safe = rb.Box.from_bounds([(-1, 3), (-1, 3)])
    sub = rb.verify_subset(problem(net, unit_square, safe, mode="subset", grid=(5, 5)))
    full = rb.verify_full(problem(net, unit_square, safe, mode="full", grid=(5, 5)))
    assert sub.stats["cells_certified"] == 0
    assert sub.stats["cells_propagated"] == full.stats["cells_propagated"] == 25
    assert sub.status == full.status


def test_subset_mixed_net_safe_with_fewer_cells():
    net = make_net(**MIXED)
    box = rb.Box.from_bounds([(-1, 1), (-1, 1)])
    safe = _mc_safe(net, box, 1.2, n=50_000)
    v = rb.verify_subset(problem(net, box, safe, mode="subset", grid=(40, 40)))
    assert v.status == rb.SAFE
    assert v.stats["cells_kept"] < v.stats["cells_total"]


def test_subset_never_drops_boundary_cells():
    net = make_net(**MIXED)
    box = rb.Box.from_bounds([(-1, 1), (-1, 1)])
    v = rb.verify_subset(
        problem(net, box, _mc_safe(net, box, 1.3), mode="subset", grid=(15, 15))
    )
    propagated = {tuple(i) for i in v.cell_batch.index}
    counts = v.extraction.grid.counts
    for idx in v.extraction.grid.indices():
        touches = any(i == 0 or i + 1 == c for i, c in zip(idx, counts))
        if touches:
            assert idx in propagated


def test_subset_non_square_falls_back_to_full(unit_square):
    net = rb.generate_network(3, [2, 6, 3], scale=0.5)
    safe = _mc_safe(net, unit_square, 3.0)
    v = rb.verify_subset(problem(net, unit_square, safe, mode="subset", grid=(4, 4)))
    assert v.stats["fallback_full"] is True
    assert v.stats["cells_propagated"] == 16


# ---------------------------------------------------------------------------
# auto mode


def test_auto_certified_takes_boundary_path(unit_square, invertible_net):
    safe = _mc_safe(invertible_net, unit_square, 1.5)
    v = rb.verify_auto(problem(invertible_net, unit_square, safe, grid=(30, 30)))
    assert v.stats["path"] == "boundary"
    assert v.stats["input_certified"] is True
    assert v.stats["assumes_invertible"] is False


def test_auto_singular_takes_subset_path(unit_square):
    net = linear_net([[1.0, 1.0], [1.0, 1.0]])
    safe = rb.Box.from_bounds([(-1, 3), (-1, 3)])
    v = rb.verify_auto(problem(net, unit_square, safe, grid=(4, 4)))
    assert v.stats["path"] == "subset"
    assert v.status == rb.SAFE


def test_auto_refines_until_safe(unit_square, invertible_net):
    # build a safe box satisfiable at refinement level 2 but not below
    hulls = []
    for level in range(3):
        counts = (4 * 2**level,) * 2
        v = rb.verify_boundary(
            problem(invertible_net, unit_square, rb.Box.from_bounds([(-9, 9), (-9, 9)]),
                    mode="boundary", grid=counts)
        )
        hulls.append(v.output_hull)
    safe = rb.Box.from_arrays(
        0.5 * (hulls[2].lo + hulls[1].lo), 0.5 * (hulls[2].hi + hulls[1].hi)
    )
    assert safe.contains_box(hulls[2]) and not safe.contains_box(hulls[1])
    v = rb.verify_auto(
        problem(invertible_net, unit_square, safe, grid=(4, 4), max_refinements=3)
    )
    assert v.status == rb.SAFE
    assert v.stats["refinement_level"] == 2


def test_auto_exhausts_refinements(unit_square, invertible_net):
    v = rb.verify_auto(
        problem(invertible_net, unit_square,
                rb.Box.from_bounds([(1e-9, 2e-9), (0, 1e-9)]), grid=(2, 2),
                max_refinements=1)
    )
    assert v.status == rb.UNKNOWN
    assert v.stats["refinement_level"] == 1


# ---------------------------------------------------------------------------
# Monte-Carlo oracle and falsification


def test_monte_carlo_deterministic(unit_square, invertible_net):
    a = rb.monte_carlo(invertible_net, unit_square, 500, seed=9)
    b = rb.monte_carlo(invertible_net, unit_square, 500, seed=9)
    assert np.array_equal(a.points, b.points) and np.array_equal(a.images, b.images)


def test_monte_carlo_point_region(invertible_net):
    region = rb.Box.point([0.25, 0.75])
    r = rb.monte_carlo(invertible_net, region, 1, seed=0)
    assert np.array_equal(r.points[0], [0.25, 0.75])
    assert np.array_equal(r.image_hull.lo, r.image_hull.hi)


def test_monte_carlo_hull_inside_box_propagation(invertible_net, unit_square):
    r = rb.monte_carlo(invertible_net, unit_square, 100_000, seed=4)
    out = rb.box_propagate(invertible_net, unit_square)
    assert out.contains_box(r.image_hull)


def test_monte_carlo_respects_degenerate_dims(invertible_net):
    face = rb.Box.from_bounds([(0, 0), (0, 1)])
    r = rb.monte_carlo(invertible_net, face, 100, seed=2)
    assert np.all(r.points[:, 0] == 0.0)


def test_falsification_promotion(unit_square):
    p = problem(
        identity_net(), unit_square, rb.Box.from_bounds([(0.2, 0.8), (0.2, 0.8)]),
        mode="full", grid=(4, 4), falsify_samples=256,
    )
    v = rb.verify_full(p)
    assert v.status == rb.FALSIFIED
    assert v.counterexample is not None
    assert not p.safe_box.contains_point(rb.forward_point(p.net, v.counterexample))


def test_no_falsification_by_default(unit_square):
    p = problem(
        identity_net(), unit_square, rb.Box.from_bounds([(0.2, 0.8), (0.2, 0.8)]),
        mode="full", grid=(4, 4),
    )
    assert rb.verify_full(p).status == rb.UNKNOWN


# ---------------------------------------------------------------------------
# refinement monotonicity


@pytest.mark.parametrize("domain", ["box", "zono"])
def test_refinement_never_grows_hull(domain, invertible_net, unit_square):
    safe = rb.Box.from_bounds([(-9, 9), (-9, 9)])
    hulls = []
    for k in (5, 10, 20):
        v = rb.verify_full(
            problem(invertible_net, unit_square, safe, domain=domain, mode="full", grid=(k, k))
        )
        hulls.append(v.output_hull)
    for coarse, fine in zip(hulls, hulls[1:]):
        assert np.all(fine.lo >= coarse.lo - 1e-9)
        assert np.all(fine.hi <= coarse.hi + 1e-9)


def test_verdict_dispatch_by_mode(unit_square, invertible_net):
    safe = _mc_safe(invertible_net, unit_square, 2.0)
    for mode in ("boundary", "subset", "full", "auto"):
        v = rb.verify(problem(invertible_net, unit_square, safe, mode=mode, grid=(6, 6)))
        assert v.status in (rb.SAFE, rb.UNKNOWN)
        assert "wall_ms" in v.stats


def test_problem_validation(unit_square, invertible_net):
    with pytest.raises(ValueError):
        problem(invertible_net, rb.Box.from_bounds([(0, 1)] * 3), unit_square)
    with pytest.raises(ValueError):
        problem(invertible_net, unit_square, unit_square, mode="guided")
    with pytest.raises(ValueError):
        problem(invertible_net, unit_square, unit_square, grid=(0, 4))
