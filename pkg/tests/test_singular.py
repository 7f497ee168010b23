import math
import warnings

import numpy as np
import pytest
from scipy.spatial import cKDTree

from conftest import ALL_CASES, random_design
from ortho3r.ikquartic import coincidence_groups, iks_count
from ortho3r.model import DesignParams, SectionPoint, reduced_singularity, singularity_scale
from ortho3r.singular import (
    find_cusps,
    find_nodes,
    sample_crossings,
    section_image,
    singular_branches,
    trace_section_curves,
)


def branch_cloud(p, n):
    curves = singular_branches(p, n)
    return np.vstack([c.theta for c in curves]), curves


def wrap(a):
    return (np.asarray(a) + math.pi) % (2.0 * math.pi) - math.pi


def torus_tree(pts):
    """KDTree over the 3x3 tiling so seam distances stay honest."""
    w = wrap(pts)
    tiles = [w + np.array([dx, dy]) for dx in (-2 * math.pi, 0, 2 * math.pi)
             for dy in (-2 * math.pi, 0, 2 * math.pi)]
    return cKDTree(np.vstack(tiles))


class TestTracing:
    def test_resolution_floor(self):
        with pytest.raises(ValueError):
            singular_branches(DesignParams(0, 2, 3, 1, 0), n=32)

    def test_samples_lie_on_zero_set(self):
        p = DesignParams(0, 2, 3, 1, 0)
        pts, curves = branch_cloud(p, 256)
        assert len(curves) > 0 and len(pts) > 100
        vals = reduced_singularity(p, pts[:, 0], pts[:, 1])
        assert np.max(np.abs(vals)) < 1e-9 * singularity_scale(p)

    def test_stable_under_resolution_doubling(self, rng):
        p = DesignParams(1, 3, 0.7, 0, 0.5)
        pts_a, _ = branch_cloud(p, 256)
        pts_b, _ = branch_cloud(p, 512)
        # Every coarse sample sits near some fine sample and vice versa.
        d_ab = torus_tree(pts_b).query(wrap(pts_a))[0]
        d_ba = torus_tree(pts_a).query(wrap(pts_b))[0]
        step = 2.0 * math.pi / 256
        assert np.max(d_ab) < 2.0 * step
        assert np.max(d_ba) < 2.0 * step

    def test_mirror_symmetry_without_tool_offset(self, rng):
        p = random_design("A", rng)
        pts, _ = branch_cloud(p, 256)
        mirrored = np.column_stack([-pts[:, 0], pts[:, 1]])
        d = torus_tree(pts).query(wrap(mirrored))[0]
        assert np.max(d) < 1e-6 + 2.0 * math.pi / 256


class TestSectionImage:
    def test_vertices_match_preimages_and_stay_right_of_axis(self):
        p = DesignParams(0, 2, 1.5, 1, 0)
        curves = singular_branches(p, 256)
        for c in curves:
            sc = section_image(c, p)
            assert len(sc) == len(c)
            assert np.all(sc.points[:, 0] >= 0.0)

    def test_closed_curves_close(self):
        p = DesignParams(1, 3, 0.7, 0, 0.5)
        for c in singular_branches(p, 256):
            if c.closed and len(c) > 8:
                sc = section_image(c, p)
                gap = np.linalg.norm(sc.points[0] - sc.points[-1])
                body = np.median(np.linalg.norm(np.diff(sc.points, axis=0), axis=1))
                assert gap < 50.0 * (body + 1e-12)

    def test_three_count_regions_for_mixed_group(self):
        # Workspace splits into two 2-solution lobes and one 4-solution core.
        from scipy import ndimage
        from ortho3r.workspace import GridSpec, iks_field
        p = DesignParams(0, 2, 1.5, 1, 0)
        f = iks_field(p, GridSpec.for_design(p, n=256))
        structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
        lab2, n2 = ndimage.label(f.counts == 2, structure=structure)
        lab4, n4 = ndimage.label(f.counts == 4, structure=structure)
        big2 = sum(1 for k in range(1, n2 + 1) if (lab2 == k).sum() >= 20)
        big4 = sum(1 for k in range(1, n4 + 1) if (lab4 == k).sum() >= 20)
        assert big2 == 2 and big4 == 1


class TestNodes:
    @pytest.mark.parametrize("params, expected", [
        ((0, 2, 3, 1, 0), 4),
        ((0, 2, 1, 0, 0), 0),
        ((0, 2, 3, 0, 0), 1),
    ])
    def test_worked_node_counts(self, params, expected):
        p = DesignParams(*params)
        curves = trace_section_curves(p, 1024)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            nodes = find_nodes(p, curves)
        assert len(nodes) == expected

    def test_node_witness_structure(self):
        p = DesignParams(1, 3, 0.7, 0, 0.5)      # two regular nodes
        curves = trace_section_curves(p, 1024)
        nodes = find_nodes(p, curves)
        assert len(nodes) == 2
        for nd in nodes:
            assert nd.residual < 1e-6 * p.length_sum
            sep = np.max(np.abs(nd.preimages[0] - nd.preimages[1]))
            assert sep > 1e-5
            groups = coincidence_groups(p, nd.location.rho ** 2, nd.location.z)
            assert len(groups) >= 2 or nd.self_motion
            # Both preimages reproduce the node location.
            from ortho3r.model import section_coords
            for pre in nd.preimages:
                rho, z = section_coords(p, pre[0], pre[1])
                assert math.hypot(float(rho) - nd.location.rho,
                                  float(z) - nd.location.z) < 1e-6 * p.length_sum

    def test_counts_stable_when_resolution_doubles(self):
        for params, expected in (((0, 2, 2.2, 1.5, 0), 2), ((1, 1.4, 0.7, 0, 0), 2)):
            p = DesignParams(*params)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                n_lo = len(find_nodes(p, trace_section_curves(p, 512)))
                n_hi = len(find_nodes(p, trace_section_curves(p, 1024)))
            assert n_lo == expected and n_hi == expected


class TestCusps:
    def test_no_cusps_in_worked_examples(self):
        for params in ((0, 2, 3, 1, 0), (1, 2, 2.5, 0, 0), (0, 1, 2, 1, 1)):
            p = DesignParams(*params)
            curves = trace_section_curves(p, 512)
            assert find_cusps(p, curves) == []

    def test_no_cusps_random_spot_check(self, rng):
        for case in ALL_CASES:
            for _ in range(3):
                p = random_design(case, rng)
                curves = trace_section_curves(p, 256)
                assert find_cusps(p, curves) == []

    def test_candidates_are_screened_not_trusted(self):
        # D1 fold tips reverse tangent but carry 4 coincident solutions,
        # so the screen must fire and the triple-root check must reject.
        p = DesignParams(1, 1.4, 0.7, 0, 0)
        curves = trace_section_curves(p, 512)
        assert find_cusps(p, curves, tol=0.5 * p.d4) == []


class TestCrossingParity:
    def test_count_jump_matches_branch_multiplicity(self):
        cases = [
            (DesignParams(0, 2, 3, 1, 0), True),      # A3: simple arcs exist
            (DesignParams(0, 0, 2, 1.5, 0), False),   # C: doubly covered only
        ]
        for p, expect_simple in cases:
            curves = trace_section_curves(p, 512)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                probes = sample_crossings(p, curves, count=40, seed=3)
            assert len(probes) >= 30
            for pr in probes:
                assert abs(pr.delta) == 2 * pr.branch_multiplicity
            if expect_simple:
                assert any(pr.branch_multiplicity == 1 for pr in probes)
            else:
                assert all(pr.branch_multiplicity == 2 for pr in probes)
