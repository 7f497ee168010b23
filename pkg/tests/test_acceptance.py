"""Acceptance suite: every exit criterion at its stated tolerance.

Each criterion prints one PASS/FAIL line (visible with -s or on failure).
Criterion 6's solution-count jump is asserted per crossed singular branch:
several groups have doubly covered image curves (two singular branches with
the same image), where the only mathematically attainable jump is +-2 per
branch, i.e. +-4 across the doubled curve; at simple curve points the jump
is exactly +-2.
"""

import math
import time
import warnings

import numpy as np
import pytest

from conftest import ALL_CASES, random_config, random_design
from ortho3r.atlas.verify import PAPER_EXAMPLES
from ortho3r.classify import class_rank, numeric_verdict
from ortho3r.ikquartic import ik, quartic_at, _trig_terms
from ortho3r.model import DesignParams, JointConfig, fk, jacobian, normalize_angle
from ortho3r.singular import find_cusps, sample_crossings, trace_section_curves
from ortho3r.workspace import GridSpec

GENERAL_CASES = ("D", "E", "I", "J")
REDUCED_CASES = ("A", "B", "C", "F", "G", "H")
QUATERNARY_FULL = ("C", "E", "B1", "G", "H", "J")


def _report(criterion: str, ok: bool, detail: str):
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture(scope="module")
def verdicts512():
    """The 21 reference designs measured once at N = 512."""
    out = {}
    for params, label, nodes, voids in PAPER_EXAMPLES:
        p = DesignParams(*params)
        g = GridSpec.for_design(p, n=512)
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            v = numeric_verdict(p, g, keep_analysis=True)
        out[label] = (p, v, time.perf_counter() - t0, (label, nodes, voids))
    return out


def test_criterion_1_reference_designs(verdicts512):
    """21 worked designs: exact (label, nodes, voids) at N = 512, <= 10 s each."""
    failures = []
    for label, (p, v, elapsed, expected) in verdicts512.items():
        got = (v.label, v.metrics.node_count, v.metrics.void_count)
        ok = got == expected and elapsed <= 10.0
        print(f"  {label:3s} expected {expected} got {got} in {elapsed:.1f}s"
              f" {'ok' if ok else 'FAIL'}")
        if not ok:
            failures.append((label, expected, got, elapsed))
    _report("criterion 1", not failures, f"{21 - len(failures)}/21 designs match")
    assert not failures


def test_criterion_2_no_cusps_anywhere(rng):
    """100 random designs per family: the cusp detector stays empty."""
    t0 = time.perf_counter()
    checked = 0
    for case in ALL_CASES:
        for _ in range(100):
            p = random_design(case, rng)
            curves = trace_section_curves(p, 256)
            cusps = find_cusps(p, curves)
            assert cusps == [], (case, p.astuple(), cusps)
            checked += 1
    elapsed = time.perf_counter() - t0
    _report("criterion 2", elapsed <= 300.0,
            f"{checked} designs cusp-free in {elapsed:.0f}s")
    assert checked == 1000
    assert elapsed <= 300.0


def test_criterion_3_round_trip(rng):
    """10^4 random (design, configuration) pairs close the inverse loop."""
    failures = 0
    for k in range(10_000):
        case = ALL_CASES[k % len(ALL_CASES)]
        p = random_design(case, rng)
        q = random_config(rng)
        pt, _ = fk(p, q)
        sols = ik(p, pt, 1e-9)
        limit = 1e-9 * (1.0 + math.hypot(pt.rho, pt.z))
        hit = any(
            max(abs(normalize_angle(a - b))
                for a, b in zip(s.config.astuple(), q.astuple())) <= 1e-6
            and s.residual <= limit
            for s in sols)
        if not hit:
            failures += 1
    _report("criterion 3", failures == 0, f"{failures} failures in 10000 trials")
    assert failures == 0


def test_criterion_4_root_identity(rng):
    """10^4 image-generated queries solve their own elimination."""
    worst_general = 0.0
    for _ in range(5000):
        p = random_design(GENERAL_CASES[int(rng.integers(4))], rng)
        q = random_config(rng)
        _, s = fk(p, q)
        quart = quartic_at(p, s.rho ** 2, s.z)
        t = math.tan(q.theta3 / 2.0) if abs(abs(q.theta3) - math.pi) > 1e-12 else math.inf
        worst_general = max(worst_general, quart.residual_at(t))
    worst_reduced = 0.0
    for _ in range(5000):
        p = random_design(REDUCED_CASES[int(rng.integers(6))], rng)
        q = random_config(rng)
        _, s = fk(p, q)
        K, A, B = _trig_terms(p, s.rho ** 2, s.z)
        resid = abs(A * math.cos(q.theta3) + B * math.sin(q.theta3) - K)
        scale = max(abs(K), abs(A), abs(B), 1.0)
        worst_reduced = max(worst_reduced, resid / scale)
    ok = worst_general <= 1e-9 and worst_reduced <= 1e-9
    _report("criterion 4", ok,
            f"worst quartic residual {worst_general:.2e}, "
            f"worst reduced residual {worst_reduced:.2e}")
    assert worst_general <= 1e-9
    assert worst_reduced <= 1e-9


def test_criterion_5_jacobian_gradient_check(rng):
    """Analytic Jacobian vs central differences, 1000 samples."""
    h = 1e-5
    worst = 0.0
    for _ in range(1000):
        p = random_design(ALL_CASES[int(rng.integers(10))], rng)
        q = random_config(rng)
        J = jacobian(p, q)
        t = np.array(q.astuple())
        for col in range(3):
            dp, dm = t.copy(), t.copy()
            dp[col] += h
            dm[col] -= h
            fp, _ = fk(p, JointConfig(*dp))
            fm, _ = fk(p, JointConfig(*dm))
            fd = (np.array(fp.astuple()) - np.array(fm.astuple())) / (2 * h)
            err = np.max(np.abs(J[:, col] - fd) / (1.0 + np.abs(J[:, col])))
            worst = max(worst, float(err))
    _report("criterion 5", worst <= 1e-6, f"worst relative error {worst:.2e}")
    assert worst <= 1e-6


def test_criterion_6_crossing_parity(verdicts512):
    """100 transversal crossings per design: count jumps 2 per branch."""
    bad = []
    simple_total = 0
    for label, (p, v, _, _) in verdicts512.items():
        analysis = v.analysis
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            probes = sample_crossings(p, analysis.curves, count=100, seed=42,
                                      nodes=analysis.nodes)
        assert len(probes) >= 100, f"{label}: only {len(probes)} probes placed"
        for pr in probes:
            if abs(pr.delta) != 2 * pr.branch_multiplicity:
                bad.append((label, pr))
            if pr.branch_multiplicity == 1:
                simple_total += 1
                if abs(pr.delta) != 2:
                    bad.append((label, pr))
    _report("criterion 6", not bad,
            f"2100 probes, {simple_total} at simple points, {len(bad)} bad")
    assert not bad


@pytest.fixture(scope="module")
def verdicts1024(verdicts512):
    out = {}
    for label, (p, _, _, expected) in verdicts512.items():
        g = GridSpec.for_design(p, n=1024)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            v = numeric_verdict(p, g, keep_analysis=False)
        out[label] = v
    return out


def test_criterion_7_resolution_stability(verdicts512, verdicts1024):
    """Counts unchanged and ratios move < 0.02 when N doubles."""
    failures = []
    for label, (p, v512, _, expected) in verdicts512.items():
        v1024 = verdicts1024[label]
        counts_ok = (
            v512.label == v1024.label
            and v512.metrics.node_count == v1024.metrics.node_count
            and v512.metrics.void_count == v1024.metrics.void_count
            and v512.metrics.cusp_count == v1024.metrics.cusp_count)
        dq = abs(v512.metrics.quaternary_ratio - v1024.metrics.quaternary_ratio)
        dh = abs(v512.metrics.hole_ratio - v1024.metrics.hole_ratio)
        df = abs(v512.metrics.feasible_ratio - v1024.metrics.feasible_ratio)
        if not counts_ok or max(dq, dh, df) >= 0.02:
            failures.append((label, counts_ok, dq, dh, df))
    _report("criterion 7", not failures,
            f"{21 - len(failures)}/21 designs stable under N doubling")
    assert not failures


def test_criterion_8_quaternary_table(verdicts512):
    """Groups with an all-workspace four-solution zone measure >= 0.99."""
    failures = []
    for label in QUATERNARY_FULL:
        ratio = verdicts512[label][1].metrics.quaternary_ratio
        if ratio < 0.99:
            failures.append((label, ratio))
    # Best-effort comparison of the remaining qualitative columns.
    from ortho3r.classify import GROUP_TABLE
    from ortho3r.workspace import hole_bucket, zone_bucket
    soft = 0
    for label, (p, v, _, _) in verdicts512.items():
        rec = GROUP_TABLE[label]
        m = v.metrics
        if zone_bucket(m.quaternary_ratio) != rec.iks4_zone:
            soft += 1
        if hole_bucket(m.hole_ratio) != rec.holes:
            soft += 1
    if soft:
        warnings.warn(f"{soft} qualitative bucket mismatches vs the group table "
                      "(best-effort check, not blocking)")
    _report("criterion 8", not failures,
            f"all-workspace rows ok; {soft} soft bucket mismatches")
    assert not failures


def test_criterion_9_class_ranking():
    """The three-tier ranking reproduces the reference lists exactly."""
    first = {"C", "E"}
    second = {"A1", "A2", "A3", "B1", "D2", "D3", "D4", "D5", "F1", "F2",
              "H", "I1", "J"}
    third = {"B2", "D1", "G", "I2", "I3", "I4"}
    ok = (all(class_rank(lab) == 1 for lab in first)
          and all(class_rank(lab) == 2 for lab in second)
          and all(class_rank(lab) == 3 for lab in third))
    _report("criterion 9", ok, "ranking lists reproduced")
    assert ok
