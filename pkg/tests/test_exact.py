"""Partition tables against combinatorial closed forms and brute force.

The oracles here are computed inside the test file, by routes the table
code never touches: binomial composition counts, the Catalan/Motzkin/
Fuss recurrences, Cayley-type forest counts, and direct enumeration.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from simgen import exact as X
from simgen import trees as T
from simgen import weights as W
from simgen.errors import (CapacityExceeded, InfeasibleAllocation,
                           PrefixIncompatible, RationalUnavailable)

NEG_INF = float("-inf")


def catalan(k: int) -> int:
    return math.comb(2 * k, k) // (k + 1)


def motzkin_numbers(kmax: int):
    # m_0 = 1, m_k = m_{k-1} + sum_{i} m_i m_{k-2-i}
    ms = [1]
    for k in range(1, kmax + 1):
        v = ms[k - 1]
        for i in range(k - 1):
            v += ms[i] * ms[k - 2 - i]
        ms.append(v)
    return ms


def compositions(m: int, n: int) -> int:
    # number of ways to place m unlabelled balls in n boxes
    return math.comb(n + m - 1, m) if n > 0 else int(m == 0)


# ---------------------------------------------------------------------------
# construction

class TestBuildLog:
    def test_row_zero_and_one(self):
        t = X.build_table(W.poisson(2.0), 12, 6)
        assert t.log_z(0, 0) == 0.0
        # Z(j,1) = w_j
        for j in range(13):
            lw = float(W.poisson(2.0).logw(j, j + 1)[0])
            assert t.log_z(j, 1) == pytest.approx(lw, abs=1e-12)
        # Z(0,n) = w_0^n, and w_0 = e^-2
        assert t.log_z(0, 5) == pytest.approx(-10.0, abs=1e-12)

    def test_uniform_counts(self):
        t = X.build_table(W.uniform(), 20, 10)
        for n in range(1, 11):
            for m in range(21):
                want = math.log(compositions(m, n))
                assert t.log_z(m, n) == pytest.approx(want, abs=1e-11)

    def test_tilted_entries_are_subprobabilities(self):
        t = X.build_table(W.uniform(), 40, 40)
        assert t.tilt is not None
        a, b = t.tilt
        assert a > 0 and 0 < b < 1.0 + 1e-12
        assert float(np.max(t._logrows)) <= 1e-9

    def test_raw_mode_when_rho_zero(self):
        # factorial weights grow too fast for any tilt; raw log space
        t = X.build_table(W.factorial(), 12, 4)
        assert t.tilt is None
        assert t.log_z(5, 1) == pytest.approx(math.log(120), abs=1e-12)
        # Z(2,2) = 2 w_0 w_2 + w_1^2 = 2*2 + 1
        assert t.log_z(2, 2) == pytest.approx(math.log(5), abs=1e-12)

    def test_mode_validation(self):
        with pytest.raises(ValueError):
            X.build_table(W.uniform(), 5, 5, mode="fractions")
        with pytest.raises(ValueError):
            X.build_table(W.uniform(), -1, 5)


class TestBuildRational:
    def test_uniform_exact_counts(self):
        t = X.build_table(W.uniform(), 24, 12, mode="rational")
        assert t.z(2, 3) == 6
        for n in range(13):
            for m in range(25):
                assert t.z(m, n) == compositions(m, n)

    def test_capacity_gate(self):
        with pytest.raises(CapacityExceeded):
            X.build_table(W.uniform(), 20, X.RATIONAL_N_CAP + 1, mode="rational")
        with pytest.raises(CapacityExceeded):
            X.build_table(W.uniform(), X.RATIONAL_M_CAP + 1, 10, mode="rational")

    def test_irrational_weights_refused(self):
        with pytest.raises(RationalUnavailable):
            X.build_table(W.poisson(2.0), 10, 5, mode="rational")
        with pytest.raises(RationalUnavailable):
            X.build_table(W.uniform(), 5, 5).z(2, 3)

    def test_out_of_range_query(self):
        t = X.build_table(W.uniform(), 10, 5, mode="rational")
        with pytest.raises(CapacityExceeded):
            t.z(11, 5)
        with pytest.raises(ValueError):
            t.z(-1, 2)


# ---------------------------------------------------------------------------
# tree partition function

class TestZTree:
    def test_catalan_rational(self):
        t = X.build_table(W.uniform(), 19, 20, mode="rational")
        for n in range(1, 21):
            assert X.z_tree(t, n) == catalan(n - 1)

    def test_catalan_log(self):
        t = X.build_table(W.uniform(), 19, 20)
        for n in range(2, 21):
            got = X.z_tree(t, n)
            assert got == pytest.approx(math.log(catalan(n - 1)), rel=1e-10)

    def test_borel_rational(self):
        t = X.build_table(W.inv_factorial(), 19, 20, mode="rational")
        assert X.z_tree(t, 4) == Fraction(8, 3)
        for n in range(1, 21):
            assert X.z_tree(t, n) == Fraction(n ** (n - 1), math.factorial(n))

    def test_borel_log(self):
        t = X.build_table(W.inv_factorial(), 19, 20)
        for n in range(1, 21):
            want = (n - 1) * math.log(n) - math.lgamma(n + 1)
            assert X.z_tree(t, n) == pytest.approx(want, abs=1e-10)

    def test_motzkin_counts(self):
        t = X.build_table(W.motzkin(), 15, 16, mode="rational")
        ms = motzkin_numbers(15)
        for n in range(1, 17):
            assert X.z_tree(t, n) == ms[n - 1]

    def test_binary_full_parity(self):
        t = X.build_table(W.binary_full(), 13, 14, mode="rational")
        for n in range(1, 15):
            zn = X.z_tree(t, n)
            if n % 2 == 1:
                # full binary trees with (n-1)/2 internal nodes
                assert zn == catalan((n - 1) // 2)
            else:
                assert zn == 0

    def test_dary_fuss_counts(self):
        # nodes hold up to 3 labelled child slots: Z_n = C(3n, n-1)/n
        t = X.build_table(W.dary(3), 16, 17, mode="rational")
        for n in range(1, 18):
            assert X.z_tree(t, n) == Fraction(math.comb(3 * n, n - 1), n)

    def test_tz_identity_rational(self):
        # n Z_n = Z(n-1, n) exactly, through the query path
        for spec in (W.uniform(), W.binary_full(), W.motzkin(), W.dary(3)):
            t = X.build_table(spec, 29, 30, mode="rational")
            for n in range(1, 31):
                assert n * X.z_tree(t, n) == t.z(n - 1, n)

    def test_rooted_forest_closed_form_log(self):
        t = X.build_table(W.rooted_forest(), 20, 7)
        for m, n in ((6, 3), (10, 4), (20, 7)):
            want = math.log(n) + (m - n - 1) * math.log(m) - math.lgamma(m - n + 1)
            assert t.log_z(m, n) == pytest.approx(want, rel=1e-9, abs=1e-9)

    def test_rooted_forest_exact(self):
        t = X.build_table(W.rooted_forest(), 12, 5, mode="rational")
        for m, n in ((3, 2), (4, 2), (6, 3), (10, 4), (12, 5)):
            assert t.z(m, n) == Fraction(n * m ** (m - n - 1), math.factorial(m - n))

    def test_infeasible_size_is_zero(self):
        t = X.build_table(W.binary_full(), 9, 10, mode="rational")
        assert X.z_tree(t, 4) == 0
        tl = X.build_table(W.binary_full(), 9, 10)
        assert X.z_tree(tl, 4) == NEG_INF
        with pytest.raises(ValueError):
            X.z_tree(tl, 0)


# ---------------------------------------------------------------------------
# exact finite-n laws

class TestAllocMarginal:
    def test_uniform_2_3(self):
        t = X.build_table(W.uniform(), 8, 4, mode="rational")
        assert X.alloc_marginal(t, 2, 3, 0) == Fraction(1, 2)
        assert X.alloc_marginal(t, 2, 3, 1) == Fraction(1, 3)
        assert X.alloc_marginal(t, 2, 3, 2) == Fraction(1, 6)
        assert X.alloc_marginal(t, 2, 3, 3) == 0

    def test_sums_to_one(self):
        tq = X.build_table(W.uniform(), 8, 4, mode="rational")
        assert sum(X.alloc_marginal(tq, 7, 4, k) for k in range(8)) == 1
        tl = X.build_table(W.poisson(1.3), 11, 6)
        s = sum(X.alloc_marginal(tl, 11, 6, k) for k in range(12))
        assert s == pytest.approx(1.0, abs=1e-12)

    def test_matches_enumeration(self):
        # B_{4,3} under geometric(1/2) weights, enumerated by hand here
        g = W.geometric(0.5)
        t = X.build_table(g, 6, 3, mode="rational")
        total = Fraction(0)
        byk = [Fraction(0)] * 5
        for y1 in range(5):
            for y2 in range(5 - y1):
                y3 = 4 - y1 - y2
                w = (g.weight_fraction(y1) * g.weight_fraction(y2)
                     * g.weight_fraction(y3))
                total += w
                byk[y1] += w
        for k in range(5):
            assert X.alloc_marginal(t, 4, 3, k) == byk[k] / total

    def test_infeasible_raises(self):
        t = X.build_table(W.binary_full(), 6, 5)
        with pytest.raises(InfeasibleAllocation):
            X.alloc_marginal(t, 3, 5, 0)


class TestRootDegree:
    def test_uniform_n3(self):
        t = X.build_table(W.uniform(), 6, 4, mode="rational")
        assert X.root_degree_pmf(t, 3, 0) == 0
        assert X.root_degree_pmf(t, 3, 1) == Fraction(1, 2)
        assert X.root_degree_pmf(t, 3, 2) == Fraction(1, 2)

    def test_matches_brute_force(self):
        for spec in (W.uniform(), W.motzkin(), W.dary(3), W.inv_factorial()):
            t = X.build_table(spec, 7, 8, mode="rational")
            forest = X.brute_force(spec, 7)
            total = sum(w for _, w in forest)
            for d in range(7):
                want = sum(w for tr, w in forest if tr.degrees[0] == d) / total
                assert X.root_degree_pmf(t, 7, d) == want

    def test_sums_to_one_log(self):
        t = X.build_table(W.uniform(), 29, 30)
        s = sum(X.root_degree_pmf(t, 30, d) for d in range(30))
        assert s == pytest.approx(1.0, abs=1e-10)

    def test_needs_two_nodes(self):
        t = X.build_table(W.uniform(), 6, 4)
        with pytest.raises(ValueError):
            X.root_degree_pmf(t, 1, 0)


def _children_lists(seq):
    kids = [[] for _ in seq]
    stack = [[0, seq[0]]]
    for i in range(1, len(seq)):
        while stack[-1][1] == 0:
            stack.pop()
        kids[stack[-1][0]].append(i)
        stack[-1][1] -= 1
        stack.append([i, seq[i]])
    return kids


def _prefix_paths(prefix: T.OrderedTree):
    # Ulam-Harris path (child indices from the root) of each prefix node
    kids = _children_lists(prefix.degrees)
    paths = [None] * len(prefix)
    paths[0] = ()
    for v, cs in enumerate(kids):
        for r, c in enumerate(cs):
            paths[c] = paths[v] + (r,)
    return paths


def _event_probability(spec, n, prefix, d):
    """P(node at each prefix position has the given outdegree), by listing
    every tree of size n."""
    paths = _prefix_paths(prefix)
    total = Fraction(0)
    hit = Fraction(0)
    for tr, w in X.brute_force(spec, n):
        total += w
        kids = _children_lists(tr.degrees)
        ok = True
        for p, want in zip(paths, d):
            v = 0
            for c in p:
                if c >= len(kids[v]):
                    v = None
                    break
                v = kids[v][c]
            if v is None or tr.degrees[v] != want:
                ok = False
                break
        if ok:
            hit += w
    return hit / total


class TestJointDegrees:
    def test_path_prefix_example(self):
        t = X.build_table(W.uniform(), 6, 5, mode="rational")
        pref = T.OrderedTree.from_degrees((1, 0))
        assert X.joint_degree_prob(t, pref, (1, 1), 4) == Fraction(1, 5)

    def test_reduces_to_root_degree(self):
        t = X.build_table(W.motzkin(), 8, 9, mode="rational")
        pref = T.OrderedTree.from_degrees((0,))
        for d in range(4):
            got = X.joint_degree_prob(t, pref, (d,), 9)
            want = X.root_degree_pmf(t, 9, d)
            assert got == want

    def test_matches_enumeration(self):
        cherry = T.OrderedTree.from_degrees((2, 0, 0))
        path3 = T.OrderedTree.from_degrees((1, 1, 0))
        cases = [
            (W.uniform(), cherry, (2, 1, 0)),
            (W.uniform(), cherry, (3, 0, 2)),
            (W.uniform(), path3, (1, 2, 1)),
            (W.motzkin(), cherry, (2, 1, 1)),
            (W.inv_factorial(), path3, (2, 1, 0)),
        ]
        for spec, pref, d in cases:
            t = X.build_table(spec, 7, 8, mode="rational")
            got = X.joint_degree_prob(t, pref, d, 8)
            assert got == _event_probability(spec, 8, pref, d)

    def test_prefix_incompatible(self):
        t = X.build_table(W.uniform(), 8, 8, mode="rational")
        cherry = T.OrderedTree.from_degrees((2, 0, 0))
        with pytest.raises(PrefixIncompatible):
            X.joint_degree_prob(t, cherry, (1, 0, 0), 8)
        with pytest.raises(PrefixIncompatible):
            X.joint_degree_prob(t, cherry, (2, 0, 0), 3)

    def test_zero_when_degrees_overflow_size(self):
        t = X.build_table(W.uniform(), 8, 8, mode="rational")
        pref = T.OrderedTree.from_degrees((1, 0))
        assert X.joint_degree_prob(t, pref, (3, 3), 5) == 0


# ---------------------------------------------------------------------------
# brute force and feasibility

class TestBruteForce:
    def test_tree_counts(self):
        for n in range(1, 9):
            assert len(X.brute_force(W.uniform(), n)) == catalan(n - 1)

    def test_singleton(self):
        out = X.brute_force(W.uniform(), 1)
        assert out == [(T.OrderedTree((0,)), Fraction(1))]

    def test_totals_match_z_tree(self):
        for spec in (W.uniform(), W.motzkin(), W.binary_full(), W.dary(3),
                     W.inv_factorial(), W.loglaw()):
            t = X.build_table(spec, 6, 7, mode="rational")
            for n in range(1, 8):
                total = sum(w for _, w in X.brute_force(spec, n))
                assert total == X.z_tree(t, n)

    def test_float_weights(self):
        spec = W.poisson(2.0)
        total = sum(w for _, w in X.brute_force(spec, 6))
        t = X.build_table(spec, 5, 6)
        assert math.log(total) == pytest.approx(X.z_tree(t, 6), rel=1e-12)

    def test_size_gate(self):
        with pytest.raises(CapacityExceeded):
            X.brute_force(W.uniform(), X.BRUTE_N_CAP + 1)


class TestFeasible:
    def test_binary_full_tree_sizes(self):
        for n in range(1, 14):
            assert X.feasible(W.binary_full(), n - 1, n) == (n % 2 == 1)

    def test_range_and_span(self):
        assert not X.feasible(W.binary_full(), 11, 5)     # above omega * n
        assert not X.feasible(W.binary_full(), 3, 5)      # odd total
        assert X.feasible(W.uniform(), 0, 7)
        assert X.feasible(W.uniform(), 40, 7)
        assert not X.feasible(W.rooted_forest(), 2, 3)    # below alpha * n
        assert X.feasible(W.rooted_forest(), 3, 3)
        assert X.feasible(W.rooted_forest(), 10, 4)
        assert X.feasible(W.uniform(), 0, 0)
        assert not X.feasible(W.uniform(), 1, 0)
        assert not X.feasible(W.uniform(), -1, 3)

    def test_gapful_support(self):
        sp = W.explicit([1, 0, 1, 1])  # support {0, 2, 3}
        assert not X.feasible(sp, 1, 4)
        assert X.feasible(sp, 2, 4)
        assert X.feasible(sp, 5, 2)
        assert not X.feasible(sp, 1, 1)
        assert X.feasible(sp, 7, 3)
        # {2,3} cannot make 1 regardless of box count
        for n in range(1, 9):
            assert not X.feasible(sp, 1, n)

    def test_single_point_support(self):
        sp = W.explicit([0, 1])  # only w_1 > 0
        assert X.feasible(sp, 3, 3)
        assert not X.feasible(sp, 4, 3)

    def test_agrees_with_table(self):
        for spec in (W.uniform(), W.binary_full(), W.motzkin(),
                     W.rooted_forest(), W.explicit([1, 0, 1, 1])):
            t = X.build_table(spec, 25, 12)
            for n in range(13):
                for m in range(26):
                    assert X.feasible(spec, m, n) == t.ok(m, n), (spec.name, m, n)

    def test_dp_gate(self):
        sp = W.explicit([1, 0, 1, 1])
        with pytest.raises(CapacityExceeded):
            X.feasible(sp, 2 * X.FEASIBLE_DP_CAP, 2 * X.FEASIBLE_DP_CAP)


# ---------------------------------------------------------------------------
# table-level identities

class TestTiltAndShift:
    def test_tilt_identity(self):
        rng = np.random.default_rng(20260816)
        base = {
            "uniform": X.build_table(W.uniform(), 40, 40),
            "motzkin": X.build_table(W.motzkin(), 40, 40),
        }
        for name, spec in (("uniform", W.uniform()), ("motzkin", W.motzkin())):
            for _ in range(4):
                a = float(rng.uniform(0.2, 3.0))
                b = float(rng.uniform(0.2, 2.5))
                tt = X.build_table(W.tilt(spec, a, b), 40, 40)
                for _ in range(12):
                    m = int(rng.integers(0, 41))
                    n = int(rng.integers(1, 41))
                    if not base[name].ok(m, n):
                        continue
                    lhs = tt.log_z(m, n) - (n * math.log(a) + m * math.log(b))
                    assert lhs == pytest.approx(base[name].log_z(m, n), abs=1e-9)

    def test_shifted_family_roundtrip(self):
        # rooted forests have w_0 = 0; the internal shift must be invisible
        t = X.build_table(W.rooted_forest(), 14, 6, mode="rational")
        spec = W.rooted_forest()
        # direct 2-box enumeration
        for m in range(2, 9):
            want = sum(spec.weight_fraction(y) * spec.weight_fraction(m - y)
                       for y in range(m + 1))
            assert t.z(m, 2) == want

    def test_log_row_matches_pointwise(self):
        for spec, mode in ((W.uniform(), "log"), (W.rooted_forest(), "log"),
                           (W.rooted_forest(), "rational")):
            t = X.build_table(spec, 14, 6, mode=mode)
            for n in range(7):
                row = t.log_row(n)
                for m in range(15):
                    assert row[m] == pytest.approx(t.log_z(m, n), nan_ok=False)
