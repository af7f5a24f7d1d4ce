"""Degree-sequence trees: validation, stats, fringes, balls, enumeration."""

import math

import numpy as np
import pytest

from simgen import trees as T
from simgen.errors import InvalidDegreeSequence


def catalan(n):
    return math.comb(2 * n, n) // (n + 1)


class TestValidation:
    def test_cherry_valid(self):
        t = T.OrderedTree.from_degrees((2, 0, 0))
        assert t.degrees == (2, 0, 0)
        assert t.n == 3

    def test_singleton_valid(self):
        assert T.OrderedTree.from_degrees((0,)).n == 1

    def test_prefix_violation_index(self):
        with pytest.raises(InvalidDegreeSequence) as ei:
            T.validate_degrees((1, 0, 1))
        assert ei.value.index == 2
        assert "invalid-degree-sequence" in str(ei.value)

    def test_total_violation(self):
        with pytest.raises(InvalidDegreeSequence) as ei:
            T.validate_degrees((2, 1, 0))    # prefixes fine, total 3 != 2
        assert ei.value.index == 3

    def test_negative_degree(self):
        with pytest.raises(InvalidDegreeSequence):
            T.validate_degrees((2, -1, 0))

    def test_empty(self):
        with pytest.raises(InvalidDegreeSequence):
            T.validate_degrees(())

    def test_roundtrip_verbatim(self):
        seq = (3, 0, 2, 0, 0, 1, 0)
        assert T.OrderedTree.from_degrees(seq).degrees == seq


class TestSubtreeStructure:
    def test_ends_cherry(self):
        assert list(T.subtree_ends((2, 0, 0))) == [3, 2, 3]

    def test_ends_revisited_excess(self):
        # the excess walk revisits value 0 before node 3 opens; ends must
        # not be fooled by the earlier visit
        assert list(T.subtree_ends((2, 0, 2, 0, 0))) == [5, 2, 5, 4, 5]

    def test_depths_path(self):
        assert list(T.depths((1, 1, 1, 0))) == [0, 1, 2, 3]

    def test_depths_cherry(self):
        assert list(T.depths((2, 0, 0))) == [0, 1, 1]

    def test_ends_against_slow_oracle(self):
        rng = np.random.default_rng(7)
        pool = list(T.all_trees(6))

        def graft(base, sub):
            # replacing a leaf by a subtree keeps the sequence valid
            leaves = [i for i, d in enumerate(base) if d == 0]
            i = leaves[int(rng.integers(0, len(leaves)))]
            return base[:i] + sub + base[i + 1:]

        for _ in range(40):
            seq = pool[int(rng.integers(0, len(pool)))]
            for _ in range(int(rng.integers(0, 5))):
                seq = graft(seq, pool[int(rng.integers(0, len(pool)))])
            arr = np.asarray(seq)
            ends = T.subtree_ends(arr)
            # oracle: end(j) = first k >= j with cumulative excess dropping
            # below the value before j
            S = np.cumsum(arr - 1)
            for j in range(arr.size):
                tgt = (S[j - 1] if j else 0) - 1
                k = j
                while S[k] != tgt:
                    k += 1
                assert ends[j] == k + 1


class TestStats:
    def test_cherry(self):
        st = T.stats((2, 0, 0))
        assert (st.n, st.height, st.width) == (3, 1, 2)
        assert st.level_widths == (1, 2)
        assert st.degree_counts == (2, 0, 1)
        assert st.root_degree == 2
        assert st.maxima == (2, 0, 0)

    def test_path(self):
        st = T.stats((1, 1, 0))
        assert (st.height, st.width) == (2, 1)
        assert st.level_widths == (1, 1, 1)

    def test_singleton(self):
        st = T.stats((0,))
        assert (st.n, st.height, st.width) == (1, 0, 1)
        assert st.degree_counts == (1,)

    def test_invariants_exhaustive_small(self):
        for n in range(1, 9):
            for seq in T.all_trees(n):
                st = T.stats(seq)
                assert sum(st.degree_counts) == n
                assert sum(d * c for d, c in enumerate(st.degree_counts)) == n - 1
                assert sum(st.level_widths) == n
                assert st.level_widths[0] == 1
                if n > 1:
                    assert st.level_widths[1] == st.root_degree

    def test_enumeration_is_catalan(self):
        for n in range(1, 9):
            assert sum(1 for _ in T.all_trees(n)) == catalan(n - 1)
        assert sum(1 for _ in T.all_trees(5)) == 14


class TestFringes:
    def test_cherry_counts(self):
        assert T.fringe_counts((2, 0, 0), 3) == {(0,): 2, (2, 0, 0): 1}

    def test_singleton(self):
        assert T.fringe_counts((0,), 1) == {(0,): 1}

    def test_leaf_count_matches_stats(self):
        rng = np.random.default_rng(11)
        pool = list(T.all_trees(7))
        for _ in range(50):
            seq = pool[int(rng.integers(0, len(pool)))]
            st = T.stats(seq)
            fc = T.fringe_counts(seq, 1)
            assert fc[(0,)] == st.degree_counts[0]

    def test_sizes_partition(self):
        # every node roots exactly one fringe subtree
        seq = (3, 2, 0, 0, 1, 0, 0)
        total = sum(T.fringe_counts(seq, 7).values())
        assert total == 7


class TestLeftBall:
    def test_identity_when_large(self):
        t = T.OrderedTree.from_degrees((2, 1, 0, 0))
        assert T.left_ball(t, 10).degrees == t.degrees

    def test_star_pruned(self):
        out = T.left_ball((3, 0, 0, 0), 2)
        assert list(out) == [2, 0, 0]

    def test_zero_radius(self):
        assert list(T.left_ball((3, 0, 0, 0), 0)) == [0]

    def test_depth_cut(self):
        # path of length 3 cut at depth 2
        assert list(T.left_ball((1, 1, 1, 0), 2)) == [1, 1, 0]

    def test_mixed_cut(self):
        # root with three children, first child has two children: at m=2
        # keep two root children, grandchildren become leaves
        seq = (3, 2, 0, 0, 0, 0)
        assert list(T.left_ball(seq, 2)) == [2, 2, 0, 0, 0]

    def test_ball_is_valid_tree(self):
        for seq in T.all_trees(7):
            for m in (0, 1, 2, 3):
                assert T.is_valid_degrees(T.left_ball(seq, m))

    def test_idempotent(self):
        for seq in list(T.all_trees(6)):
            b = T.left_ball(seq, 2)
            assert list(T.left_ball(b, 2)) == list(b)


class TestSerialization:
    def test_plain(self):
        assert T.format_degrees((2, 0, 0)) == "2 0 0"
        assert list(T.parse_degrees("2 0 0")) == [2, 0, 0]

    def test_run_length(self):
        s = T.format_degrees((5, 0, 0, 0, 0, 0))
        assert s == "5 5*0"
        assert list(T.parse_degrees(s)) == [5, 0, 0, 0, 0, 0]

    def test_round_trip_random(self):
        pool = list(T.all_trees(8))
        rng = np.random.default_rng(3)
        for _ in range(80):
            seq = pool[int(rng.integers(0, len(pool)))]
            assert tuple(T.parse_degrees(T.format_degrees(seq))) == seq
