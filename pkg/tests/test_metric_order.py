import itertools
import math

import numpy as np
import pytest

from roecoarse.metric_order import (
    EPair,
    MembershipError,
    check_membership,
    dominates,
    epair_precedes,
    geodesic_closure,
    join_growth_bound,
    join_metric,
    precedes,
    restriction_metric,
)
from roecoarse.space import INF, ball_sizes, metric_violations, validate_metric

from conftest import clique_union, dijkstra_closure, line_metric, random_dominated, random_graph_metric


class TestMembership:
    def test_self_membership(self, line6):
        cert = check_membership(line6, line6)
        assert cert.C == 1 and cert.gap == 1

    def test_minimal_constant_is_max_ratio(self):
        base = clique_union([3], prefix="q")
        a, b, c = base.points.ids
        d = validate_metric(base.points, {(a, b): 3})
        assert check_membership(base, d).C == pytest.approx(1 / 3)
        assert check_membership(base, d).C == 1 / 3

    def test_infinite_base_needs_infinite_candidate(self):
        base = validate_metric("ab", {})
        d = validate_metric("ab", {("a", "b"): 7})
        with pytest.raises(MembershipError) as e:
            check_membership(base, d)
        assert e.value.rule == "D2" and e.value.witness == ("a", "b")

    def test_gap_below_one(self):
        base = validate_metric("ab", {("a", "b"): 0.5})
        with pytest.raises(MembershipError) as e:
            check_membership(base, base)
        assert e.value.rule == "D1"

    def test_all_infinite_candidate(self, line6):
        d = restriction_metric(line6, [])
        assert check_membership(line6, d).C == 0.0
        assert dominates(line6, d, 1e-300)

    def test_certificate_constant_dominates(self, rng):
        for _ in range(30):
            base = random_graph_metric(rng, 10)
            d = random_dominated(rng, base)
            cert = check_membership(base, d)
            assert dominates(base, d, cert.C)
            # brute-force minimality over pairs
            ratios = [base.matrix[i, j] / d.matrix[i, j] for i, j in itertools.combinations(range(10), 2)
                      if math.isfinite(base.matrix[i, j])]
            assert cert.C == max(ratios, default=0.0)


class TestOrder:
    def test_reflexive(self, line6):
        assert precedes(line6, line6)

    def test_nested_restrictions(self, line6):
        small = restriction_metric(line6, ["0", "1"])
        big = restriction_metric(line6, ["0", "1", "2", "4"])
        assert precedes(small, big)
        assert not precedes(big, small)

    def test_incomparable(self, abc_metrics):
        _, d1, d2 = abc_metrics
        assert not precedes(d1, d2) and not precedes(d2, d1)

    def test_partial_order_laws(self, rng):
        for _ in range(40):
            base = random_graph_metric(rng, 6, max_w=2)
            ms = [random_dominated(rng, base) for _ in range(3)] + [base]
            for a, b, c in itertools.product(ms, repeat=3):
                assert precedes(a, a)
                if precedes(a, b) and precedes(b, a):
                    assert a == b
                if precedes(a, b) and precedes(b, c):
                    assert precedes(a, c)


class TestJoin:
    def test_join_of_equal_metrics(self, line6):
        assert join_metric(line6, line6, line6) == line6

    def test_three_point_example(self, abc_metrics):
        d0, d1, d2 = abc_metrics
        j = join_metric(d0, d1, d2)
        assert (j("a", "b"), j("b", "c"), j("a", "c")) == (1, 1, 2)
        # Dijkstra on min(d1, d2) as independent oracle
        assert np.array_equal(j.matrix, dijkstra_closure(np.minimum(d1.matrix, d2.matrix)))

    def test_join_of_all_infinite(self, line6):
        inf = restriction_metric(line6, [])
        j = join_metric(line6, inf, inf)
        assert np.all(np.isinf(j.matrix[~np.eye(6, dtype=bool)]))

    def test_rejects_non_members(self, line6):
        bad = validate_metric(line6.points, {("0", "1"): 0.5})
        with pytest.raises(MembershipError):
            join_metric(line6, bad, line6)

    def test_join_properties(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 16))
            base = random_graph_metric(rng, n)
            d1, d2 = random_dominated(rng, base), random_dominated(rng, base)
            j = join_metric(base, d1, d2)
            assert metric_violations(j.points, j.matrix) == []
            assert precedes(d1, j) and precedes(d2, j)
            assert np.all(j.matrix <= np.minimum(d1.matrix, d2.matrix))
            C = max(check_membership(base, d1).C, check_membership(base, d2).C)
            assert check_membership(base, j).C <= C
            assert dominates(base, j, C)
            for R in range(1, 5):
                assert ball_sizes(j, R).max() <= join_growth_bound(d1, d2, R)

    def test_geodesic_size_limit(self):
        with pytest.raises(ValueError):
            geodesic_closure(np.zeros((5, 5)), max_points=4)


class TestRestriction:
    def test_whole_space(self, line6):
        assert restriction_metric(line6, line6.points.ids) == line6

    def test_empty(self, line6):
        d = restriction_metric(line6, [])
        assert np.all(np.isinf(d.matrix[~np.eye(6, dtype=bool)]))

    def test_pair(self):
        d = restriction_metric(line_metric(4), ["0", "1"])
        assert d("0", "1") == 1
        assert all(v == INF for x, y, v in d.pairs() if (x, y) != ("0", "1"))

    def test_membership_with_unit_constant(self, rng):
        for _ in range(20):
            base = random_graph_metric(rng, 10)
            Y = [x for x in base.points.ids if rng.random() < 0.5]
            d = restriction_metric(base, Y)
            assert metric_violations(d.points, d.matrix) == []
            C = check_membership(base, d).C
            assert C in (0.0, 1.0)

    def test_unknown(self, line6):
        with pytest.raises(KeyError):
            restriction_metric(line6, ["9"])


class TestEPairs:
    def test_reflexive(self, line6):
        p = EPair(frozenset({"0"}), line6)
        assert epair_precedes(p, p)

    def test_not_subset(self, line6):
        assert not epair_precedes(EPair(frozenset({"0", "5"}), line6), EPair(frozenset({"0"}), line6))

    def test_nested(self, line6):
        Y1, Y2 = {"0", "1"}, {"0", "1", "2"}
        p1 = EPair(frozenset(Y1), restriction_metric(line6, Y1))
        p2 = EPair(frozenset(Y2), restriction_metric(line6, Y2))
        assert epair_precedes(p1, p2) and not epair_precedes(p2, p1)
