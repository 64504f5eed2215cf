"""
Unit tests for bipath posets, interval modules and arc code computation.
"""
from itertools import combinations

import numpy as np
import pytest

import src.core.bipath_core as bipath_core
from src.core.bipath_core import (
    ArcCode,
    BipathInterval,
    BipathModule,
    BipathPoset,
    BipathValidationError,
    CrossCheckError,
    IntervalKind,
    arc_code,
    change_module_basis,
    covering_vertex,
    direct_sum_modules,
    enumerate_intervals,
    expected_slice_barcode,
    interval_from_support,
    interval_module,
    periodic_restriction,
    plant_random,
    restrict_to_slice,
    restrict_to_window,
    slice_point_labels,
    slice_restriction,
)
from src.core.field_linalg import FieldSpec
from src.core.zigzag_core import Decoration, DecoratedInterval, ZzBarcode, ZzInterval, barcode

SMALL_POSETS = [(n, m) for n in range(2, 5) for m in range(1, 4)]


class TestBipathPoset:
    """Test cases for the bipath poset and its covering map."""

    def setup_method(self):
        """Set up test fixtures."""
        self.poset = BipathPoset(4, 4)

    def test_invalid_sizes(self):
        """Test that n < 2 and m < 1 are refused."""
        with pytest.raises(BipathValidationError, match="n >= 2"):
            BipathPoset(1, 2)
        with pytest.raises(BipathValidationError, match="m >= 1"):
            BipathPoset(3, 0)

    def test_chains_and_arrows(self):
        """Test chain layout and arrow storage order."""
        poset = BipathPoset(3, 2)
        assert poset.top_chain == [0, 1, 2, 3]
        assert poset.bottom_chain == [0, 4, 3]
        assert poset.hasse_arrows() == [(0, 1), (1, 2), (2, 3), (0, 4), (4, 3)]

    def test_order(self):
        """Test comparabilities within and across the chains."""
        poset = BipathPoset(4, 3)
        assert poset.leq(0, 6) and poset.leq(6, 5) and poset.leq(5, 4)
        assert not poset.leq(5, 6)
        assert poset.leq(1, 3)
        assert not poset.leq(1, 5) and not poset.leq(5, 1)
        assert not poset.leq(4, 0)

    def test_unknown_vertex(self):
        """Test error for vertices outside the poset."""
        with pytest.raises(BipathValidationError, match="not a vertex"):
            self.poset.leq(0, 8)

    def test_covering_examples(self):
        """Test the covering map on the three worked points of B(4, 4)."""
        assert covering_vertex(self.poset, (1, 0)) == 0
        assert covering_vertex(self.poset, (4, 4)) == 4
        assert covering_vertex(self.poset, (0, 0)) == 7

    def test_covering_map_periodic_and_order_preserving(self):
        """Test periodicity and monotonicity over three periods."""
        for n, m in SMALL_POSETS:
            poset = BipathPoset(n, m)
            period = 2 * poset.N
            for t in range(-period, 2 * period):
                assert poset.covering_index(t) == poset.covering_index(t + period)
                source, target = (t, t + 1) if t % 2 == 0 else (t + 1, t)
                assert poset.leq(poset.covering_index(source), poset.covering_index(target))

    def test_covering_map_is_surjective_on_a_period(self):
        """Test that one period of the covering map reaches every vertex."""
        for n, m in SMALL_POSETS:
            poset = BipathPoset(n, m)
            assert {poset.covering_index(t) for t in range(2 * poset.N)} == set(poset.vertices)

    def test_slice_length(self):
        """Test that the slice of B(4, 4) has 21 vertices."""
        assert self.poset.slice_length == 21
        labels = slice_point_labels(self.poset)
        assert len(labels) == 21
        assert labels[0][0] == (-2, -3)

    def test_is_interval_counts(self):
        """Test that convex connected subsets are exactly the enumerated intervals."""
        for n, m in [(2, 1), (3, 2), (3, 3), (4, 2)]:
            poset = BipathPoset(n, m)
            intervals = enumerate_intervals(poset)
            subsets = [
                set(subset)
                for size in range(1, poset.size + 1)
                for subset in combinations(poset.vertices, size)
                if poset.is_interval(subset)
            ]
            assert len(subsets) == len(intervals)
            assert {interval_from_support(poset, s) for s in subsets} == set(intervals)

    def test_skipping_the_bottom_chain_is_not_convex(self):
        """Test that 0..n along the top chain alone is not an interval."""
        poset = BipathPoset(3, 2)
        assert not poset.is_interval({0, 1, 2, 3})
        assert not poset.is_interval({1, 4})
        assert poset.is_interval({0, 1, 2, 3, 4})


class TestBipathInterval:
    """Test cases for interval labels and their supports."""

    def setup_method(self):
        """Set up test fixtures."""
        self.poset = BipathPoset(4, 3)

    def test_supports(self):
        """Test the support of each interval type."""
        assert BipathInterval.left(1, 0).support(self.poset) == {0, 1}
        assert BipathInterval.left(2, 5).support(self.poset) == {0, 1, 2, 5, 6}
        assert BipathInterval.right(3, 5).support(self.poset) == {3, 4, 5}
        assert BipathInterval.right(2, 4).support(self.poset) == {2, 3, 4}
        assert BipathInterval.top(1, 2).support(self.poset) == {1, 2}
        assert BipathInterval.bottom(5, 6).support(self.poset) == {5, 6}
        assert BipathInterval.full().support(self.poset) == set(range(7))

    @pytest.mark.parametrize("interval", [
        BipathInterval.left(4, 0),
        BipathInterval.left(1, 4),
        BipathInterval.right(0, 5),
        BipathInterval.right(2, 7),
        BipathInterval.top(2, 1),
        BipathInterval.top(1, 4),
        BipathInterval.bottom(4, 5),
        BipathInterval(IntervalKind.TOP, 1, None),
    ])
    def test_invalid_labels(self, interval):
        """Test that out-of-range labels are refused."""
        with pytest.raises(BipathValidationError, match="is not an interval"):
            interval.validate(self.poset)

    def test_enumeration_count(self):
        """Test the number of intervals of B(n, m)."""
        for n, m in SMALL_POSETS:
            expected = 1 + 2 * n * m + n * (n - 1) // 2 + m * (m - 1) // 2
            intervals = enumerate_intervals(BipathPoset(n, m))
            assert len(intervals) == expected
            assert len(set(intervals)) == expected
            assert intervals == sorted(intervals)

    def test_rendering(self):
        """Test interval labels and records."""
        assert str(BipathInterval.left(2, 0)) == "left(2,0)"
        assert str(BipathInterval.full()) == "full"
        assert BipathInterval.top(1, 2).to_record(3) == {"kind": "top", "i": 1, "j": 2, "mult": 3}

    def test_arc_code_conservation(self):
        """Test dimension bookkeeping of an arc code."""
        code = ArcCode({BipathInterval.left(1, 0): 2, BipathInterval.full(): 1})
        assert code.dimension_at(self.poset, 0) == 3
        assert code.dimension_at(self.poset, 4) == 1
        assert code.conserves(self.poset, [3, 3, 1, 1, 1, 1, 1])


class TestBipathModule:
    """Test cases for bipath modules and their restrictions."""

    def setup_method(self):
        """Set up test fixtures."""
        self.field = FieldSpec(5)
        self.poset = BipathPoset(2, 1)

    def _module(self, top_first, top_second, bottom):
        as_matrix = self.field.as_matrix
        return BipathModule(self.poset, self.field, (1, 1, 1), {
            (0, 1): as_matrix([[top_first]]),
            (1, 2): as_matrix([[top_second]]),
            (0, 2): as_matrix([[bottom]]),
        })

    def test_missing_arrow(self):
        """Test error when an arrow map is missing."""
        with pytest.raises(BipathValidationError, match="Arrow maps must cover"):
            BipathModule(self.poset, self.field, (0, 0, 0), {(0, 1): self.field.zeros(0, 0)})

    def test_wrong_map_shape(self):
        """Test error for a map of the wrong shape."""
        with pytest.raises(BipathValidationError, match="has shape"):
            BipathModule(self.poset, self.field, (1, 1, 1), {
                (0, 1): self.field.identity(1),
                (1, 2): self.field.identity(1),
                (0, 2): self.field.zeros(2, 1),
            })

    def test_non_commuting_module(self):
        """Test that arc_code refuses a module whose chains disagree."""
        module = self._module(1, 1, 0)
        with pytest.raises(BipathValidationError, match="Commutativity violated"):
            arc_code(module)

    def test_full_interval(self):
        """Test that identities everywhere give the full interval."""
        assert arc_code(self._module(1, 1, 1)) == ArcCode({BipathInterval.full(): 1})

    def test_left_and_right_pieces(self):
        """Test a module splitting into a left and a right interval."""
        code = arc_code(self._module(0, 1, 0))
        assert code == ArcCode({BipathInterval.left(0, 0): 1, BipathInterval.right(1, 2): 1})

    def test_scaled_chains_still_full(self):
        """Test that non-identity but commuting scalars keep the full interval."""
        assert arc_code(self._module(2, 3, 1)) == ArcCode({BipathInterval.full(): 1})

    def test_structure_map_composes(self):
        """Test the composite along a chain."""
        module = self._module(2, 3, 1)
        assert module.structure_map(0, 2).tolist() == [[1]]
        with pytest.raises(BipathValidationError, match="is not below"):
            module.structure_map(2, 0)

    def test_zero_module(self):
        """Test that the zero module has an empty arc code."""
        assert arc_code(BipathModule.zero(BipathPoset(3, 2), self.field)) == ArcCode()

    def test_slice_restriction_length(self):
        """Test that the slice of an n = m = 4 module has 21 vertices."""
        module = interval_module(BipathPoset(4, 4), self.field, BipathInterval.full())
        rep = restrict_to_slice(module)
        assert rep.length == 21
        assert barcode(rep) == ZzBarcode({ZzInterval(0, 20): 1})

    def test_empty_window(self):
        """Test error for a window with no vertices."""
        module = BipathModule.zero(self.poset, self.field)
        with pytest.raises(BipathValidationError, match="Empty window"):
            restrict_to_window(module, 3, 2)


class TestRestriction:
    """Test cases for the restriction list and the periodic restriction."""

    def setup_method(self):
        """Set up test fixtures."""
        self.field = FieldSpec(2)

    def test_restriction_list_examples(self):
        """Test the restriction list on B(3, 2) for the two-bar cases."""
        poset = BipathPoset(3, 2)
        open_, closed = Decoration.OPEN, Decoration.CLOSED
        assert slice_restriction(poset, BipathInterval.left(1, 0)) == [
            DecoratedInterval(open_, 0, 2), DecoratedInterval(open_, 4, 5)]
        assert slice_restriction(poset, BipathInterval.left(2, 4)) == [
            DecoratedInterval(open_, -1, 3), DecoratedInterval(open_, 3, 5)]
        assert slice_restriction(poset, BipathInterval.right(2, 4)) == [
            DecoratedInterval(closed, 2, 4), DecoratedInterval(Decoration.OPEN_CLOSED, -1, 0)]
        assert slice_restriction(poset, BipathInterval.bottom(4, 4)) == [
            DecoratedInterval(Decoration.OPEN_CLOSED, 3, 4), DecoratedInterval(Decoration.OPEN_CLOSED, -1, 0)]

    def test_restriction_images(self):
        """Test that every interval module restricts to its listed slice barcode."""
        for n, m in SMALL_POSETS:
            poset = BipathPoset(n, m)
            for interval in enumerate_intervals(poset):
                computed = barcode(restrict_to_slice(interval_module(poset, self.field, interval)))
                assert computed == expected_slice_barcode(poset, ArcCode({interval: 1})), (n, m, interval)

    def test_interval_round_trip(self):
        """Test that every interval module decomposes to itself."""
        for n, m in SMALL_POSETS:
            poset = BipathPoset(n, m)
            for interval in enumerate_intervals(poset):
                assert arc_code(interval_module(poset, self.field, interval)) == ArcCode({interval: 1})

    def test_periodic_restriction_matches_windows(self):
        """Test the infinite restriction against window restrictions over three periods."""
        for n, m in [(2, 1), (3, 2), (4, 3)]:
            poset = BipathPoset(n, m)
            period = 2 * poset.N
            t_first, t_last = -period - 3, 2 * period + 1
            for interval in enumerate_intervals(poset):
                module = interval_module(poset, self.field, interval)
                computed = barcode(restrict_to_window(module, t_first, t_last))
                assert computed == periodic_restriction(poset, interval, t_first, t_last), (n, m, interval)


class TestArcCodeCalculator:
    """Test cases for decomposition of planted modules and the cross-check."""

    @pytest.mark.parametrize("p", [2, 5])
    def test_plant_and_recover(self, p):
        """Test recovery of planted decompositions under random bases."""
        field = FieldSpec(p)
        rng = np.random.default_rng(100 + p)
        for _ in range(30):
            poset = BipathPoset(int(rng.integers(2, 6)), int(rng.integers(1, 6)))
            module, planted = plant_random(poset, field, 10, rng)
            code = arc_code(module)
            assert code == planted
            assert code.conserves(poset, module.dims)

    def test_direct_sum_of_repeated_intervals(self):
        """Test multiplicities above one."""
        field = FieldSpec(5)
        poset = BipathPoset(3, 3)
        chosen = [BipathInterval.bottom(4, 5)] * 3 + [BipathInterval.left(2, 5)] * 2
        module = change_module_basis(
            direct_sum_modules([interval_module(poset, field, iv) for iv in chosen], poset, field), seed=4)
        assert arc_code(module) == ArcCode({BipathInterval.bottom(4, 5): 3, BipathInterval.left(2, 5): 2})

    def test_mutated_translation_is_caught(self, mocker):
        """Test that an off-by-one in the slice translation fails the cross-check."""
        original = bipath_core.corresponding_slice_interval

        def off_by_one(poset, interval):
            bar = original(poset, interval)
            if interval.kind is IntervalKind.TOP:
                return DecoratedInterval(bar.kind, bar.a, bar.b + 1)
            return bar

        mocker.patch('src.core.bipath_core.corresponding_slice_interval', side_effect=off_by_one)
        poset = BipathPoset(3, 2)
        module = interval_module(poset, FieldSpec(2), BipathInterval.top(1, 1))
        with pytest.raises(CrossCheckError, match="re-expands"):
            arc_code(module)

    def test_negative_summand_count(self):
        """Test error for a negative summand bound."""
        with pytest.raises(BipathValidationError, match="max_summands"):
            plant_random(BipathPoset(2, 1), FieldSpec(2), -1)
