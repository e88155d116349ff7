"""Sweep-based barcodes against the brute-force route, plus the invariances
any correct implementation must satisfy."""
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topofix.cubical import binarise
from topofix.grids import ProbMap
from topofix.oracle import betti_binary, brute_barcode
from topofix.persistence import Barcode, barcode_of, betti_at, lifetime

from conftest import random_prob


def maps(max_side=10, n_levels=6):
    return st.builds(
        lambda seed, h, w: ProbMap(random_prob(np.random.default_rng(seed), h, w, n_levels)),
        st.integers(0, 10**6),
        st.integers(1, max_side),
        st.integers(1, max_side),
    )


def bar_multiset(bc: Barcode) -> Counter:
    return Counter(bc.value_triples())


class TestWorkedExamples:
    def test_two_plateaus(self):
        bc = barcode_of(np.array([[0.8, 0.0, 0.6]], dtype=np.float32))
        f = np.float32
        assert sorted(bc.value_triples()) == [(0, f(0.6), 0.0), (0, f(0.8), 0.0)]

    def test_ring(self):
        m = np.full((3, 3), 0.9, dtype=np.float32)
        m[1, 1] = 0.1
        bc = barcode_of(m)
        f = np.float32
        assert sorted(bc.value_triples()) == [(0, f(0.9), 0.0), (1, f(0.9), f(0.1))]
        d1 = bc.pairs[-1]
        assert d1.dim == 1 and d1.death_vertex == (1, 1)

    def test_essential_class_has_no_death_vertex(self):
        bc = barcode_of(np.array([[0.3, 0.7]], dtype=np.float32))
        essential = [p for p in bc.pairs if p.death_vertex is None]
        assert len(essential) == 1
        assert essential[0].death == 0.0
        assert essential[0].birth == np.float32(0.7)

    def test_coincident_birth_and_death(self):
        bc = barcode_of(np.array([[0.9, 0.5, 0.9, 0.0, 0.5]], dtype=np.float32))
        f = np.float32
        assert sorted(bc.value_triples()) == [
            (0, f(0.5), 0.0),
            (0, f(0.9), 0.0),
            (0, f(0.9), f(0.5)),
        ]


class TestOracleEquivalence:
    @given(maps())
    @settings(max_examples=200)
    def test_barcode_multiset_matches_brute_force(self, m):
        assert bar_multiset(barcode_of(m.values)) == Counter(brute_barcode(m))

    @given(maps(max_side=8, n_levels=4))
    @settings(max_examples=80)
    def test_betti_matches_binarisation_at_every_level(self, m):
        bc = barcode_of(m.values)
        for p in np.unique(m.values[m.values > 0]):
            fg = binarise(m, float(p)).labels.astype(bool)
            b0, b1 = betti_binary(fg)
            assert bc.betti_at(float(p), 0) == b0
            assert bc.betti_at(float(p), 1) == b1


class TestInvariances:
    @given(maps(max_side=7))
    @settings(max_examples=60)
    def test_rotations_and_flips_preserve_the_multiset(self, m):
        base = bar_multiset(barcode_of(m.values))
        for sym in (
            np.rot90(m.values),
            np.rot90(m.values, 2),
            np.flipud(m.values),
            np.fliplr(m.values),
            m.values.T,
        ):
            assert bar_multiset(barcode_of(np.ascontiguousarray(sym))) == base

    @given(maps(max_side=7), st.sampled_from([0.5, 2.0, 3.0]))
    @settings(max_examples=60)
    def test_monotone_value_relabeling_transports_bars(self, m, gamma):
        # x -> x**gamma is strictly increasing with g(0) = 0, so it must act
        # on bar endpoints directly
        base = barcode_of(m.values)
        warped = barcode_of(
            np.power(m.values.astype(np.float64), gamma).astype(np.float32)
        )
        got = sorted(warped.value_triples())
        want = sorted(
            (d, np.float32(np.float64(b) ** gamma), np.float32(np.float64(x) ** gamma))
            for d, b, x in base.value_triples()
        )
        assert len(got) == len(want)
        for (dg, bg, xg), (dw, bw, xw) in zip(got, want):
            assert dg == dw
            assert bg == pytest.approx(bw, abs=1e-6)
            assert xg == pytest.approx(xw, abs=1e-6)


class TestRankedOutput:
    def test_zero_lifetime_pairs_are_recorded_but_not_ranked(self):
        m = np.array([[0.6, 0.6, 0.2]], dtype=np.float32)
        bc = barcode_of(m)
        assert np.count_nonzero(bc.births == bc.deaths) >= 1
        assert all(p.lifetime > 0 for p in bc.pairs)

    @given(maps())
    @settings(max_examples=80)
    def test_ranked_orders_by_lifetime_then_birth_then_position(self, m):
        bc = barcode_of(m.values)
        h, w = m.shape
        for d in (0, 1):
            idx = bc.ranked(d)
            keys = [
                (
                    -(bc.births[i] - bc.deaths[i]),
                    -bc.births[i],
                    bc.birth_r[i] * w + bc.birth_c[i],
                )
                for i in idx
            ]
            assert keys == sorted(keys)

    def test_lifetime_accessor_is_one_based(self):
        m = np.array([[0.9, 0.0, 0.4]], dtype=np.float32)
        bc = barcode_of(m)
        assert lifetime(bc, 0, 1) == pytest.approx(np.float32(0.9))
        assert lifetime(bc, 0, 2) == pytest.approx(np.float32(0.4))
        assert lifetime(bc, 0, 3) == 0.0  # past the end: no mass
        assert lifetime(bc, 1, 1) == 0.0

    def test_betti_at_rejects_bad_threshold(self):
        bc = barcode_of(np.array([[0.5]], dtype=np.float32))
        with pytest.raises(ValueError):
            bc.betti_at(0.0, 0)
        with pytest.raises(ValueError):
            betti_at(bc, 1.5, 0)


class TestDeterminism:
    def test_identical_inputs_give_identical_barcodes(self):
        rng = np.random.default_rng(3)
        vals = random_prob(rng, 20, 20, 7)
        a, b = barcode_of(vals), barcode_of(vals.copy())
        for field in ("dims", "births", "deaths", "birth_r", "birth_c", "death_r", "death_c"):
            assert getattr(a, field).tobytes() == getattr(b, field).tobytes()
