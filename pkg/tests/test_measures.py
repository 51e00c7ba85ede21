import numpy as np
import pytest

from ifspovm import fixtures
from ifspovm.errors import DomainError
from ifspovm.geometry import IFSystem
from ifspovm.intervals import IntervalUnion
from ifspovm.measures import (
    DiscreteMeasure,
    TruncationFamily,
    hutchinson_measure,
    hutchinson_sequence,
    kravchenko_sequence,
    transfer_step,
    truncate_measure,
)
from ifspovm.transport import kantorovich_h, modified_kantorovich
from oracles import all_words, word_points


def as_dict(mu):
    return {round(float(x), 15): float(w) for x, w in zip(mu.atoms[:, 0], mu.weights)}


class TestDiscreteMeasure:
    def test_validation(self):
        with pytest.raises(DomainError):
            DiscreteMeasure([0.0, 1.0], [0.5, 0.6])
        with pytest.raises(DomainError):
            DiscreteMeasure([0.0, 1.0], [1.0, 0.0])
        with pytest.raises(DomainError):
            DiscreteMeasure([0.0, 0.0], [0.5, 0.5])

    def test_merged_pools_duplicates_in_first_order(self):
        mu, labels = DiscreteMeasure.merged([2.0, 1.0, 2.0], [0.25, 0.25, 0.5], [[(0,)], [(1,)], [(2,)]])
        assert mu.atoms[:, 0].tolist() == [2.0, 1.0]
        assert mu.weights.tolist() == [0.75, 0.25]
        assert labels.tolist() == [0, 1, 0]
        assert mu.provenance == (((0,), (2,)), ((1,),))


class TestTransfer:
    def test_cantor_from_zero(self, cantor):
        out = transfer_step(cantor, DiscreteMeasure.dirac([0.0]))
        assert as_dict(out) == {0.0: 0.5, round(2 / 3, 15): 0.5}

    def test_degenerate_fixed_measure(self):
        ifs = IFSystem.from_slopes([(0.5, 0.0), (0.5, 0.0)])
        out = transfer_step(ifs, DiscreteMeasure.dirac([0.0]))
        assert out.atoms.tolist() == [[0.0]] and out.weights.tolist() == [1.0]

    def test_dyadic_twice(self, dyadic):
        mu = DiscreteMeasure.dirac([0.0])
        mu = transfer_step(dyadic, transfer_step(dyadic, mu))
        assert as_dict(mu) == {0.0: 0.25, 0.25: 0.25, 0.5: 0.25, 0.75: 0.25}

    def test_mass_preserved(self, overlap):
        for r in (0.0, 0.01):
            for mu in hutchinson_sequence(overlap, 7, r):
                assert abs(mu.weights.sum() - 1.0) <= 1e-12

    def test_incidence(self, cantor):
        mu = hutchinson_measure(cantor, 3)
        res = transfer_step(cantor, mu, with_incidence=True)
        for i, m in enumerate(cantor.maps):
            assert np.array_equal(res.measure.atoms[res.incidence[i]], m(mu.atoms))


class TestHutchinson:
    def test_depth_one_mass_of_left_third(self, cantor):
        mu = hutchinson_measure(cantor, 1)
        assert mu.mass_of([0.0, 1 / 3]) == 0.5

    @pytest.mark.parametrize("k", [1, 3, 6])
    def test_dyadic_is_uniform_grid(self, dyadic, k):
        mu = hutchinson_measure(dyadic, k)
        assert np.array_equal(np.sort(mu.atoms[:, 0]), np.arange(2**k) / 2**k)
        assert np.all(mu.weights == 2.0**-k)

    def test_overlap_depth_three_against_exact_words(self, overlap):
        mu = hutchinson_measure(overlap, 3)
        words = all_words(2, 3)
        exact = word_points([("3/5", 0), ("3/5", "2/5")], words, 0)
        assert len(set(exact)) == 8 and len(mu) == 8
        assert np.all(mu.weights == 1 / 8)
        got = dict(zip(mu.provenance, mu.atoms[:, 0]))
        for w, x in zip(words, exact):
            assert got[(w,)] == pytest.approx(float(x), abs=1e-15)

    def test_recursion_is_exact(self, overlap):
        for k in (1, 2, 5):
            a = transfer_step(overlap, hutchinson_measure(overlap, k))
            b = hutchinson_measure(overlap, k + 1)
            assert np.array_equal(a.atoms, b.atoms) and np.array_equal(a.weights, b.weights)
            assert a.provenance == b.provenance

    def test_provenance_words_have_depth(self, cantor):
        mu = hutchinson_measure(cantor, 4)
        assert sorted(w for ws in mu.provenance for w in ws) == all_words(2, 4)

    @pytest.mark.parametrize("name", ["cantor", "dyadic"])
    def test_h_decay(self, name):
        ifs = fixtures.BY_NAME[name]()
        seq = hutchinson_sequence(ifs, 8)
        h0 = kantorovich_h(seq[0], seq[1])
        for m in range(1, 8):
            assert kantorovich_h(seq[m], seq[m + 1]) <= ifs.ratio**m * h0 + 1e-9


class TestKravchenko:
    def test_examples(self):
        assert as_dict(kravchenko_sequence(1, [0, 1])) == {0.0: 0.5, 1.0: 0.5}
        assert as_dict(kravchenko_sequence(2, [0, 1, 2])) == {0.0: 0.25, 1.0: 0.5, 2.0: 0.25}

    @pytest.mark.parametrize("n", [1, 5, 20, 40])
    def test_mass(self, n):
        assert kravchenko_sequence(n, np.arange(n + 1)).weights.sum() == pytest.approx(1.0, abs=1e-15)

    def test_growth_condition(self):
        with pytest.raises(DomainError):
            kravchenko_sequence(2, [0, 1, 3])
        with pytest.raises(DomainError):
            kravchenko_sequence(0, [0])

    @pytest.mark.parametrize("n", range(1, 13))
    def test_consecutive_distance(self, n):
        a = kravchenko_sequence(n, np.arange(n + 1))
        b = kravchenko_sequence(n + 1, np.arange(n + 2))
        assert kantorovich_h(a, b) == pytest.approx((n + 1) * 2.0 ** -(n + 1), abs=1e-12)


class TestTruncation:
    def test_examples(self):
        mu = DiscreteMeasure([0.0, 1.0, 2.0], [1 / 3] * 3)
        t = truncate_measure(mu, [0, 1])
        assert t.atoms[:, 0].tolist() == [0.0, 1.0] and np.allclose(t.weights, 0.5)
        full = truncate_measure(mu, [-5, 5])
        assert np.array_equal(full.weights, mu.weights)
        two = DiscreteMeasure([0.0, 2.0], [0.5, 0.5])
        t = truncate_measure(two, [1.5, 3])
        assert t.atoms[:, 0].tolist() == [2.0] and t.weights.tolist() == [1.0]

    def test_zero_mass(self):
        with pytest.raises(DomainError):
            truncate_measure(DiscreteMeasure([0.0], [1.0]), [1, 2])

    def test_union_of_intervals(self):
        mu = DiscreteMeasure([0.0, 1.0, 2.0, 3.0], [0.25] * 4)
        t = truncate_measure(mu, IntervalUnion.from_pairs([(0, 0.5), (2.5, 3)]))
        assert t.atoms[:, 0].tolist() == [0.0, 3.0]

    def test_family_nested_and_bound(self, cantor):
        mu = hutchinson_measure(cantor, 6)
        sets = [(0, r) for r in np.linspace(0.05, 1.0, 10)]
        fam = TruncationFamily(mu, sets)
        for n in range(len(fam)):
            mh = modified_kantorovich(fam.member(n), mu)
            assert mh <= 2 * fam.escaped_mass(n) * (1 + 1e-15) + 1e-300
        with pytest.raises(DomainError):
            TruncationFamily(mu, [(0, 1), (0, 0.5)])
