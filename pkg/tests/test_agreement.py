import numpy as np
import pytest

from behaviorbench.agreement import (RatingPair, cohen_kappa, interpret_kappa,
                                     mean_pairwise_kappa)
from behaviorbench.errors import EmptyInput


def kappa_formula_oracle(a, b, c, d):
    """Direct 2x2 evaluation: a=yes/yes, b=yes/no, c=no/yes, d=no/no."""
    n = a + b + c + d
    p_o = (a + d) / n
    p_yes = ((a + b) / n) * ((a + c) / n)
    p_no = ((c + d) / n) * ((b + d) / n)
    p_e = p_yes + p_no
    return (p_o - p_e) / (1 - p_e)


class TestCohenKappa:
    def test_identical_vectors(self):
        pair = RatingPair(("x", "y", "x", "z"), ("x", "y", "x", "z"))
        assert cohen_kappa(pair) == 1.0

    def test_2x2_worked_example(self):
        # counts: 20 yes/yes, 5 yes/no, 10 no/yes, 15 no/no
        a = ["yes"] * 20 + ["yes"] * 5 + ["no"] * 10 + ["no"] * 15
        b = ["yes"] * 20 + ["no"] * 5 + ["yes"] * 10 + ["no"] * 15
        expected = kappa_formula_oracle(20, 5, 10, 15)
        assert cohen_kappa(RatingPair(tuple(a), tuple(b))) == pytest.approx(
            expected, abs=1e-12)

    def test_independent_raters_near_zero(self):
        rng = np.random.default_rng(0)
        n = 10_000
        a = tuple(rng.choice(["p", "q", "r"], n))
        b = tuple(rng.choice(["p", "q", "r"], n))
        assert abs(cohen_kappa(RatingPair(a, b))) <= 0.05

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        a = tuple(rng.choice(["x", "y"], 60))
        b = tuple(rng.choice(["x", "y"], 60))
        assert cohen_kappa(RatingPair(a, b)) == pytest.approx(
            cohen_kappa(RatingPair(b, a)), abs=1e-12)

    def test_relabeling_invariance(self):
        rng = np.random.default_rng(2)
        cats = ["u", "v", "w"]
        a = list(rng.choice(cats, 80))
        b = list(rng.choice(cats, 80))
        base = cohen_kappa(RatingPair(tuple(a), tuple(b)))
        relabel = {"u": "B", "v": "C", "w": "A"}
        permuted = cohen_kappa(RatingPair(tuple(relabel[x] for x in a),
                                          tuple(relabel[x] for x in b)))
        assert permuted == pytest.approx(base, abs=1e-12)

    def test_kappa_one_iff_identical(self):
        a = ("x", "y", "x", "y")
        b = ("x", "y", "y", "x")
        assert cohen_kappa(RatingPair(a, b)) < 1.0
        assert cohen_kappa(RatingPair(a, a)) == 1.0

    def test_degenerate_constant_raters(self):
        # both raters constant on one category: chance agreement is 1,
        # observed agreement is 1, kappa defined as 1
        assert cohen_kappa(RatingPair(("x", "x", "x"), ("x", "x", "x"))) == 1.0

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            RatingPair(("x",), ("x", "y"))


class TestInterpretation:
    @pytest.mark.parametrize("kappa,band", [
        (-0.5, "poor"), (0.0, "poor"), (0.1, "slight"), (0.20, "slight"),
        (0.30, "fair"), (0.40, "fair"), (0.50, "moderate"),
        (0.70, "substantial"), (0.85, "almost_perfect"), (0.99, "almost_perfect"),
        (1.0, "perfect"),
    ])
    def test_bands(self, kappa, band):
        assert interpret_kappa(kappa) == band

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            interpret_kappa(1.5)


class TestMultiRater:
    def test_mean_over_pairs(self):
        r1 = ("a", "b", "a")
        r2 = ("a", "b", "a")
        r3 = ("b", "a", "a")
        k12 = cohen_kappa(RatingPair(r1, r2))
        k13 = cohen_kappa(RatingPair(r1, r3))
        k23 = cohen_kappa(RatingPair(r2, r3))
        assert mean_pairwise_kappa([r1, r2, r3]) == pytest.approx(
            (k12 + k13 + k23) / 3)

    def test_needs_two_raters(self):
        with pytest.raises(EmptyInput):
            mean_pairwise_kappa([("a", "b")])
