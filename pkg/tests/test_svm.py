import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from attrforge.features import SparseVector
from attrforge.svm import (
    BACKEND,
    SvmError,
    SvmModel,
    SvmParams,
    check_kkt,
    decision_value,
    train_binary,
)

from qp_oracle import dual_objective, gram, solve_qp_exact, solve_qp_grid


def sv(*coords):
    cols = tuple(i for i, v in enumerate(coords) if v != 0.0)
    vals = tuple(float(coords[i]) for i in cols)
    return SparseVector(cols, vals)


def to_dense(xs, dim):
    out = np.zeros((len(xs), dim))
    for i, x in enumerate(xs):
        for col, val in x.items():
            out[i, col] = val
    return out


ANALYTIC_XS = [sv(0.0, 0.0), sv(2.0, 2.0)]
ANALYTIC_YS = [-1, 1]


class TestAnalyticCase:
    def test_hard_margin_solution(self):
        m = train_binary(ANALYTIC_XS, ANALYTIC_YS, SvmParams(c=10.0), n_features=2)
        assert m.weights == pytest.approx((0.5, 0.5), abs=1e-9)
        assert m.bias == pytest.approx(-1.0, abs=1e-9)

    def test_margins_exactly_one(self):
        m = train_binary(ANALYTIC_XS, ANALYTIC_YS, SvmParams(c=10.0), n_features=2)
        assert decision_value(m, ANALYTIC_XS[0]) == pytest.approx(-1.0, abs=1e-9)
        assert decision_value(m, ANALYTIC_XS[1]) == pytest.approx(1.0, abs=1e-9)

    def test_zero_kkt_violations(self):
        m = train_binary(ANALYTIC_XS, ANALYTIC_YS, SvmParams(c=10.0), n_features=2)
        assert check_kkt(m, ANALYTIC_XS, ANALYTIC_YS) == []

    def test_matches_oracle(self):
        m = train_binary(ANALYTIC_XS, ANALYTIC_YS, SvmParams(c=10.0), n_features=2)
        points = [[0.0, 0.0], [2.0, 2.0]]
        _, obj = solve_qp_exact(points, ANALYTIC_YS, 10.0)
        got = dual_objective(m.alphas, ANALYTIC_YS, gram(points))
        assert got == pytest.approx(obj, rel=1e-9)
        assert obj == pytest.approx(0.25)


class TestValidation:
    def test_single_label_rejected(self):
        with pytest.raises(SvmError):
            train_binary([sv(1.0), sv(2.0)], [1, 1])

    def test_empty_feature_space(self):
        with pytest.raises(SvmError):
            train_binary([SparseVector(()), SparseVector(())], [1, -1])

    def test_bad_labels(self):
        with pytest.raises(SvmError):
            train_binary([sv(1.0), sv(2.0)], [1, 0])

    def test_bad_params(self):
        with pytest.raises(SvmError):
            SvmParams(c=-1.0)
        with pytest.raises(SvmError):
            SvmParams(max_passes=0)


class TestDecisionValue:
    def test_empty_vector_gives_bias(self):
        m = SvmModel(weights=(1.0, 2.0), bias=0.7)
        assert decision_value(m, SparseVector(())) == 0.7

    def test_zero_weights(self):
        m = SvmModel(weights=(0.0, 0.0, 0.0), bias=0.5)
        assert decision_value(m, SparseVector((0, 2))) == 0.5

    def test_column_out_of_range(self):
        m = SvmModel(weights=(1.0,), bias=0.0)
        with pytest.raises(SvmError):
            decision_value(m, SparseVector((3,)))

    def test_linearity_on_disjoint_columns(self):
        m = SvmModel(weights=(1.5, -2.0, 0.25, 3.0), bias=0.1)
        a = SparseVector((0, 2))
        b = SparseVector((1, 3))
        merged = SparseVector((0, 1, 2, 3))
        assert decision_value(m, a) + decision_value(m, b) - m.bias == (
            pytest.approx(decision_value(m, merged))
        )


class TestCheckKkt:
    def _model(self):
        return train_binary(ANALYTIC_XS, ANALYTIC_YS, SvmParams(c=10.0), n_features=2)

    def test_perturbed_weights_violate(self):
        m = self._model()
        bad = SvmModel(
            weights=tuple(w + 1.0 for w in m.weights),
            bias=m.bias,
            params=m.params,
            n_support=m.n_support,
            alphas=m.alphas,
        )
        assert len(check_kkt(bad, ANALYTIC_XS, ANALYTIC_YS)) > 0

    def test_infinite_tol_is_vacuous(self):
        m = self._model()
        bad = SvmModel(
            weights=(9.0, -9.0),
            bias=4.0,
            params=m.params,
            n_support=m.n_support,
            alphas=m.alphas,
        )
        assert check_kkt(bad, ANALYTIC_XS, ANALYTIC_YS, tol=math.inf) == []

    def test_requires_alphas(self):
        m = self._model()
        stripped = SvmModel(m.weights, m.bias, m.params, m.n_support, None)
        with pytest.raises(SvmError):
            check_kkt(stripped, ANALYTIC_XS, ANALYTIC_YS)


def oracle_suite():
    """>= 50 datasets, <= 6 points, <= 3 dims, integer coordinates."""
    rng = random.Random(20240817)
    suite = [([[0.0, 0.0], [2.0, 2.0]], [-1, 1], 10.0)]
    # degenerate duplicates with contradictory labels
    suite.append(([[1.0], [1.0]], [1, -1], 2.0))
    suite.append(([[1.0, 1.0], [1.0, 1.0], [0.0, 1.0]], [1, -1, -1], 1.0))
    while len(suite) < 56:
        n = rng.randint(2, 6)
        d = rng.randint(1, 3)
        pts = [[float(rng.randint(-2, 2)) for _ in range(d)] for _ in range(n)]
        ys = [rng.choice((-1, 1)) for _ in range(n)]
        if len(set(ys)) < 2:
            continue
        if all(all(v == 0.0 for v in p) for p in pts):
            continue
        c = rng.choice((0.5, 1.0, 10.0))
        suite.append((pts, ys, c))
    return suite


class TestOracleEquivalence:
    def test_oracle_agrees_with_grid_on_small_problems(self):
        rng = random.Random(7)
        for _ in range(8):
            n = rng.randint(2, 3)
            pts = [[float(rng.randint(-2, 2)) for _ in range(2)] for _ in range(n)]
            ys = [rng.choice((-1, 1)) for _ in range(n)]
            if len(set(ys)) < 2:
                continue
            _, exact = solve_qp_exact(pts, ys, 1.0)
            grid = solve_qp_grid(pts, ys, 1.0, steps=400)
            assert grid <= exact + 1e-9
            assert exact - grid <= 5e-3 * max(1.0, abs(exact))

    @pytest.mark.parametrize("pts,ys,c", oracle_suite())
    def test_smo_matches_oracle(self, pts, ys, c):
        dim = len(pts[0])
        xs = [sv(*p) for p in pts]
        params = SvmParams(c=c, tol=1e-6, max_passes=200)
        m = train_binary(xs, ys, params, n_features=dim)
        _, oracle_obj = solve_qp_exact(pts, ys, c)
        smo_obj = dual_objective(m.alphas, ys, gram(pts))
        assert smo_obj == pytest.approx(oracle_obj, rel=1e-6, abs=1e-9)
        assert check_kkt(m, xs, ys, tol=1e-3) == []

    def test_duplicated_dataset_same_boundary(self):
        # margin regime: no alpha at the bound, so duplication only
        # redistributes alphas and the boundary is untouched
        pts = [[0.0, 0.0], [2.0, 2.0], [0.0, 1.0], [2.0, 1.0]]
        ys = [-1, 1, -1, 1]
        xs = [sv(*p) for p in pts]
        params = SvmParams(c=50.0, tol=1e-8, max_passes=500)
        base = train_binary(xs, ys, params, n_features=2)
        assert max(base.alphas) < 50.0  # confirm the regime
        doubled = train_binary(xs + xs, ys + ys, params, n_features=2)
        for wa, wb in zip(base.weights, doubled.weights):
            assert wb == pytest.approx(wa, abs=1e-6)
        assert doubled.bias == pytest.approx(base.bias, abs=1e-6)


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_scaling_preserves_training_signs(seed):
    rng = random.Random(seed)
    lam = rng.choice((0.5, 2.0, 3.0))
    pts, ys = [], []
    for _ in range(rng.randint(3, 6)):
        x = [float(rng.randint(-3, 3)), float(rng.randint(-3, 3))]
        pts.append(x)
        ys.append(1 if sum(x) >= 1 else -1)
    if len(set(ys)) < 2:
        return
    params = SvmParams(c=100.0, tol=1e-6, max_passes=300)
    xs = [sv(*p) for p in pts]
    xs_scaled = [sv(*(lam * v for v in p)) for p in pts]
    a = train_binary(xs, ys, params, n_features=2)
    b = train_binary(xs_scaled, ys, params, n_features=2)
    for x, xl, y in zip(xs, xs_scaled, ys):
        da = decision_value(a, x)
        db = decision_value(b, xl)
        if abs(da) > 1e-6 and abs(db) > 1e-6:
            assert (da > 0) == (db > 0)


def test_training_reproducible_bit_for_bit():
    rng = random.Random(11)
    pts = [[float(rng.randint(0, 3)) for _ in range(3)] for _ in range(6)]
    ys = [rng.choice((-1, 1)) for _ in range(6)]
    ys[0], ys[1] = 1, -1
    xs = [sv(*p) for p in pts]
    m1 = train_binary(xs, ys, n_features=3)
    m2 = train_binary(xs, ys, n_features=3)
    assert m1.weights == m2.weights
    assert m1.bias == m2.bias
    assert m1.alphas == m2.alphas


def test_backend_is_reported():
    assert BACKEND in ("pure", "compiled")
