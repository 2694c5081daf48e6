import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import brute_correlation, numpy_features, numpy_objective, touched_pairs

from surrogate_mc import _kernels as K
from surrogate_mc.empirical import make_rng
from surrogate_mc.features import (DegenerateSeriesError, FeatureSpec, FeatureVector,
                                   ObjectiveState, Term, apply_swap, band_tolerance,
                                   confidence_band, cross_correlation, init_objective_state,
                                   objective_delta, rho, swap_delta)

SMALL = FeatureSpec((Term("centered", "centered", 3), Term("centered", "absolute", 4),
                     Term("absolute", "absolute", 5), Term("square", "square", 2)))


def test_cross_correlation_hand_example():
    assert cross_correlation([1, 2, 3, 4], "centered", "centered", 1) == pytest.approx(1 / 3, rel=1e-14)
    assert brute_correlation([1, 2, 3, 4], "centered", "centered", 1) == pytest.approx(1 / 3, rel=1e-14)


@pytest.mark.parametrize("kind", ["centered", "absolute", "square"])
def test_lag_zero_autocorrelation_is_one(kind, rng):
    assert cross_correlation(rng.standard_normal(50), kind, kind, 0) == pytest.approx(1.0, abs=1e-15)


def test_constant_series_is_degenerate():
    with pytest.raises(DegenerateSeriesError):
        cross_correlation(np.full(10, 3.0), "centered", "centered", 1)
    with pytest.raises(DegenerateSeriesError):
        init_objective_state(np.full(10, 3.0), np.zeros(14), SMALL)


@pytest.mark.parametrize("circular", [False, True])
def test_cross_correlation_matches_direct_sum(circular, rng):
    u = rng.standard_normal(30)
    for f in ("centered", "absolute", "square"):
        for g in ("centered", "absolute", "square"):
            for tau in (1, 2, 7):
                assert cross_correlation(u, f, g, tau, circular) == pytest.approx(
                    brute_correlation(u, f, g, tau, circular), rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("circular", [False, True])
def test_rho_matches_numpy(circular, rng):
    spec = FeatureSpec(SMALL.terms, circular=circular)
    u = rng.standard_normal(200)
    np.testing.assert_allclose(rho(u, spec).entries, numpy_features(u, spec), rtol=1e-12, atol=1e-15)


def test_entry_counts():
    assert FeatureSpec.stylized(1, 1).n_entries == 4
    assert len(rho(make_rng(0).standard_normal(20), FeatureSpec.stylized(1, 1))) == 4
    assert FeatureSpec.preset("sp500").n_entries == 2 * 40 + 2 * 200
    with pytest.raises(ValueError):
        FeatureSpec.preset("nasdaq")


def test_stylized_term_layout():
    spec = FeatureSpec.stylized(3, 5)
    assert [(t.f, t.g, t.max_lag) for t in spec.terms] == [
        ("centered", "centered", 3), ("centered", "absolute", 3),
        ("absolute", "absolute", 5), ("square", "square", 5)]


def test_ar1_centered_acf_near_theory():
    from surrogate_mc.diagnostics import ar1_generate
    acf = rho(ar1_generate(0.6, 10_000, 1), FeatureSpec.acf(10)).entries
    assert np.max(np.abs(acf - 0.6 ** np.arange(1, 11))) < 0.05


def test_objective_examples():
    spec = FeatureSpec.acf(1)
    assert objective_delta([0.6], [0.36], spec) == pytest.approx(0.24, abs=1e-15)
    assert objective_delta([0.6], [0.36], spec.with_mode("paper-literal")) == pytest.approx(0.24, abs=1e-15)
    with pytest.raises(ValueError):
        objective_delta([0.6], [0.1, 0.2], spec)


@pytest.mark.parametrize("mode", ["per-lag-l1", "paper-literal"])
def test_data_against_itself_is_zero(mode, rng):
    x = rng.standard_normal(300)
    spec = SMALL.with_mode(mode)
    t = rho(x, spec)
    assert objective_delta(t, t, spec) == 0.0
    assert ObjectiveState(x, t, spec).delta == 0.0
    det = FeatureSpec.deterministic(x)
    assert objective_delta(rho(x, det), x, det) == 0.0


def test_literal_mode_lets_errors_cancel():
    spec = FeatureSpec.acf(2)
    assert objective_delta([0.5, 0.5], [0.6, 0.4], spec.with_mode("paper-literal")) == pytest.approx(0, abs=1e-15)
    assert objective_delta([0.5, 0.5], [0.6, 0.4], spec) == pytest.approx(0.2)


def test_weights_scale_entries():
    spec = FeatureSpec((Term("centered", "centered", 2, weight=3.0),))
    assert objective_delta([0, 0], [0.1, -0.2], spec) == pytest.approx(0.9)
    np.testing.assert_allclose(band_tolerance(spec, 100), confidence_band(100, [1, 2]) / 3)


vec = st.lists(st.floats(-5, 5), min_size=6, max_size=6).map(np.array)


@settings(max_examples=200, deadline=None)
@given(vec, vec, vec)
def test_pseudometric(a, b, c):
    spec = FeatureSpec((Term("centered", "centered", 6),))
    d = lambda x, y: objective_delta(x, y, spec)
    assert d(a, b) >= 0 and d(a, a) == 0
    assert d(a, b) == d(b, a)
    assert d(a, c) <= d(a, b) + d(b, c) + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=3, max_size=40), st.data(),
       st.sampled_from(["centered", "absolute", "square"]))
def test_autocorrelation_bound(values, data, kind):
    u = np.array(values)
    v = np.asarray(u - u.mean())
    if np.allclose(v, 0, atol=1e-6 * max(1, np.abs(u).max())):
        return
    n = u.size
    tau = data.draw(st.integers(1, n - 1))
    try:
        c = cross_correlation(u, kind, kind, tau)
    except DegenerateSeriesError:
        return
    assert abs(c) <= n / (n - tau) * (1 + 1e-12)


def test_white_noise_inside_band():
    # oracle over 300 seeds: mean coverage 0.991 for N=1000, L=20
    inside = []
    for s in range(40):
        u = make_rng(s).standard_normal(1000)
        acf = rho(u, FeatureSpec.acf(20)).entries
        inside.append(np.abs(acf) <= confidence_band(1000, np.arange(1, 21)))
    assert np.mean(inside) >= 0.98


def test_spec_json_round_trip(tmp_path):
    spec = FeatureSpec((Term("centered", "absolute", 4, 2.5), Term("square", "square", 3)),
                       mode="paper-literal", circular=True)
    spec.save(tmp_path / "s.json")
    back = FeatureSpec.load(tmp_path / "s.json")
    assert back.to_dict() == spec.to_dict()
    assert json.loads((tmp_path / "s.json").read_text())["mode"] == "paper-literal"
    det = FeatureSpec.deterministic([0.0, 1.0, 0.5])
    assert FeatureSpec.from_dict(det.to_dict()).to_dict() == det.to_dict()


def test_spec_validation():
    with pytest.raises(ValueError):
        Term("log", "centered", 2)
    with pytest.raises(ValueError):
        Term("centered", "centered", 0)
    with pytest.raises(ValueError):
        FeatureSpec(SMALL.terms, mode="l2")
    with pytest.raises(ValueError):
        rho(np.arange(5.0), FeatureSpec.acf(5))


def test_feature_vector_by_term(rng):
    fv = rho(rng.standard_normal(100), SMALL)
    parts = fv.by_term(SMALL)
    assert [p.size for p in parts] == [3, 4, 5, 2]
    np.testing.assert_array_equal(np.concatenate(parts), fv.entries)


# -- incremental objective ------------------------------------------------------

def _random_problem(r, circular=False, mode="per-lag-l1"):
    n = int(r.integers(12, 60))
    spec = FeatureSpec(tuple(Term(t.f, t.g, min(t.max_lag, n - 1), float(r.uniform(0.5, 2)))
                             for t in SMALL.terms), mode=mode, circular=circular)
    target = rho(r.standard_t(4, n), spec)
    return r.standard_t(4, n), target, spec


@pytest.mark.parametrize("circular", [False, True])
@pytest.mark.parametrize("mode", ["per-lag-l1", "paper-literal"])
def test_swap_delta_matches_full_recompute(circular, mode):
    r = make_rng(99)
    worst = 0.0
    for _ in range(250):
        z, target, spec = _random_problem(r, circular, mode)
        st_ = ObjectiveState(z, target, spec)
        i, j = r.choice(z.size, 2, replace=False)
        new, _ = swap_delta(st_, i, j)
        w = z.copy()
        w[[i, j]] = w[[j, i]]
        ref = numpy_objective(target.entries, numpy_features(w, spec), spec)
        worst = max(worst, abs(new - ref) / max(abs(ref), 1e-300))
    assert worst <= 1e-9


def test_swap_delta_target_mode(rng):
    y = rng.standard_normal(40)
    z = rng.standard_normal(40)
    spec = FeatureSpec.deterministic(y)
    st_ = ObjectiveState(z, y, spec)
    for _ in range(50):
        i, j = rng.choice(40, 2, replace=False)
        w = st_.raw.copy()
        w[[i, j]] = w[[j, i]]
        new, upd = st_.swap_delta(i, j)
        assert new == pytest.approx(np.mean((w - y) ** 2), rel=1e-9)
        st_.apply_swap(i, j, upd)


def test_swapping_equal_values_changes_nothing(rng):
    z = rng.standard_normal(50)
    z[7] = z[31]
    st_ = ObjectiveState(z, rho(rng.standard_normal(50), SMALL), SMALL)
    before = st_.S.copy()
    new, upd = st_.swap_delta(7, 31)
    assert new == st_.delta
    np.testing.assert_array_equal(upd.sum_deltas, 0.0)
    v = st_.version
    st_.apply_swap(7, 31, upd)
    np.testing.assert_array_equal(st_.S, before)
    assert st_.version == v + 1


def test_far_swap_touches_at_most_four_products_per_lag(rng):
    n, L = 80, 5
    spec = FeatureSpec.acf(L)
    z = rng.standard_normal(n)
    st_ = ObjectiveState(z, rho(z, spec), spec)
    i, j = 10, 40
    pairs = touched_pairs(n, i, j, L)
    assert len(pairs) <= 4 * L
    _, upd = st_.swap_delta(i, j)
    w = z.copy()
    w[[i, j]] = w[[j, i]]
    c, d = z - z.mean(), w - w.mean()
    ref = np.zeros(L)
    for t, tau in pairs:
        ref[tau - 1] += d[t] * d[t - tau] - c[t] * c[t - tau]
    np.testing.assert_allclose(upd.sum_deltas, ref, rtol=1e-12, atol=1e-14)


def test_swap_involution(rng):
    z = rng.standard_normal(100)
    st_ = ObjectiveState(z, rho(rng.standard_normal(100), SMALL), SMALL)
    d0 = st_.delta
    for _ in range(2):
        _, upd = st_.swap_delta(3, 70)
        st_.apply_swap(3, 70, upd)
    assert st_.delta == pytest.approx(d0, rel=1e-9)
    np.testing.assert_array_equal(st_.raw, z)


def test_stale_update_rejected(rng):
    z = rng.standard_normal(30)
    st_ = ObjectiveState(z, rho(rng.standard_normal(30), SMALL), SMALL)
    _, upd = st_.swap_delta(1, 2)
    _, other = st_.swap_delta(3, 4)
    apply_swap(st_, 1, 2, upd)
    with pytest.raises(ValueError, match="stale"):
        st_.apply_swap(3, 4, other)
    _, upd = st_.swap_delta(5, 6)
    with pytest.raises(ValueError, match="stale"):
        st_.apply_swap(5, 7, upd)


def test_bad_indices(rng):
    st_ = ObjectiveState(rng.standard_normal(10), np.zeros(14), SMALL)
    with pytest.raises(ValueError):
        st_.swap_delta(2, 2)
    with pytest.raises(IndexError):
        st_.swap_delta(0, 10)


def test_init_sums_match_recompute(rng):
    z = rng.standard_normal(500)
    st_ = ObjectiveState(z, rho(rng.standard_normal(500), SMALL), SMALL)
    np.testing.assert_allclose(st_.S, st_.fresh_sums(), rtol=1e-12)
    np.testing.assert_allclose(st_.features().entries, numpy_features(z, SMALL), rtol=1e-12, atol=1e-15)


def test_norms_are_permutation_invariant(rng):
    z = rng.standard_normal(300)
    a = ObjectiveState(z, np.zeros(14), SMALL)
    b = ObjectiveState(rng.permutation(z), np.zeros(14), SMALL)
    # mean square of a permuted row is a sum of the same terms in another order
    np.testing.assert_allclose(a.norms, b.norms, rtol=1e-14)
    st_ = ObjectiveState(z, np.zeros(14), SMALL)
    norms = st_.norms.copy()
    for _ in range(200):
        i, j = rng.choice(300, 2, replace=False)
        st_.apply_swap(i, j, st_.swap_delta(i, j)[1])
    assert st_.norms.tobytes() == norms.tobytes()


def test_drift_after_many_swaps():
    """1e5 applied swaps with the periodic recompute disabled."""
    r = make_rng(3)
    n = 2000
    spec = FeatureSpec.stylized(10, 50)
    z = r.standard_t(3, n)
    st_ = ObjectiveState(z, rho(r.standard_t(3, n), spec), spec, recompute_every=10**12)
    for _ in range(100_000):
        i, j = r.choice(n, 2, replace=False)
        st_.apply_swap(i, j, st_.swap_delta(i, j)[1])
    fresh = st_.fresh_sums()
    assert np.max(np.abs(st_.S - fresh)) <= 1e-6 * np.max(np.abs(fresh))
    before = st_.delta
    st_.recompute()
    assert before == pytest.approx(st_.delta, rel=1e-6)
    np.testing.assert_allclose(st_.features().entries, numpy_features(st_.raw, spec), rtol=1e-9, atol=1e-12)


@pytest.mark.slow
def test_drift_after_a_million_accepted_swaps():
    """Drives the compiled loop with every proposal accepted and no recompute."""
    r = make_rng(4)
    n = 2000
    spec = FeatureSpec.stylized(10, 50)
    st_ = ObjectiveState(r.standard_t(3, n), rho(r.standard_t(3, n), spec), spec,
                         recompute_every=10**12)
    m = 1_000_000
    ii = r.integers(0, n, m)
    jj = r.integers(0, n - 1, m)
    jj += jj >= ii
    fpar = np.array([1e300, st_.delta, -1.0, 0.9, 10.0, st_.delta])
    ipar = np.zeros(13, dtype=np.int64)
    ipar[[K.I_MAX_SUCC, K.I_MAX_TOT, K.I_MAX_ITER, K.I_RECOMP_EVERY, K.I_LOG_EVERY]] = [
        10**12, 10**12, m, 10**12, m]
    ipar[K.I_NOUT] = st_.n_outside
    K.anneal_chunk(st_.V, st_.raw, st_.fk, st_.gk, st_.lags, st_.offsets, False, st_.S,
                   st_.scale, st_.target, st_.weight, st_.tol, False, False, np.zeros(0),
                   ii, jj, np.zeros(m), fpar, ipar, np.empty((2, 3)))
    assert ipar[K.I_ACCEPTED] == m
    fresh = st_.fresh_sums()
    assert np.max(np.abs(st_.S - fresh)) <= 1e-6 * np.max(np.abs(fresh))
