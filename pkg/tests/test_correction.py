import numpy as np
import pytest

from jitlgpr import correction as corr
from jitlgpr import synth
from jitlgpr.errors import ConfigError, DataError


def psi_reference(D, block, m0, n_corrupt):
    """Loop-by-loop objective with np.corrcoef and an explicit lstsq trend."""
    Dc = np.array(D, dtype=float)
    Dc[:n_corrupt, m0 - 1:9] = block
    years = np.arange(1, len(D) + 1)
    T = np.empty_like(Dc)
    R = np.empty_like(Dc)
    for m in range(12):
        coef = np.polyfit(years, Dc[:, m], 1)
        T[:, m] = np.polyval(coef, years)
        R[:, m] = Dc[:, m] - T[:, m]

    def c(a, b):
        if np.var(a, ddof=1) < 1e-12 * a.mean() ** 2 + 1e-12 or np.var(b, ddof=1) < 1e-12 * b.mean() ** 2 + 1e-12:
            return 0.0
        return np.corrcoef(a, b)[0, 1]

    first = sum(c(Dc[:, m - 1], T[:, m - 1]) for m in range(m0, 10)) / (9 - m0 + 1)
    second = sum(abs(c(R[:, m - 2], R[:, m - 1])) for m in range(m0, 11)) / (10 - m0 + 1)
    return -(first + second)


def test_hat_matrix_reproduces_lines():
    H = corr.hat_matrix(9)
    v = np.arange(1.0, 10.0)
    np.testing.assert_allclose(H @ v, v, atol=1e-12)
    np.testing.assert_allclose(H @ (3 - 2 * v), 3 - 2 * v, atol=1e-12)


def test_hat_matrix_algebra():
    H = corr.hat_matrix(9)
    assert np.array_equal(H, H.T) or np.max(np.abs(H - H.T)) <= 1e-15
    assert np.max(np.abs(H @ H - H)) <= 1e-10
    assert np.linalg.matrix_rank(H) == 2


def test_hat_matrix_three_years_by_hand():
    # Phi^T Phi = [[3, 6], [6, 14]], inverse = [[14, -6], [-6, 3]] / 6;
    # Phi^T v = (1, 2) for v = (0, 1, 0) -> coefficients (1/3, 0)
    np.testing.assert_allclose(corr.hat_matrix(3) @ [0.0, 1.0, 0.0], np.full(3, 2.0 / 6.0), atol=1e-15)


def test_hat_matrix_needs_three_years():
    with pytest.raises(ConfigError):
        corr.hat_matrix(2)


def test_trend_fit():
    f = corr.trend_fit([5.0, 7.0, 9.0, 11.0])
    assert f.slope == pytest.approx(2.0) and f.intercept == pytest.approx(3.0)
    np.testing.assert_allclose(f.fitted, [5, 7, 9, 11], atol=1e-12)


def test_variable_counts():
    D = np.ones((9, 12))
    assert corr.CorrectionProblem(D, m0=7).n_variables == 18
    assert corr.CorrectionProblem(D, m0=6).n_variables == 24


def test_denominators_for_m0_7():
    obj = corr._Objective(corr.CorrectionProblem(np.ones((9, 12)), m0=7))
    assert (obj.n_trend, obj.n_pairs) == (3, 4)
    # pairs (6,7), (7,8), (8,9), (9,10) as zero-based columns
    assert list(zip(obj.prev, obj.next)) == [(5, 6), (6, 7), (7, 8), (8, 9)]


def test_perfect_trend_gives_minus_one():
    years = np.arange(1, 10)[:, None]
    D = 20 + 3.0 * years + np.arange(12)[None, :]
    p = corr.CorrectionProblem(D, m0=7)
    assert corr.correction_objective(p.block, p) == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize("seed, m0", [(0, 7), (1, 6), (2, 7), (3, 8)])
def test_objective_matches_reference(seed, m0):
    _, obs = synth.generate(synth.SynthConfig(seed=seed, m0=m0, delay_fractions=(0.4,) * (9 - m0)))
    p = corr.CorrectionProblem(obs.as_matrix(), m0=m0)
    block = p.block * np.random.default_rng(seed).uniform(0.5, 1.5, p.block_shape)
    assert corr.correction_objective(block, p) == pytest.approx(psi_reference(p.D, block, m0, 6), abs=1e-12)


def test_truth_scores_better_than_corruption():
    truth, obs = synth.generate(synth.SynthConfig(seed=42))
    p = corr.CorrectionProblem(obs.as_matrix())
    true_block = truth.as_matrix()[:6, 6:9]
    assert corr.correction_objective(true_block, p) <= corr.correction_objective(p.block, p)


def test_truth_usually_scores_better():
    wins = 0
    for seed in range(50):
        truth, obs = synth.generate(synth.SynthConfig(seed=seed))
        p = corr.CorrectionProblem(obs.as_matrix())
        wins += corr.correction_objective(truth.as_matrix()[:6, 6:9], p) <= corr.correction_objective(p.block, p)
    assert wins >= 30


def test_candidate_validation():
    p = corr.CorrectionProblem(np.ones((9, 12)))
    with pytest.raises(DataError):
        corr.correction_objective(np.ones(5), p)
    with pytest.raises(DataError):
        corr.correction_objective(np.full(18, np.nan), p)


def test_problem_validation():
    with pytest.raises(DataError):
        corr.CorrectionProblem(-np.ones((9, 12)))
    with pytest.raises(ConfigError):
        corr.CorrectionProblem(np.ones((7, 12)), n_corrupt_years=6)
    with pytest.raises(ConfigError):
        corr.CorrectionProblem(np.ones((9, 12)), m0=10)


def test_simplex_projection():
    x = np.array([[3.0, -1.0, 0.5], [0.2, 0.2, 0.2]])
    out = corr.project_simplex_rows(x, np.array([2.0, 3.0]))
    np.testing.assert_allclose(out.sum(axis=1), [2.0, 3.0])
    assert out.min() >= 0
    np.testing.assert_allclose(out[1], [1.0, 1.0, 1.0])


@pytest.fixture(scope="module")
def solved():
    truth, obs = synth.generate(synth.SynthConfig(seed=42))
    p = corr.CorrectionProblem(obs.as_matrix())
    return truth, p, corr.correct_summer(p)


def test_solution_constraints(solved):
    _, p, r = solved
    block = r.D_c[:6, 6:9]
    np.testing.assert_allclose(block.sum(axis=1), p.year_sums, rtol=1e-6)
    assert r.max_equality_violation <= 1e-6 * p.year_sums.max()
    assert r.min_value >= -1e-9
    assert np.all(np.diff(r.objective_trace) <= 0)
    assert r.objective_value == r.objective_trace[-1]


def test_clean_cells_untouched(solved):
    _, p, r = solved
    mask = np.ones_like(p.D, dtype=bool)
    mask[:6, 6:9] = False
    np.testing.assert_array_equal(r.D_c[mask], p.D[mask])


def test_solution_closer_to_truth(solved):
    truth, p, r = solved
    T = truth.as_matrix()[:6, 6:9]
    rmse = lambda a: np.sqrt(np.mean((a - T) ** 2))
    assert rmse(r.D_c[:6, 6:9]) < rmse(p.block)


def test_fixed_point(solved):
    _, p, r = solved
    again = corr.correct_summer(p, init=r.D_c[:6, 6:9])
    assert again.iterations <= 1
    np.testing.assert_allclose(again.D_c, r.D_c, atol=1e-6)


def test_year_offset_does_not_change_solution(solved):
    _, p, r = solved
    shifted = corr.CorrectionProblem(p.D, first_year=2014)
    np.testing.assert_allclose(corr.correct_summer(shifted).D_c, r.D_c, rtol=1e-5, atol=1e-4)


def test_iteration_cap_returns_best_so_far():
    _, obs = synth.generate(synth.SynthConfig(seed=1))
    p = corr.CorrectionProblem(obs.as_matrix())
    r = corr.correct_summer(p, max_iter=2)
    assert not r.converged and r.iterations == 2
    assert r.objective_value <= r.objective_trace[0]


def test_june_start_configuration():
    truth, obs = synth.generate(synth.SynthConfig(seed=42, m0=6, delay_fractions=(0.3, 0.4, 0.5)))
    p = corr.CorrectionProblem(obs.as_matrix(), m0=6)
    r = corr.correct_summer(p, init="clean_mean")
    T = truth.as_matrix()[:6, 5:9]
    assert np.sqrt(np.mean((r.D_c[:6, 5:9] - T) ** 2)) < np.sqrt(np.mean((p.block - T) ** 2))
    np.testing.assert_allclose(r.D_c[:6, 5:9].sum(axis=1), p.year_sums, rtol=1e-6)


def test_restarts_are_seeded():
    _, obs = synth.generate(synth.SynthConfig(seed=5))
    p = corr.CorrectionProblem(obs.as_matrix())
    a = corr.correct_summer(p, restarts=3, seed=1)
    b = corr.correct_summer(p, restarts=3, seed=1)
    assert len(a.restart_values) == 3
    np.testing.assert_array_equal(a.D_c, b.D_c)
