import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qlinsys.classical import direct_solve, fidelity
from qlinsys.encoders import (
    encode_least_squares,
    encode_ode,
    encode_poisson,
    euler_block_system,
    kappa_scaling_probe,
    laplacian_1d,
    poisson_eigenvalues,
    poisson_kappa_closed_form,
    poisson_matrix,
)
from qlinsys.errors import InputError, RankError
from qlinsys.hhl import choose_params, hhl_solve
from qlinsys.linalg import RectangularMatrix, n_qubits_for, spectral_decompose

from conftest import unit


def euler_oracle(A_of_t, b_of_t, x0, grid):
    xs = [np.asarray(x0, dtype=complex)]
    for i in range(len(grid) - 1):
        dt = grid[i + 1] - grid[i]
        xs.append(xs[-1] + dt * (A_of_t(grid[i]) @ xs[-1] + b_of_t(grid[i])))
    return np.concatenate(xs)


def solve_encoded(enc):
    y = direct_solve(enc.matrix, enc.rhs)
    return enc.recover(y)


def hhl_round_trip(enc, epsilon):
    n_sys = n_qubits_for(enc.matrix.dim)
    params = choose_params(enc.kappa_report, epsilon, n_sys)
    assert n_sys + params.n_clock + 1 <= 14
    r = hhl_solve(enc.matrix, enc.rhs, params)
    return fidelity(unit(r.solution[enc.solution_slice]), unit(enc.solve_classical()))


class TestLeastSquares:
    def test_scalar(self):
        enc = encode_least_squares(RectangularMatrix([[1.0]]), [2.0])
        assert np.allclose(solve_encoded(enc), [2.0], atol=1e-12)

    def test_column(self):
        enc = encode_least_squares(np.array([[1.0], [1.0]]), [1.0, 0.0])
        # singular dilation: the pseudo-inverse acts on (b, 0)
        lam, vec = spectral_decompose(enc.matrix).eigenvalues, spectral_decompose(enc.matrix).eigenvectors
        keep = np.abs(lam) > 1e-12
        y = (vec[:, keep] / lam[keep]) @ (vec[:, keep].conj().T @ enc.rhs)
        assert enc.recover(y) == pytest.approx([0.5], abs=1e-12)
        assert enc.solve_classical() == pytest.approx([0.5], abs=1e-12)

    def test_normal_equations(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            M = rng.normal(size=(5, 3))
            b = rng.normal(size=5)
            x = encode_least_squares(M, b).solve_classical()
            assert np.abs(M.T @ (M @ x - b)).max() <= 1e-8

    def test_layout(self):
        enc = encode_least_squares(np.ones((3, 2)) + np.eye(3, 2), [1, 2, 3])
        assert enc.matrix.dim == 5 and enc.solution_slice == slice(3, 5)
        assert abs(np.linalg.norm(enc.rhs) - 1) <= 1e-12
        assert np.all(enc.rhs[3:] == 0)

    def test_rank_deficient(self):
        with pytest.raises(RankError):
            encode_least_squares(np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]), [1, 0, 0])

    def test_wide_rejected(self):
        with pytest.raises(InputError):
            encode_least_squares(np.ones((1, 2)), [1])

    def test_hhl_round_trip(self):
        rng = np.random.default_rng(3)
        M = rng.normal(size=(3, 2))
        enc = encode_least_squares(M, rng.normal(size=3))
        assert hhl_round_trip(enc, 0.1) >= 1 - 0.1


class TestODE:
    def test_constant(self):
        grid = [0, 0.3, 0.5, 1.1]
        enc = encode_ode(1, lambda t: np.zeros((1, 1)), lambda t: np.zeros(1), [1.0], grid)
        assert np.allclose(solve_encoded(enc), np.ones(4), atol=1e-12)

    def test_decay(self):
        grid = np.linspace(0, 1, 5)
        d = grid[1]
        enc = encode_ode(1, lambda t: -np.eye(1), lambda t: np.zeros(1), [1.0], grid)
        assert np.allclose(solve_encoded(enc), (1 - d) ** np.arange(5), atol=1e-12)

    def test_rotation(self):
        gen = np.array([[0.0, 1.0], [-1.0, 0.0]])
        grid = np.linspace(0, 1, 8)
        A, b = (lambda t: gen), (lambda t: np.zeros(2))
        enc = encode_ode(2, A, b, [1.0, 0.0], grid)
        assert np.abs(solve_encoded(enc) - euler_oracle(A, b, [1.0, 0.0], grid)).max() <= 1e-10
        assert enc.solution_slice == slice(16, 32)

    def test_grid_checked(self):
        with pytest.raises(InputError):
            encode_ode(1, lambda t: np.eye(1), lambda t: np.zeros(1), [1.0], [0, 1, 1])
        with pytest.raises(InputError):
            encode_ode(1, lambda t: np.eye(1), lambda t: np.zeros(1), [1.0], [0])

    def test_hhl_round_trip(self):
        grid = np.linspace(0, 0.5, 4)
        enc = encode_ode(1, lambda t: -np.eye(1), lambda t: np.ones(1), [1.0], grid)
        assert hhl_round_trip(enc, 0.1) >= 1 - 0.1


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 4), st.integers(2, 16))
def test_block_system_is_forward_euler(seed, N, m):
    rng = np.random.default_rng(seed)
    coeffs = rng.normal(size=(3, N, N))
    shift = rng.normal(size=(2, N))
    A = lambda t: coeffs[0] + t * coeffs[1] + math.sin(t) * coeffs[2]
    b = lambda t: shift[0] + t * shift[1]
    grid = np.cumsum(rng.uniform(0.01, 0.2, size=m))
    x0 = rng.normal(size=N)
    K, r = euler_block_system(A, b, x0, grid)
    expected = euler_oracle(A, b, x0, grid)
    assert np.abs(direct_solve(K, r) - expected).max() <= 1e-10 * max(1.0, np.abs(expected).max())


class TestPoisson:
    def test_small_stencil(self):
        assert np.allclose(poisson_matrix(1, 2).toarray(), 9 * np.array([[2, -1], [-1, 2]]))

    def test_1d_solution(self, rng):
        q = rng.normal(size=8)
        enc = encode_poisson(1, 8, q)
        lam = np.linalg.eigvalsh(laplacian_1d(8).toarray())
        assert enc.kappa_report == pytest.approx(lam.max() / lam.min(), rel=1e-10)
        expected = np.linalg.solve(laplacian_1d(8).toarray(), q)
        assert np.abs(solve_encoded(enc) - expected).max() <= 1e-8

    def test_2d_kronecker_sum(self):
        T = laplacian_1d(4).toarray()
        brute = np.zeros((16, 16))
        for i in range(4):
            for j in range(4):
                for k in range(4):
                    for l in range(4):
                        brute[4 * i + j, 4 * k + l] = T[i, k] * (j == l) + (i == k) * T[j, l]
        assert np.abs(poisson_matrix(2, 4).toarray() - brute).max() <= 1e-12

    @pytest.mark.parametrize("d, L", [(1, 4), (1, 32), (2, 5), (3, 3)])
    def test_closed_form_eigenvalues(self, d, L):
        lam = np.linalg.eigvalsh(poisson_matrix(d, L).toarray())
        assert np.abs(np.sort(lam) - poisson_eigenvalues(d, L)).max() <= 1e-8

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            encode_poisson(2, 3, np.ones(8))

    def test_kappa_monotone(self):
        kappas = [encode_poisson(2, L, np.ones(L * L)).kappa_report for L in range(2, 9)]
        assert all(a <= b for a, b in zip(kappas, kappas[1:]))

    def test_hhl_round_trip(self):
        enc = encode_poisson(1, 4, [1.0, 0.5, -0.5, 1.0])
        assert hhl_round_trip(enc, 0.1) >= 1 - 0.1


class TestProbe:
    def test_exponent(self):
        table = kappa_scaling_probe(1, [4, 8, 16, 32])
        assert 1.8 <= table.exponent <= 2.2
        for L, k in table.rows:
            assert k == pytest.approx(poisson_kappa_closed_form(L), rel=1e-8)

    def test_ratio(self):
        rows = dict(kappa_scaling_probe(1, [2, 4]).rows)
        exact = poisson_kappa_closed_form(4) / poisson_kappa_closed_form(2)
        assert rows[4] / rows[2] == pytest.approx(exact, rel=1e-10)

    def test_single_row(self):
        table = kappa_scaling_probe(1, [8])
        assert len(table.rows) == 1 and table.exponent is None
        assert table.to_csv().splitlines() == ["L,kappa", f"8,{table.rows[0][1]!r}"]
