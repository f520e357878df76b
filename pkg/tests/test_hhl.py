import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qlinsys import resources
from qlinsys.classical import direct_solve, fidelity
from qlinsys.errors import BandViolationError, CapacityError, DegeneratePostselectionError, InputError
from qlinsys.hhl import (
    HHLParams,
    choose_params,
    decode_eigenvalue,
    estimate_norm_sampled,
    hhl_solve,
    prepare_state,
)
from qlinsys.linalg import SparseHermitianMatrix, condition_number, spectrum_rescale
from qlinsys.statevector import measure_distribution

from conftest import random_hermitian, random_state, unit

S2 = 1 / math.sqrt(2)


def params(n_clock, C, kappa=None, epsilon=0.1):
    kappa = 1.0 / C if kappa is None else kappa
    return HHLParams(n_clock=n_clock, t0=math.pi / 2, C=C, kappa=kappa, epsilon=epsilon)


class TestChooseParams:
    def test_kappa_one(self):
        p = choose_params(1, 0.5)
        assert (p.n_clock, p.t0, p.C) == (3, math.pi / 2, 1.0)

    def test_kappa_two(self):
        p = choose_params(2, 0.01)
        assert p.n_clock == math.ceil(math.log2(200)) + 2 == 10
        assert p.C == 0.5

    def test_capacity(self):
        with pytest.raises(CapacityError):
            choose_params(1, 1e-9, n_system=10)

    @pytest.mark.parametrize("kappa, eps", [(0.5, 0.1), (2, 0.0), (2, 1.0)])
    def test_preconditions(self, kappa, eps):
        with pytest.raises(InputError):
            choose_params(kappa, eps)

    def test_param_invariants(self):
        with pytest.raises(InputError):
            HHLParams(n_clock=3, t0=math.pi / 2, C=0.6, kappa=2, epsilon=0.1)
        with pytest.raises(InputError):
            HHLParams(n_clock=3, t0=math.pi, C=0.5, kappa=2, epsilon=0.1)


class TestDecode:
    def test_zero(self):
        assert decode_eigenvalue(0, 3, math.pi / 2) == 0

    def test_unit(self):
        assert decode_eigenvalue(1, 2, math.pi / 2) == pytest.approx(1.0, abs=1e-15)

    def test_negative(self):
        assert decode_eigenvalue(7, 3, math.pi / 2) == pytest.approx(-0.5, abs=1e-15)

    def test_out_of_range(self):
        with pytest.raises(InputError):
            decode_eigenvalue(8, 3, math.pi / 2)


class TestSolveExamples:
    def test_identity(self):
        r = hhl_solve(SparseHermitianMatrix.identity(2), [1, 0], params(3, 1.0))
        assert abs(r.success_probability - 1) <= 1e-12
        assert abs(r.norm_estimate - 1) <= 1e-12
        assert fidelity(r.solution, [1, 0]) >= 1 - 1e-12

    def test_diag_half(self):
        r = hhl_solve(SparseHermitianMatrix.diagonal([1, 0.5]), [S2, S2], params(3, 0.5))
        expected = np.array([1, 2]) / math.sqrt(5)
        # phases are exact, so the output equals |x> up to global phase only
        phase = r.solution @ expected.conj()
        assert np.abs(r.solution - phase * expected).max() <= 1e-12
        assert abs(r.success_probability - 5 / 8) <= 1e-12
        assert abs(r.norm_estimate - math.sqrt(5 / 2)) <= 1e-12
        x = direct_solve(SparseHermitianMatrix.diagonal([1, 0.5]), [S2, S2])
        assert fidelity(r.solution, unit(x)) >= 1 - 1e-12

    def test_signed(self):
        r = hhl_solve(SparseHermitianMatrix.diagonal([1, -1]), [S2, S2], params(3, 1.0))
        assert fidelity(r.solution, [S2, -S2]) >= 1 - 1e-12
        # relative phase is kept, not just magnitudes
        assert abs(r.solution[0] + r.solution[1]) <= 1e-12
        assert abs(r.success_probability - 1.0) <= 1e-12

    def test_unrescaled_norm(self):
        # 4 * diag(1, 1/2) has the same direction and a quarter of the norm
        r = hhl_solve(SparseHermitianMatrix.diagonal([4, 2]), [S2, S2], params(3, 0.5))
        assert abs(r.norm_estimate - math.sqrt(5 / 2) / 4) <= 1e-12
        assert r.scale == 4

    def test_band_violation(self):
        with pytest.raises(BandViolationError):
            hhl_solve(SparseHermitianMatrix.diagonal([1, 0.1]), [S2, S2], params(4, 0.5))

    def test_degenerate_postselection(self):
        # b lies entirely in the kernel, every clock reading is k = 0
        with pytest.raises(DegeneratePostselectionError):
            hhl_solve(SparseHermitianMatrix.diagonal([1, 0]), [0, 1], params(3, 1.0))

    def test_kernel_component_filtered(self):
        r = hhl_solve(SparseHermitianMatrix.diagonal([1, 0]), [S2, S2], params(3, 1.0))
        assert fidelity(r.solution, [1, 0]) >= 1 - 1e-12
        assert abs(r.success_probability - 0.5) <= 1e-12

    def test_unnormalised_b(self):
        with pytest.raises(InputError):
            hhl_solve(SparseHermitianMatrix.identity(2), [1, 1], params(3, 1.0))

    def test_report_dict(self):
        r = hhl_solve(SparseHermitianMatrix.identity(2), [1, 0], params(3, 1.0))
        d = r.as_dict()
        assert d["params"]["n_clock"] == 3
        assert d["resources"]["clock_bits"] == 3
        assert d["resources"]["expected_repetitions"] == 1


class TestSampledNorm:
    def test_identity(self):
        est = estimate_norm_sampled(SparseHermitianMatrix.identity(2), [1, 0], params(3, 1.0), 50, 1)
        assert est.estimate == 1.0 and est.standard_error == 0.0 and est.reliable

    def test_within_three_standard_errors(self):
        A = SparseHermitianMatrix.diagonal([1, 0.5])
        value, se = estimate_norm_sampled(A, [S2, S2], params(3, 0.5), 100_000, 11)
        assert abs(value - math.sqrt(5 / 2)) <= 3 * se

    def test_single_shot_support(self):
        # C = 1/sqrt(2) on the identity gives p = 1/2
        p = HHLParams(n_clock=3, t0=math.pi / 2, C=S2, kappa=1.0, epsilon=0.1)
        seen = set()
        for seed in range(20):
            est = estimate_norm_sampled(SparseHermitianMatrix.identity(2), [1, 0], p, 1, seed)
            assert est.reliable == (est.estimate != 0)
            seen.add(round(est.estimate, 12))
        assert seen == {0.0, round(math.sqrt(2), 12)}

    def test_reproducible(self):
        A = SparseHermitianMatrix.diagonal([1, 0.5])
        a = estimate_norm_sampled(A, [S2, S2], params(3, 0.5), 1000, 5)
        assert a == estimate_norm_sampled(A, [S2, S2], params(3, 0.5), 1000, 5)

    def test_bad_shots(self):
        with pytest.raises(InputError):
            estimate_norm_sampled(SparseHermitianMatrix.identity(2), [1, 0], params(3, 1.0), 0, 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 5), st.integers(1, 3))
def test_exact_spectrum(seed, n_clock, log_dim):
    rng = np.random.default_rng(seed)
    dim = 1 << log_dim
    quarter = 1 << (n_clock - 2) if n_clock >= 2 else 1
    # lambda = 4 k / 2^n_clock, k in [1, quarter]; one eigenvalue pinned at |lambda| = 1
    ks = rng.integers(1, quarter + 1, size=dim) * rng.choice([-1, 1], size=dim)
    ks[0] = quarter * (1 if ks[0] > 0 else -1)
    lam = 4.0 * ks / (1 << n_clock)
    A = SparseHermitianMatrix.diagonal(lam)
    kappa = 1.0 / np.abs(lam).min()
    p = params(n_clock, 1.0 / kappa, kappa=kappa)
    b = random_state(rng, log_dim)
    r = hhl_solve(A, b, p)
    x = direct_solve(A, b)
    assert fidelity(r.solution, unit(x)) >= 1 - 1e-10
    assert abs(r.success_probability - p.C ** 2 * np.linalg.norm(x) ** 2) <= 1e-10


@pytest.mark.parametrize("epsilon", [0.1, 0.05])
def test_epsilon_contract(epsilon):
    rng = np.random.default_rng(404)
    for case in range(10):
        dim = 4 if case % 2 else 8
        dense = random_hermitian(rng, dim, kappa=rng.uniform(1.5, 8))
        A = SparseHermitianMatrix.from_dense(dense)
        kappa = condition_number(A)
        b = random_state(rng, int(np.log2(dim)))
        r = hhl_solve(A, b, choose_params(kappa, epsilon, n_system=int(np.log2(dim))))
        x = direct_solve(A, b)
        assert fidelity(r.solution, unit(x)) >= 1 - epsilon
        assert abs(r.norm_estimate - np.linalg.norm(x)) / np.linalg.norm(x) <= epsilon


def test_scaling_invariance(rng):
    A = SparseHermitianMatrix.from_dense(random_hermitian(rng, 4, kappa=3) * 7.5)
    b = random_state(rng, 2)
    p = choose_params(3, 0.1)
    scaled, scale = spectrum_rescale(A)
    r1, r2 = hhl_solve(A, b, p), hhl_solve(scaled, b, p)
    assert fidelity(r1.solution, r2.solution) >= 1 - 1e-10
    assert r1.norm_estimate * scale == pytest.approx(r2.norm_estimate, rel=1e-10)


@pytest.mark.parametrize("epsilon", [0.1, 0.05])
def test_clock_uncomputed(rng, epsilon):
    A = SparseHermitianMatrix.from_dense(random_hermitian(rng, 4, kappa=4))
    p = choose_params(4, epsilon)
    prep = prepare_state(A, random_state(rng, 2), p)
    dist = measure_distribution(prep.state, prep.state.layout.clock_qubits)
    p0 = dist.get("0" * p.n_clock, 0.0)
    # trace distance of a state with fidelity p0 to |0><0| is at most sqrt(1 - p0)
    assert math.sqrt(max(0.0, 1 - p0)) <= 2 * epsilon


def test_counters_track_clock_bits():
    A = SparseHermitianMatrix.diagonal([1, 0.5])
    seen = []
    for n_clock in (3, 4, 5):
        r = hhl_solve(A, [S2, S2], params(n_clock, 0.5))
        assert r.resources[resources.TA] == 2 * n_clock
        assert r.resources[resources.TB] == 1
        assert r.resources[resources.GATES] > 0
        seen.append(r.resources[resources.GATES])
    assert seen == sorted(seen)
