"""Metric core: fidelity, purified distance, max-relative entropy."""

import numpy as np
import pytest

from qembezzle import (
    DensityMatrix,
    DomainError,
    NotPSD,
    ShapeError,
    SupportError,
    SupportTolerance,
    max_entangled,
    max_entangled_density,
    maximally_mixed,
    max_relative_entropy,
    partial_trace,
    psd_sqrt,
    purified_distance,
    random_density,
    random_full_rank,
    SeededRng,
    tensor_product,
    uhlmann_fidelity,
)
from qembezzle.errors import CapacityExceeded


def rand_state(dim, seed, split=None):
    return random_density(dim, SeededRng(seed), split=split)


class TestDensityMatrix:
    def test_hermitisation_absorbs_input_noise(self):
        mat = np.diag([0.5, 0.5]).astype(complex)
        mat[0, 1] = 1e-12j  # asymmetric at rounding level
        dm = DensityMatrix.from_matrix(mat)
        np.testing.assert_allclose(dm.mat, dm.mat.conj().T)

    def test_rejects_bad_trace(self):
        with pytest.raises(DomainError):
            DensityMatrix.from_matrix(np.eye(2, dtype=complex))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(NotPSD):
            DensityMatrix.from_matrix(np.diag([1.5, -0.5]).astype(complex))

    def test_rejects_incompatible_split(self):
        with pytest.raises(ShapeError):
            DensityMatrix.from_matrix(np.eye(4, dtype=complex) / 4, split=(3, 2))

    def test_matrix_is_frozen(self):
        dm = rand_state(3, 1)
        with pytest.raises(ValueError):
            dm.mat[0, 0] = 1.0

    def test_support_tolerance_range(self):
        with pytest.raises(DomainError):
            SupportTolerance(1e-3)


class TestTensorAndTrace:
    def test_partial_trace_of_product_recovers_factors(self):
        a, b = rand_state(2, 2), rand_state(3, 3)
        prod = tensor_product(a, b)
        np.testing.assert_allclose(partial_trace(prod, "A").mat, a.mat, atol=1e-12)
        np.testing.assert_allclose(partial_trace(prod, "B").mat, b.mat, atol=1e-12)

    def test_tensor_matches_bruteforce_kron(self):
        a, b = rand_state(2, 4), rand_state(2, 5)
        prod = tensor_product(a, b)
        expected = np.zeros((4, 4), dtype=complex)
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    for l in range(2):
                        expected[2 * i + k, 2 * j + l] = a.mat[i, j] * b.mat[k, l]
        np.testing.assert_allclose(prod.mat, expected, atol=1e-14)
        assert abs(np.trace(prod.mat).real - 1.0) < 1e-10

    def test_tensor_cap(self):
        big = maximally_mixed(100)
        with pytest.raises(CapacityExceeded):
            tensor_product(big, big)

    def test_basis_case(self):
        e0 = DensityMatrix.from_matrix(np.diag([1.0, 0.0]).astype(complex))
        e1 = DensityMatrix.from_matrix(np.diag([0.0, 1.0]).astype(complex))
        prod = tensor_product(e0, e1)
        expected = np.zeros((4, 4))
        expected[1, 1] = 1.0
        np.testing.assert_allclose(prod.mat, expected, atol=1e-14)

    def test_partial_trace_against_index_sum(self):
        rho = rand_state(4, 6, split=(2, 2))
        t = rho.mat.reshape(2, 2, 2, 2)
        manual = np.zeros((2, 2), dtype=complex)
        for a in range(2):
            for b in range(2):
                for j in range(2):
                    manual[a, b] += t.reshape(2, 2, 2, 2)[a, j, b, j]
        np.testing.assert_allclose(partial_trace(rho, "A").mat, manual, atol=1e-12)

    def test_partial_trace_of_max_entangled_is_mixed(self):
        for d in (2, 3, 4):
            phi = max_entangled_density(d)
            np.testing.assert_allclose(
                partial_trace(phi, "B").mat, np.eye(d) / d, atol=1e-12
            )

    def test_selector_errors(self):
        rho = rand_state(4, 7, split=(2, 2))
        with pytest.raises(ShapeError):
            partial_trace(rho, "C")
        with pytest.raises(ShapeError):
            partial_trace(rand_state(4, 8), "A")


class TestPsdSqrt:
    def test_identity(self):
        np.testing.assert_allclose(psd_sqrt(np.eye(3, dtype=complex)), np.eye(3), atol=1e-12)

    def test_diagonal(self):
        root = psd_sqrt(np.diag([4.0, 9.0]) / 13.0)
        np.testing.assert_allclose(root, np.diag([2.0, 3.0]) / np.sqrt(13.0), atol=1e-12)

    def test_square_reproduces_input(self):
        for seed in range(5):
            rho = rand_state(6, 100 + seed)
            root = psd_sqrt(rho)
            err = np.linalg.norm(root @ root - rho.mat)
            assert err <= 1e-9

    def test_rejects_indefinite(self):
        with pytest.raises(NotPSD):
            psd_sqrt(np.diag([1.0, -0.1]))


class TestFidelityAndDistance:
    def test_self_fidelity(self):
        rho = rand_state(4, 9)
        assert abs(uhlmann_fidelity(rho, rho) - 1.0) < 1e-10
        assert purified_distance(rho, rho) < 1e-7

    def test_orthogonal_pure_states(self):
        e0 = DensityMatrix.from_matrix(np.diag([1.0, 0.0]).astype(complex))
        e1 = DensityMatrix.from_matrix(np.diag([0.0, 1.0]).astype(complex))
        assert uhlmann_fidelity(e0, e1) < 1e-12
        assert abs(purified_distance(e0, e1) - 1.0) < 1e-12

    def test_mixed_versus_max_entangled(self):
        phi = max_entangled_density(2)
        mixed = maximally_mixed(4)
        assert abs(uhlmann_fidelity(mixed, phi) - 0.25) < 1e-10
        assert abs(purified_distance(mixed, phi) - np.sqrt(3) / 2) < 1e-10

    def test_pure_state_reduction(self):
        rho = rand_state(4, 11)
        psi = max_entangled(2)
        direct = float(np.real(psi.amplitudes.conj() @ rho.mat @ psi.amplitudes))
        assert abs(uhlmann_fidelity(rho, psi.density()) - direct) < 1e-10

    def test_symmetry_and_multiplicativity(self):
        for seed in range(10):
            a, b = rand_state(3, 200 + seed), rand_state(3, 300 + seed)
            assert abs(uhlmann_fidelity(a, b) - uhlmann_fidelity(b, a)) < 1e-10
            c, d = rand_state(2, 400 + seed), rand_state(2, 500 + seed)
            lhs = uhlmann_fidelity(tensor_product(a, c), tensor_product(b, d))
            rhs = uhlmann_fidelity(a, b) * uhlmann_fidelity(c, d)
            assert abs(lhs - rhs) < 1e-9

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            uhlmann_fidelity(rand_state(2, 1), rand_state(3, 1))


def _random_isometry_channel(rho, gen, factor=2):
    d = rho.dim
    g = gen.standard_normal((d * factor, d)) + 1j * gen.standard_normal((d * factor, d))
    v, _ = np.linalg.qr(g)
    lifted = DensityMatrix._trusted(v @ rho.mat @ v.conj().T, split=(factor, d))
    return partial_trace(lifted, "B")


class TestMetricProperties:
    def test_metric_axioms_on_random_triples(self):
        gen = np.random.default_rng(42)
        for trial in range(120):
            dim = int(gen.integers(2, 5))
            a = random_density(dim, gen)
            b = random_density(dim, gen)
            c = random_density(dim, gen)
            pab = purified_distance(a, b)
            pba = purified_distance(b, a)
            assert pab >= 0.0
            assert abs(pab - pba) < 1e-10
            assert pab <= purified_distance(a, c) + purified_distance(c, b) + 1e-9

    def test_data_processing(self):
        gen = np.random.default_rng(7)
        for trial in range(40):
            rho = random_density(4, gen, split=(2, 2))
            sig = random_density(4, gen, split=(2, 2))
            before = purified_distance(rho, sig)
            after_pt = purified_distance(partial_trace(rho, "A"), partial_trace(sig, "A"))
            assert after_pt <= before + 1e-9
            after_iso = purified_distance(
                _random_isometry_channel(rho, gen), _random_isometry_channel(sig, gen)
            )
            # same isometry must be applied to both arguments
            g = gen.standard_normal((8, 4)) + 1j * gen.standard_normal((8, 4))
            v, _ = np.linalg.qr(g)
            ra = partial_trace(DensityMatrix._trusted(v @ rho.mat @ v.conj().T, split=(2, 4)), "B")
            rb = partial_trace(DensityMatrix._trusted(v @ sig.mat @ v.conj().T, split=(2, 4)), "B")
            assert purified_distance(ra, rb) <= before + 1e-9

    def test_tensor_invariance(self):
        gen = np.random.default_rng(13)
        for trial in range(25):
            a = random_density(3, gen)
            b = random_density(3, gen)
            t = random_density(3, gen)
            lhs = purified_distance(
                tensor_product(a, DensityMatrix._trusted(t.mat)),
                tensor_product(b, DensityMatrix._trusted(t.mat)),
            )
            assert abs(lhs - purified_distance(a, b)) < 1e-9


def dmax_bisection_oracle(rho, sigma, slack=1e-12):
    """Feasibility bisection on the defining domination inequality."""

    def feasible(lam):
        gap = 2.0**lam * sigma.mat - rho.mat
        return float(np.linalg.eigvalsh((gap + gap.conj().T) / 2)[0]) >= -slack

    hi = 1.0
    while not feasible(hi):
        hi *= 2.0
        assert hi < 2.0**40
    lo = -4.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


class TestMaxRelativeEntropy:
    def test_self_divergence_zero(self):
        rho = rand_state(4, 21)
        assert abs(max_relative_entropy(rho, rho)) < 1e-9

    def test_max_entangled_versus_mixed(self):
        for d in (2, 3):
            val = max_relative_entropy(max_entangled_density(d), maximally_mixed(d * d))
            assert abs(val - 2 * np.log2(d)) < 1e-10

    def test_support_violation_raises(self):
        e0 = DensityMatrix.from_matrix(np.diag([1.0, 0.0]).astype(complex))
        e1 = DensityMatrix.from_matrix(np.diag([0.0, 1.0]).astype(complex))
        with pytest.raises(SupportError):
            max_relative_entropy(e0, e1)

    def test_against_bisection_oracle(self):
        for seed in range(100):
            rho = rand_state(4, 1000 + seed)
            sigma = random_full_rank(4, SeededRng(2000 + seed))
            spectral = max_relative_entropy(rho, sigma)
            oracle = dmax_bisection_oracle(rho, sigma)
            assert abs(spectral - oracle) < 1e-6

    def test_finite_on_full_rank_mixtures(self):
        rho = rand_state(4, 31, split=(2, 2))
        zeta = random_full_rank(4, SeededRng(32), split=(2, 2))
        phi = max_entangled_density(2)
        for p in np.linspace(0.0, 0.999999, 30):
            tau = DensityMatrix._trusted(p * phi.mat + (1 - p) * zeta.mat)
            val = max_relative_entropy(rho, tau, SupportTolerance(1e-13))
            assert np.isfinite(val) and val >= 0.0
