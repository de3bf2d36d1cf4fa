import math

import numpy as np
import pytest

from parityforge import (
    MixedState,
    OperatorMatrix,
    PureState,
    SqueezeParameter,
    TailOverflow,
    TruncationConfig,
    coherent_state,
    combine_displacements,
    displaced_parity,
    displacement_matrix,
    displacement_matrix_expm,
    dispersive_projectors,
    fock_state,
    kind_defect,
    ladder_matrices,
    parity_projectors,
    quadrature_matrix,
    squeeze_matrix,
    squeezed_vacuum,
    tail_mass,
    vacuum,
)

TR30 = TruncationConfig(30)
TR80 = TruncationConfig(80)
TR200 = TruncationConfig(200)


def safe_block(alpha: complex, dim: int) -> int:
    """Levels far enough below the cutoff that a displacement by alpha
    cannot reach it: the classical edge (sqrt(n) + |alpha|)^2 plus margin
    stays below the cutoff."""
    a = abs(alpha)
    return max(2, int(dim - (a * a + 1.8 * a * math.sqrt(dim) + 10.0)))


class TestTruncationConfig:
    def test_dim(self):
        assert TruncationConfig(5).dim == 6

    def test_protected_dim_excludes_top_levels(self):
        tr = TruncationConfig(200)
        assert tr.protected_dim == 201 - 21

    @pytest.mark.parametrize("n_cut, tol", [(1, 1e-6), (5, 0.0), (5, 1.0), (5, -0.1)])
    def test_rejects_bad_parameters(self, n_cut, tol):
        with pytest.raises(ValueError):
            TruncationConfig(n_cut, tol)


class TestStates:
    def test_normalized_flag_checked(self):
        with pytest.raises(ValueError):
            PureState(np.array([1.0, 1.0], dtype=complex), normalized=True)

    def test_amplitudes_immutable(self):
        psi = vacuum(TR30)
        with pytest.raises(ValueError):
            psi.amplitudes[0] = 0.0

    def test_unit(self):
        psi = PureState(np.array([3.0, 4.0], dtype=complex))
        assert abs(psi.unit().norm_squared - 1.0) < 1e-14

    def test_density_matches_outer_product(self):
        psi = coherent_state(0.7, TR30)
        rho = psi.density()
        rho.validate()
        assert abs(rho.trace - 1.0) < 1e-12

    def test_mixed_validate_rejects_nonhermitian(self):
        m = np.zeros((3, 3), dtype=complex)
        m[0, 1] = 1.0
        m[0, 0] = 1.0
        with pytest.raises(ValueError):
            MixedState(m).validate()


class TestLadder:
    def test_sqrt_n_rule(self):
        a, adag = ladder_matrices(TruncationConfig(2))
        assert a.entries[0, 1] == pytest.approx(1.0)
        assert a.entries[1, 2] == pytest.approx(math.sqrt(2.0))
        assert np.allclose(adag.entries, a.entries.conj().T)

    def test_commutator_truncation_artifact(self):
        a, adag = ladder_matrices(TR30)
        comm = a.entries @ adag.entries - adag.entries @ a.entries
        expected = np.eye(31)
        expected[-1, -1] = -30.0
        assert np.max(np.abs(comm - expected)) < 1e-12

    def test_vacuum_annihilated(self):
        a, _ = ladder_matrices(TR30)
        assert np.max(np.abs(a.entries @ vacuum(TR30).amplitudes)) == 0.0


class TestCoherent:
    def test_alpha_zero_is_vacuum(self):
        assert np.array_equal(coherent_state(0, TR30).amplitudes,
                              vacuum(TR30).amplitudes)

    def test_vacuum_overlap(self):
        psi = coherent_state(1.0, TR30)
        assert psi.amplitudes[0].real == pytest.approx(math.exp(-0.5), abs=1e-12)

    def test_poisson_mean(self):
        tr = TruncationConfig(60)
        psi = coherent_state(2.0, tr)
        mean = float(np.sum(np.arange(61) * np.abs(psi.amplitudes) ** 2))
        assert abs(mean - 4.0) < 1e-8

    def test_complex_phase(self):
        psi = coherent_state(1j, TR30)
        # c_n carries phase (arg alpha)^n
        assert psi.amplitudes[1] == pytest.approx(1j * psi.amplitudes[0].real * 1.0)

    def test_tail_overflow(self):
        with pytest.raises(TailOverflow):
            coherent_state(5.0, TruncationConfig(10))


class TestDisplacement:
    def test_zero_is_identity(self):
        assert np.array_equal(displacement_matrix(0, TR30).entries, np.eye(31))

    def test_column_zero_is_coherent(self):
        # |alpha| up to sqrt(n_cut)/4
        for alpha in (0.5, 1.5, 3.5, 2.0 + 1.5j):
            col = displacement_matrix(alpha, TR200).entries[:, 0]
            want = coherent_state(alpha, TR200).amplitudes
            assert np.max(np.abs(col - want)) < 1e-8

    def test_vacuum_matrix_element(self):
        d = displacement_matrix(1.0, TR30)
        assert d.entries[0, 0].real == pytest.approx(math.exp(-0.5), abs=1e-12)

    def test_inverse_on_protected_subspace(self):
        # containment: corruption depth scales with |alpha| sqrt(dim), so the
        # lowest-90% block is clean only for small displacements
        tr = TruncationConfig(200)
        for alpha in (0.25, 0.2j, -0.15 + 0.2j):
            d = displacement_matrix(alpha, tr).entries
            dm = displacement_matrix(-alpha, tr).entries
            k = tr.protected_dim
            defect = np.abs((d @ dm - np.eye(tr.dim))[:k, :k])
            assert np.max(defect) < 1e-8

    def test_dagger_equals_negated_argument(self):
        d = displacement_matrix(0.7 - 0.4j, TR80)
        dm = displacement_matrix(-0.7 + 0.4j, TR80)
        assert np.max(np.abs(d.entries.conj().T - dm.entries)) < 1e-14

    @pytest.mark.parametrize("alpha", [0.3, 1.0, 2.0, 1.5 + 0.7j, -2.0j, 1.7 - 2.9j])
    def test_recurrence_matches_expm_oracle(self, alpha):
        # the two constructions agree on levels a displacement cannot couple
        # to the corrupted cutoff region
        for tr in (TR80, TR200):
            d1 = displacement_matrix(alpha, tr).entries
            d2 = displacement_matrix_expm(alpha, tr).entries
            k = safe_block(alpha, tr.dim)
            assert np.max(np.abs((d1 - d2)[:k, :k])) < 1e-7

    def test_unitary_kind_defect(self):
        for alpha, tr in ((0.25, TR200), (0.3j, TR200), (0.5, TruncationConfig(400))):
            assert kind_defect(displacement_matrix(alpha, tr), tr) < 1e-8

    def test_unitary_preserves_contained_states(self):
        # ||U psi|| = 1 within 1e-7 for psi supported on the lower 80%
        rng = np.random.default_rng(7)
        tr = TR200
        k = int(0.8 * tr.dim)
        for alpha in (0.3, -0.25j, 0.2 + 0.2j):
            u = displacement_matrix(alpha, tr).entries
            for _ in range(3):
                psi = np.zeros(tr.dim, dtype=complex)
                psi[:k] = rng.standard_normal(k) + 1j * rng.standard_normal(k)
                psi /= np.linalg.norm(psi)
                assert abs(np.linalg.norm(u @ psi) - 1.0) < 1e-7


class TestCombineDisplacements:
    def test_lattice_phase_is_minus_pi(self):
        delta = 2.0 * math.sqrt(math.pi)
        phase, total = combine_displacements(delta / 2.0, 1j * delta / 2.0)
        assert phase == pytest.approx(-math.pi, abs=1e-12)
        assert total == pytest.approx(delta / 2.0 + 1j * delta / 2.0)

    def test_identity_composition(self):
        phase, total = combine_displacements(0.8 - 0.2j, 0.0)
        assert phase == 0.0
        assert total == 0.8 - 0.2j

    @pytest.mark.parametrize("a, b", [(0.8, 1.2j), (1.5, -1.5),
                                      (1.0 + 0.5j, -0.3 + 1.0j)])
    def test_matrix_product_oracle(self, a, b):
        phase, total = combine_displacements(a, b)
        lhs = displacement_matrix(a, TR80).entries @ displacement_matrix(b, TR80).entries
        rhs = np.exp(1j * phase) * displacement_matrix(total, TR80).entries
        assert np.max(np.abs((lhs - rhs)[:40, :40])) < 1e-8


class TestSqueeze:
    def test_zero_is_identity(self):
        s = squeeze_matrix(SqueezeParameter(0.0), TR30)
        assert np.max(np.abs(s.entries - np.eye(31))) < 1e-14

    @pytest.mark.parametrize("r", [0.5, 1.0, 1.5])
    def test_matrix_matches_analytic_vacuum_action(self, r):
        xi = SqueezeParameter(r)
        s = squeeze_matrix(xi, TR200)
        produced = PureState(s.entries[:, 0])
        want = squeezed_vacuum(xi, TR200)
        overlap = abs(np.vdot(produced.unit().amplitudes, want.amplitudes)) ** 2
        assert overlap >= 1.0 - 1e-8

    def test_unitarity(self):
        s = squeeze_matrix(SqueezeParameter(1.2, 0.7), TR200)
        assert kind_defect(s, TR200) < 1e-8

    def test_phase_enters_amplitudes(self):
        xi = SqueezeParameter(0.8, 1.1)
        st = squeezed_vacuum(xi, TR80)
        ratio = st.amplitudes[4] / st.amplitudes[2]
        assert np.angle(ratio) == pytest.approx(1.1 - math.pi, abs=1e-10)

    def test_tail_overflow(self):
        with pytest.raises(TailOverflow):
            squeeze_matrix(SqueezeParameter(2.5), TruncationConfig(20))


class TestSqueezedVacuum:
    def test_r_zero_is_vacuum(self):
        assert np.array_equal(squeezed_vacuum(SqueezeParameter(0.0), TR30).amplitudes,
                              vacuum(TR30).amplitudes)

    @pytest.mark.parametrize("r", [0.3, 0.9, 1.4])
    def test_amplitude_ratio(self, r):
        st = squeezed_vacuum(SqueezeParameter(r), TR200)
        ratio = (st.amplitudes[2] / st.amplitudes[0]).real
        assert ratio == pytest.approx(-math.tanh(r) / math.sqrt(2.0), abs=1e-12)

    def test_odd_amplitudes_exactly_zero(self):
        st = squeezed_vacuum(SqueezeParameter(1.3, 0.4), TR200)
        assert np.all(st.amplitudes[1::2] == 0.0)

    @pytest.mark.parametrize("r", [0.4, 1.0, 1.5])
    @pytest.mark.parametrize("theta", [0.0, 0.5, math.pi / 2])
    def test_variance_formula(self, r, theta):
        # Var(x^(theta)) = (cosh 2r - sinh 2r cos 2 theta)/4 for phase 0
        st = squeezed_vacuum(SqueezeParameter(r), TruncationConfig(400))
        x = quadrature_matrix(theta, TruncationConfig(400)).entries
        psi = st.amplitudes
        var = float(np.vdot(psi, x @ (x @ psi)).real - np.vdot(psi, x @ psi).real ** 2)
        want = 0.25 * (math.cosh(2 * r) - math.sinh(2 * r) * math.cos(2 * theta))
        assert abs(var - want) < 1e-6

    def test_min_variance_is_squeezed(self):
        st = squeezed_vacuum(SqueezeParameter(1.0), TR200)
        x = quadrature_matrix(0.0, TR200).entries
        psi = st.amplitudes
        var = float(np.vdot(psi, x @ (x @ psi)).real)
        assert var == pytest.approx(math.exp(-2.0) / 4.0, abs=1e-9)


class TestParityProjectors:
    def test_vacuum_is_even(self):
        p_plus, p_minus = parity_projectors(TR30)
        v = vacuum(TR30).amplitudes
        assert np.array_equal(p_plus.entries @ v, v)
        assert np.max(np.abs(p_minus.entries @ v)) == 0.0

    def test_projector_algebra(self):
        p_plus, p_minus = parity_projectors(TR30)
        assert np.array_equal(p_plus.entries @ p_plus.entries, p_plus.entries)
        assert np.max(np.abs(p_plus.entries @ p_minus.entries)) == 0.0
        assert np.array_equal(p_plus.entries + p_minus.entries, np.eye(31))

    def test_coherent_projects_to_cat(self):
        tr = TruncationConfig(60)
        alpha = 1.1
        p_plus, _ = parity_projectors(tr)
        got = p_plus.entries @ coherent_state(alpha, tr).amplitudes
        want = 0.5 * (coherent_state(alpha, tr).amplitudes
                      + coherent_state(-alpha, tr).amplitudes)
        assert np.max(np.abs(got - want)) < 1e-12


class TestDisplacedParity:
    def test_zero_displacement(self):
        p = displaced_parity(+1, 0.0, TR30)
        assert np.array_equal(p.entries, parity_projectors(TR30)[0].entries)

    @pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
    def test_vacuum_expectation(self, t):
        p = displaced_parity(+1, 1j * t, TR200)
        want = 0.5 * (1.0 + math.exp(-2.0 * t * t))
        assert p.entries[0, 0].real == pytest.approx(want, abs=1e-10)

    def test_plus_minus_sum_to_identity(self):
        alpha = 0.6 - 0.3j
        total = (displaced_parity(+1, alpha, TR80).entries
                 + displaced_parity(-1, alpha, TR80).entries)
        k = safe_block(alpha, 81)
        assert np.max(np.abs((total - np.eye(81))[:k, :k])) < 1e-10

    def test_hermitian_exactly(self):
        p = displaced_parity(+1, 1.3j, TR200).entries
        assert np.max(np.abs(p - p.conj().T)) < 1e-14

    def test_idempotent_on_protected_subspace(self):
        # contained displacements only; the cutoff region is corrupted
        for t, tr in ((0.2, TR200), (0.3, TruncationConfig(400))):
            assert kind_defect(displaced_parity(+1, 1j * t, tr), tr) < 1e-7

    def test_rejects_bad_sign(self):
        with pytest.raises(ValueError):
            displaced_parity(0, 0.1, TR30)


class TestDispersiveProjectors:
    def test_tau_zero(self):
        m_plus, m_minus = dispersive_projectors(0.0, TR30)
        assert np.array_equal(m_plus.entries, np.eye(31))
        assert np.max(np.abs(m_minus.entries)) == 0.0

    def test_quarter_period_pattern(self):
        m_plus, _ = dispersive_projectors(math.pi / 2.0, TR30)
        diag = np.real(np.diag(m_plus.entries))
        want = np.array([1, 0, -1, 0] * 8)[:31]
        assert np.max(np.abs(diag - want)) < 1e-12

    def test_pythagorean_identity(self):
        m_plus, m_minus = dispersive_projectors(0.83, TR80)
        total = m_plus.entries @ m_plus.entries + m_minus.entries @ m_minus.entries
        assert np.max(np.abs(total - np.eye(81))) < 1e-15


class TestQuadratures:
    def test_vacuum_moments(self):
        x = quadrature_matrix(0.0, TR30).entries
        v = vacuum(TR30).amplitudes
        assert abs(np.vdot(v, x @ v)) < 1e-15
        assert np.vdot(v, x @ (x @ v)).real == pytest.approx(0.25, abs=1e-15)

    def test_momentum_quadrature(self):
        a, adag = ladder_matrices(TR30)
        p_direct = -0.5j * (a.entries - adag.entries)
        p = quadrature_matrix(math.pi / 2.0, TR30).entries
        assert np.max(np.abs(p - p_direct)) < 1e-15

    def test_canonical_commutator_artifact(self):
        x = quadrature_matrix(0.0, TR30).entries
        p = quadrature_matrix(math.pi / 2.0, TR30).entries
        comm = x @ p - p @ x
        want = 0.5j * np.eye(31)
        want[-1, -1] = 0.5j * (1 - 31)
        assert np.max(np.abs(comm - want)) < 1e-13

    def test_hermitian_kind(self):
        q = quadrature_matrix(0.77, TR80)
        assert q.kind == "hermitian"
        assert kind_defect(q, TR80) == 0.0


class TestTailMass:
    def test_vacuum_has_no_tail(self):
        assert tail_mass(vacuum(TR30), TR30) == 0.0

    def test_top_level_state_is_all_tail(self):
        assert tail_mass(fock_state(30, TR30), TR30) == 1.0

    def test_accepts_mixed(self):
        rho = coherent_state(1.0, TR80).density()
        assert tail_mass(rho, TR80) < 1e-10


class TestOperatorMatrix:
    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            OperatorMatrix(np.eye(3), kind="weird")

    def test_dagger(self):
        a, adag = ladder_matrices(TR30)
        assert np.array_equal(a.dagger().entries, adag.entries)


class TestSqueezeParameter:
    def test_rejects_negative_r(self):
        with pytest.raises(ValueError):
            SqueezeParameter(-0.5)

    def test_phase_reduced(self):
        assert SqueezeParameter(1.0, 2.0 * math.pi + 0.3).phase == pytest.approx(0.3)
