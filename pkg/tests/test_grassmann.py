"""Plane model: construction, membership tests, chart, dimension count."""

import numpy as np
import pytest

from crtori.exact import canonical_alternating_matrix, int_matrix
from crtori.grassmann import (
    AmbientForm,
    DegenerateSpanError,
    IsotropicPlane,
    NotOnVarietyError,
    RankDeficientCompletionError,
    chart_parameter_count,
    check_isotropy,
    check_positivity,
    check_transversality,
    complex_structure,
    isotropy_member,
    period_from_plane,
    plane_from_period,
    sample_chart,
    subspace_distance,
    tangent_dimension,
)
from crtori.polarization import Polarization
from crtori.torus import (
    AdaptedPeriodMatrix,
    EquivalenceWitness,
    TorusMorphism,
    TorusShape,
    verify_cr_witness,
)

ADAPTED_11 = AdaptedPeriodMatrix([[1, 1j, 0]], [[0, 0, 1]])
SHAPES = [(1, 0), (1, 1), (2, 1), (2, 2), (3, 1)]


def brute_force_pairings(plane, form):
    """Oracle: evaluate the bilinear form entry by entry over all row pairs."""
    B = plane.basis
    E = form.matrix()
    n, m = B.shape
    worst = 0.0
    for i in range(n):
        for j in range(n):
            total = sum(B[i, a] * E[a, b] * B[j, b] for a in range(m) for b in range(m))
            worst = max(worst, abs(total))
    return worst


class TestComplexStructure:
    def test_standard_rotation(self):
        data = complex_structure(ADAPTED_11)
        assert np.allclose(data.apply([1.0, 0.0, 0.0]), [0.0, 1.0, 0.0])
        assert np.allclose(data.apply([0.0, 1.0, 0.0]), [-1.0, 0.0, 0.0])

    def test_column_bookkeeping(self):
        omega = AdaptedPeriodMatrix([[1j, 1, 0]], [[0, 0, 1]])
        data = complex_structure(omega)
        # first generator realizes to (0, 1, 0); J sends it to the second, (1, 0, 0)
        assert np.allclose(data.apply([0.0, 1.0, 0.0]), [1.0, 0.0, 0.0])

    def test_square_is_minus_identity_on_span(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            plane = sample_chart(TorusShape(2, 1), seed=rng.integers(1 << 30))
            omega = period_from_plane(plane)
            data = complex_structure(omega)
            x = data.V_basis @ rng.standard_normal(4)
            assert np.linalg.norm(data.apply(data.apply(x)) + x) < 1e-12 * max(1, np.linalg.norm(x))

    def test_off_span_vector_rejected(self):
        data = complex_structure(ADAPTED_11)
        with pytest.raises(DegenerateSpanError):
            data.coordinates([0.0, 0.0, 1.0])

    def test_metric_frame_uses_lattice_values(self):
        data = complex_structure(ADAPTED_11)
        pol = Polarization([[0, 1, 0], [-1, 0, 0], [0, 0, 0]])
        assert np.allclose(data.metric_frame(pol), np.eye(2))


class TestPlaneFromPeriod:
    def test_hand_construction(self):
        plane = plane_from_period(ADAPTED_11)
        assert np.allclose(plane.basis, [[1, -1j, 0]])

    def test_hand_construction_swapped(self):
        omega = AdaptedPeriodMatrix([[1j, 1, 0]], [[0, 0, 1]])
        plane = plane_from_period(omega)
        assert np.allclose(plane.basis, [[-1j, 1, 0]])

    def test_block_diagonal_pair_of_elliptic_curves(self):
        omega = AdaptedPeriodMatrix([[1, 0, 1j, 0], [0, 1, 0, 2j]])
        plane = plane_from_period(omega)
        assert np.allclose(plane.basis, [[1, 0, -1j, 0], [0, 1, 0, -2j]])


class TestTransversality:
    def test_generic_line(self):
        assert check_transversality(IsotropicPlane([[1, -1j, 0]]))

    def test_real_plane(self):
        assert not check_transversality(IsotropicPlane([[1, 0, 0]]))

    def test_near_real_perturbation(self):
        assert not check_transversality(IsotropicPlane([[1, -1e-12j, 0]]))
        assert check_transversality(IsotropicPlane([[1, -1e-12j, 0]]), eps_rank=1e-15)


class TestIsotropy:
    def test_single_row_plane_is_exactly_isotropic(self):
        form = AmbientForm((1,), 1)
        plane = IsotropicPlane([[0.1 + 0.3j, 0.7 - 0.2j, 1.9]])
        assert check_isotropy(plane, form) == 0.0

    def test_chart_sample_residual(self):
        for n, k in SHAPES:
            plane = sample_chart(TorusShape(n, k), divisors=[1] * (n - 1) + [2], seed=5)
            form = AmbientForm((1,) * (n - 1) + (2,), k)
            assert check_isotropy(plane, form) < 1e-12
            assert isotropy_member(plane, form)

    def test_off_symmetric_perturbation_scales_linearly(self):
        n, k = 2, 1
        rng = np.random.default_rng(3)
        divisors = (1, 2)
        form = AmbientForm(divisors, k)
        plane = sample_chart(TorusShape(n, k), divisors=divisors, seed=9)
        B = np.array(plane.basis)
        B[0, n + 1] += 1e-3  # breaks the symmetry constraint on the middle block
        perturbed = IsotropicPlane(B)
        residual = check_isotropy(perturbed, form)
        assert 1e-4 < residual < 1e-2
        assert np.isclose(residual, brute_force_pairings(perturbed, form), atol=1e-12)


class TestPositivity:
    def test_standard_pair(self):
        pol = Polarization(canonical_alternating_matrix([1], 1))
        assert check_positivity(ADAPTED_11, pol)
        assert not check_positivity(ADAPTED_11, Polarization(-pol.matrix))

    def test_divisor_weighted_eigenvalues(self):
        omega = period_from_plane(sample_chart(TorusShape(2, 1), divisors=(1, 2), seed=1))
        pol = Polarization(canonical_alternating_matrix([1, 2], 1))
        assert check_positivity(omega, pol)
        from crtori.polarization import standard_complex_structure

        G = pol.as_float()[:4, :4] @ standard_complex_structure(2)
        assert np.allclose(sorted(np.linalg.eigvalsh(G)), [1, 1, 2, 2])


class TestChart:
    def test_elliptic_square_lattice_point(self):
        # middle block i: the plane of the square lattice (up to basis sign)
        plane = IsotropicPlane([[1, 1j]])
        omega = period_from_plane(plane)
        assert np.allclose(omega.stacked(), [[1, -1j]])
        square = AdaptedPeriodMatrix([[1, 1j]])
        witness = EquivalenceWitness(TorusMorphism([[1]], np.zeros((1, 0)), np.zeros((0, 0))), [[1, 0], [0, -1]])
        assert verify_cr_witness(witness, omega, square).ok

    def test_parameter_count_formula(self):
        assert chart_parameter_count(2, 1) == 5
        for n in range(1, 5):
            for k in range(0, 5):
                assert 2 * chart_parameter_count(n, k) == n * (n + 1 + 2 * k)

    def test_degenerate_real_sample_rejected(self):
        assert not check_transversality(IsotropicPlane([[1, 0]]))

    def test_positive_mode_gives_positive_metric(self):
        for seed in range(5):
            plane = sample_chart(TorusShape(2, 1), divisors=(1, 2), seed=seed, positive=True)
            omega = period_from_plane(plane)
            pol = Polarization(canonical_alternating_matrix([1, 2], 1))
            assert check_positivity(omega, pol)

    def test_sampling_is_deterministic(self):
        a = sample_chart(TorusShape(2, 2), seed=77)
        b = sample_chart(TorusShape(2, 2), seed=77)
        assert np.array_equal(a.basis, b.basis)


class TestPeriodFromPlane:
    def test_inverse_of_hand_example(self):
        omega = period_from_plane(IsotropicPlane([[1, -1j, 0]]))
        assert np.allclose(omega.stacked(), [[1, 1j, 0], [0, 0, 1]])

    def test_round_trip_subspace_distance(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            n, k = SHAPES[rng.integers(len(SHAPES))]
            plane = sample_chart(TorusShape(n, k), seed=int(rng.integers(1 << 30)))
            back = plane_from_period(period_from_plane(plane))
            assert subspace_distance(plane, back) < 1e-8

    def test_round_trip_on_periods_is_entrywise_identity(self):
        rng = np.random.default_rng(22)
        for _ in range(10):
            plane = sample_chart(TorusShape(2, 1), seed=int(rng.integers(1 << 30)))
            omega = period_from_plane(plane)
            again = period_from_plane(plane_from_period(omega))
            assert np.max(np.abs(again.stacked() - omega.stacked())) < 1e-10

    def test_real_plane_rejected(self):
        with pytest.raises(RankDeficientCompletionError):
            period_from_plane(IsotropicPlane([[1, 0, 0]]))


class TestTangentDimension:
    @pytest.mark.parametrize("n,k,expected", [(1, 0, 1), (1, 1, 2), (2, 1, 5)])
    def test_formula_values(self, n, k, expected):
        plane = sample_chart(TorusShape(n, k), seed=13)
        assert tangent_dimension(plane, AmbientForm((1,) * n, k)) == expected
        assert expected == n * (n + 1 + 2 * k) // 2

    def test_not_on_variety(self):
        basis = np.hstack([np.eye(2, dtype=complex), np.array([[1j, 1.0], [0.0, 1j]]), np.zeros((2, 1))])
        plane = IsotropicPlane(basis)  # middle block not symmetric: not isotropic
        with pytest.raises(NotOnVarietyError):
            tangent_dimension(plane, AmbientForm((1, 1), 1))


class TestConstructionIdentity:
    def test_frame_vectors_cancel_exactly(self):
        # values of the canonical form on e_i - i e_{n+i}, computed in exact ints
        for n, k, divisors in [(2, 1, (1, 2)), (3, 0, (1, 1, 3))]:
            E = int_matrix(canonical_alternating_matrix(divisors, k))
            for i in range(n):
                for j in range(n):
                    re = E[i, j] - E[n + i, n + j]
                    im = -(E[i, n + j] + E[n + i, j])
                    assert re == 0 and im == 0


class TestSubspaceDistance:
    def test_zero_on_equal_planes(self):
        p = sample_chart(TorusShape(2, 1), seed=4)
        scrambled = IsotropicPlane(np.array([[2.0, 1j], [0, 1 - 1j]]) @ p.basis)
        assert subspace_distance(p, scrambled) < 1e-12

    def test_orthogonal_lines(self):
        a = IsotropicPlane([[1, 0, 0]])
        b = IsotropicPlane([[0, 1, 0]])
        assert np.isclose(subspace_distance(a, b), np.pi / 2)
