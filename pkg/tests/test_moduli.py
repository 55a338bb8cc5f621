"""Group membership, plane action, orbit search, eigenvalue transport."""

import itertools

import numpy as np
import pytest

from crtori.exact import canonical_alternating_matrix, int_identity, int_matrix
from crtori.grassmann import IsotropicPlane, period_from_plane, sample_chart, subspace_distance
from crtori.moduli import (
    BudgetExceededError,
    LatticeSymmetry,
    NotPositiveError,
    NotSymplecticError,
    act,
    is_lattice_symmetry,
    is_polarized_linear_part,
    orbit_distance_sample,
    polarized_linear_part,
    positivity_transport_check,
    verify_polarized_witness,
)
from crtori.polarization import Polarization
from crtori.torus import AdaptedPeriodMatrix, TorusMorphism, TorusShape

# square-lattice elliptic point, with and without a transverse direction
ELLIPTIC_PLANE = IsotropicPlane([[1, -1j]])
ELLIPTIC_PLANE_K1 = IsotropicPlane([[1, -1j, 0]])
POL_K1 = Polarization(canonical_alternating_matrix([1], 1))
POL_K0 = Polarization(canonical_alternating_matrix([1], 0))


def random_sl2(rng, steps=4, bound=2):
    out = int_identity(2)
    for _ in range(steps):
        c = int(rng.integers(-bound, bound + 1))
        shear = int_matrix([[1, c], [0, 1]] if rng.integers(2) else [[1, 0], [c, 1]])
        out = out @ shear
    return out


def mobius_stabilizer_of_i(bound):
    """Exact oracle: integral det-1 maps with (a i + b)/(c i + d) = i.

    Cross-multiplying, the fixed-point equation is b = -c and a = d; with
    det 1 that forces a^2 + b^2 = 1.
    """
    hits = set()
    vals = range(-bound, bound + 1)
    for a, b, c, d in itertools.product(vals, repeat=4):
        if a * d - b * c == 1 and b == -c and a == d:
            hits.add((a, b, c, d))
    return hits


class TestGroupMembership:
    def test_unitary_leaf_maps(self):
        assert is_polarized_linear_part(polarized_linear_part(np.eye(2), 1))
        theta = np.exp(1j * np.array([0.3, -1.2]))
        assert is_polarized_linear_part(polarized_linear_part(np.diag(theta), 0))
        assert not is_polarized_linear_part(polarized_linear_part(2 * np.eye(2), 1))
        with_b = TorusMorphism(np.eye(1), [[1.0]], np.eye(1))
        assert not is_polarized_linear_part(with_b)

    def test_lattice_symmetries(self):
        assert is_lattice_symmetry(int_identity(3), 1)
        P = LatticeSymmetry.from_blocks([[1, 1], [0, 1]], [[1, 0]])
        assert is_lattice_symmetry(P.matrix, 1)
        assert not is_lattice_symmetry(np.diag([2, 1, 1]), 1)
        bad_tail = np.eye(3, dtype=int)
        bad_tail[0, 2] = 1  # upper-right block must vanish
        assert not is_lattice_symmetry(bad_tail, 1)

    def test_twisted_convention(self):
        # lower shear [[I, 0], [M, I]] preserves [[0, D], [-D, 0]] iff D M is symmetric
        M = [[0, 2], [1, 0]]
        alpha = np.block([[np.eye(2, dtype=int), np.zeros((2, 2), dtype=int)], [np.array(M), np.eye(2, dtype=int)]])
        sym = LatticeSymmetry.from_blocks(alpha.tolist(), k=0)
        assert not is_lattice_symmetry(sym.matrix, 2, convention="standard")
        assert is_lattice_symmetry(sym.matrix, 2, convention="twisted", divisors=(1, 2))

    def test_inverse_stays_in_group(self):
        P = LatticeSymmetry.from_blocks([[1, 1], [0, 1]], [[3, -2]])
        Q = P.inverse()
        assert is_lattice_symmetry(Q.matrix, 1)
        assert np.array_equal(P.matrix @ Q.matrix, int_identity(3))


class TestPolarizedWitness:
    def test_identity(self):
        omega = AdaptedPeriodMatrix([[1, 1j, 0]], [[0, 0, 1]])
        phi = polarized_linear_part(np.eye(1), 1)
        assert verify_polarized_witness(phi, int_identity(3), omega, omega).ok

    def test_worked_shear_example(self):
        omega = AdaptedPeriodMatrix([[1, 1j, 0]], [[0, 0, 1]])
        P = LatticeSymmetry.from_blocks([[1, 0], [0, 1]], [[1, 0]])
        target = AdaptedPeriodMatrix([[1, 1j, 0]], [[-1, 0, 1]])
        # oracle: the second row of target . P is (0, 0, 1), giving back omega
        rhs = target.right_multiplied(np.asarray(P.matrix, dtype=float)).stacked()
        assert np.allclose(rhs, omega.stacked())
        phi = polarized_linear_part(np.eye(1), 1)
        assert verify_polarized_witness(phi, P.matrix, omega, target).ok

    def test_non_integral_beta_is_unrepresentable(self):
        with pytest.raises(TypeError):
            LatticeSymmetry.from_blocks([[1, 0], [0, 1]], [[0.5, 0]])

    def test_rejections(self):
        omega = AdaptedPeriodMatrix([[1, 1j, 0]], [[0, 0, 1]])
        phi = polarized_linear_part(2 * np.eye(1), 1)
        report = verify_polarized_witness(phi, int_identity(3), omega, omega)
        assert not report.ok
        assert any("unitary" in r for r in report.reasons)
        report = verify_polarized_witness(
            polarized_linear_part(np.eye(1), 1), np.diag([2, 1, 1]), omega, omega
        )
        assert not report.ok

    def test_composition_and_inversion_closure(self):
        rng = np.random.default_rng(15)
        plane = sample_chart(TorusShape(1, 1), seed=3, positive=True)
        omega0 = period_from_plane(plane)
        omegas = [omega0]
        pairs = []
        for _ in range(3):
            theta = float(rng.uniform(0, 2 * np.pi))
            A = np.array([[np.exp(1j * theta)]])
            P = LatticeSymmetry.from_blocks(
                random_sl2(rng), rng.integers(-2, 3, size=(1, 2)).tolist()
            )
            phi = polarized_linear_part(A, 1)
            prev = omegas[-1]
            Pinv = np.asarray(P.inverse().matrix, dtype=float)
            omegas.append(phi.apply_to_period(prev).right_multiplied(Pinv))
            pairs.append((phi, P))
        total_phi = pairs[2][0].compose(pairs[1][0]).compose(pairs[0][0])
        total_P = pairs[2][1].matrix @ pairs[1][1].matrix @ pairs[0][1].matrix
        omegas = [AdaptedPeriodMatrix(o.c_block, o.r_block) for o in omegas]
        assert verify_polarized_witness(total_phi, total_P, omegas[0], omegas[3], eps_eq=1e-7).ok
        phi0, P0 = pairs[0]
        back = verify_polarized_witness(
            phi0.inverse(), np.asarray(P0.inverse().matrix), omegas[1], omegas[0], eps_eq=1e-7
        )
        assert back.ok


class TestAction:
    def test_identity_action(self):
        sym = LatticeSymmetry(int_identity(2), 1)
        assert subspace_distance(act(sym, ELLIPTIC_PLANE), ELLIPTIC_PLANE) < 1e-12

    def test_central_element_fixes_everything(self):
        sym = LatticeSymmetry(-int_identity(2), 1)
        for seed in range(5):
            plane = sample_chart(TorusShape(1, 0), seed=seed)
            assert subspace_distance(act(sym, plane), plane) < 1e-10

    def test_elliptic_fixed_point_of_order_four(self):
        sym = LatticeSymmetry(int_matrix([[0, -1], [1, 0]]), 1)
        moved = act(sym, ELLIPTIC_PLANE)
        assert subspace_distance(moved, ELLIPTIC_PLANE) < 1e-12
        shear = LatticeSymmetry(int_matrix([[1, 1], [0, 1]]), 1)
        assert subspace_distance(act(shear, ELLIPTIC_PLANE), ELLIPTIC_PLANE) > 0.1

    def test_group_law(self):
        rng = np.random.default_rng(33)
        for _ in range(20):
            plane = sample_chart(TorusShape(1, 1), seed=int(rng.integers(1 << 30)))
            P1 = LatticeSymmetry.from_blocks(random_sl2(rng), rng.integers(-2, 3, size=(1, 2)).tolist())
            P2 = LatticeSymmetry.from_blocks(random_sl2(rng), rng.integers(-2, 3, size=(1, 2)).tolist())
            lhs = act(P2, act(P1, plane))
            rhs = act(LatticeSymmetry(P2.matrix @ P1.matrix, 1), plane)
            assert subspace_distance(lhs, rhs) < 1e-8


class TestOrbitSample:
    def test_elliptic_stabilizer_matches_mobius_oracle(self):
        hits = orbit_distance_sample(ELLIPTIC_PLANE_K1, bound=1, radius=1e-6, beta_zero=True)
        found = {tuple(int(x) for x in h.symmetry.alpha.flat) for h in hits}
        assert found == mobius_stabilizer_of_i(1)
        assert len(hits) == 4
        assert all(h.distance < 1e-6 for h in hits)

    def test_radius_nesting(self):
        wide = orbit_distance_sample(ELLIPTIC_PLANE_K1, bound=1, radius=1e-3, beta_zero=True)
        narrow = orbit_distance_sample(ELLIPTIC_PLANE_K1, bound=1, radius=1e-9, beta_zero=True)
        wide_set = {tuple(int(x) for x in h.symmetry.matrix.flat) for h in wide}
        narrow_set = {tuple(int(x) for x in h.symmetry.matrix.flat) for h in narrow}
        assert narrow_set <= wide_set

    def test_bound_nesting(self):
        small = orbit_distance_sample(ELLIPTIC_PLANE, bound=1, radius=1e-6)
        large = orbit_distance_sample(ELLIPTIC_PLANE, bound=2, radius=1e-6)
        small_set = {tuple(int(x) for x in h.symmetry.matrix.flat) for h in small}
        large_set = {tuple(int(x) for x in h.symmetry.matrix.flat) for h in large}
        assert small_set <= large_set
        assert len(large) == 4

    def test_generic_point_has_trivial_stabilizer(self):
        plane = sample_chart(TorusShape(1, 0), seed=101)
        hits = orbit_distance_sample(plane, bound=2, radius=1e-6)
        found = {tuple(int(x) for x in h.symmetry.matrix.flat) for h in hits}
        assert found == {(1, 0, 0, 1), (-1, 0, 0, -1)}

    def test_budget_cap(self):
        plane = sample_chart(TorusShape(2, 1), seed=0)
        with pytest.raises(BudgetExceededError):
            orbit_distance_sample(plane, bound=3, radius=1e-6)

    def test_results_sorted_by_distance(self):
        hits = orbit_distance_sample(ELLIPTIC_PLANE_K1, bound=1, radius=0.5, beta_zero=True)
        dists = [h.distance for h in hits]
        assert dists == sorted(dists)


class TestPositivityTransport:
    def test_identity_transport(self):
        report = positivity_transport_check(int_identity(2), ELLIPTIC_PLANE_K1, POL_K1)
        assert report.ok
        assert np.allclose(report.eigenvalues, report.eigenvalues_transported)
        assert report.transport_norm <= report.transport_norm_bound * (1 + 1e-9)

    def test_elliptic_fixed_point_keeps_spectrum(self):
        alpha = [[0, -1], [1, 0]]
        report = positivity_transport_check(alpha, ELLIPTIC_PLANE_K1, POL_K1)
        assert report.ok
        assert report.congruence_residual < 1e-10
        assert np.allclose(
            sorted(report.eigenvalues), sorted(report.eigenvalues_transported), rtol=1e-6
        )

    def test_shear_moves_spectrum_but_congruence_holds(self):
        alpha = [[1, 1], [0, 1]]
        report = positivity_transport_check(alpha, ELLIPTIC_PLANE, POL_K0)
        assert report.ok
        assert report.congruence_residual < 1e-8
        assert not np.allclose(
            sorted(report.eigenvalues), sorted(report.eigenvalues_transported), rtol=1e-3
        )

    def test_random_pairs_all_pass(self):
        rng = np.random.default_rng(55)
        pol = Polarization(canonical_alternating_matrix([1], 1))
        for _ in range(15):
            plane = sample_chart(TorusShape(1, 1), seed=int(rng.integers(1 << 30)), positive=True)
            alpha = random_sl2(rng)
            report = positivity_transport_check(alpha, plane, pol)
            assert report.ok
            assert report.derived_convention_matches

    def test_not_symplectic_rejected(self):
        with pytest.raises(NotSymplecticError):
            positivity_transport_check([[2, 0], [0, 1]], ELLIPTIC_PLANE, POL_K0)

    def test_negative_point_rejected(self):
        negative = IsotropicPlane([[1, 1j]])  # conjugate chart point: metric negative
        with pytest.raises(NotPositiveError):
            positivity_transport_check(int_identity(2), negative, POL_K0)

    def test_non_canonical_block_rejected(self):
        pol = Polarization([[0, -1, 0], [1, 0, 0], [0, 0, 0]])  # negative pairing value
        with pytest.raises(ValueError):
            positivity_transport_check(int_identity(2), ELLIPTIC_PLANE_K1, pol)
