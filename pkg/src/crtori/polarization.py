"""Integral polarizations of foliated tori.

A polarization is an integral alternating form given by its value matrix on
the lattice basis of a companion period matrix. This module moves the form
into standard real coordinates, checks the defining conditions (integrality,
leaf compatibility, positivity of the induced inner product), produces the
associated Hermitian form on the leaf factor, and renormalizes the lattice
basis so the form takes its canonical divisor shape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exact import frobenius_normal_form, int_matrix, is_alternating
from .tol import EPS_EQ, EPS_POS, EPS_RANK
from .torus import PeriodMatrix, TorusMorphism, realize

__all__ = [
    "SingularRealizationError",
    "IncompatibleFormError",
    "RankMismatchError",
    "Polarization",
    "HermitianForm",
    "StandardForm",
    "PolarizationReport",
    "standard_complex_structure",
    "standard_coordinates",
    "validate_polarization",
    "hermitian_form",
    "symplectic_normalize",
    "restriction_agrees",
]


class SingularRealizationError(RuntimeError):
    """The companion period matrix realizes to a (near-)singular basis."""


class IncompatibleFormError(RuntimeError):
    """The form does not descend to a sesquilinear form on the leaf factor."""


class RankMismatchError(ValueError):
    """Rank of the alternating form disagrees with twice the leaf dimension."""


class Polarization:
    """Integral alternating value matrix on a lattice basis, kept exact."""

    def __init__(self, entries):
        E = int_matrix(entries)
        if not is_alternating(E):
            from .exact import NotAlternatingError

            raise NotAlternatingError("polarization matrix must be alternating with zero diagonal")
        E.flags.writeable = False
        self.matrix = E

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def as_float(self) -> np.ndarray:
        return self.matrix.astype(float)

    def __repr__(self):
        return f"Polarization(size={self.size})"


@dataclass(frozen=True)
class HermitianForm:
    """n x n complex matrix of the leaf Hermitian form."""

    matrix: np.ndarray

    def is_hermitian(self, eps_eq: float = EPS_EQ) -> bool:
        H = self.matrix
        scale = max(1.0, float(np.max(np.abs(H))))
        return bool(np.max(np.abs(H - H.conj().T)) < eps_eq * scale)

    def is_positive(self, eps_pos: float = EPS_POS) -> bool:
        w = np.linalg.eigvalsh((self.matrix + self.matrix.conj().T) / 2)
        return bool(w[-1] > 0 and w[0] > eps_pos * w[-1])


@dataclass(frozen=True)
class StandardForm:
    """The form in standard real coordinates of C^n x R^k."""

    matrix: np.ndarray
    leaf_dim: int

    @property
    def leaf_block(self) -> np.ndarray:
        """Leading 2n x 2n block: the restriction to the leaf directions."""
        return self.matrix[: 2 * self.leaf_dim, : 2 * self.leaf_dim]

    def rank(self, eps_rank: float = EPS_RANK) -> int:
        svals = np.linalg.svd(self.matrix, compute_uv=False)
        return int(np.sum(svals > eps_rank * max(svals[0], 1e-300)))


@dataclass(frozen=True)
class PolarizationReport:
    """Three verdicts of the polarization test; valid iff all hold."""

    integral_alternating: bool
    leaf_compatible: bool
    positive: bool
    messages: tuple[str, ...] = ()

    @property
    def valid(self) -> bool:
        return self.integral_alternating and self.leaf_compatible and self.positive

    def __bool__(self) -> bool:
        return self.valid


def standard_complex_structure(n: int) -> np.ndarray:
    """Multiplication by i on R^{2n} = C^n in (Re, Im) coordinates."""
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = -np.eye(n)
    J[n:, :n] = np.eye(n)
    return J


def standard_coordinates(
    pol: Polarization, omega: PeriodMatrix, eps_rank: float = EPS_RANK
) -> StandardForm:
    """Express the lattice-basis values in standard coordinates of C^n x R^k.

    Returns ``W`` with ``gamma_a^T W gamma_b`` equal to the stored integral
    values, where ``gamma`` are the realized generator columns.
    """
    R = realize(omega)
    svals = np.linalg.svd(R, compute_uv=False)
    if svals[-1] <= eps_rank * svals[0]:
        raise SingularRealizationError("period matrix fails the lattice condition")
    Rinv = np.linalg.inv(R)
    return StandardForm(Rinv.T @ pol.as_float() @ Rinv, omega.n)


def _metric_matrix(leaf_form: np.ndarray) -> np.ndarray:
    """Matrix of g(u, v) = omega(u, J v) for the standard leaf structure."""
    n2 = leaf_form.shape[0]
    return leaf_form @ standard_complex_structure(n2 // 2)


def _symmetric_positive(G: np.ndarray, eps_eq: float, eps_pos: float) -> tuple[bool, str]:
    scale = max(1.0, float(np.max(np.abs(G))))
    if np.max(np.abs(G - G.T)) >= eps_eq * scale:
        return False, "induced inner product is not symmetric"
    w = np.linalg.eigvalsh((G + G.T) / 2)
    if not (w[-1] > 0 and w[0] > eps_pos * w[-1]):
        return False, f"induced inner product is not positive definite (eigenvalues in [{w[0]:.3e}, {w[-1]:.3e}])"
    return True, ""


def validate_polarization(
    pol: Polarization,
    omega: PeriodMatrix,
    eps_eq: float = EPS_EQ,
    eps_pos: float = EPS_POS,
    eps_rank: float = EPS_RANK,
) -> PolarizationReport:
    """Check the three defining conditions of a polarization.

    Integrality and alternation are exact on the stored matrix; the leaf
    block in standard coordinates must be invariant under multiplication by
    i, and g(u, v) = omega(u, J v) on the leaf must be symmetric positive
    definite to relative threshold ``eps_pos``.
    """
    messages = []
    try:
        pol = pol if isinstance(pol, Polarization) else Polarization(pol)
        exact_ok = pol.size == omega.shape.lattice_rank
        if not exact_ok:
            messages.append("polarization size does not match the lattice rank")
    except (TypeError, ValueError) as exc:
        return PolarizationReport(False, False, False, (str(exc),))
    std = standard_coordinates(pol, omega, eps_rank)
    leaf = std.leaf_block
    J = standard_complex_structure(omega.n)
    scale = max(1.0, float(np.max(np.abs(leaf))))
    compatible = bool(np.max(np.abs(J.T @ leaf @ J - leaf)) < eps_eq * scale)
    if not compatible:
        messages.append("leaf block is not invariant under the complex structure")
    positive, why = _symmetric_positive(_metric_matrix(leaf), eps_eq, eps_pos)
    if why:
        messages.append(why)
    return PolarizationReport(exact_ok, compatible, positive, tuple(messages))


def hermitian_form(
    pol: Polarization,
    omega: PeriodMatrix,
    eps_eq: float = EPS_EQ,
    eps_rank: float = EPS_RANK,
) -> HermitianForm:
    """The leaf Hermitian form H = g + i.omega, as an n x n complex matrix.

    Requires the compatibility half of :func:`validate_polarization`;
    positivity of the result is the caller's check and matches the real
    2n x 2n eigenvalue test by construction.
    """
    std = standard_coordinates(pol, omega, eps_rank)
    leaf = std.leaf_block
    J = standard_complex_structure(omega.n)
    scale = max(1.0, float(np.max(np.abs(leaf))))
    if np.max(np.abs(J.T @ leaf @ J - leaf)) >= eps_eq * scale:
        raise IncompatibleFormError("leaf block is not invariant under the complex structure")
    n = omega.n
    G = _metric_matrix(leaf)
    return HermitianForm(G[:n, :n] + 1j * leaf[:n, :n])


def symplectic_normalize(
    pol: Polarization, omega: PeriodMatrix
) -> tuple[PeriodMatrix, np.ndarray, tuple[int, ...]]:
    """Re-base the lattice so the polarization takes canonical divisor form.

    Returns ``(omega_new, P, divisors)`` with ``omega_new = omega . P`` and
    ``P^T E P`` exactly the canonical alternating pattern. The form in
    standard coordinates is basis-independent, so validation verdicts are
    unchanged by this re-basing.
    """
    dec = frobenius_normal_form(pol.matrix)
    if dec.rank_half != omega.n:
        raise RankMismatchError(
            f"form has rank {2 * dec.rank_half}, expected {2 * omega.n} for leaf dimension {omega.n}"
        )
    P = dec.basis_change
    return omega.right_multiplied(P.astype(float)), P, dec.divisors


def restriction_agrees(
    morphism: TorusMorphism,
    pol: Polarization,
    omega: PeriodMatrix,
    pol_target: Polarization,
    omega_target: PeriodMatrix,
    eps_eq: float = EPS_EQ,
    eps_rank: float = EPS_RANK,
) -> bool:
    """True iff the pullback of the target form matches on the leaf directions.

    Compares the leading 2n x 2n blocks of the source form and of
    ``M_R^T . W' . M_R`` in standard coordinates, where ``M_R`` realizes the
    linear part of the morphism.
    """
    std = standard_coordinates(pol, omega, eps_rank)
    std_target = standard_coordinates(pol_target, omega_target, eps_rank)
    M = morphism.linear_realization()
    pulled = M.T @ std_target.matrix @ M
    n2 = 2 * omega.n
    lhs = std.leaf_block
    rhs = pulled[:n2, :n2]
    scale = max(1.0, float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))))
    return bool(np.max(np.abs(lhs - rhs)) < eps_eq * scale)
