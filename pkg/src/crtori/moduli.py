"""Lattice symmetry action on the plane model and discreteness experiments.

The polarized equivalence groups are block matrices: unitary leaf maps
[[A, 0], [0, I]] on the analytic side and integral [[alpha, 0], [beta, I]]
with symplectic alpha on the lattice side. The lattice group acts on planes
through period matrices; this module verifies polarized witnesses, applies
the action, enumerates bounded symmetries that move a point less than a
given radius (finite by construction), and reproduces the eigenvalue
transport estimate that makes the action properly discontinuous.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .exact import (
    det_exact,
    int_inverse,
    int_matrix,
    is_integral_symplectic,
    standard_symplectic_form,
    twisted_symplectic_form,
)
from .grassmann import IsotropicPlane, induced_pairing, subspace_distance
from .polarization import Polarization, standard_complex_structure
from .tol import EPS_EQ, EPS_POS, EPS_RANK
from .torus import PeriodMatrix, TorusMorphism, WitnessReport

__all__ = [
    "NotSymplecticError",
    "NotPositiveError",
    "BudgetExceededError",
    "LatticeSymmetry",
    "OrbitHit",
    "TransportReport",
    "polarized_linear_part",
    "is_polarized_linear_part",
    "is_lattice_symmetry",
    "verify_polarized_witness",
    "act",
    "orbit_distance_sample",
    "positivity_transport_check",
]

CANDIDATE_CAP = 10_000_000  # hard ceiling on enumerated (alpha, beta) tuples


class NotSymplecticError(ValueError):
    """Matrix does not preserve the reference alternating block."""


class NotPositiveError(ValueError):
    """Induced inner product at the point is not positive definite."""


class BudgetExceededError(RuntimeError):
    """Enumeration would exceed the candidate cap."""


def polarized_linear_part(A, k: int) -> TorusMorphism:
    """Leaf map [[A, 0], [0, I_k]] as a torus morphism."""
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    return TorusMorphism(A, np.zeros((A.shape[0], k)), np.eye(k))


def is_polarized_linear_part(morphism: TorusMorphism, eps_eq: float = EPS_EQ) -> bool:
    """Block pattern exact (B = 0, C = I), leaf part unitary within ``eps_eq``."""
    if np.any(morphism.B != 0) or np.any(morphism.C != np.eye(morphism.C.shape[0])):
        return False
    A = morphism.A
    return bool(np.max(np.abs(A.conj().T @ A - np.eye(A.shape[0]))) < eps_eq)


def _symplectic_reference(n: int, convention: str, divisors) -> np.ndarray:
    if convention == "standard":
        return standard_symplectic_form(n)
    if convention == "twisted":
        if divisors is None:
            raise ValueError("twisted convention needs divisors")
        return twisted_symplectic_form(divisors)
    raise ValueError(f"unknown symplectic convention {convention!r}")


@dataclass(frozen=True)
class LatticeSymmetry:
    """Integral block matrix [[alpha, 0], [beta, I_k]] acting on lattice bases."""

    matrix: np.ndarray
    leaf_dim: int

    def __post_init__(self):
        object.__setattr__(self, "matrix", int_matrix(self.matrix))
        m = self.matrix.shape[0]
        if self.matrix.shape[1] != m or m < 2 * self.leaf_dim:
            raise ValueError("symmetry matrix size does not fit the leaf dimension")

    @classmethod
    def from_blocks(cls, alpha, beta=None, k: int | None = None) -> "LatticeSymmetry":
        alpha = int_matrix(alpha)
        n2 = alpha.shape[0]
        if beta is None:
            beta = np.zeros((k or 0, n2), dtype=int)
        beta = int_matrix(beta) if np.size(beta) else np.zeros((0, n2), dtype=object)
        k = beta.shape[0]
        m = n2 + k
        P = np.zeros((m, m), dtype=object)
        for idx in np.ndindex(n2, n2):
            P[idx] = alpha[idx]
        for i in range(k):
            for j in range(n2):
                P[n2 + i, j] = beta[i, j]
            P[n2 + i, n2 + i] = 1
        return cls(P, n2 // 2)

    @property
    def k(self) -> int:
        return self.matrix.shape[0] - 2 * self.leaf_dim

    @property
    def alpha(self) -> np.ndarray:
        n2 = 2 * self.leaf_dim
        return self.matrix[:n2, :n2]

    @property
    def beta(self) -> np.ndarray:
        n2 = 2 * self.leaf_dim
        return self.matrix[n2:, :n2]

    def inverse(self) -> "LatticeSymmetry":
        return LatticeSymmetry(int_inverse(self.matrix), self.leaf_dim)


def is_lattice_symmetry(
    P, n: int, convention: str = "standard", divisors=None
) -> bool:
    """Exact block pattern plus symplectic leaf block in the chosen convention."""
    P = int_matrix(P)
    m = P.shape[0]
    if P.shape[1] != m or m < 2 * n:
        return False
    n2 = 2 * n
    k = m - n2
    if np.any(P[:n2, n2:] != 0):
        return False
    tail = P[n2:, n2:]
    for i in range(k):
        for j in range(k):
            if tail[i, j] != (1 if i == j else 0):
                return False
    return is_integral_symplectic(P[:n2, :n2], _symplectic_reference(n, convention, divisors))


def _is_adapted(omega: PeriodMatrix) -> bool:
    n, k = omega.n, omega.k
    if k == 0:
        return True
    return bool(
        np.all(omega.c_block[:, 2 * n :] == 0) and np.all(omega.r_block[:, 2 * n :] == np.eye(k))
    )


def verify_polarized_witness(
    morphism: TorusMorphism,
    P,
    omega: PeriodMatrix,
    omega_target: PeriodMatrix,
    eps_eq: float = EPS_EQ,
    convention: str = "standard",
    divisors=None,
) -> WitnessReport:
    """Check M . omega = omega_target . P with M a unitary leaf map and P a lattice symmetry."""
    reasons = []
    if omega.shape != omega_target.shape or morphism.shape != omega.shape:
        return WitnessReport(False, np.inf, ("shape mismatch between witness and period matrices",))
    if not (_is_adapted(omega) and _is_adapted(omega_target)):
        reasons.append("period matrices must be adapted")
    if not is_polarized_linear_part(morphism, eps_eq):
        reasons.append("linear part is not a unitary leaf map")
    if not is_lattice_symmetry(P, omega.n, convention, divisors):
        reasons.append("P is not in the lattice symmetry group")
    lhs = morphism.apply_to_period(omega).stacked()
    rhs = omega_target.right_multiplied(np.asarray(int_matrix(P), dtype=float)).stacked()
    scale = max(1.0, float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))))
    residual = float(np.max(np.abs(lhs - rhs)))
    if residual >= eps_eq * scale:
        reasons.append(f"residual {residual:.3e} exceeds {eps_eq * scale:.3e}")
    return WitnessReport(not reasons, residual, tuple(reasons))


def act(symmetry: LatticeSymmetry, plane: IsotropicPlane, eps_rank: float = EPS_RANK) -> IsotropicPlane:
    """Apply a lattice symmetry to a plane: the linear ambient action.

    Re-basing the reference lattice by P moves a plane to its image under P
    as a linear map of the ambient space (column vectors v -> P v). This is
    the action whose stabilizers reproduce the classical picture: the
    square-lattice point is fixed by the four integral rotations, a generic
    point only by the center, and the group law holds exactly.
    """
    if plane.ambient_dim != symmetry.matrix.shape[0]:
        raise ValueError("symmetry size does not match the ambient dimension")
    moved = plane.basis @ np.asarray(symmetry.matrix, dtype=float).T
    return IsotropicPlane(moved, eps_rank)


@dataclass(frozen=True)
class OrbitHit:
    """A symmetry moving the base point less than the search radius."""

    symmetry: LatticeSymmetry
    distance: float


def orbit_distance_sample(
    plane: IsotropicPlane,
    bound: int,
    radius: float,
    beta_zero: bool = False,
    convention: str = "standard",
    divisors=None,
    candidate_cap: int = CANDIDATE_CAP,
) -> list[OrbitHit]:
    """All bounded lattice symmetries that move the plane less than ``radius``.

    Enumerates every integral alpha with entries in [-bound, bound] in
    lexicographic entry order, keeps the symplectic ones, pairs them with
    every bounded beta (or only beta = 0 when ``beta_zero``), and measures
    the subspace distance after acting. The result is finite by construction
    and sorted by ascending distance, entries breaking ties.
    """
    if bound < 1:
        raise ValueError("bound must be at least 1")
    n, m = plane.n, plane.ambient_dim
    k = m - 2 * n
    width = 2 * bound + 1
    alpha_count = width ** (4 * n * n)
    beta_count = 1 if (beta_zero or k == 0) else width ** (2 * n * k)
    if alpha_count * beta_count > candidate_cap:
        raise BudgetExceededError(
            f"{alpha_count * beta_count} candidates exceed the cap of {candidate_cap}"
        )
    reference = _symplectic_reference(n, convention, divisors)
    hits = []
    values = range(-bound, bound + 1)
    for alpha_entries in itertools.product(values, repeat=4 * n * n):
        alpha = np.array(alpha_entries, dtype=object).reshape(2 * n, 2 * n)
        if abs(det_exact(alpha)) != 1:
            continue
        if not is_integral_symplectic(alpha, reference):
            continue
        beta_iter = (
            [np.zeros((k, 2 * n), dtype=object)]
            if (beta_zero or k == 0)
            else (
                np.array(b, dtype=object).reshape(k, 2 * n)
                for b in itertools.product(values, repeat=2 * n * k)
            )
        )
        for beta in beta_iter:
            sym = LatticeSymmetry.from_blocks(alpha, beta)
            distance = subspace_distance(act(sym, plane), plane)
            if distance < radius:
                hits.append(OrbitHit(sym, distance))
    hits.sort(key=lambda h: (h.distance, tuple(int(v) for v in h.symmetry.matrix.flat)))
    return hits


def _real_symplectic_frame(W: np.ndarray, divisors) -> np.ndarray:
    """Columns of K with K^T W K = [[0, D], [-D, 0]], D = diag(divisors).

    Symplectic Gram-Schmidt over R with global largest-pairing pivoting; W
    must be (numerically) nondegenerate alternating of even size.
    """
    m = W.shape[0]
    n = m // 2
    pool = [np.eye(m)[:, j] for j in range(m)]
    us, vs = [], []
    for i in range(n):
        best = None
        for a in range(len(pool)):
            for b in range(a + 1, len(pool)):
                val = abs(pool[a] @ W @ pool[b])
                if best is None or val > best[0]:
                    best = (val, a, b)
        val, a, b = best
        if val <= 1e-12 * max(1.0, float(np.max(np.abs(W)))):
            raise NotPositiveError("frame pairing is numerically degenerate")
        u = pool[a]
        v = pool[b]
        d = float(divisors[i])
        v = v * (d / (u @ W @ v))
        us.append(u)
        vs.append(v)
        rest = [pool[c] for c in range(len(pool)) if c not in (a, b)]
        pool = [w + ((v @ W @ w) / d) * u - ((u @ W @ w) / d) * v for w in rest]
    return np.column_stack(us + vs)


@dataclass(frozen=True)
class TransportReport:
    """Outcome of the eigenvalue transport experiment at one (alpha, plane) pair."""

    ok: bool
    compatibility_residual: float
    positive_definite: bool
    eigenvalues: tuple[float, ...]
    eigenvalues_transported: tuple[float, ...]
    congruence_residual: float
    paper_congruence_residual: float
    derived_convention_matches: bool
    paper_convention_matches: bool
    transport_norm: float
    transport_norm_bound: float
    norm_bound_ok: bool

    def __bool__(self) -> bool:
        return self.ok


def positivity_transport_check(
    alpha,
    plane: IsotropicPlane,
    pol: Polarization,
    eps_eq: float = EPS_EQ,
    eps_pos: float = EPS_POS,
    congruence_tol: float = 1e-8,
) -> TransportReport:
    """Transport the induced inner product along a symplectic symmetry.

    In a symplectic frame of the plane the structure J satisfies
    J^T w J = w, the metric w J is symmetric positive definite, and so is
    its transport by J' = alpha J alpha^{-1}. With orthogonal
    eigendecompositions w J = Q^T D Q and w J' = Q'^T D' Q', the congruence
    D' = S^T D S holds for S = Q alpha^{-1} Q'^T (the variant derived from
    alpha^T w alpha = w); S = Q alpha Q' is also tried and reported. The
    spectral bound ||S|| <= sqrt(max D' / min D) is the compactness
    mechanism: bounded eigenvalue ranges confine alpha to a bounded set.
    """
    n, m = plane.n, plane.ambient_dim
    alpha = int_matrix(alpha)
    if alpha.shape != (2 * n, 2 * n):
        raise NotSymplecticError(f"expected a {2 * n} x {2 * n} matrix, got {alpha.shape}")
    if pol.size != m:
        raise ValueError(f"polarization size {pol.size} does not match ambient dimension {m}")
    divisors = [int(pol.matrix[i, n + i]) for i in range(n)]
    expected = np.zeros((2 * n, 2 * n), dtype=object)
    expected[:n, n:] = np.diag(divisors)
    expected[n:, :n] = -np.diag(divisors)
    if any(d < 1 for d in divisors) or np.any(pol.matrix[: 2 * n, : 2 * n] != expected):
        raise ValueError("leaf block must be in canonical divisor form; run symplectic_normalize first")
    if not is_integral_symplectic(alpha, expected):
        raise NotSymplecticError("alpha does not preserve the canonical leaf block")

    # generator frame of the plane, paired values of the ambient form
    W_frame = induced_pairing(plane, pol.as_float())
    K = _real_symplectic_frame(W_frame, divisors)
    Kinv = np.linalg.inv(K)
    J = Kinv @ standard_complex_structure(n) @ K
    w = expected.astype(float)

    scale_w = max(1.0, float(np.max(np.abs(w))))
    compat = float(np.max(np.abs(J.T @ w @ J - w)))
    alpha_f = alpha.astype(float)
    alpha_inv = np.asarray(int_inverse(alpha), dtype=float)
    J_moved = alpha_f @ J @ alpha_inv

    def spd_decomposition(metric):
        sym = (metric + metric.T) / 2
        vals, vecs = np.linalg.eigh(sym)
        positive = bool(vals[-1] > 0 and vals[0] > eps_pos * vals[-1])
        asym = float(np.max(np.abs(metric - metric.T)))
        return positive and asym < eps_eq * max(1.0, float(np.max(np.abs(metric)))), vals, vecs.T

    ok_d, D, Q = spd_decomposition(w @ J)
    ok_dp, Dp, Qp = spd_decomposition(w @ J_moved)
    if not (ok_d and ok_dp):
        raise NotPositiveError("induced inner product is not symmetric positive definite")

    scale_d = max(1.0, float(np.max(np.abs(Dp))))
    S_derived = Q @ alpha_inv @ Qp.T
    S_paper = Q @ alpha_f @ Qp
    resid_derived = float(np.max(np.abs(np.diag(Dp) - S_derived.T @ np.diag(D) @ S_derived)))
    resid_paper = float(np.max(np.abs(np.diag(Dp) - S_paper.T @ np.diag(D) @ S_paper)))
    s_norm = float(np.linalg.norm(S_derived, 2))
    s_bound = float(np.sqrt(Dp[-1] / D[0]))
    norm_ok = s_norm <= s_bound * (1 + 1e-9)

    derived_ok = resid_derived < congruence_tol * scale_d
    paper_ok = resid_paper < congruence_tol * scale_d
    ok = bool(compat < eps_eq * scale_w and derived_ok and norm_ok)
    return TransportReport(
        ok=ok,
        compatibility_residual=compat,
        positive_definite=True,
        eigenvalues=tuple(float(x) for x in D),
        eigenvalues_transported=tuple(float(x) for x in Dp),
        congruence_residual=resid_derived,
        paper_congruence_residual=resid_paper,
        derived_convention_matches=bool(derived_ok),
        paper_convention_matches=bool(paper_ok),
        transport_norm=s_norm,
        transport_norm_bound=s_bound,
        norm_bound_ok=bool(norm_ok),
    )
