"""Period matrices of complex foliated tori and their equivalence certificates.

A torus C^n x R^k / Gamma is recorded by the (n+k) x (2n+k) period matrix
whose columns are the lattice generators: n complex rows stacked over k real
rows. This module provides the real realization of that data, the lattice
validity test, reduction to adapted form (trailing columns exactly (0, I_k)),
affine leaf-preserving morphisms, and verification of equivalence witnesses
M . Omega = Omega' . P with P unimodular.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exact import int_inverse, int_matrix, is_unimodular
from .tol import EPS_EQ, EPS_INT, EPS_RANK

__all__ = [
    "NoInvertibleRBlockError",
    "TorusShape",
    "PeriodMatrix",
    "AdaptedPeriodMatrix",
    "TorusMorphism",
    "EquivalenceWitness",
    "WitnessReport",
    "realize",
    "unrealize",
    "realize_point",
    "validate_period",
    "adapt",
    "apply_morphism",
    "verify_cr_witness",
    "maps_lattice_into",
]


class NoInvertibleRBlockError(RuntimeError):
    """No k-column subset of the real block is numerically invertible.

    Impossible for a valid lattice; raised when the input realization is
    degenerate rather than regularizing it.
    """


@dataclass(frozen=True)
class TorusShape:
    """Complex leaf dimension n >= 1 and real foliation codimension k >= 0."""

    n: int
    k: int

    def __post_init__(self):
        if self.n < 1 or self.k < 0:
            raise ValueError(f"invalid shape (n={self.n}, k={self.k})")

    @property
    def lattice_rank(self) -> int:
        return 2 * self.n + self.k


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class PeriodMatrix:
    """Lattice generators of C^n x R^k / Gamma, one generator per column."""

    def __init__(self, c_block, r_block=None, shape: TorusShape | None = None):
        c = np.atleast_2d(np.asarray(c_block, dtype=complex))
        n = c.shape[0]
        if r_block is None:
            r = np.zeros((0, c.shape[1]))
        else:
            r = np.asarray(r_block, dtype=float)
            r = r.reshape(0, c.shape[1]) if r.size == 0 else np.atleast_2d(r)
        k = r.shape[0]
        if shape is None:
            shape = TorusShape(n, k)
        if (shape.n, shape.k) != (n, k):
            raise ValueError(f"blocks have {n}+{k} rows, expected {shape.n}+{shape.k}")
        if c.shape[1] != shape.lattice_rank or r.shape[1] != shape.lattice_rank:
            raise ValueError(
                f"expected {shape.lattice_rank} columns, got {c.shape[1]} complex / {r.shape[1]} real"
            )
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(r))):
            raise ValueError("period entries must be finite")
        self.shape = shape
        self.c_block = _freeze(c)
        self.r_block = _freeze(r)

    @property
    def n(self) -> int:
        return self.shape.n

    @property
    def k(self) -> int:
        return self.shape.k

    def column(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        """Lattice generator j as a (z in C^n, t in R^k) pair."""
        return self.c_block[:, j].copy(), self.r_block[:, j].copy()

    def stacked(self) -> np.ndarray:
        """The (n+k) x (2n+k) complex matrix with real rows at the bottom."""
        return np.vstack([self.c_block, self.r_block.astype(complex)])

    def right_multiplied(self, P) -> "PeriodMatrix":
        """Change of lattice basis: columns re-mixed by the integer matrix P."""
        P = np.asarray(P, dtype=float)
        return PeriodMatrix(self.c_block @ P, self.r_block @ P)

    def __repr__(self):
        return f"PeriodMatrix(n={self.n}, k={self.k})"


class AdaptedPeriodMatrix(PeriodMatrix):
    """Period matrix whose trailing k columns are exactly (0, I_k)."""

    def __init__(self, c_block, r_block=None, shape=None):
        super().__init__(c_block, r_block, shape)
        n, k, m = self.n, self.k, self.shape.lattice_rank
        if k:
            tail_c = self.c_block[:, 2 * n :]
            tail_r = self.r_block[:, 2 * n :]
            if np.any(tail_c != 0) or np.any(tail_r != np.eye(k)):
                raise ValueError("trailing block must be exactly (0, I_k); run adapt() first")

    @property
    def Z(self) -> np.ndarray:
        """Complex n x 2n block of the non-trailing generators."""
        return self.c_block[:, : 2 * self.n]

    @property
    def T(self) -> np.ndarray:
        """Real k x 2n block of the non-trailing generators."""
        return self.r_block[:, : 2 * self.n]


def realize(omega: PeriodMatrix) -> np.ndarray:
    """Real (2n+k) x (2n+k) matrix of the generators, rows (Re z, Im z, t)."""
    return np.vstack([omega.c_block.real, omega.c_block.imag, omega.r_block])


def unrealize(R, n: int, k: int) -> PeriodMatrix:
    """Inverse of :func:`realize`: rebuild the period matrix from real rows."""
    R = np.asarray(R, dtype=float)
    if R.shape != (2 * n + k, 2 * n + k):
        raise ValueError(f"expected a square matrix of size {2 * n + k}")
    return PeriodMatrix(R[:n] + 1j * R[n : 2 * n], R[2 * n :])


def realize_point(z, t) -> np.ndarray:
    """A point of C^n x R^k as the real vector (Re z, Im z, t)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    t = np.atleast_1d(np.asarray(t, dtype=float)) if np.size(t) else np.zeros(0)
    return np.concatenate([z.real, z.imag, t])


def validate_period(omega: PeriodMatrix, eps_rank: float = EPS_RANK) -> bool:
    """Lattice condition: columns R-linearly independent up to ``eps_rank``."""
    svals = np.linalg.svd(realize(omega), compute_uv=False)
    return bool(svals[-1] > eps_rank * svals[0])


def _greedy_r_columns(r_block: np.ndarray, eps_rank: float) -> list[int]:
    """k column indices greedily maximizing |det| of the selected real block."""
    k, m = r_block.shape
    work = r_block.astype(float).copy()
    available = list(range(m))
    chosen = []
    scale = max(1.0, float(np.max(np.linalg.norm(work, axis=0), initial=0.0)))
    for _ in range(k):
        norms = np.linalg.norm(work[:, available], axis=0)
        best = int(np.argmax(norms))
        if norms[best] <= eps_rank * scale:
            raise NoInvertibleRBlockError(
                "real block has no invertible k-column subset; input lattice is degenerate"
            )
        j = available.pop(best)
        chosen.append(j)
        q = work[:, j] / np.linalg.norm(work[:, j])
        for c in available:
            work[:, c] -= (q @ work[:, c]) * q
    return sorted(chosen)


@dataclass(frozen=True)
class TorusMorphism:
    """Affine leaf-preserving map (z, t) -> (A z + B t + beta0, C t + gamma0)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    beta0: np.ndarray = None
    gamma0: np.ndarray = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=complex))
        n = A.shape[0]
        B = np.asarray(self.B, dtype=complex).reshape(n, -1)
        k = B.shape[1]
        C = np.asarray(self.C, dtype=float).reshape(k, k)
        beta0 = np.zeros(n, dtype=complex) if self.beta0 is None else np.asarray(self.beta0, dtype=complex).reshape(n)
        gamma0 = np.zeros(k) if self.gamma0 is None else np.asarray(self.gamma0, dtype=float).reshape(k)
        if A.shape != (n, n):
            raise ValueError("A must be square")
        object.__setattr__(self, "A", _freeze(A))
        object.__setattr__(self, "B", _freeze(B))
        object.__setattr__(self, "C", _freeze(C))
        object.__setattr__(self, "beta0", _freeze(beta0))
        object.__setattr__(self, "gamma0", _freeze(gamma0))

    @classmethod
    def identity(cls, shape: TorusShape) -> "TorusMorphism":
        return cls(np.eye(shape.n), np.zeros((shape.n, shape.k)), np.eye(shape.k))

    @property
    def shape(self) -> TorusShape:
        return TorusShape(self.A.shape[0], self.C.shape[0])

    def linear_realization(self) -> np.ndarray:
        """The linear part as a real (2n+k) x (2n+k) matrix in (Re, Im, t) rows."""
        n, k = self.A.shape[0], self.C.shape[0]
        out = np.zeros((2 * n + k, 2 * n + k))
        out[:n, :n] = self.A.real
        out[:n, n : 2 * n] = -self.A.imag
        out[:n, 2 * n :] = self.B.real
        out[n : 2 * n, :n] = self.A.imag
        out[n : 2 * n, n : 2 * n] = self.A.real
        out[n : 2 * n, 2 * n :] = self.B.imag
        out[2 * n :, 2 * n :] = self.C
        return out

    def apply_to_period(self, omega: PeriodMatrix) -> PeriodMatrix:
        """Push the lattice generators through the linear part."""
        return PeriodMatrix(self.A @ omega.c_block + self.B @ omega.r_block, self.C @ omega.r_block)

    def compose(self, inner: "TorusMorphism") -> "TorusMorphism":
        """self after inner, translations included."""
        A = self.A @ inner.A
        B = self.A @ inner.B + self.B @ inner.C
        C = self.C @ inner.C
        beta0 = self.A @ inner.beta0 + self.B @ inner.gamma0 + self.beta0
        gamma0 = self.C @ inner.gamma0 + self.gamma0
        return TorusMorphism(A, B, C, beta0, gamma0)

    def inverse(self) -> "TorusMorphism":
        Ainv = np.linalg.inv(self.A)
        Cinv = np.linalg.inv(self.C) if self.C.size else self.C.copy()
        B = -Ainv @ self.B @ Cinv
        beta0 = -Ainv @ self.beta0 + Ainv @ self.B @ Cinv @ self.gamma0
        gamma0 = -Cinv @ self.gamma0
        return TorusMorphism(Ainv, B, Cinv, beta0, gamma0)


def apply_morphism(phi: TorusMorphism, point) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the affine map at a point (z, t) of C^n x R^k."""
    z, t = point
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    t = np.atleast_1d(np.asarray(t, dtype=float)) if np.size(t) else np.zeros(0)
    return phi.A @ z + phi.B @ t + phi.beta0, phi.C @ t + phi.gamma0


@dataclass(frozen=True)
class EquivalenceWitness:
    """Certificate (M, P) for M . Omega = Omega' . P."""

    morphism: TorusMorphism
    basis_change: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "basis_change", int_matrix(self.basis_change))

    def compose(self, inner: "EquivalenceWitness") -> "EquivalenceWitness":
        """Chain certificates: inner takes Omega to Omega', self takes Omega' onward."""
        return EquivalenceWitness(
            self.morphism.compose(inner.morphism), self.basis_change @ inner.basis_change
        )

    def inverse(self) -> "EquivalenceWitness":
        """Certificate for the reverse direction; P inverted exactly over Z."""
        return EquivalenceWitness(self.morphism.inverse(), int_inverse(self.basis_change))


@dataclass(frozen=True)
class WitnessReport:
    """Verdict plus the reasons a witness was rejected (empty when accepted)."""

    ok: bool
    residual: float
    reasons: tuple[str, ...] = field(default_factory=tuple)

    def __bool__(self) -> bool:
        return self.ok


def adapt(
    omega: PeriodMatrix, eps_rank: float = EPS_RANK, eps_eq: float = EPS_EQ
) -> tuple[AdaptedPeriodMatrix, TorusMorphism, np.ndarray]:
    """Reduce to adapted form: returns (Omega, M, P) with M . input = Omega . P.

    P is a permutation matrix moving the k columns that greedily maximize
    |det| of the real block to the end; M is leaf-preserving with unit leaf
    part, and the trailing block of the result is written exactly as (0, I).
    An input that is already adapted (within ``eps_eq``) is returned with
    identity witness, which makes the reduction idempotent.
    """
    if not validate_period(omega, eps_rank):
        raise NoInvertibleRBlockError("input fails the lattice condition; cannot adapt")
    n, k, m = omega.n, omega.k, omega.shape.lattice_rank
    scale = max(1.0, float(np.max(np.abs(omega.c_block))), float(np.max(np.abs(omega.r_block), initial=0.0)))

    def snapped(c, r):
        c = c.copy()
        r = r.copy() if k else np.zeros((0, m))
        if k:
            c[:, 2 * n :] = 0.0
            r[:, 2 * n :] = np.eye(k)
        return AdaptedPeriodMatrix(c, r)

    tail_ok = k == 0 or (
        np.max(np.abs(omega.c_block[:, 2 * n :])) <= eps_eq * scale
        and np.max(np.abs(omega.r_block[:, 2 * n :] - np.eye(k))) <= eps_eq * scale
    )
    if tail_ok:
        return snapped(omega.c_block, omega.r_block), TorusMorphism.identity(omega.shape), int_matrix(np.eye(m, dtype=int))

    chosen = _greedy_r_columns(omega.r_block, eps_rank)
    order = [j for j in range(m) if j not in chosen] + chosen
    c_perm = omega.c_block[:, order]
    r_perm = omega.r_block[:, order]
    W = c_perm[:, 2 * n :]
    R = r_perm[:, 2 * n :]
    Rinv = np.linalg.inv(R)
    morphism = TorusMorphism(np.eye(n), -W @ Rinv, Rinv)
    moved = morphism.apply_to_period(PeriodMatrix(c_perm, r_perm))
    adapted = snapped(moved.c_block, moved.r_block)
    P = np.zeros((m, m), dtype=int)
    for j, col in enumerate(order):
        P[j, col] = 1
    return adapted, morphism, int_matrix(P)


def _invertible(M: np.ndarray, eps_rank: float) -> bool:
    if M.size == 0:
        return True
    svals = np.linalg.svd(M, compute_uv=False)
    return bool(svals[-1] > eps_rank * svals[0])


def verify_cr_witness(
    witness: EquivalenceWitness,
    source: PeriodMatrix,
    target: PeriodMatrix,
    eps_eq: float = EPS_EQ,
    eps_rank: float = EPS_RANK,
) -> WitnessReport:
    """Check M . source = target . P with M leaf-preserving and P unimodular."""
    reasons = []
    M = witness.morphism
    if (M.shape, source.shape, target.shape) != (source.shape, source.shape, target.shape) or source.shape != target.shape:
        return WitnessReport(False, np.inf, ("shape mismatch between witness and period matrices",))
    if not _invertible(M.A, eps_rank):
        reasons.append("leaf part A is not invertible")
    if not _invertible(M.C, eps_rank):
        reasons.append("transverse part C is not invertible")
    if not is_unimodular(witness.basis_change):
        reasons.append("P is not unimodular")
    lhs = M.apply_to_period(source).stacked()
    rhs = target.right_multiplied(witness.basis_change.astype(float)).stacked()
    scale = max(1.0, float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))))
    residual = float(np.max(np.abs(lhs - rhs)))
    if residual >= eps_eq * scale:
        reasons.append(f"residual {residual:.3e} exceeds {eps_eq * scale:.3e}")
    return WitnessReport(not reasons, residual, tuple(reasons))


def maps_lattice_into(
    phi: TorusMorphism,
    source: PeriodMatrix,
    target: PeriodMatrix,
    eps_int: float = EPS_INT,
    eps_rank: float = EPS_RANK,
) -> bool:
    """True iff the affine map sends the source lattice into the target one.

    Each generator image and the translation part must solve
    ``realize(target) . m = image`` with ``m`` integral to within ``eps_int``
    (absolute, after rounding).
    """
    if not validate_period(target, eps_rank):
        return False
    images = phi.linear_realization() @ realize(source)
    coords = np.linalg.solve(realize(target), images)
    if np.max(np.abs(coords - np.round(coords))) >= eps_int:
        return False
    shift = np.linalg.solve(realize(target), realize_point(phi.beta0, phi.gamma0))
    return bool(np.max(np.abs(shift - np.round(shift))) < eps_int)
