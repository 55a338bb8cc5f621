"""Isotropic-plane model of the space of adapted period matrices.

An adapted period matrix determines a complex n-plane in C^(2n+k): realize
the first 2n generators, let J pair generator i with generator n+i, and take
the (1,0)-eigenspace { x - i J x }. The plane meets its conjugate only at 0
(transversality) and annihilates the complexified canonical form (isotropy);
conversely any such plane yields an adapted period matrix back. This module
builds both directions, the membership tests, a graph-style random chart,
and the tangent-space dimension count at a point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exact import canonical_alternating_matrix
from .polarization import Polarization, standard_complex_structure
from .tol import EPS_EQ, EPS_POS, EPS_RANK
from .torus import AdaptedPeriodMatrix, PeriodMatrix, TorusShape, realize

__all__ = [
    "DegenerateSpanError",
    "SamplingExhaustedError",
    "RankDeficientCompletionError",
    "NotOnVarietyError",
    "ComplexStructureData",
    "IsotropicPlane",
    "AmbientForm",
    "complex_structure",
    "plane_from_period",
    "check_transversality",
    "check_isotropy",
    "isotropy_member",
    "induced_pairing",
    "strict_positivity",
    "check_positivity",
    "sample_chart",
    "period_from_plane",
    "tangent_dimension",
    "subspace_distance",
    "chart_parameter_count",
]


class DegenerateSpanError(RuntimeError):
    """The leading generators do not span a 2n-dimensional real space."""


class SamplingExhaustedError(RuntimeError):
    """Rejection sampling failed to find a transversal plane within budget."""


class RankDeficientCompletionError(RuntimeError):
    """Plane data does not complete to a full-rank lattice basis."""


class NotOnVarietyError(RuntimeError):
    """Point fails the isotropy/transversality membership conditions."""


class IsotropicPlane:
    """Complex n-plane in C^(2n+k), spanned by the rows of ``basis``."""

    def __init__(self, basis, eps_rank: float = EPS_RANK):
        B = np.atleast_2d(np.asarray(basis, dtype=complex))
        if not np.all(np.isfinite(B)):
            raise ValueError("plane basis entries must be finite")
        svals = np.linalg.svd(B, compute_uv=False)
        if svals[-1] <= eps_rank * svals[0]:
            raise ValueError("plane basis rows are not linearly independent")
        B.flags.writeable = False
        self.basis = B
        self._canonical = None

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[1]

    @property
    def canonical_form(self) -> np.ndarray:
        """Reduced row echelon basis, largest-pivot column selection."""
        if self._canonical is None:
            self._canonical = _reduced_echelon(self.basis)[0]
            self._canonical.flags.writeable = False
        return self._canonical

    def orthonormal_basis(self) -> np.ndarray:
        """Columns: an orthonormal basis of the plane in C^(ambient_dim)."""
        Q, _ = np.linalg.qr(self.basis.conj().T)
        return Q

    def __repr__(self):
        return f"IsotropicPlane(n={self.n}, ambient_dim={self.ambient_dim})"


def _reduced_echelon(B: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Row-reduce with global largest-pivot selection; returns (basis, pivot columns)."""
    W = np.array(B, dtype=complex)
    rows, cols = W.shape
    pivots: list[int] = []
    for r in range(rows):
        sub = np.abs(W[r:, :])
        sub[:, pivots] = -1.0
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        if sub[i, j] <= 0:
            break
        i += r
        W[[r, i], :] = W[[i, r], :]
        W[r, :] /= W[r, j]
        for other in range(rows):
            if other != r and W[other, j] != 0:
                W[other, :] -= W[other, j] * W[r, :]
        pivots.append(int(j))
    return W, pivots


@dataclass(frozen=True)
class AmbientForm:
    """Fixed complex-bilinear alternating form in canonical divisor shape."""

    divisors: tuple[int, ...]
    kernel_dim: int

    def __post_init__(self):
        object.__setattr__(self, "divisors", tuple(int(d) for d in self.divisors))
        if any(d < 1 for d in self.divisors):
            raise ValueError("divisors must be positive")

    @classmethod
    def standard(cls, shape: TorusShape) -> "AmbientForm":
        return cls((1,) * shape.n, shape.k)

    @property
    def size(self) -> int:
        return 2 * len(self.divisors) + self.kernel_dim

    def matrix(self) -> np.ndarray:
        return canonical_alternating_matrix(self.divisors, self.kernel_dim).astype(float)


class ComplexStructureData:
    """The paired-generator complex structure on the span of the leading columns.

    In the generator frame the structure is the standard block rotation
    (generator i maps to generator n+i); ``apply`` conjugates that action to
    ambient coordinates, defined only on the span.
    """

    def __init__(self, omega: AdaptedPeriodMatrix, eps_rank: float = EPS_RANK):
        n = omega.n
        V = realize(omega)[:, : 2 * n]
        svals = np.linalg.svd(V, compute_uv=False)
        if svals[-1] <= eps_rank * svals[0]:
            raise DegenerateSpanError("leading generators are numerically dependent")
        self.V_basis = V
        self.frame_matrix = standard_complex_structure(n)
        self._pinv = np.linalg.pinv(V)
        self._span_tol = 1e3 * eps_rank

    def coordinates(self, x) -> np.ndarray:
        """Generator-frame coordinates of an ambient vector in the span."""
        x = np.asarray(x, dtype=float)
        c = self._pinv @ x
        scale = max(1.0, float(np.linalg.norm(x)))
        if np.linalg.norm(self.V_basis @ c - x) > self._span_tol * scale:
            raise DegenerateSpanError("vector does not lie in the span of the leading generators")
        return c

    def apply(self, x) -> np.ndarray:
        """The complex structure applied to an ambient vector of the span."""
        return self.V_basis @ (self.frame_matrix @ self.coordinates(x))

    def metric_frame(self, pol: Polarization) -> np.ndarray:
        """Matrix of g(u, v) = omega(u, J v) on the generator frame."""
        n2 = self.frame_matrix.shape[0]
        leading = pol.as_float()[:n2, :n2]
        return leading @ self.frame_matrix


def complex_structure(omega: AdaptedPeriodMatrix, eps_rank: float = EPS_RANK) -> ComplexStructureData:
    """Pair the leading generators into a complex structure on their span."""
    return ComplexStructureData(omega, eps_rank)


def plane_from_period(omega: AdaptedPeriodMatrix) -> IsotropicPlane:
    """Row i of the plane basis is (generator i) - i (generator n+i)."""
    n = omega.n
    G = realize(omega)
    rows = G[:, :n].T - 1j * G[:, n : 2 * n].T
    return IsotropicPlane(rows)


def period_from_plane(plane: IsotropicPlane, eps_rank: float = EPS_RANK) -> AdaptedPeriodMatrix:
    """Rebuild the adapted period matrix: Re and -Im of the basis rows, plus (0, e_j).

    The basis rows are used as given, so the composite with
    :func:`plane_from_period` reproduces them exactly.
    """
    n, m = plane.basis.shape
    k = m - 2 * n
    if k < 0:
        raise RankDeficientCompletionError("ambient dimension is smaller than twice the plane dimension")
    G = np.zeros((m, m))
    G[:, :n] = plane.basis.real.T
    G[:, n : 2 * n] = -plane.basis.imag.T
    for j in range(k):
        G[2 * n + j, 2 * n + j] = 1.0
    svals = np.linalg.svd(G, compute_uv=False)
    if svals[-1] <= eps_rank * svals[0]:
        raise RankDeficientCompletionError(
            "generator candidates plus standard transverse vectors are rank deficient"
        )
    c = (G[:n] + 1j * G[n : 2 * n]).astype(complex)
    r = G[2 * n :]
    return AdaptedPeriodMatrix(c, r)


def check_transversality(plane: IsotropicPlane, eps_rank: float = EPS_RANK) -> bool:
    """True iff the plane meets its conjugate only at the origin."""
    stacked = np.vstack([plane.basis, plane.basis.conj()])
    svals = np.linalg.svd(stacked, compute_uv=False)
    return bool(svals[-1] > eps_rank * svals[0])


def check_isotropy(plane: IsotropicPlane, form: AmbientForm) -> float:
    """Largest |value| of the complex-bilinear form on pairs of basis rows.

    The Gram matrix of an alternating form is antisymmetric identically, so
    it is antisymmetrized before taking the max; this cancels float noise on
    the structural zeros (single-row planes report an exact 0) without
    masking a genuine isotropy failure.
    """
    B = plane.basis
    if form.size != plane.ambient_dim:
        raise ValueError(f"form size {form.size} does not match ambient dimension {plane.ambient_dim}")
    gram = B @ form.matrix() @ B.T
    gram = (gram - gram.T) / 2
    return float(np.max(np.abs(gram)))


def _isotropy_scale(plane: IsotropicPlane, form: AmbientForm) -> float:
    bmax = float(np.max(np.abs(plane.basis)))
    fmax = float(np.max(np.abs(form.matrix()), initial=0.0))
    return max(1.0, bmax * bmax * fmax)


def isotropy_member(
    plane: IsotropicPlane,
    form: AmbientForm,
    eps_eq: float = EPS_EQ,
    eps_rank: float = EPS_RANK,
) -> bool:
    """Paper-literal membership: transversal and isotropic to within tolerance."""
    if not check_transversality(plane, eps_rank):
        return False
    return check_isotropy(plane, form) < eps_eq * _isotropy_scale(plane, form)


def induced_pairing(plane: IsotropicPlane, form) -> np.ndarray:
    """Values of the form on the generator frame Re(l_i), -Im(l_i) of the plane.

    ``form`` is an :class:`AmbientForm` or a raw alternating matrix.
    Antisymmetrized, like :func:`check_isotropy`; the result is the
    alternating 2n x 2n matrix the plane induces on its own real frame.
    """
    n, m = plane.n, plane.ambient_dim
    matrix = form.matrix() if isinstance(form, AmbientForm) else np.asarray(form, dtype=float)
    if matrix.shape != (m, m):
        raise ValueError(f"form shape {matrix.shape} does not match ambient dimension {m}")
    G = np.zeros((m, 2 * n))
    G[:, :n] = plane.basis.real.T
    G[:, n:] = -plane.basis.imag.T
    W = G.T @ matrix @ G
    return (W - W.T) / 2


def strict_positivity(
    plane: IsotropicPlane,
    form: AmbientForm,
    eps_eq: float = EPS_EQ,
    eps_pos: float = EPS_POS,
) -> bool:
    """Strict-mode membership flag: the induced inner product is positive definite."""
    G = induced_pairing(plane, form) @ standard_complex_structure(plane.n)
    scale = max(1.0, float(np.max(np.abs(G))))
    if np.max(np.abs(G - G.T)) >= eps_eq * scale:
        return False
    w = np.linalg.eigvalsh((G + G.T) / 2)
    return bool(w[-1] > 0 and w[0] > eps_pos * w[-1])


def check_positivity(
    omega: AdaptedPeriodMatrix,
    pol: Polarization,
    eps_eq: float = EPS_EQ,
    eps_pos: float = EPS_POS,
) -> bool:
    """Positivity of g(u, v) = omega-values composed with J, in the generator frame."""
    J = standard_complex_structure(omega.n)
    G = pol.as_float()[: 2 * omega.n, : 2 * omega.n] @ J
    scale = max(1.0, float(np.max(np.abs(G))))
    if np.max(np.abs(G - G.T)) >= eps_eq * scale:
        return False
    w = np.linalg.eigvalsh((G + G.T) / 2)
    return bool(w[-1] > 0 and w[0] > eps_pos * w[-1])


def chart_parameter_count(n: int, k: int) -> int:
    """Free complex parameters of the graph chart: a symmetric block plus a free block."""
    return n * (n + 1) // 2 + k * n


def sample_chart(
    shape: TorusShape,
    divisors=None,
    seed=None,
    positive: bool = False,
    max_tries: int = 64,
) -> IsotropicPlane:
    """Random plane from the graph chart [I | S^T | R^T] with D.S symmetric.

    Writing D.S = Sigma, the isotropy constraint is exactly the symmetry of
    Sigma, leaving n(n+1)/2 + kn free complex parameters. ``positive`` draws
    Im(Sigma) negative definite, which forces positivity of the induced
    inner product (and transversality); otherwise transversality is enforced
    by rejection resampling.
    """
    n, k = shape.n, shape.k
    divisors = (1,) * n if divisors is None else tuple(int(d) for d in divisors)
    if len(divisors) != n:
        raise ValueError(f"expected {n} divisors, got {len(divisors)}")
    form = AmbientForm(divisors, k)
    rng = np.random.default_rng(seed)
    D = np.diag([float(d) for d in divisors])
    Dinv = np.diag([1.0 / d for d in divisors])
    for _ in range(max_tries):
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        sigma = (A + A.T) / 2
        if positive:
            W = rng.standard_normal((n, n))
            sigma = sigma.real - 1j * (W @ W.T + 0.2 * np.eye(n))
        S = Dinv @ sigma
        R = rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n))
        basis = np.hstack([np.eye(n, dtype=complex), S.T, R.T])
        plane = IsotropicPlane(basis)
        if check_transversality(plane):
            assert check_isotropy(plane, form) < 1e-12 * _isotropy_scale(plane, form)
            return plane
    raise SamplingExhaustedError(f"no transversal sample found in {max_tries} draws")


def subspace_distance(first: IsotropicPlane, second: IsotropicPlane) -> float:
    """Largest principal angle between two planes of equal dimension.

    Computed through its sine, the norm of the projection residual
    (I - Q1 Q1*) Q2; the cosine route loses half the digits for small angles,
    which matters because callers threshold this near 1e-8.
    """
    if (first.n, first.ambient_dim) != (second.n, second.ambient_dim):
        raise ValueError("planes must have equal dimensions")
    Q1 = first.orthonormal_basis()
    Q2 = second.orthonormal_basis()
    resid = Q2 - Q1 @ (Q1.conj().T @ Q2)
    svals = np.linalg.svd(resid, compute_uv=False)
    return float(np.arcsin(np.clip(svals[0], 0.0, 1.0)))


def tangent_dimension(
    plane: IsotropicPlane,
    form: AmbientForm,
    rank_tol: float = 1e-7,
    eps_eq: float = EPS_EQ,
    eps_rank: float = EPS_RANK,
) -> int:
    """Complex dimension of the solution variety at a member point.

    The plane is put in its own affine Grassmannian chart (reduced echelon
    pivots frozen to the identity); the isotropy constraints are quadratic
    there, so their differential is assembled exactly and the dimension is
    n(n+k) minus its numerical rank at threshold ``rank_tol``.
    """
    if not check_transversality(plane, eps_rank):
        raise NotOnVarietyError("plane is not transversal to its conjugate")
    residual = check_isotropy(plane, form)
    if residual >= eps_eq * _isotropy_scale(plane, form):
        raise NotOnVarietyError(f"isotropy residual {residual:.3e} is too large")
    B, pivots = _reduced_echelon(plane.basis)
    n, m = B.shape
    free_cols = [j for j in range(m) if j not in pivots]
    E = form.matrix().astype(complex)
    W1 = E @ B.T  # (m, n)
    W2 = B @ E  # (n, m)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    jac = np.zeros((len(pairs), n * len(free_cols)), dtype=complex)
    for col, (p, q) in enumerate((p, q) for p in range(n) for q in free_cols):
        for row, (i, j) in enumerate(pairs):
            val = 0.0 + 0.0j
            if i == p:
                val += W1[q, j]
            if j == p:
                val += W2[i, q]
            jac[row, col] = val
    if jac.size == 0:
        rank = 0
    else:
        svals = np.linalg.svd(jac, compute_uv=False)
        rank = int(np.sum(svals > rank_tol * svals[0])) if svals[0] > 0 else 0
    return n * (m - n) - rank
