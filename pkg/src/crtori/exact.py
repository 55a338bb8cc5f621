"""Exact integer and rational matrix kernel.

Every lattice-level decision in the toolkit runs through this module: Smith
and alternating (Frobenius) normal forms, unimodularity and symplectic-group
membership. Matrices are numpy arrays of ``dtype=object`` holding Python
ints (or :class:`fractions.Fraction` for rational results), so all
arithmetic here is exact; no float ever enters this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "DimensionMismatchError",
    "NotAlternatingError",
    "FrobeniusDecomposition",
    "int_matrix",
    "int_identity",
    "rat_matrix",
    "det_exact",
    "rat_inverse",
    "int_inverse",
    "is_unimodular",
    "is_alternating",
    "standard_symplectic_form",
    "twisted_symplectic_form",
    "canonical_alternating_matrix",
    "is_integral_symplectic",
    "smith_normal_form",
    "frobenius_normal_form",
]


class DimensionMismatchError(ValueError):
    """Operands have incompatible shapes."""


class NotAlternatingError(ValueError):
    """Matrix is not exactly alternating (skew with zero diagonal)."""


def int_matrix(data) -> np.ndarray:
    """Copy ``data`` into an object array of Python ints, rejecting non-integers."""
    arr = np.array(data, dtype=object)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DimensionMismatchError(f"expected a nonempty 2-d matrix, got shape {arr.shape}")
    out = np.empty(arr.shape, dtype=object)
    for i in range(arr.shape[0]):
        for j in range(arr.shape[1]):
            v = arr[i, j]
            if isinstance(v, (bool, float, complex)) or not isinstance(v, (int, np.integer)):
                raise TypeError(f"entry ({i},{j}) = {v!r} is not an integer")
            out[i, j] = int(v)
    return out


def int_identity(n: int) -> np.ndarray:
    out = np.zeros((n, n), dtype=object)
    for i in range(n):
        out[i, i] = 1
    return out


def rat_matrix(data) -> np.ndarray:
    """Copy ``data`` into an object array of Fractions (auto-reduced, positive denominators)."""
    arr = np.array(data, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx in np.ndindex(arr.shape):
        out[idx] = Fraction(arr[idx])
    return out


def det_exact(A: np.ndarray) -> int:
    """Exact determinant of a square integer matrix (fraction-free Bareiss)."""
    A = int_matrix(A)
    n, m = A.shape
    if n != m:
        raise DimensionMismatchError("determinant needs a square matrix")
    a = [list(row) for row in A]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def rat_inverse(A: np.ndarray) -> np.ndarray:
    """Exact inverse of a square matrix with int/Fraction entries (Gauss-Jordan)."""
    A = np.array(A, dtype=object)
    n, m = A.shape
    if n != m:
        raise DimensionMismatchError("inverse needs a square matrix")
    work = [[Fraction(A[i, j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if work[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("matrix is singular over the rationals")
        work[col], work[piv] = work[piv], work[col]
        p = work[col][col]
        work[col] = [x / p for x in work[col]]
        for r in range(n):
            if r != col and work[r][col] != 0:
                f = work[r][col]
                work[r] = [x - f * y for x, y in zip(work[r], work[col])]
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = work[i][n + j]
    return out


def int_inverse(P: np.ndarray) -> np.ndarray:
    """Inverse of a unimodular integer matrix, returned over the integers."""
    if not is_unimodular(P):
        raise ValueError("matrix is not unimodular; inverse is not integral")
    inv = rat_inverse(int_matrix(P))
    out = np.empty(inv.shape, dtype=object)
    for idx in np.ndindex(inv.shape):
        q = inv[idx]
        assert q.denominator == 1
        out[idx] = int(q)
    return out


def is_unimodular(P) -> bool:
    """True iff ``P`` is square integral with determinant exactly +-1."""
    P = int_matrix(P)
    if P.shape[0] != P.shape[1]:
        return False
    return det_exact(P) in (1, -1)


def is_alternating(E) -> bool:
    """True iff ``E`` is square with ``E^T = -E`` and zero diagonal, exactly."""
    E = np.array(E, dtype=object)
    if E.ndim != 2 or E.shape[0] != E.shape[1]:
        return False
    n = E.shape[0]
    for i in range(n):
        if E[i, i] != 0:
            return False
        for j in range(i + 1, n):
            if E[i, j] != -E[j, i]:
                return False
    return True


def standard_symplectic_form(n: int) -> np.ndarray:
    """The 2n x 2n block matrix [[0, I], [-I, 0]]."""
    return twisted_symplectic_form([1] * n)


def twisted_symplectic_form(divisors) -> np.ndarray:
    """The 2n x 2n block matrix [[0, D], [-D, 0]] with D = diag(divisors)."""
    n = len(divisors)
    out = np.zeros((2 * n, 2 * n), dtype=object)
    for i, d in enumerate(divisors):
        out[i, n + i] = int(d)
        out[n + i, i] = -int(d)
    return out


def canonical_alternating_matrix(divisors, kernel_dim: int) -> np.ndarray:
    """Canonical alternating pattern [[0, D, 0], [-D, 0, 0], [0, 0, 0]]."""
    n = len(divisors)
    m = 2 * n + kernel_dim
    out = np.zeros((m, m), dtype=object)
    out[: 2 * n, : 2 * n] = twisted_symplectic_form(divisors)
    return out


def is_integral_symplectic(alpha, form=None) -> bool:
    """True iff ``alpha^T . form . alpha == form`` exactly over the integers.

    ``form`` defaults to the standard symplectic matrix [[0, I], [-I, 0]]; a
    divisor-twisted form may be passed instead when the canonical pattern has
    nontrivial divisors.
    """
    alpha = int_matrix(alpha)
    r, c = alpha.shape
    if r != c or r % 2 != 0:
        raise DimensionMismatchError(f"symplectic test needs a square even-size matrix, got {alpha.shape}")
    if form is None:
        form = standard_symplectic_form(r // 2)
    else:
        form = int_matrix(form)
        if form.shape != alpha.shape:
            raise DimensionMismatchError(f"form shape {form.shape} does not match matrix shape {alpha.shape}")
    return bool(np.array_equal(alpha.T @ form @ alpha, form))


def smith_normal_form(A) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Smith normal form over the integers.

    Returns ``(U, S, V)`` with ``U @ A @ V == S`` exactly, ``U`` and ``V``
    unimodular and ``S`` diagonal with each nonzero diagonal entry positive
    and dividing the next. Pivots descend by strict gcd reduction, so the
    loop terminates for any integral input.
    """
    S = int_matrix(A)
    m, n = S.shape
    U = int_identity(m)
    V = int_identity(n)
    t = 0
    while t < min(m, n):
        # smallest nonzero |entry| in the trailing block, lowest (i, j) on ties
        pivot = None
        best = None
        for i in range(t, m):
            for j in range(t, n):
                v = S[i, j]
                if v != 0 and (best is None or abs(v) < best):
                    best = abs(v)
                    pivot = (i, j)
        if pivot is None:
            break
        i, j = pivot
        if i != t:
            S[[t, i], :] = S[[i, t], :]
            U[[t, i], :] = U[[i, t], :]
        if j != t:
            S[:, [t, j]] = S[:, [j, t]]
            V[:, [t, j]] = V[:, [j, t]]
        if S[t, t] < 0:
            S[t, :] = -S[t, :]
            U[t, :] = -U[t, :]
        d = S[t, t]
        dirty = False
        for i in range(t + 1, m):
            q = S[i, t] // d
            if q:
                S[i, :] -= q * S[t, :]
                U[i, :] -= q * U[t, :]
            if S[i, t] != 0:
                dirty = True
        for j in range(t + 1, n):
            q = S[t, j] // d
            if q:
                S[:, j] -= q * S[:, t]
                V[:, j] -= q * V[:, t]
            if S[t, j] != 0:
                dirty = True
        if dirty:
            continue
        # pivot must divide the remaining block for the divisor chain
        offender = next(
            ((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if S[i, j] % d != 0),
            None,
        )
        if offender is not None:
            S[t, :] += S[offender[0], :]
            U[t, :] += U[offender[0], :]
            continue
        t += 1
    return U, S, V


@dataclass(frozen=True)
class FrobeniusDecomposition:
    """Unimodular congruence taking an integral alternating form to canonical shape.

    ``basis_change`` is the unimodular ``P`` with ``P^T @ E @ P`` equal to
    [[0, D, 0], [-D, 0, 0], [0, 0, 0]] where ``D = diag(divisors)``; half the
    rank of ``E`` is ``rank_half`` and ``kernel_dim`` counts the trailing
    zero directions.
    """

    basis_change: np.ndarray
    divisors: tuple[int, ...]
    rank_half: int
    kernel_dim: int

    def canonical_form(self) -> np.ndarray:
        return canonical_alternating_matrix(self.divisors, self.kernel_dim)

    def verify(self, E) -> bool:
        """Recompute ``P^T E P`` and compare with the canonical pattern, exactly."""
        E = int_matrix(E)
        P = self.basis_change
        if not is_unimodular(P):
            return False
        if any(d < 1 for d in self.divisors):
            return False
        if any(b % a != 0 for a, b in zip(self.divisors, self.divisors[1:])):
            return False
        return bool(np.array_equal(P.T @ E @ P, self.canonical_form()))


def _canonical_divisors(E: np.ndarray) -> tuple[int, ...] | None:
    """Divisor chain if ``E`` is already exactly in canonical pattern, else None."""
    m = E.shape[0]
    nonzero_rows = [i for i in range(m) if any(E[i, j] != 0 for j in range(m))]
    if len(nonzero_rows) % 2 != 0:
        return None
    n = len(nonzero_rows) // 2
    if nonzero_rows != list(range(2 * n)):
        return None
    divisors = [E[i, n + i] for i in range(n)]
    if any(d < 1 for d in divisors):
        return None
    if any(b % a != 0 for a, b in zip(divisors, divisors[1:])):
        return None
    if not np.array_equal(E, canonical_alternating_matrix(divisors, m - 2 * n)):
        return None
    return tuple(int(d) for d in divisors)


def frobenius_normal_form(E) -> FrobeniusDecomposition:
    """Canonical (Frobenius) form of an integral alternating matrix by congruence.

    Reduction is by congruent row+column operations with the smallest-nonzero
    pivot, lowest (row, col) on ties: the current pivot pair is moved to the
    leading free slots, all other entries in its two lines are reduced modulo
    the pivot, and a non-divisible entry in the trailing block is folded into
    the pivot lines so the divisor chain d_i | d_{i+1} comes out exact. Each
    restart strictly decreases the smallest nonzero entry, which forces
    termination. Divisors are normalized positive; an input already in
    canonical pattern is returned untouched with ``P = I``.
    """
    E = int_matrix(E)
    if not is_alternating(E):
        raise NotAlternatingError("input must satisfy E^T = -E with zero diagonal, exactly")
    m = E.shape[0]

    ready = _canonical_divisors(E)
    if ready is not None:
        return FrobeniusDecomposition(int_identity(m), ready, len(ready), m - 2 * len(ready))

    F = E.copy()
    P = int_identity(m)

    def swap(i, j):
        F[:, [i, j]] = F[:, [j, i]]
        F[[i, j], :] = F[[j, i], :]
        P[:, [i, j]] = P[:, [j, i]]

    def negate(i):
        F[:, i] = -F[:, i]
        F[i, :] = -F[i, :]
        P[:, i] = -P[:, i]

    def addmul(dst, src, c):
        # congruent shear: basis vector dst += c * basis vector src
        F[:, dst] += c * F[:, src]
        F[dst, :] += c * F[src, :]
        P[:, dst] += c * P[:, src]

    pairs = 0
    while True:
        a = 2 * pairs
        pivot = None
        best = None
        for i in range(a, m):
            for j in range(i + 1, m):
                v = F[i, j]
                if v != 0 and (best is None or abs(v) < best):
                    best = abs(v)
                    pivot = (i, j)
        if pivot is None:
            break
        i, j = pivot
        if i != a:
            swap(a, i)
            if j == a:
                j = i
        if j != a + 1:
            swap(a + 1, j)
        if F[a, a + 1] < 0:
            negate(a + 1)
        d = F[a, a + 1]
        clean = True
        for r in range(a + 2, m):
            q = F[a + 1, r] // d
            if q:
                addmul(r, a, q)  # F[a+1, r] -> F[a+1, r] mod d, since F[a+1, a] = -d
            q = F[a, r] // d
            if q:
                addmul(r, a + 1, -q)  # F[a, r] -> F[a, r] mod d
            if F[a, r] != 0 or F[a + 1, r] != 0:
                clean = False
        if not clean:
            continue
        offender = next(
            ((i, j) for i in range(a + 2, m) for j in range(i + 1, m) if F[i, j] % d != 0),
            None,
        )
        if offender is not None:
            addmul(a, offender[0], 1)
            continue
        pairs += 1

    divisors = tuple(int(F[2 * p, 2 * p + 1]) for p in range(pairs))
    # reorder interleaved pairs (a1, b1, a2, b2, ...) to (a1..an, b1..bn, kernel)
    perm = np.zeros((m, m), dtype=object)
    for p in range(pairs):
        perm[2 * p, p] = 1
        perm[2 * p + 1, pairs + p] = 1
    for r in range(2 * pairs, m):
        perm[r, r] = 1
    P = P @ perm
    out = FrobeniusDecomposition(P, divisors, pairs, m - 2 * pairs)
    assert out.verify(E), "internal error: congruence postcondition failed"
    return out
