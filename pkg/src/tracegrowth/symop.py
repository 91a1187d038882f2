"""Pointwise algebra of symmetric operators.

Spectra, elementary symmetric polynomials of eigenvalues, the Newton-operator
recursion P_0 = I, P_j = S_j I - T P_{j-1}, and the trace/semidefiniteness
identities these operators satisfy, packaged as checkable quantities.

The recursion is evaluated in matrix form on purpose: the spectral route
(eigenvalues with one entry deleted, see :func:`restricted_symmetric`) is the
independent oracle the identity checks are validated against.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "SymOp",
    "Spectrum",
    "Definiteness",
    "TraceIdentityResiduals",
    "elementary_symmetric",
    "elementary_symmetric_table",
    "restricted_symmetric",
    "newton_operator",
    "trace_identities",
    "semidefinite_class",
    "numeric_rank",
    "rank_bound_witness",
    "random_symmetric",
    "vanishing_symmetric_sample",
    "identity_suite",
]

_SPECTRUM_TOL = 1e-10


def _relative(value: float, reference: float) -> float:
    """Residual |value - reference| scaled against the larger magnitude."""
    return abs(value - reference) / (1.0 + max(abs(value), abs(reference)))


@dataclass(frozen=True)
class SymOp:
    """Dense symmetric operator on an m-dimensional inner-product space.

    Construction symmetrizes, so ``entries[i, j] == entries[j, i]`` holds
    exactly.  Instances are immutable values; every operation on them is
    deterministic and re-entrant.
    """

    entries: np.ndarray

    @classmethod
    def from_matrix(cls, matrix) -> "SymOp":
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        if m.shape[0] < 1:
            raise ValueError("operator dimension must be at least 1")
        sym = (m + m.T) / 2.0
        sym.flags.writeable = False
        return cls(entries=sym)

    @classmethod
    def identity(cls, dim: int) -> "SymOp":
        return cls.from_matrix(np.eye(dim))

    @classmethod
    def from_eigensystem(cls, eigenvalues, eigenvectors) -> "SymOp":
        lam = np.asarray(eigenvalues, dtype=float)
        vecs = np.asarray(eigenvectors, dtype=float)
        return cls.from_matrix(vecs @ np.diag(lam) @ vecs.T)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def spectrum(self) -> "Spectrum":
        return Spectrum.of(self)

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def __matmul__(self, other):
        rhs = other.entries if isinstance(other, SymOp) else other
        return self.entries @ rhs


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues (ascending) and an orthonormal eigenvector basis."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def of(cls, op: SymOp) -> "Spectrum":
        lam, vecs = np.linalg.eigh(op.entries)
        scale = 1.0 + float(np.linalg.norm(op.entries))
        recon = vecs @ np.diag(lam) @ vecs.T
        if np.linalg.norm(recon - op.entries) > _SPECTRUM_TOL * scale:
            raise ArithmeticError("eigendecomposition reconstruction residual too large")
        if np.linalg.norm(vecs.T @ vecs - np.eye(op.dim)) > _SPECTRUM_TOL:
            raise ArithmeticError("eigenvector basis is not orthonormal")
        lam.flags.writeable = False
        vecs.flags.writeable = False
        return cls(eigenvalues=lam, eigenvectors=vecs)

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


class Definiteness(Enum):
    POSITIVE_SEMI = "positive_semidefinite"
    NEGATIVE_SEMI = "negative_semidefinite"
    INDEFINITE = "indefinite"


@dataclass(frozen=True)
class TraceIdentityResiduals:
    """Relative residuals of the three Newton-operator trace identities.

    r_b: tr P_j           vs  (m - j) S_j
    r_c: tr (T P_j)       vs  (j + 1) S_{j+1}
    r_d: tr (T^2 P_j)     vs  S_1 S_{j+1} - (j + 2) S_{j+2}
    """

    r_b: float
    r_c: float
    r_d: float

    def max(self) -> float:
        return max(self.r_b, self.r_c, self.r_d)


def _eigenvalues_of(spec) -> np.ndarray:
    if isinstance(spec, Spectrum):
        return spec.eigenvalues
    if isinstance(spec, SymOp):
        return spec.spectrum().eigenvalues
    return np.asarray(spec, dtype=float)


def elementary_symmetric_table(values) -> np.ndarray:
    """All elementary symmetric polynomials S_0 .. S_m of ``values``.

    Accepts a batch: for input shape (..., m) the result has shape
    (..., m + 1) with ``out[..., j] = S_j``.
    """
    vals = np.asarray(values, dtype=float)
    m = vals.shape[-1]
    table = np.zeros(vals.shape[:-1] + (m + 1,))
    table[..., 0] = 1.0
    for i in range(m):
        # RHS is evaluated before assignment, so each eigenvalue enters once.
        table[..., 1:] = table[..., 1:] + vals[..., i : i + 1] * table[..., :-1]
    return table


def elementary_symmetric(spec, j: int) -> float:
    """S_j, the j-th elementary symmetric polynomial of the eigenvalues.

    S_0 = 1 by the empty-product convention.  Raises ``ValueError`` when j is
    outside 0..m.
    """
    lam = _eigenvalues_of(spec)
    m = lam.shape[-1]
    if not 0 <= j <= m:
        raise ValueError(f"symmetric polynomial index {j} outside 0..{m}")
    return float(elementary_symmetric_table(lam)[j])


def restricted_symmetric(spec, k: int, j: int) -> float:
    """S_j of the spectrum with the k-th eigenvalue deleted (0-based k).

    This is the symmetric polynomial of the operator restricted to the
    orthogonal complement of the k-th eigenvector.
    """
    lam = _eigenvalues_of(spec)
    m = lam.shape[-1]
    if not 0 <= k < m:
        raise ValueError(f"eigenvalue index {k} outside 0..{m - 1}")
    if not 0 <= j <= m - 1:
        raise ValueError(f"symmetric polynomial index {j} outside 0..{m - 1}")
    reduced = np.delete(lam, k)
    return float(elementary_symmetric_table(reduced)[j])


def newton_operator(T: SymOp, j: int) -> SymOp:
    """The j-th Newton operator of T via P_0 = I, P_k = S_k I - T P_{k-1}."""
    m = T.dim
    if not 0 <= j <= m:
        raise ValueError(f"Newton operator index {j} outside 0..{m}")
    s = elementary_symmetric_table(T.spectrum().eigenvalues)
    p = np.eye(m)
    for k in range(1, j + 1):
        p = s[k] * np.eye(m) - T.entries @ p
        p = (p + p.T) / 2.0
    return SymOp.from_matrix(p)


def trace_identities(T: SymOp, j: int) -> TraceIdentityResiduals:
    """Relative residuals of the trace identities satisfied by P_j(T).

    Valid for 1 <= j <= m - 1; the convention S_k = 0 for k > m supplies the
    S_{j+2} term at j = m - 1.
    """
    m = T.dim
    if not 1 <= j <= m - 1:
        raise ValueError(f"trace identities need 1 <= j <= {m - 1}, got {j}")
    s = elementary_symmetric_table(T.spectrum().eigenvalues)

    def s_at(k: int) -> float:
        return float(s[k]) if k <= m else 0.0

    p = newton_operator(T, j).entries
    tp = T.entries @ p
    t2p = T.entries @ tp
    r_b = _relative(float(np.trace(p)), (m - j) * s_at(j))
    r_c = _relative(float(np.trace(tp)), (j + 1) * s_at(j + 1))
    r_d = _relative(float(np.trace(t2p)), s_at(1) * s_at(j + 1) - (j + 2) * s_at(j + 2))
    return TraceIdentityResiduals(r_b=r_b, r_c=r_c, r_d=r_d)


def semidefinite_class(T: SymOp, tol: float) -> Definiteness:
    """Classify T by eigenvalue signs with absolute slack ``tol``.

    The zero operator counts as positive semidefinite.
    """
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    lam = T.spectrum().eigenvalues
    if lam.min() >= -tol:
        return Definiteness.POSITIVE_SEMI
    if lam.max() <= tol:
        return Definiteness.NEGATIVE_SEMI
    return Definiteness.INDEFINITE


def numeric_rank(T: SymOp, tol: float = 1e-8) -> int:
    """Rank counting singular values above ``tol`` times the largest one."""
    sv = np.linalg.svd(T.entries, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > tol * sv[0]))


def rank_bound_witness(T: SymOp, j: int, tol: float) -> bool:
    """Contrapositive witness for the rank bound rk(T) <= j - 2.

    Whenever S_{j-1} and S_j both vanish (within ``tol``), the rank of T may
    not exceed j - 2.  Returns True iff the tested instance does NOT violate
    that implication.
    """
    m = T.dim
    if not 2 <= j <= m:
        raise ValueError(f"rank bound needs 2 <= j <= {m}, got {j}")
    lam = T.spectrum().eigenvalues
    s = elementary_symmetric_table(lam)
    hypotheses = abs(float(s[j - 1])) <= tol and abs(float(s[j])) <= tol
    return not (hypotheses and numeric_rank(T, tol) > j - 2)


def random_symmetric(rng: np.random.Generator, dim: int, scale: float = 1.0) -> SymOp:
    """Random symmetric operator with entries uniform in [-scale, scale]."""
    return SymOp.from_matrix(rng.uniform(-scale, scale, size=(dim, dim)))


def _random_orthogonal(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def vanishing_symmetric_sample(
    rng: np.random.Generator, dim: int, j: int, max_tries: int = 64
) -> SymOp:
    """Random symmetric operator with S_{j+1} = 0 enforced exactly.

    Samples dim - 1 eigenvalues freely and solves the linear equation
    S_{j+1} = e_{j+1}(rest) + lam * e_j(rest) = 0 for the last one; resamples
    when the cofactor e_j(rest) is too small.  A random orthogonal conjugation
    hides the eigenbasis.
    """
    if not 1 <= j <= dim - 1:
        raise ValueError(f"need 1 <= j <= {dim - 1}, got {j}")
    for _ in range(max_tries):
        rest = rng.uniform(-1.0, 1.0, size=dim - 1)
        table = elementary_symmetric_table(rest)
        cofactor = float(table[j])
        if abs(cofactor) < 1e-3:
            continue
        # e_{j+1} of the reduced spectrum is an empty sum once j + 1 > dim - 1.
        numerator = float(table[j + 1]) if j + 1 <= dim - 1 else 0.0
        last = -numerator / cofactor
        lam = np.append(rest, last)
        return SymOp.from_eigensystem(lam, _random_orthogonal(rng, dim))
    raise RuntimeError("failed to sample a constrained spectrum; cofactor kept vanishing")


def identity_suite(seed: int, count: int, dims) -> dict:
    """Randomized identity checks over ``count`` operators per suite.

    Returns the maximum observed residual for each identity family; used by
    the command-line ``verify`` report and by the acceptance tests.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    dims = list(dims)
    max_trace = 0.0
    max_eigen = 0.0
    max_commutator = 0.0
    indefinite_hits = 0
    witness_failures = 0
    for index in range(count):
        m = dims[index % len(dims)]
        T = random_symmetric(rng, m)
        spec = T.spectrum()
        j = int(rng.integers(1, m))
        res = trace_identities(T, j)
        max_trace = max(max_trace, res.max())

        p = newton_operator(T, j)
        norm_t = np.linalg.norm(T.entries)
        comm = np.linalg.norm(p.entries @ T.entries - T.entries @ p.entries)
        max_commutator = max(max_commutator, comm / (1.0 + norm_t ** (j + 1)))
        for k in range(m):
            vec = spec.eigenvectors[:, k]
            value = float(vec @ (p.entries @ vec))
            max_eigen = max(max_eigen, _relative(value, restricted_symmetric(spec, k, j)))

        conditioned = vanishing_symmetric_sample(rng, m, j)
        pj = newton_operator(conditioned, j)
        if semidefinite_class(pj, 1e-9) is Definiteness.INDEFINITE:
            indefinite_hits += 1

        if m >= 2:
            jr = int(rng.integers(2, m + 1))
            if not rank_bound_witness(T, jr, 1e-8):
                witness_failures += 1
    return {
        "count": count,
        "dims": dims,
        "max_trace_identity_residual": max_trace,
        "max_restriction_eigenvalue_residual": max_eigen,
        "max_commutator_residual": max_commutator,
        "conditioned_indefinite_count": indefinite_hits,
        "rank_witness_failures": witness_failures,
    }
