"""Linear subspaces represented by their orthogonal projectors.

The projector is the canonical representation; every combination rule here
(complement, intersection, sum, products, diagonals) consumes and produces
projectors.  A basis is kept only when one was supplied, so that independent
cross-checks can be run against it.

Intersections use the pseudoinverse identity
``P = 2 P_U (P_U + P_V)^+ P_V`` for the projector onto ``U ∩ V``; sums are
reduced to intersections of complements.  Chained pseudoinverses accumulate
roundoff, so every constructor re-symmetrizes and, if the idempotency
residual warrants it, applies one polish step ``P <- 3 P^2 - 2 P^3`` which
restores projector structure without moving the subspace at first order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import (
    Array,
    as_matrix,
    as_vector,
    load_matrix,
    pseudo_inverse,
    symmetric_eig,
)

# Residual above which the cubic polish step is applied.
_POLISH_TRIGGER = 1e-11
# Hard invariants for accepted projectors.
_PROJECTOR_TOL = 1e-9
_TRACE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace of R^n held as its orthogonal projector.

    Attributes
    ----------
    projector : (n, n) array
        Symmetric idempotent matrix projecting onto the subspace.
    dim : int
        Dimension, equal to the (rounded) trace of the projector.
    basis : (n, k) array, optional
        Spanning columns, retained only when the subspace was built from one.
    """

    projector: Array
    dim: int
    basis: Array | None = None

    @property
    def ambient_dim(self) -> int:
        return self.projector.shape[0]

    def project(self, x: Array) -> Array:
        return self.projector @ x

    def __repr__(self) -> str:  # pragma: no cover - debug aid
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dim})"


@dataclass(frozen=True, eq=False)
class AffineSubspace:
    """An affine subspace: a parallel linear subspace plus a point on it."""

    parallel: Subspace
    anchor: Array

    def __post_init__(self) -> None:
        anchor = as_vector(self.anchor, "anchor")
        if anchor.shape[0] != self.parallel.ambient_dim:
            raise ValueError("anchor length does not match ambient dimension")
        object.__setattr__(self, "anchor", anchor)

    @property
    def ambient_dim(self) -> int:
        return self.parallel.ambient_dim

    def project(self, x: Array) -> Array:
        """Orthogonal projection onto the affine subspace."""
        return self.anchor + self.parallel.projector @ (np.asarray(x, dtype=float) - self.anchor)


def from_projector(p, basis: Array | None = None) -> Subspace:
    """Accept a matrix as an orthogonal projector, repairing mild roundoff.

    The matrix is symmetrized, polished once if its idempotency residual
    exceeds 1e-11, and then validated: idempotency and symmetry residuals
    must be at most 1e-9 (Frobenius) and the trace must sit within 1e-6 of
    an integer, which becomes the dimension.  Violations raise ValueError.
    """
    p = as_matrix(p, "projector")
    if p.shape[0] != p.shape[1]:
        raise ValueError(f"projector must be square, got shape {p.shape}")
    p = (p + p.T) / 2.0
    if np.linalg.norm(p @ p - p) > _POLISH_TRIGGER:
        p2 = p @ p
        p = 3.0 * p2 - 2.0 * (p2 @ p)
        p = (p + p.T) / 2.0
    residual = np.linalg.norm(p @ p - p)
    if residual > _PROJECTOR_TOL:
        raise ValueError(f"matrix is not idempotent: residual {residual:.3e}")
    trace = float(np.trace(p))
    dim = int(round(trace))
    if abs(trace - dim) > _TRACE_TOL:
        raise ValueError(f"projector trace {trace!r} is not near an integer")
    if not 0 <= dim <= p.shape[0]:
        raise ValueError(f"projector trace {trace!r} outside [0, ambient dim]")
    if basis is not None:
        basis = as_matrix(basis, "basis")
        if basis.shape[0] != p.shape[0]:
            raise ValueError("basis rows do not match ambient dimension")
        if np.linalg.norm(p @ basis - basis) > _PROJECTOR_TOL * (1.0 + np.linalg.norm(basis)):
            raise ValueError("basis columns are not fixed by the projector")
    return Subspace(projector=p, dim=dim, basis=basis)


def from_basis(b) -> Subspace:
    """Subspace spanned by the columns of ``b`` (projector ``B B^+``).

    A numerically rank-zero ``b`` yields the trivial subspace {0}.
    """
    b = as_matrix(b, "basis")
    u, s, _ = np.linalg.svd(b, full_matrices=False)
    cutoff = max(b.shape) * (s[0] if s.size else 0.0) * 1e-13
    rank = int(np.sum(s > cutoff))
    if rank == 0:
        return Subspace(projector=np.zeros((b.shape[0], b.shape[0])), dim=0, basis=None)
    ur = u[:, :rank]
    return from_projector(ur @ ur.T, basis=b)


def full_space(n: int) -> Subspace:
    return Subspace(projector=np.eye(n), dim=n)


def zero_space(n: int) -> Subspace:
    return Subspace(projector=np.zeros((n, n)), dim=0)


def complement(s: Subspace) -> Subspace:
    """Orthogonal complement (projector ``Id - P``)."""
    n = s.ambient_dim
    return Subspace(projector=np.eye(n) - s.projector, dim=n - s.dim)


def intersect(u: Subspace, v: Subspace) -> Subspace:
    """Intersection of two subspaces via ``2 P_U (P_U + P_V)^+ P_V``."""
    if u.ambient_dim != v.ambient_dim:
        raise ValueError("subspaces live in different ambient dimensions")
    p = 2.0 * u.projector @ pseudo_inverse(u.projector + v.projector) @ v.projector
    return from_projector(p)


def intersect_all(subspaces: Sequence[Subspace]) -> Subspace:
    """Left fold of pairwise intersections over one or more subspaces."""
    if not subspaces:
        raise ValueError("need at least one subspace")
    out = subspaces[0]
    for s in subspaces[1:]:
        out = intersect(out, s)
    return out


def span_sum(u: Subspace, v: Subspace) -> Subspace:
    """Sum U + V, computed as the complement of the intersection of complements."""
    return complement(intersect(complement(u), complement(v)))


def diagonal_subspace(block_dim: int, copies: int) -> Subspace:
    """The diagonal {(x, ..., x)} in a product of ``copies`` blocks of R^d.

    Its projector replaces every block with the arithmetic mean of all
    blocks; as a block matrix every entry is ``Id_d / copies``.
    """
    if block_dim < 1:
        raise ValueError("block dimension must be at least 1")
    if copies < 2:
        raise ValueError("diagonal needs at least 2 copies")
    p = np.kron(np.full((copies, copies), 1.0 / copies), np.eye(block_dim))
    return Subspace(projector=p, dim=block_dim)


def product_subspace(subspaces: Sequence[Subspace]) -> Subspace:
    """Cartesian product, acting on the direct sum of the ambient spaces."""
    if not subspaces:
        raise ValueError("need at least one subspace")
    n = sum(s.ambient_dim for s in subspaces)
    p = np.zeros((n, n))
    offset = 0
    for s in subspaces:
        k = s.ambient_dim
        p[offset:offset + k, offset:offset + k] = s.projector
        offset += k
    return Subspace(projector=p, dim=sum(s.dim for s in subspaces))


def range_subspace(a) -> Subspace:
    """Column space of ``a`` (projector ``A A^+``).

    Besides the usual relative rank cutoff, singular values below an
    absolute floor of ``max(shape) * 1e-14`` count as zero: inputs here are
    built from unit-scale projector algebra, and without the floor a matrix
    that is pure cancellation roundoff would be assigned full rank.
    """
    a = as_matrix(a)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    cutoff = max(a.shape) * max((s[0] if s.size else 0.0) * 1e-13, 1e-14)
    rank = int(np.sum(s > cutoff))
    if rank == 0:
        return zero_space(a.shape[0])
    ur = u[:, :rank]
    return from_projector(ur @ ur.T)


def intersection_via_nullspace(subspaces: Sequence[Subspace], tol: float = 1e-8) -> Subspace:
    """Intersection computed through a different route, for cross-checking.

    A vector lies in every subspace iff it is annihilated by every complement
    projector, i.e. iff it is in the nullspace of the stacked complements.
    The nullspace basis is read off from the small eigenvalues of the Gram
    matrix ``sum_i (Id - P_i)``, which avoids the pseudoinverse entirely.
    """
    if not subspaces:
        raise ValueError("need at least one subspace")
    n = subspaces[0].ambient_dim
    if any(s.ambient_dim != n for s in subspaces):
        raise ValueError("subspaces live in different ambient dimensions")
    gram = np.zeros((n, n))
    for s in subspaces:
        gram += np.eye(n) - s.projector
    values, vectors = symmetric_eig(gram)
    null_cols = vectors[:, values < tol]
    if null_cols.shape[1] == 0:
        return zero_space(n)
    return from_projector(null_cols @ null_cols.T)


def load_subspace(path, ambient_dim: int | None = None, projector: bool = False) -> Subspace:
    """Read a subspace from the matrix text format.

    By default the file holds basis columns; with ``projector=True`` it is
    interpreted directly as a projector and validated before acceptance.
    """
    m = load_matrix(path)
    if ambient_dim is not None and m.shape[0] != ambient_dim:
        raise ValueError(f"{path}: expected {ambient_dim} rows, found {m.shape[0]}")
    return from_projector(m) if projector else from_basis(m)
