"""Dense real matrix kernels: eigendecompositions, pseudoinverse, norms, block
assembly, and a plain-text matrix exchange format.

All routines work on 2-D float64 arrays with value semantics (inputs are never
mutated) and are safe to call from multiple threads.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

Array = np.ndarray

# Singular values <= max(m, n) * sigma_max * RANK_CUTOFF count as zero.
RANK_CUTOFF = 1e-13


class EigenvalueError(RuntimeError):
    """Eigenvalue iteration failed to converge."""


def as_matrix(a, name: str = "matrix") -> Array:
    """Validate and return ``a`` as a 2-D float64 array with finite entries."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and column")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_vector(v, name: str = "vector") -> Array:
    """Validate and return ``v`` as a 1-D float64 array with finite entries."""
    x = np.asarray(v, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")
    return x


def matmul(a, b) -> Array:
    """Matrix product with an explicit dimension check."""
    a = as_matrix(a, "left factor")
    b = as_matrix(b, "right factor")
    if a.shape[1] != b.shape[0]:
        raise ValueError(
            f"dimension mismatch: ({a.shape[0]}x{a.shape[1]}) @ ({b.shape[0]}x{b.shape[1]})"
        )
    return a @ b


def block_matrix(blocks: Sequence[Sequence[Array]]) -> Array:
    """Assemble a grid of blocks into one matrix.

    Blocks in a grid row must share their row count and blocks in a grid
    column must share their column count; otherwise a ``ValueError`` is
    raised.  ``split_blocks`` is the inverse operation.
    """
    if not blocks or any(len(row) == 0 for row in blocks):
        raise ValueError("block grid must be non-empty")
    grid = [[as_matrix(b, "block") for b in row] for row in blocks]
    ncols = len(grid[0])
    if any(len(row) != ncols for row in grid):
        raise ValueError("block grid rows have differing lengths")
    for i, row in enumerate(grid):
        if len({b.shape[0] for b in row}) != 1:
            raise ValueError(f"blocks in grid row {i} differ in row count")
    for j in range(ncols):
        if len({row[j].shape[1] for row in grid}) != 1:
            raise ValueError(f"blocks in grid column {j} differ in column count")
    return np.block([[b for b in row] for row in grid])


def split_blocks(a, row_sizes: Sequence[int], col_sizes: Sequence[int]) -> list[list[Array]]:
    """Cut a matrix back into the block grid described by the size lists."""
    a = as_matrix(a)
    if sum(row_sizes) != a.shape[0] or sum(col_sizes) != a.shape[1]:
        raise ValueError("block sizes do not tile the matrix")
    row_edges = np.cumsum([0, *row_sizes])
    col_edges = np.cumsum([0, *col_sizes])
    return [
        [a[row_edges[i]:row_edges[i + 1], col_edges[j]:col_edges[j + 1]].copy()
         for j in range(len(col_sizes))]
        for i in range(len(row_sizes))
    ]


class SymmetricEig(NamedTuple):
    """Eigendecomposition of a symmetric matrix, eigenvalues descending."""

    eigenvalues: Array
    eigenvectors: Array


def symmetric_eig(a, symmetry_tol: float = 1e-12) -> SymmetricEig:
    """Eigendecomposition of a symmetric matrix.

    The input must be square and symmetric up to ``symmetry_tol`` (relative
    Frobenius norm); it is symmetrized as (A + A^T)/2 before factoring, since
    chains of projector products pick up asymmetry at roundoff level.

    Returns eigenvalues sorted descending and the matching orthonormal
    eigenvector columns.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    scale = 1.0 + np.linalg.norm(a)
    if np.linalg.norm(a - a.T) > symmetry_tol * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    sym = (a + a.T) / 2.0
    values, vectors = np.linalg.eigh(sym)
    order = np.argsort(values)[::-1]
    return SymmetricEig(values[order], vectors[:, order])


def pseudo_inverse(a) -> Array:
    """Moore-Penrose pseudoinverse.

    Singular values at or below ``max(m, n) * sigma_max * 1e-13`` are treated
    as zero.  The result satisfies the four defining identities to roughly
    machine precision on well-scaled inputs.
    """
    a = as_matrix(a)
    return np.linalg.pinv(a, rcond=max(a.shape) * RANK_CUTOFF)


def eigenvalues(a) -> Array:
    """All eigenvalues of a square matrix, with multiplicity, as complex128.

    Computed by orthogonal reduction to Hessenberg form followed by shifted
    QR iteration (LAPACK dgeev); real matrices yield a spectrum closed under
    conjugation.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    try:
        return np.asarray(np.linalg.eigvals(a), dtype=complex)
    except np.linalg.LinAlgError as exc:
        raise EigenvalueError(f"eigenvalue iteration did not converge: {exc}") from exc


def spectral_radius(a) -> float:
    """Largest eigenvalue modulus of a square matrix."""
    return float(np.max(np.abs(eigenvalues(a))))


def operator_norm(a) -> float:
    """Largest singular value (Euclidean operator norm)."""
    a = as_matrix(a)
    return float(np.linalg.norm(a, 2))


# ---------------------------------------------------------------------------
# Text exchange format: first line "rows cols", then one whitespace-separated
# line per row.  Values are written with 17 significant digits so that
# write/read round-trips are exact in double precision.
# ---------------------------------------------------------------------------

def format_value(x: float) -> str:
    return f"{float(x):.17g}"


def format_matrix(a) -> str:
    a = as_matrix(a)
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    lines.extend(" ".join(format_value(x) for x in row) for row in a)
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> Array:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix text")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError(f"matrix header must be 'rows cols', got {lines[0]!r}")
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError as exc:
        raise ValueError(f"matrix header must be two integers, got {lines[0]!r}") from exc
    if rows < 1 or cols < 1:
        raise ValueError("matrix dimensions must be positive")
    if len(lines) - 1 != rows:
        raise ValueError(f"expected {rows} data rows, found {len(lines) - 1}")
    data = []
    for i, line in enumerate(lines[1:]):
        entries = line.split()
        if len(entries) != cols:
            raise ValueError(f"row {i} has {len(entries)} entries, expected {cols}")
        data.append([float(e) for e in entries])
    return as_matrix(np.array(data, dtype=float))


def save_matrix(path, a) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_matrix(a))


def load_matrix(path) -> Array:
    with open(path, "r", encoding="ascii") as fh:
        return parse_matrix(fh.read())
