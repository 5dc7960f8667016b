"""Seeded random problem instances and the three-lines test geometry.

Randomness comes from the counter-based Philox generator seeded through
``numpy.random.SeedSequence`` with an explicit spawn key per (purpose, index)
pair.  Streams are therefore independent of execution order and identical
across runs and platforms, which is what makes experiment CSVs byte-stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import Array
from .subspaces import Subspace, from_basis, from_projector, intersect_all, intersection_via_nullspace

# Spawn-key namespaces, so instance and start streams never collide.
_NS_INSTANCE = 0
_NS_START = 1

_ORACLE_TOL = 1e-8


class DegenerateInstanceError(RuntimeError):
    """A random draw failed to produce subspaces of the requested dimensions."""


def stream(seed: int, *key: int) -> np.random.Generator:
    """A Philox generator for the substream identified by ``key``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


@dataclass(frozen=True, eq=False)
class InstanceRecord:
    """One random problem instance: subspaces plus their intersection."""

    instance_id: int
    subspaces: tuple[Subspace, ...]
    intersection: Subspace


def _draw_subspaces(rng: np.random.Generator, d: int, dims: tuple[int, ...]) -> list[Subspace]:
    out = []
    for k in dims:
        s = from_basis(rng.standard_normal((d, k)))
        if s.dim != k:
            raise DegenerateInstanceError(f"drawn basis has rank {s.dim}, wanted {k}")
        out.append(s)
    return out


def random_instance(seed: int, instance_id: int, d: int = 6,
                    dims: tuple[int, ...] = (5, 5, 5)) -> InstanceRecord:
    """Draw subspaces spanned by i.i.d. standard normal basis matrices.

    Each subspace is the column space of a ``d x dims[i]`` Gaussian matrix.
    A rank-deficient draw (probability zero, but possible in principle) is
    retried once before raising.  The intersection is validated against the
    nullspace-route oracle and against the dimension bound
    ``sum(dims) - (len(dims) - 1) * d``.
    """
    if d < 1 or any(not 1 <= k <= d for k in dims) or not dims:
        raise ValueError(f"invalid dimensions d={d}, dims={dims}")
    rng = stream(seed, _NS_INSTANCE, instance_id)
    try:
        subspaces = _draw_subspaces(rng, d, tuple(dims))
    except DegenerateInstanceError:
        subspaces = _draw_subspaces(rng, d, tuple(dims))

    intersection = intersect_all(subspaces)
    oracle = intersection_via_nullspace(subspaces)
    gap = np.linalg.norm(intersection.projector - oracle.projector)
    if gap > _ORACLE_TOL:
        raise DegenerateInstanceError(
            f"intersection disagrees with nullspace oracle by {gap:.3e}"
        )
    lower = sum(dims) - (len(dims) - 1) * d
    if intersection.dim < lower:
        raise DegenerateInstanceError(
            f"intersection dimension {intersection.dim} below bound {lower}"
        )
    return InstanceRecord(instance_id=instance_id,
                          subspaces=tuple(subspaces),
                          intersection=intersection)


def random_instances(seed: int, count: int, d: int = 6,
                     dims: tuple[int, ...] = (5, 5, 5)) -> list[InstanceRecord]:
    return [random_instance(seed, i, d, dims) for i in range(count)]


def random_start(seed: int, start_id: int, dim: int) -> Array:
    """A standard normal starting vector from its own substream."""
    return stream(seed, _NS_START, start_id).standard_normal(dim)


def line_projector(theta: float) -> Array:
    """Projector onto the line through the origin at angle ``theta``."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c * c, s * c], [s * c, s * s]])


def three_lines(theta: float) -> tuple[Subspace, Subspace, Subspace]:
    """Three concurrent lines in the plane at angles 0, theta, 2*theta.

    The middle line bisects the angle between the other two and the three
    lines intersect only at the origin, so the solution projector is zero.
    Requires ``theta`` in (0, pi/2).
    """
    if not 0.0 < theta < math.pi / 2.0:
        raise ValueError(f"line angle must lie in (0, pi/2), got {theta!r}")
    return (
        from_projector(line_projector(0.0)),
        from_projector(line_projector(theta)),
        from_projector(line_projector(2.0 * theta)),
    )
