"""Splitting schemes for finding the projection onto an intersection of
subspaces: Ryu, Malitsky-Tam (MT), Campoy, and relaxed cyclic projections
(POCS).

Each builder returns the scheme as explicit matrices: the iteration operator
``T`` on the state space, the inner evaluation map ``M``, the projector
``P_fix`` onto the fixed-point set of ``T``, the projector ``P_Z`` onto the
intersection of the inputs, and a ``shadow`` matrix mapping a state to the
tracked point that converges to the solution.

Conventions
-----------
* Ryu and POCS take exactly three subspaces; MT and Campoy accept ``n >= 3``.
* For MT and Campoy the state lives in ``(R^d)^(n-1)`` and the LAST listed
  subspace plays the distinguished role: it is the resolvent applied to the
  block average in Campoy's scheme and the closing projection of the MT
  cascade.  Argument order is therefore part of the contract.
* The shadow point is the first output of the inner map for Ryu, the average
  of its ``n`` outputs for MT, the (repeated) averaged-projection output for
  Campoy, and the state itself for POCS.  All of these share the same limit.
* POCS is only derived for three factors (the relaxation constant 4/3 comes
  from the 3/4-averagedness of a three-fold projector composition), so other
  arities are rejected.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .linalg import Array, as_vector, operator_norm, pseudo_inverse, save_matrix
from .subspaces import (
    AffineSubspace,
    Subspace,
    complement,
    diagonal_subspace,
    from_projector,
    full_space,
    intersect,
    intersect_all,
    product_subspace,
    range_subspace,
)

KINDS = ("ryu", "mt", "campoy", "pocs")

_FIX_TOL = 1e-9
_NONEXPANSIVE_TOL = 1e-9


class InconsistentAffineError(ValueError):
    """The affine subspaces have no common point."""


@dataclass(frozen=True, eq=False)
class SplittingScheme:
    """A built splitting algorithm instance, all operators as matrices."""

    kind: str
    subspaces: tuple[Subspace, ...]
    ambient_dim: int
    state_dim: int
    T: Array
    M: Array
    P_fix: Array
    P_Z: Array
    shadow: Array

    @property
    def n_subspaces(self) -> int:
        return len(self.subspaces)

    def step(self, state: Array) -> Array:
        return self.T @ state

    def shadow_point(self, state: Array) -> Array:
        return self.shadow @ state


def _check_inputs(subspaces: Sequence[Subspace], kind: str, exact: int | None) -> int:
    n = len(subspaces)
    if exact is not None and n != exact:
        raise ValueError(f"{kind} splitting needs exactly {exact} subspaces, got {n}")
    if exact is None and n < 3:
        raise ValueError(f"{kind} splitting needs at least 3 subspaces, got {n}")
    d = subspaces[0].ambient_dim
    if any(s.ambient_dim != d for s in subspaces):
        raise ValueError("subspaces live in different ambient dimensions")
    return d


def _finish(kind: str, subspaces: Sequence[Subspace], t: Array, m: Array,
            p_fix: Array, p_z: Subspace, shadow: Array) -> SplittingScheme:
    fix = from_projector(p_fix)
    scale = 1.0 + np.linalg.norm(fix.projector)
    if operator_norm(t) > 1.0 + _NONEXPANSIVE_TOL:
        raise ValueError(f"{kind} operator is not nonexpansive: norm {operator_norm(t)!r}")
    if np.linalg.norm(t @ fix.projector - fix.projector) > _FIX_TOL * scale:
        raise ValueError(f"{kind} fixed-point projector is not invariant under the operator")
    return SplittingScheme(
        kind=kind,
        subspaces=tuple(subspaces),
        ambient_dim=subspaces[0].ambient_dim,
        state_dim=t.shape[0],
        T=t,
        M=m,
        P_fix=fix.projector,
        P_Z=p_z.projector,
        shadow=shadow,
    )


def build_ryu(u: Subspace, v: Subspace, w: Subspace) -> SplittingScheme:
    """Ryu splitting for three subspaces; the state lives in (R^d)^2.

    The inner map sends ``(x, y)`` through the resolvent chain of the three
    subspaces, and the iteration operator adds the differences of its third
    output against the first two.  The fixed-point projector splits into the
    solution part ``diag(P_Z, 0)`` plus the projector onto the orthogonal
    error subspace ``(U^perp x V^perp) ∩ (Delta^perp + {0} x W^perp)``.
    """
    d = _check_inputs((u, v, w), "ryu", 3)
    pu, pv, pw = u.projector, v.projector, w.projector
    zero = np.zeros((d, d))

    r1 = np.hstack([pu, zero])
    r2 = np.hstack([pv @ pu, pv])
    r3 = np.hstack([pw @ pu + pw @ pv @ pu - pw, pw @ pv - pw])
    m = np.vstack([r1, r2, r3])
    t = np.eye(2 * d) + np.vstack([r3 - r1, r3 - r2])

    p_z = intersect_all([u, v, w])
    left = product_subspace([complement(u), complement(v)])
    # Delta^perp + {0} x W^perp is the complement of Delta ∩ (X x W).
    right = complement(intersect(diagonal_subspace(d, 2), product_subspace([full_space(d), w])))
    p_err = intersect(left, right)
    p_fix = np.zeros((2 * d, 2 * d))
    p_fix[:d, :d] = p_z.projector
    p_fix += p_err.projector

    shadow = np.hstack([pu, zero])
    return _finish("ryu", (u, v, w), t, m, p_fix, p_z, shadow)


def build_mt(subspaces: Sequence[Subspace]) -> SplittingScheme:
    """Malitsky-Tam splitting for n >= 3 subspaces; state in (R^d)^(n-1).

    The inner cascade is propagated blockwise into an explicit ``n d`` by
    ``(n-1) d`` matrix.  The fixed-point projector is the diagonal embedding
    of the intersection (every block equal to ``P_Z / (n-1)``) plus the
    projector onto ``ran(Psi) ∩ (X^(n-2) x U_n^perp)``, where ``Psi`` is the
    block-lower-triangular partial-sum matrix of complement projectors.
    """
    d = _check_inputs(subspaces, "mt", None)
    n = len(subspaces)
    projs = [s.projector for s in subspaces]
    width = (n - 1) * d

    def selector(j: int) -> Array:
        e = np.zeros((d, width))
        e[:, j * d:(j + 1) * d] = np.eye(d)
        return e

    rows = [projs[0] @ selector(0)]
    for i in range(1, n - 1):
        rows.append(projs[i] @ (rows[i - 1] + selector(i) - selector(i - 1)))
    rows.append(projs[n - 1] @ (rows[0] + rows[n - 2] - selector(n - 2)))
    m = np.vstack(rows)
    t = np.eye(width) + np.vstack([rows[i + 1] - rows[i] for i in range(n - 1)])

    p_z = intersect_all(subspaces)
    p_diag = np.kron(np.full((n - 1, n - 1), 1.0 / (n - 1)), p_z.projector)

    psi = np.zeros((width, width))
    for i in range(n - 1):
        for j in range(i + 1):
            psi[i * d:(i + 1) * d, j * d:(j + 1) * d] = np.eye(d) - projs[j]
    tail = product_subspace([full_space(d)] * (n - 2) + [complement(subspaces[-1])])
    p_err = intersect(range_subspace(psi), tail)
    p_fix = p_diag + p_err.projector

    shadow = sum(rows) / float(n)
    return _finish("mt", subspaces, t, m, p_fix, p_z, shadow)


def build_campoy(subspaces: Sequence[Subspace]) -> SplittingScheme:
    """Campoy splitting for n >= 3 subspaces; state in (R^d)^(n-1).

    This is Douglas-Rachford applied to the pair of product-space subspaces
    ``Utilde`` (diagonal embedding of the last subspace) and ``Vtilde`` (the
    product of the first n-1).  The inner map averages the blocks and
    projects onto the last subspace; the fixed-point projector is the sum of
    the projectors onto ``Utilde ∩ Vtilde`` and onto the intersection of
    their complements, whose ranges are orthogonal.
    """
    d = _check_inputs(subspaces, "campoy", None)
    n = len(subspaces)
    last = subspaces[-1].projector

    m = np.kron(np.full((n - 1, n - 1), 1.0 / (n - 1)), last)
    v_tilde = product_subspace(list(subspaces[:-1]))
    s = v_tilde.projector @ (2.0 * m - np.eye((n - 1) * d))
    t = np.eye((n - 1) * d) + 2.0 * s - 2.0 * m

    u_tilde = from_projector(m)
    p_fix = (
        intersect(u_tilde, v_tilde).projector
        + intersect(complement(u_tilde), complement(v_tilde)).projector
    )
    p_z = intersect_all(subspaces)
    shadow = np.hstack([last / (n - 1)] * (n - 1))
    return _finish("campoy", subspaces, t, m, p_fix, p_z, shadow)


def build_pocs(subspaces: Sequence[Subspace]) -> SplittingScheme:
    """Relaxed cyclic projections for exactly three subspaces, state in R^d.

    The composition of the three projectors is 3/4-averaged, so
    ``T = (4/3) P_W P_V P_U - (1/3) Id`` is its nonexpansive core; the plain
    composition is recovered as the 3/4-relaxation of ``T``.  The fixed-point
    set is the intersection itself.
    """
    d = _check_inputs(subspaces, "pocs", 3)
    pu, pv, pw = (s.projector for s in subspaces)
    composition = pw @ pv @ pu
    t = (4.0 / 3.0) * composition - (1.0 / 3.0) * np.eye(d)
    p_z = intersect_all(subspaces)
    return _finish("pocs", subspaces, t, composition, p_z.projector.copy(), p_z, np.eye(d))


def build_scheme(kind: str, subspaces: Sequence[Subspace]) -> SplittingScheme:
    """Dispatch on the algorithm name: ryu, mt, campoy, or pocs."""
    kind = kind.lower()
    if kind == "ryu":
        if len(subspaces) != 3:
            raise ValueError(f"ryu splitting needs exactly 3 subspaces, got {len(subspaces)}")
        return build_ryu(*subspaces)
    if kind == "mt":
        return build_mt(subspaces)
    if kind == "campoy":
        return build_campoy(subspaces)
    if kind == "pocs":
        return build_pocs(subspaces)
    raise ValueError(f"unknown scheme kind {kind!r}; expected one of {KINDS}")


# ---------------------------------------------------------------------------
# Generic resolvent path: one unrelaxed application of the scheme operator
# through user-supplied resolvents, no matrices involved.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResolventOracle:
    """A firmly nonexpansive resolvent supplied as a callable on R^d.

    Nonexpansiveness is the caller's responsibility; ``apply_generic_step``
    can spot-check it on sampled pairs when asked.  For Campoy's scheme the
    last oracle stands for the resolvent of the (1/(n-1))-scaled operator,
    which for subspace projections is the projection itself.
    """

    fn: Callable[[Array], Array]
    ambient_dim: int

    def __call__(self, x: Array) -> Array:
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)


def subspace_resolvent(s: Subspace) -> ResolventOracle:
    return ResolventOracle(fn=lambda x, p=s.projector: p @ x, ambient_dim=s.ambient_dim)


def affine_resolvent(a: AffineSubspace) -> ResolventOracle:
    p = a.parallel.projector
    offset = a.anchor - p @ a.anchor
    return ResolventOracle(fn=lambda x: p @ x + offset, ambient_dim=a.ambient_dim)


def _blocks(state: Array, d: int) -> list[Array]:
    return [state[i * d:(i + 1) * d] for i in range(state.shape[0] // d)]


def _step_and_shadow(kind: str, resolvents: Sequence[ResolventOracle],
                     state: Array) -> tuple[Array, Array]:
    d = resolvents[0].ambient_dim
    n = len(resolvents)
    if kind == "ryu":
        x, y = state[:d], state[d:]
        m1 = resolvents[0](x)
        m2 = resolvents[1](m1 + y)
        m3 = resolvents[2](m1 - x + m2 - y)
        return np.concatenate([x + m3 - m1, y + m3 - m2]), m1
    if kind == "mt":
        z = _blocks(state, d)
        m = [resolvents[0](z[0])]
        for i in range(1, n - 1):
            m.append(resolvents[i](m[i - 1] + z[i] - z[i - 1]))
        m.append(resolvents[n - 1](m[0] + m[n - 2] - z[n - 2]))
        new = np.concatenate([z[i] + m[i + 1] - m[i] for i in range(n - 1)])
        return new, sum(m) / float(n)
    if kind == "campoy":
        z = _blocks(state, d)
        p = resolvents[-1](sum(z) / float(n - 1))
        x = [resolvents[i](2.0 * p - z[i]) for i in range(n - 1)]
        new = np.concatenate([z[i] + 2.0 * (x[i] - p) for i in range(n - 1)])
        return new, p
    if kind == "pocs":
        third = resolvents[2](resolvents[1](resolvents[0](state)))
        return (4.0 / 3.0) * third - (1.0 / 3.0) * state, state
    raise ValueError(f"unknown scheme kind {kind!r}; expected one of {KINDS}")


def _check_arity(kind: str, resolvents: Sequence[ResolventOracle], state: Array) -> None:
    n = len(resolvents)
    if kind in ("ryu", "pocs") and n != 3:
        raise ValueError(f"{kind} needs exactly 3 resolvents, got {n}")
    if kind in ("mt", "campoy") and n < 3:
        raise ValueError(f"{kind} needs at least 3 resolvents, got {n}")
    d = resolvents[0].ambient_dim
    if any(r.ambient_dim != d for r in resolvents):
        raise ValueError("resolvents declare differing ambient dimensions")
    expected = {"ryu": 2 * d, "mt": (n - 1) * d, "campoy": (n - 1) * d, "pocs": d}[kind]
    if state.shape[0] != expected:
        raise ValueError(f"state length {state.shape[0]} does not match {kind} ({expected})")


def _spot_check_nonexpansive(resolvents: Sequence[ResolventOracle]) -> None:
    rng = np.random.default_rng(271828)
    for r in resolvents:
        for _ in range(3):
            x = rng.standard_normal(r.ambient_dim)
            y = rng.standard_normal(r.ambient_dim)
            gap = np.linalg.norm(r(x) - r(y)) - np.linalg.norm(x - y)
            if gap > 1e-9 * (1.0 + np.linalg.norm(x - y)):
                raise ValueError("resolvent oracle failed a nonexpansiveness spot check")


def apply_generic_step(kind: str, resolvents: Sequence[ResolventOracle],
                       state, *, check: bool = False) -> Array:
    """One unrelaxed application of the named operator via resolvent calls.

    With resolvents that project onto subspaces this agrees with the matrix
    path ``scheme.T @ state``; arbitrary firmly nonexpansive resolvents are
    accepted.  ``check=True`` spot-checks each oracle for nonexpansiveness
    on a few deterministic sample pairs first.
    """
    kind = kind.lower()
    state = as_vector(state, "state")
    _check_arity(kind, resolvents, state)
    if check:
        _spot_check_nonexpansive(resolvents)
    new, _ = _step_and_shadow(kind, resolvents, state)
    return new


# ---------------------------------------------------------------------------
# Consistent affine problems, reduced to the linear parallel problem by a
# translation: the affine operator is x -> L x + b, and conjugating by
# a = (Id - L)^+ b reproduces its orbits from orbits of L.
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AffineConjugation:
    """Translation data tying an affine scheme to its linear parallel scheme.

    ``a`` is the conjugation point, ``b`` the constant term of the affine
    operator, and ``shadow_offset`` the constant term of the affine shadow
    map, so affine states and shadow points are recovered as
    ``a + (linear state)`` and ``shadow @ state + shadow_offset``.
    """

    a: Array
    b: Array
    shadow_offset: Array


def affine_intersection_point(affines: Sequence[AffineSubspace]) -> Array:
    """A point in the common intersection of affine subspaces.

    Membership in each affine subspace is the linear condition
    ``(Id - P_i) x = (Id - P_i) anchor_i``; stacking these and solving by
    pseudoinverse yields the minimum-norm common point.  An inconsistent
    system raises ``InconsistentAffineError``.
    """
    if not affines:
        raise ValueError("need at least one affine subspace")
    d = affines[0].ambient_dim
    blocks = [np.eye(d) - a.parallel.projector for a in affines]
    stacked = np.vstack(blocks)
    rhs = np.concatenate([blk @ a.anchor for blk, a in zip(blocks, affines)])
    point = pseudo_inverse(stacked) @ rhs
    if np.linalg.norm(stacked @ point - rhs) > 1e-8 * (1.0 + np.linalg.norm(rhs)):
        raise InconsistentAffineError(
            "affine subspaces have empty intersection (inconsistent-affine)"
        )
    return point


def build_affine(kind: str, affine_subspaces: Sequence[AffineSubspace],
                 ) -> tuple[SplittingScheme, AffineConjugation]:
    """Build the linear parallel scheme plus translation data for an affine
    instance with nonempty intersection.

    The constant term ``b`` is found by evaluating the affine operator at the
    origin through the generic resolvent path; consistency is certified by
    checking ``(Id - L) a = b`` for ``a = (Id - L)^+ b``, and independently
    by solving the stacked anchor equations (the residual check alone cannot
    flag an inconsistent POCS instance whose parallel intersection is
    trivial, since ``Id - L`` is then invertible).  Either failure raises
    ``InconsistentAffineError``.
    """
    kind = kind.lower()
    parallels = [a.parallel for a in affine_subspaces]
    scheme = build_scheme(kind, parallels)
    affine_intersection_point(affine_subspaces)
    resolvents = [affine_resolvent(a) for a in affine_subspaces]
    zero = np.zeros(scheme.state_dim)
    _check_arity(kind, resolvents, zero)
    b, shadow_offset = _step_and_shadow(kind, resolvents, zero)
    if kind == "pocs":
        shadow_offset = np.zeros(scheme.ambient_dim)

    residual_map = np.eye(scheme.state_dim) - scheme.T
    a_vec = pseudo_inverse(residual_map) @ b
    if np.linalg.norm(residual_map @ a_vec - b) > 1e-8 * (1.0 + np.linalg.norm(b)):
        raise InconsistentAffineError(
            "affine subspaces have empty intersection (inconsistent-affine)"
        )
    return scheme, AffineConjugation(a=a_vec, b=b, shadow_offset=shadow_offset)


def affine_step(scheme: SplittingScheme, conj: AffineConjugation,
                state: Array, lam: float) -> Array:
    """One relaxed step of the affine operator, without conjugation."""
    return (1.0 - lam) * state + lam * (scheme.T @ state + conj.b)


SCHEME_DUMP_NAMES = ("T", "M", "P_fix", "P_Z", "shadow")


def dump_scheme(scheme: SplittingScheme, directory) -> list[str]:
    """Write the scheme's matrices as text files for cross-language diffing.

    Creates ``T.txt``, ``M.txt``, ``P_fix.txt``, ``P_Z.txt`` and
    ``shadow.txt`` in ``directory`` (created if missing) and returns the
    file paths.
    """
    os.makedirs(directory, exist_ok=True)
    paths = []
    for name in SCHEME_DUMP_NAMES:
        path = os.path.join(str(directory), f"{name}.txt")
        save_matrix(path, getattr(scheme, name))
        paths.append(path)
    return paths
