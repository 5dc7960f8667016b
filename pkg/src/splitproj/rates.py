"""Linear convergence rate bounds for relaxed splitting operators.

For a linear nonexpansive ``T`` with fixed-point projector ``P``, iterates of
the relaxed operator approach their limit linearly; the spectral radius of
``T_lambda - P`` is a sharp lower bound on the rate and the operator norm an
upper bound.  This module computes both, plus closed forms for the
three-concurrent-lines family where the relaxed-POCS operator admits explicit
eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .iteration import relax
from .linalg import operator_norm, spectral_radius
from .schemes import SplittingScheme

# |radius - norm| at or below this counts as radial (the two bounds agree).
RADIAL_TOL = 1e-8


@dataclass(frozen=True)
class RateBounds:
    """Lower/upper bounds on the linear rate of a relaxed scheme."""

    lam: float
    spectral_radius: float
    operator_norm: float
    is_radial: bool


def rate_bounds(scheme: SplittingScheme, lam: float) -> RateBounds:
    """Spectral radius and operator norm of ``T_lambda - P_fix``.

    The residual operator governs the distance of iterates to their limit:
    its spectral radius is a sharp lower bound for the linear rate and its
    norm an upper bound.  ``is_radial`` reports whether the two coincide
    within 1e-8, which happens exactly when the residual matrix is normal
    (always the case for Campoy's scheme).
    """
    residual = relax(scheme.T, lam) - scheme.P_fix
    rho = spectral_radius(residual)
    norm = operator_norm(residual)
    return RateBounds(
        lam=lam,
        spectral_radius=rho,
        operator_norm=norm,
        is_radial=abs(rho - norm) <= RADIAL_TOL,
    )


def _check_angle(theta: float) -> None:
    if not 0.0 < theta < math.pi / 2.0:
        raise ValueError(f"line angle must lie in (0, pi/2), got {theta!r}")


def pocs_three_lines_eigenvalues(theta: float, lam: float) -> tuple[float, float]:
    """Eigenvalues of ``T_lambda - P_fix`` for relaxed POCS on three lines.

    The lines pass through the origin of the plane at angles 0, theta and
    2*theta, so their intersection is trivial and ``P_fix = 0``.  The two
    eigenvalues are real for every relaxation value:

        1 - (4/3) lambda   and   1 + (4/3) lambda (2 sin^4 theta - 3 sin^2 theta).
    """
    _check_angle(theta)
    s2 = math.sin(theta) ** 2
    coupling = 2.0 * s2 * s2 - 3.0 * s2
    return (1.0 - 4.0 * lam / 3.0, 1.0 + (4.0 * lam / 3.0) * coupling)


def pocs_three_lines_radius(theta: float) -> float:
    """Spectral radius of the plain three-line projection cycle.

    The unrelaxed composition of the three line projectors (the 3/4
    relaxation of the POCS operator) has eigenvalues
    ``{cos^2(theta) cos(2 theta), 0}``, so its spectral radius is the
    absolute value of the first.
    """
    _check_angle(theta)
    return abs(math.cos(theta) ** 2 * math.cos(2.0 * theta))


def pocs_three_lines_norm(theta: float) -> float:
    """Operator norm ``cos^2(theta)`` of the plain three-line projection cycle."""
    _check_angle(theta)
    return math.cos(theta) ** 2


# Relaxation value at which the relaxed POCS operator reduces to the plain
# composition of the three projectors (its 3/4-averaged core).
POCS_COMPOSITION_LAMBDA = 0.75
