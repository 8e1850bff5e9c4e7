"""Closed-form Hamiltonians of the isomonodromic flows in (u1, u2).

The phase space carries canonical pairs (P1, Q1), (P2, Q2) and two times
u1, u2 (u2 > 0).  The flows are generated by H_j + h_j, where h_j are the
shift terms produced by trading the natural explicit derivatives for ones
at fixed canonical coordinates.

On the physical branch at u1 = 0 the state lies on the constraint surface

    P2 = 0,   Q2 = -(u2^2 Q1^2 - 4 P1^2) / (2 u2^2)

and the four-dimensional system collapses to the two-dimensional system in
(P, Q) = (P1, Q1) generated by H0 + h0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

CONSTRAINT_TOL = 1e-6


class DomainError(ValueError):
    """Raised for states outside u2 > 0."""


class ConstraintError(ValueError):
    """Raised when a state is not on the P2 = 0 constraint surface."""


@dataclass(frozen=True)
class CanonicalState:
    u1: float
    u2: float
    P1: complex
    Q1: complex
    P2: complex
    Q2: complex

    def coords(self) -> np.ndarray:
        return np.array([self.P1, self.Q1, self.P2, self.Q2], dtype=complex)

    @classmethod
    def from_coords(cls, u1: float, u2: float, y) -> "CanonicalState":
        P1, Q1, P2, Q2 = (complex(v) for v in y)
        return cls(float(u1), float(u2), P1, Q1, P2, Q2)

    def with_times(self, u1: float | None = None, u2: float | None = None) -> "CanonicalState":
        return replace(
            self,
            u1=self.u1 if u1 is None else float(u1),
            u2=self.u2 if u2 is None else float(u2),
        )


@dataclass(frozen=True)
class ReducedState:
    u2: float
    P: complex
    Q: complex

    def coords(self) -> np.ndarray:
        return np.array([self.P, self.Q], dtype=complex)


@dataclass(frozen=True)
class HamiltonianGradient:
    """Partials of H_j + h_j in the canonical variables and explicit times."""

    dP1: complex
    dQ1: complex
    dP2: complex
    dQ2: complex
    dU1explicit: complex
    dU2explicit: complex

    def vector_field(self) -> np.ndarray:
        """Hamilton's equations (dP1, dQ1, dP2, dQ2) / du_j."""
        return np.array([-self.dQ1, self.dP1, -self.dQ2, self.dP2], dtype=complex)


def _check_u2(u2: float) -> None:
    if not u2 > 0:
        raise DomainError(f"u2 must be positive, got {u2!r}")


def eval_H1(s: CanonicalState) -> complex:
    _check_u2(s.u2)
    u1, u2, P1, Q1, P2, Q2 = s.u1, s.u2, s.P1, s.Q1, s.P2, s.Q2
    return (
        2j * P2 / u2
        + 0.5 * u1 * Q2
        - 0.5 * u2 * Q1 * Q2
        - u1**2 * Q1 / (4 * u2)
        + 0.5 * u1 * Q1**2
        - 0.25 * u2 * Q1**3
        + 2 * P1 * P2 * Q2 / u2
        + P1**2 * Q1 / u2
    )


def eval_H2(s: CanonicalState) -> complex:
    _check_u2(s.u2)
    u1, u2, P1, Q1, P2, Q2 = s.u1, s.u2, s.P1, s.Q1, s.P2, s.Q2
    return (
        -1j * P1 / u2
        + 1j * P2 * Q1 / u2
        + u2 * Q1**2 * Q2 / 8
        + u2 * Q2**2 / 8
        - P1**2 * Q2 / (2 * u2)
        - P2**2 * Q2**2 / (2 * u2)
        - 1j * P2 * u1 / u2**2
        + u1**3 * Q1 / (8 * u2**2)
        - u1**2 * Q1**2 / (4 * u2)
        + u1 * Q1**3 / 8
        - u1 * P1 * P2 * Q2 / u2**2
        - u1 * P1**2 * Q1 / (2 * u2**2)
        - u1**2 * Q2 / (8 * u2)
    )


def eval_h1(s: CanonicalState) -> complex:
    _check_u2(s.u2)
    return s.P1 / s.u2


def eval_h2(s: CanonicalState) -> complex:
    _check_u2(s.u2)
    u1, u2 = s.u1, s.u2
    return -s.P2 * s.Q2 / u2 - s.P1 * s.Q1 / (2 * u2) - u1 * s.P1 / (2 * u2**2)


def eval_H0(r: ReducedState) -> complex:
    _check_u2(r.u2)
    u2, P, Q = r.u2, r.P, r.Q
    X = u2**2 * Q**2 - 4 * P**2
    return -(X**2) / (32 * u2**3) - 1j * P / u2


def eval_h0(r: ReducedState) -> complex:
    _check_u2(r.u2)
    return -r.P * r.Q / (2 * r.u2)


def _grad1(s: CanonicalState) -> HamiltonianGradient:
    u1, u2, P1, Q1, P2, Q2 = s.u1, s.u2, s.P1, s.Q1, s.P2, s.Q2
    return HamiltonianGradient(
        dP1=2 * P2 * Q2 / u2 + 2 * P1 * Q1 / u2 + 1 / u2,
        dQ1=-u2 * Q2 / 2 - u1**2 / (4 * u2) + u1 * Q1 - 0.75 * u2 * Q1**2 + P1**2 / u2,
        dP2=2j / u2 + 2 * P1 * Q2 / u2,
        dQ2=u1 / 2 - u2 * Q1 / 2 + 2 * P1 * P2 / u2,
        dU1explicit=Q2 / 2 - u1 * Q1 / (2 * u2) + Q1**2 / 2,
        dU2explicit=(
            -2j * P2 / u2**2
            - Q1 * Q2 / 2
            + u1**2 * Q1 / (4 * u2**2)
            - Q1**3 / 4
            - 2 * P1 * P2 * Q2 / u2**2
            - P1**2 * Q1 / u2**2
            - P1 / u2**2
        ),
    )


def _grad2(s: CanonicalState) -> HamiltonianGradient:
    u1, u2, P1, Q1, P2, Q2 = s.u1, s.u2, s.P1, s.Q1, s.P2, s.Q2
    dP1 = (
        -1j / u2
        - P1 * Q2 / u2
        - u1 * P2 * Q2 / u2**2
        - u1 * P1 * Q1 / u2**2
        - Q1 / (2 * u2)
        - u1 / (2 * u2**2)
    )
    dQ1 = (
        1j * P2 / u2
        + u2 * Q1 * Q2 / 4
        + u1**3 / (8 * u2**2)
        - u1**2 * Q1 / (2 * u2)
        + 3 * u1 * Q1**2 / 8
        - u1 * P1**2 / (2 * u2**2)
        - P1 / (2 * u2)
    )
    dP2 = (
        1j * Q1 / u2
        - P2 * Q2**2 / u2
        - 1j * u1 / u2**2
        - u1 * P1 * Q2 / u2**2
        - Q2 / u2
    )
    dQ2 = (
        u2 * Q1**2 / 8
        + u2 * Q2 / 4
        - P1**2 / (2 * u2)
        - P2**2 * Q2 / u2
        - u1 * P1 * P2 / u2**2
        - u1**2 / (8 * u2)
        - P2 / u2
    )
    dU1 = (
        -1j * P2 / u2**2
        + 3 * u1**2 * Q1 / (8 * u2**2)
        - u1 * Q1**2 / (2 * u2)
        + Q1**3 / 8
        - P1 * P2 * Q2 / u2**2
        - P1**2 * Q1 / (2 * u2**2)
        - u1 * Q2 / (4 * u2)
        - P1 / (2 * u2**2)
    )
    dU2 = (
        1j * P1 / u2**2
        - 1j * P2 * Q1 / u2**2
        + Q1**2 * Q2 / 8
        + Q2**2 / 8
        + P1**2 * Q2 / (2 * u2**2)
        + P2**2 * Q2**2 / (2 * u2**2)
        + 2j * P2 * u1 / u2**3
        - u1**3 * Q1 / (4 * u2**3)
        + u1**2 * Q1**2 / (4 * u2**2)
        + 2 * u1 * P1 * P2 * Q2 / u2**3
        + u1 * P1**2 * Q1 / u2**3
        + u1**2 * Q2 / (8 * u2**2)
        + P2 * Q2 / u2**2
        + P1 * Q1 / (2 * u2**2)
        + u1 * P1 / u2**3
    )
    return HamiltonianGradient(dP1, dQ1, dP2, dQ2, dU1, dU2)


def gradient(s: CanonicalState, which: Literal[1, 2]) -> HamiltonianGradient:
    """Analytic gradient of H_which + h_which."""
    _check_u2(s.u2)
    if which == 1:
        return _grad1(s)
    if which == 2:
        return _grad2(s)
    raise ValueError(f"which must be 1 or 2, got {which!r}")


def constraint_q2(u2: float, P1: complex, Q1: complex) -> complex:
    return -(u2**2 * Q1**2 - 4 * P1**2) / (2 * u2**2)


def constraint_residual(s: CanonicalState) -> tuple[complex, complex]:
    """Return (P2, Q2 - Q2_constraint); both vanish on the physical branch."""
    _check_u2(s.u2)
    return s.P2, s.Q2 - constraint_q2(s.u2, s.P1, s.Q1)


def alternate_branch_residual(s: CanonicalState) -> tuple[complex, complex]:
    """Residual against the second (unphysical) solution of the parity relations."""
    _check_u2(s.u2)
    u2, P1, Q1 = s.u2, s.P1, s.Q1
    p2 = -(
        1j * u2**4 * Q1**4
        - 8j * u2**2 * P1**2 * Q1**2
        + 16j * P1**4
        - 8 * u2**2 * P1
    ) / (8 * u2**2 * Q1)
    q2 = 4j * P1 / (u2**2 * Q1**2 - 4 * P1**2)
    return s.P2 - p2, s.Q2 - q2


def reduce(s: CanonicalState, tol: float = CONSTRAINT_TOL) -> ReducedState:
    """Project a u1 = 0 constraint state onto (P, Q) = (P1, Q1).

    The Q2 residual is measured relative to max(1, |Q2|) since Q2 grows like
    u2^{-1/2} near the origin.
    """
    _check_u2(s.u2)
    if s.u1 != 0:
        raise ConstraintError(f"reduce requires u1 = 0, got {s.u1!r}")
    rp, rq = constraint_residual(s)
    if abs(rp) > tol or abs(rq) > tol * max(1.0, abs(s.Q2)):
        raise ConstraintError(f"state off the constraint surface: residual ({abs(rp):.3g}, {abs(rq):.3g})")
    return ReducedState(s.u2, s.P1, s.Q1)


def lift(r: ReducedState) -> CanonicalState:
    _check_u2(r.u2)
    return CanonicalState(0.0, r.u2, r.P, r.Q, 0j, constraint_q2(r.u2, r.P, r.Q))


def reduced_vector_field(u2: float, P: complex, Q: complex) -> tuple[complex, complex]:
    """(dP/du2, dQ/du2) of the reduced system, written out explicitly."""
    X = u2**2 * Q**2 - 4 * P**2
    dP = Q * X / (8 * u2) + P / (2 * u2)
    dQ = P * X / (2 * u2**3) - Q / (2 * u2) - 1j / u2
    return dP, dQ


def reduced_gradient(r: ReducedState) -> tuple[complex, complex]:
    """(d/dP, d/dQ) of H0 + h0."""
    _check_u2(r.u2)
    u2, P, Q = r.u2, r.P, r.Q
    X = u2**2 * Q**2 - 4 * P**2
    dP = X * P / (2 * u2**3) - 1j / u2 - Q / (2 * u2)
    dQ = -X * Q / (8 * u2) - P / (2 * u2)
    return dP, dQ


def dH1_du1_total_at_zero(
    r: ReducedState,
    order: Literal[1, 3],
    closed_form: Literal["derived", "published"] = "derived",
) -> complex:
    """Total u1-derivative of H1 along the u1-flow at u1 = 0, on the constraint.

    ``closed_form="published"`` selects the published third-order expression,
    which disagrees with flow differentiation (see README); the default
    ``"derived"`` form follows from iterating the u1-flow on the constraint
    surface.  Both coincide at order 1.
    """
    _check_u2(r.u2)
    u2, P, Q = r.u2, r.P, r.Q
    if order == 1:
        return P**2 / u2**2 - Q**2 / 4
    if order != 3:
        raise ValueError(f"order must be 1 or 3, got {order!r}")
    X = u2**2 * Q**2 - 4 * P**2
    if closed_form == "published":
        return (3 / u2**2 - 1 / (8 * u2**4)) * X**2 + 2j * P / u2**2
    if closed_form == "derived":
        return X**2 / (4 * u2**4) + 2j * P / u2**2
    raise ValueError(f"unknown closed_form {closed_form!r}")
