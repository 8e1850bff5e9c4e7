"""Lax matrix A(zeta) and deformation matrices B_j rebuilt from canonical data.

    A(zeta) = A3 / zeta^3 + A2 / zeta^2 + A1 / zeta + i sigma3,
    A_j = [[a_j, b_j], [c_j, -a_j]],  a1 = 0.

The canonical coordinates fix A only up to the scale of b3; the remaining
entries follow from

    P1 = a2 + a3 Q1,  Q1 = -b2 / b3,  P2 = a3,  Q2 = -b1 / b3

and the three spectral constraints on the leading coefficients of det A.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .flows import IntegratorConfig, canonical_field, integrate
from .hamiltonian import CanonicalState, DomainError

SIGMA3 = np.diag([1.0, -1.0]).astype(complex)
SPECTRAL_TOL = 1e-8


class GaugeError(ValueError):
    pass


class PoleError(ValueError):
    pass


@dataclass(frozen=True)
class LaxData:
    u1: float
    u2: float
    a2: complex
    a3: complex
    b1: complex
    b2: complex
    b3: complex
    c1: complex
    c2: complex
    c3: complex

    def coefficient(self, j: int) -> np.ndarray:
        a = {1: 0j, 2: self.a2, 3: self.a3}[j]
        b = {1: self.b1, 2: self.b2, 3: self.b3}[j]
        c = {1: self.c1, 2: self.c2, 3: self.c3}[j]
        return np.array([[a, b], [c, -a]], dtype=complex)

    def spectral_residuals(self) -> tuple[complex, complex, complex]:
        a2, a3, b1, b2, b3, c1, c2, c3 = (
            self.a2, self.a3, self.b1, self.b2, self.b3, self.c1, self.c2, self.c3,
        )
        u1, u2 = self.u1, self.u2
        return (
            a3**2 + b3 * c3 - u2**2 / 4,
            2 * a2 * a3 + b2 * c3 + c2 * b3 + u1 * u2 / 2,
            b1 * c3 + c1 * b3 + b2 * c2 + a2**2 - u1**2 / 4,
        )

    def canonical(self) -> CanonicalState:
        Q1 = -self.b2 / self.b3
        return CanonicalState(
            self.u1, self.u2, self.a2 + self.a3 * Q1, Q1, self.a3, -self.b1 / self.b3
        )


def reconstruct(s: CanonicalState, gauge_b3: complex = 1.0) -> LaxData:
    if not s.u2 > 0:
        raise DomainError(f"u2 must be positive, got {s.u2!r}")
    b3 = complex(gauge_b3)
    if b3 == 0:
        raise GaugeError("gauge b3 must be nonzero")
    u1, u2 = s.u1, s.u2
    b2 = -s.Q1 * b3
    b1 = -s.Q2 * b3
    a3 = s.P2
    a2 = s.P1 - s.P2 * s.Q1
    c3 = (u2**2 / 4 - a3**2) / b3
    c2 = (-u1 * u2 / 2 - 2 * a2 * a3 - b2 * c3) / b3
    c1 = (u1**2 / 4 - a2**2 - b2 * c2 - b1 * c3) / b3
    out = LaxData(u1, u2, a2, a3, b1, b2, b3, c1, c2, c3)
    if not all(np.isfinite([a2, a3, b1, b2, c1, c2, c3])):
        raise GaugeError("singular elimination")
    return out


def eval_A(L: LaxData, zeta: complex) -> np.ndarray:
    if zeta == 0:
        raise PoleError("A has a pole at zeta = 0")
    return (
        L.coefficient(3) / zeta**3
        + L.coefficient(2) / zeta**2
        + L.coefficient(1) / zeta
        + 1j * SIGMA3
    )


def eval_B(L: LaxData, j: Literal[1, 2], zeta: complex) -> np.ndarray:
    if zeta == 0:
        raise PoleError("B_j has a pole at zeta = 0")
    if not L.u2 > 0:
        raise DomainError(f"u2 must be positive, got {L.u2!r}")
    A2, A3 = L.coefficient(2), L.coefficient(3)
    if j == 1:
        return A3 / (L.u2 * zeta)
    if j == 2:
        return -A3 / (2 * L.u2 * zeta**2) - (A2 + L.u1 / L.u2 * A3) / (2 * L.u2 * zeta)
    raise ValueError(f"j must be 1 or 2, got {j!r}")


def dB_dzeta(L: LaxData, j: Literal[1, 2], zeta: complex) -> np.ndarray:
    A2, A3 = L.coefficient(2), L.coefficient(3)
    if j == 1:
        return -A3 / (L.u2 * zeta**2)
    return A3 / (L.u2 * zeta**3) + (A2 + L.u1 / L.u2 * A3) / (2 * L.u2 * zeta**2)


def neg_det_poly(L: LaxData) -> np.ndarray:
    """Coefficients f_0..f_6 of zeta^6 * (-det A(zeta)), ascending powers."""
    # zeta^3 A = M(zeta), with M11 = a3 + a2 z + i z^3, M12 = b3 + b2 z + b1 z^2, M21 likewise
    m11 = np.array([L.a3, L.a2, 0, 1j], dtype=complex)
    m12 = np.array([L.b3, L.b2, L.b1, 0], dtype=complex)
    m21 = np.array([L.c3, L.c2, L.c1, 0], dtype=complex)
    # -det M = M11^2 + M12 M21 since M22 = -M11
    return np.convolve(m11, m11) + np.convolve(m12, m21)


def spectral_expansion(L: LaxData, n_terms: int = 5, tol: float = SPECTRAL_TOL) -> np.ndarray:
    """Laurent coefficients of the eigenvalue lambda(zeta) of A at zeta = 0.

    Entry k is the coefficient of zeta^{k-3}; the branch is the one with
    leading coefficient +u2/2.  So entries 0, 1, 3, 4 are the coefficients
    of zeta^-3, zeta^-2, zeta^0, zeta^1.
    """
    if L.u2 == 0:
        raise DomainError("leading coefficient vanishes at u2 = 0")
    scale = max(1.0, abs(L.u1), abs(L.u2)) ** 2
    res = L.spectral_residuals()
    if max(abs(r) for r in res) > tol * scale:
        raise ValueError(f"Lax data violates the spectral constraints: {res}")
    f = np.zeros(max(n_terms, 7), dtype=complex)
    f[:7] = neg_det_poly(L)
    g = np.zeros(n_terms, dtype=complex)
    # sqrt(f0) on the branch +u2/2; f0 = u2^2/4 up to the residual check above
    g[0] = np.sqrt(f[0])
    if (g[0] * np.conj(L.u2)).real < 0:
        g[0] = -g[0]
    for n in range(1, n_terms):
        acc = f[n] - np.dot(g[1:n], g[n - 1:0:-1])
        g[n] = acc / (2 * g[0])
    return g


def gauge_rate(s: CanonicalState, j: Literal[1, 2]) -> complex:
    """d(log b3)/du_j along the isomonodromic deformation (zeta^-3 part of compatibility)."""
    if j == 1:
        return -2 * s.P1 / s.u2
    return 1 / s.u2 + s.P2 * s.Q2 / s.u2 + s.u1 * s.P1 / s.u2**2


def _flow_with_gauge(
    s: CanonicalState, j: Literal[1, 2], target: float, cfg: IntegratorConfig
) -> tuple[CanonicalState, complex]:
    """Flow u_j to ``target``, carrying log b3 along.  Returns (state, log b3 increment)."""
    other = s.u2 if j == 1 else s.u1
    base = canonical_field(j, other)

    def f(u, y):
        st = CanonicalState(u, other, *y[:4]) if j == 1 else CanonicalState(other, u, *y[:4])
        return np.append(base(u, y[:4]), gauge_rate(st, j))

    start = s.u1 if j == 1 else s.u2
    y0 = np.append(s.coords(), 0j)
    _, ys, _, _ = integrate(f, start, target, y0, cfg)
    y = ys[-1]
    if j == 1:
        return CanonicalState.from_coords(target, s.u2, y[:4]), complex(y[4])
    return CanonicalState.from_coords(s.u1, target, y[:4]), complex(y[4])


def zero_curvature_residual(
    s: CanonicalState,
    j: Literal[1, 2],
    zeta: complex,
    delta: float = 1e-4,
    cfg: IntegratorConfig | None = None,
    gauge_b3: complex = 1.0,
) -> float:
    """Frobenius norm of d_j A - d_zeta B_j + [A, B_j] at ``zeta``.

    d_j A is a central difference over flows of length +-delta.  The b3 gauge
    is transported with the deformation rather than frozen: b3 is not a flow
    invariant, and freezing it leaves an O(1) sigma3-commutator residual.
    """
    cfg = cfg or IntegratorConfig()
    if zeta == 0:
        raise PoleError("zeta must avoid the pole at 0")
    start = s.u1 if j == 1 else s.u2
    sp, gp = _flow_with_gauge(s, j, start + delta, cfg)
    sm, gm = _flow_with_gauge(s, j, start - delta, cfg)
    Ap = eval_A(reconstruct(sp, gauge_b3 * np.exp(gp)), zeta)
    Am = eval_A(reconstruct(sm, gauge_b3 * np.exp(gm)), zeta)
    L = reconstruct(s, gauge_b3)
    A = eval_A(L, zeta)
    B = eval_B(L, j, zeta)
    R = (Ap - Am) / (2 * delta) - dB_dzeta(L, j, zeta) + (A @ B - B @ A)
    return float(np.linalg.norm(R))
