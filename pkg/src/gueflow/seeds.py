"""Small-u2 initial data for the flows.

Two families of expansions are provided:

* the u1 = 0 series (``seed_u1zero`` / ``seed_reduced``), in powers of
  sqrt(u2), which is the rigorous starting point of every flow;
* the general series at fixed ut1 = u1 / sqrt(u2) (``seed_general``), built
  from the coefficients phi_{+-,j}(ut1).  It is experimental; the readings
  of its two undefined symbols are discussed in ``seed_general``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .hamiltonian import CanonicalState, ReducedState

SEED_WINDOW = 1e-3
GAUSS_WINDOW = 10.0

_SQ2PI = math.sqrt(2 * math.pi)
_PI = math.pi


class WindowError(ValueError):
    """Raised when a series is evaluated outside its validity window."""


def gauss_integrals(x: float) -> tuple[float, float]:
    """Return (int_0^x e^{s^2/2} ds, int_0^x e^{-s^2/2} ds).

    The first is summed from its Taylor series directly; the second through
    e^{-x^2/2} sum x^{2k+1}/(2k+1)!!, which keeps every term positive and
    avoids the cancellation of the alternating series at large |x|.
    """
    x = float(x)
    if abs(x) > GAUSS_WINDOW:
        raise WindowError(f"|x| must be <= {GAUSS_WINDOW}, got {x}")
    if x == 0.0:
        return 0.0, 0.0
    y = 0.5 * x * x
    # int e^{s^2/2}: sum_k x^{2k+1} / ((2k+1) 2^k k!)
    term = x  # x * y^k / k!
    plus = 0.0
    k = 0
    while True:
        contrib = term / (2 * k + 1)
        plus += contrib
        if abs(contrib) <= 1e-17 * abs(plus):
            break
        k += 1
        term *= y / k
    # int e^{-s^2/2} = e^{-y} sum_k x^{2k+1} / (2k+1)!!
    term = x
    acc = x
    k = 0
    while True:
        k += 1
        term *= x * x / (2 * k + 1)
        acc += term
        if abs(term) <= 1e-17 * abs(acc):
            break
    minus = math.exp(-y) * acc
    return plus, minus


@dataclass(frozen=True)
class PhiTable:
    ut1: float
    phi_plus: np.ndarray
    phi_minus: np.ndarray
    varphi: complex

    @property
    def jmax(self) -> int:
        return len(self.phi_plus) - 1

    def jumps(self) -> np.ndarray:
        return self.phi_plus - self.phi_minus


def phi_table(ut1: float, jmax: int = 8) -> PhiTable:
    """Coefficients phi_{+-,j}(ut1), j = 0..jmax, and the auxiliary varphi."""
    if jmax < 1:
        raise ValueError("jmax must be >= 1")
    ut1 = float(ut1)
    ip, im = gauss_integrals(ut1)
    c = 1j / _SQ2PI
    tables = []
    for sign in (1.0, -1.0):
        phi = np.empty(jmax + 1, dtype=complex)
        phi[0] = sign * 0.5 + c * ip
        phi[1] = sign * ut1 / 2 + c * (ut1 * ip - math.exp(ut1 * ut1 / 2))
        for j in range(2, jmax + 1):
            phi[j] = (ut1 * phi[j - 1] - phi[j - 2]) / j
        tables.append(phi)
    return PhiTable(ut1, tables[0], tables[1], c * im)


@dataclass(frozen=True)
class SeedState:
    """A seeded canonical state with the highest power of sqrt(u2) kept per coordinate."""

    state: CanonicalState
    orders: dict = field(default_factory=dict)
    experimental: bool = False


def _check_window(u2: float, window: float) -> None:
    if not 0 < u2 <= window:
        raise WindowError(f"seed requires 0 < u2 <= {window}, got {u2}")


def _series_PQ(u2: float) -> tuple[complex, complex]:
    s = math.sqrt(u2)
    sq2 = math.sqrt(2)
    p3 = 2**2.5 / _PI**1.5 - sq2 / _PI**1.5 - 3 / _SQ2PI
    p4 = 2 / 3 + 8 / _PI**2 - 32 / (9 * _PI)
    P = 1j * (s / _SQ2PI + 2 * u2 / _PI + p3 * s**3 + p4 * u2**2)
    q1 = 2**1.5 / math.sqrt(_PI) + 2**3.5 / _PI**1.5 - 3 * sq2 / math.sqrt(_PI) - 2**1.5 / _PI**1.5
    q2 = 16 / _PI**2 - 64 / (9 * _PI)
    Q = 1j * (math.sqrt(2 / _PI) / s - 2 + 4 / _PI + q1 * s + q2 * u2)
    return P, Q


def _series_Q2(u2: float) -> complex:
    s = math.sqrt(u2)
    c1 = (
        3 * 2**2.5 / _PI**1.5
        + 7 * 2**1.5 / (3 * math.sqrt(_PI))
        - 2**2.5 / math.sqrt(_PI)
        - 2**4.5 / _PI**1.5
    )
    c2 = 32 / (9 * _PI) - 8 / _PI**2
    return complex(-(2**1.5) / (math.sqrt(_PI) * s) + 2 - 4 / _PI + c1 * s + c2 * u2)


_U1ZERO_ORDERS = {"P1": 4, "Q1": 2, "P2": None, "Q2": 2}


def seed_u1zero(u2: float, window: float = SEED_WINDOW) -> SeedState:
    """Truncated u1 = 0 expansion of all four coordinates; P2 is set to zero."""
    _check_window(u2, window)
    P, Q = _series_PQ(u2)
    st = CanonicalState(0.0, float(u2), P, Q, 0j, _series_Q2(u2))
    return SeedState(st, dict(_U1ZERO_ORDERS))


def seed_reduced(u2: float, window: float = SEED_WINDOW) -> ReducedState:
    """Truncated (P, Q) expansion of the reduced system."""
    _check_window(u2, window)
    P, Q = _series_PQ(u2)
    return ReducedState(float(u2), P, Q)


def seed_general(
    ut1: float,
    u2: float,
    window: float = SEED_WINDOW,
    reading: Literal["flow", "literal"] = "flow",
) -> SeedState:
    """General small-u2 expansion at fixed ut1 = u1 / sqrt(u2) (experimental).

    ``reading`` fixes the two symbols the printed expansion leaves open:

    * ``"literal"``: phi_1 = phi_{-,1} and
      varphi = (i / sqrt(2 pi)) int_0^ut1 e^{-s^2/2} ds, as printed;
    * ``"flow"`` (default): phi_1 = -(i / sqrt(2 pi)) e^{ut1^2/2}
      = phi_{-,1} - ut1 phi_{-,0}, and
      varphi = (i / sqrt(2 pi)) int_0^ut1 e^{+s^2/2} ds = phi_{-,0} + 1/2.

    Both agree at ut1 = 0.  Only the ``"flow"`` reading matches the u1-flow
    of the u1 = 0 seed as u2 -> 0 (see ``tests/test_seeds.py``).
    """
    _check_window(u2, window)
    if abs(ut1) > 3:
        raise WindowError(f"|ut1| must be <= 3, got {ut1}")
    tab = phi_table(ut1, jmax=2)
    f0, f1, f2 = tab.phi_minus[:3]
    if reading == "literal":
        p = f1
        vp = tab.varphi
    elif reading == "flow":
        p = f1 - ut1 * f0
        vp = f0 + 0.5
    else:
        raise ValueError(f"unknown reading {reading!r}")
    t = float(ut1)
    s = math.sqrt(u2)

    P1 = (
        p / (2 * f0) * s
        - 1j * (p * f1 / f0**2 + 2 * f0 + 1) * u2
        + (
            -2 * p * f1**2 / f0**3
            + p * (f2 - f1**2) / f0**2
            - f1 / f0
            + 4 * f1
            - 2 * p
            + 4 * f1 * f0
        )
        * s**3
        + 2j
        * (
            2 * p * f1**3 / f0**4
            + (p * f1 * (9 * f1**2 + 9 * p * f1 - 17 * f2) - p**2 * f2) / (9 * f0**3)
            + 2 * f1 * (3 * f1 + p) / (9 * f0**2)
            + (10 * f1**2 - 5 * p * f1 + p**2) / (3 * f0)
            + 6 * f1**2
            - 4 * p * f1
            + 1 / 3
            + 4 * f1**2 * f0
        )
        * u2**2
    )
    Q1 = (
        f1 / f0 / s
        - 2j * (p * f1 / f0**2 + 1)
        + 2 * (-2 * p * f1**2 / f0**3 + p * (f2 - f1**2) / f0**2 - f1 / f0 - 2 * f1) * s
        + 1j
        * (
            2 * p * f1**2 * (19 * f1 + 17 * p) / (9 * f0**4)
            + 4 * p * (9 * f1**3 + 9 * p * f1**2 - p * f2) / (9 * f0**3)
            + 6 * f1 * (4 * f1 + 7 * p) / (9 * f0**2)
            + 8 * p * f1 / f0
            + 4 / 3
            + 8 * f0 / 3
        )
        * u2
    )
    P2 = (
        vp * u2
        + 1j * (4 * vp**2 * t - t + 4 * vp * p) * s**3
        + (p * t + (3 * t**2 - 12 * p**2) * vp - 24 * p * t * vp**2 - 12 * t**2 * vp**3) * u2**2
        + 1j
        * (
            4 * p**2 * t
            - 8 * t**3 / 9
            + ((140 * t**2 - 28) / 9 * p - 32 * p**3) * vp
            + (104 * t**3 / 9 - 96 * p**2 * t) * vp**2
            - 96 * p * t**2 * vp**3
            - 32 * t**3 * vp**4
        )
        * s**5
    )
    Q2 = (
        2j * f1 / f0 / s
        + 4 * (f1**2 / f0**2 + (f1**2 - f2) / f0)
        - 2j
        * (
            (3 * p * f1**2 + f1**3) / f0**3
            + 6 * p * f1**2 / f0**2
            + (2 * t * f2 + 7 * f1) / (3 * f0)
            + 4 * f1
        )
        * s
        - (
            f1**2 * (33 * f1**2 + 79 * p * f1 + 32 * p**2) / (9 * f0**4)
            + (6 * f1**2 * (11 * f1**2 + 14 * p * f1 + 23 * p**2) - 2 * p**2 * f2) / (9 * f0**3)
            + f1 * (22 * f1 + 15 * p + 24 * p * f1**2) / (3 * f0**2)
            + (24 * f1**2 + 52 * p * f1) / (3 * f0)
            + 8 * f1**2
            + 5 / 3
            + 10 * f0 / 3
        )
        * u2
    )
    st = CanonicalState(t * s, float(u2), complex(P1), complex(Q1), complex(P2), complex(Q2))
    return SeedState(st, {"P1": 4, "Q1": 2, "P2": 5, "Q2": 2}, experimental=True)
