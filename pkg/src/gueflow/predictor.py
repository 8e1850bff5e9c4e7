"""Large-N predictions for log E_N(z, t) in the double-scaling regime.

With u1 = sqrt(N) t and u2 = N z^2,

    log E_N ~ (N/2) log 2 pi + sum_{j=1}^{N-1} log j!
              - int_0^{u2} H0 du2
              - sum_j [d^{2j-1} H1 / du1^{2j-1}]_{u1=0} u1^{2j} / (2j)!,

and the log-derivatives are d/dt log E_N ~ -sqrt(N) H1,
d/dz log E_N ~ -2 z N H2.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .flows import IntegratorConfig, _u2_integrate, reach, reduced_at
from .hamiltonian import (
    ReducedState,
    dH1_du1_total_at_zero,
    eval_H0,
    eval_H1,
    eval_H2,
    reduced_vector_field,
)
from .seeds import _series_PQ, seed_reduced

SERIES_SPLIT = 1e-4
_GL_NODES = 48


def log_prefactor(N: int) -> float:
    """(N/2) log 2 pi + sum_{j=1}^{N-1} log j!, accumulated through lgamma."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return 0.5 * N * math.log(2 * math.pi) + math.fsum(math.lgamma(j + 1) for j in range(1, N))


def _series_integral(u2_max: float) -> complex:
    """int_0^{u2_max} H0 du2 with H0 from the small-u2 series, in s = sqrt(u2)."""
    x, w = np.polynomial.legendre.leggauss(_GL_NODES)
    smax = math.sqrt(u2_max)
    s = smax / 2 * (x + 1)
    total = 0j
    for si, wi in zip(s, w):
        P, Q = _series_PQ(si * si)
        total += wi * 2 * si * eval_H0(ReducedState(si * si, P, Q))
    return total * smax / 2


def integral_H0_complex(u2_max: float, cfg: IntegratorConfig | None = None, eps: float = SERIES_SPLIT) -> complex:
    """int_0^{u2_max} H0 du2 before dropping the (tiny) imaginary part."""
    cfg = cfg or IntegratorConfig()
    if not u2_max > 0:
        raise ValueError("u2_max must be positive")
    if u2_max <= eps:
        return _series_integral(u2_max)
    head = _series_integral(eps)
    start = reduced_at(eps, cfg) if eps > cfg.seed_u2 else seed_reduced(eps)

    def f(u2, y):
        dP, dQ = reduced_vector_field(u2, y[0], y[1])
        return np.array([dP, dQ, eval_H0(ReducedState(u2, y[0], y[1]))], dtype=complex)

    # the accumulated integral rides along as a third ODE component
    _, ys, _, _, _ = _u2_integrate(f, eps, u2_max, np.array([start.P, start.Q, 0j]), cfg)
    return head + ys[-1][2]


def integral_H0(u2_max: float, cfg: IntegratorConfig | None = None, eps: float = SERIES_SPLIT) -> float:
    return integral_H0_complex(u2_max, cfg, eps).real


@dataclass
class Prediction:
    N: int
    z: float
    t: float
    u1: float
    u2: float
    log_prefactor: float
    integral_H0: float
    t_series_terms: list = field(default_factory=list)  # (power 2j, coefficient)
    log_E_pred: float = 0.0
    dlogE_dt_pred: float = 0.0
    dlogE_dz_pred: float = 0.0
    imag_residual: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def predict_logE(
    N: int,
    z: float,
    t: float,
    jmax_t: int = 2,
    cfg: IntegratorConfig | None = None,
    closed_form: str = "derived",
    with_derivs: bool = True,
) -> Prediction:
    cfg = cfg or IntegratorConfig()
    if N < 1:
        raise ValueError("N must be >= 1")
    if not z > 0:
        raise ValueError("z must be positive")
    if jmax_t not in (1, 2):
        raise ValueError("jmax_t must be 1 or 2")
    u1, u2 = math.sqrt(N) * t, N * z * z
    pref = log_prefactor(N)
    integ = integral_H0_complex(u2, cfg)
    imag = abs(integ.imag)
    r = reduced_at(u2, cfg)
    terms = []
    series = 0.0
    for j in range(1, jmax_t + 1):
        c = dH1_du1_total_at_zero(r, 2 * j - 1, closed_form=closed_form)
        coeff = -c * N**j / math.factorial(2 * j)
        imag = max(imag, abs(coeff.imag))
        terms.append((2 * j, coeff.real))
        series += coeff.real * t ** (2 * j)
    pred = Prediction(N, z, t, u1, u2, pref, integ.real, terms, pref - integ.real + series, imag_residual=imag)
    if with_derivs:
        dt, dz = predict_logderivs(N, z, t, cfg)
        pred.dlogE_dt_pred, pred.dlogE_dz_pred = dt, dz
    return pred


def predict_logderivs(N: int, z: float, t: float, cfg: IntegratorConfig | None = None) -> tuple[float, float]:
    """(-sqrt(N) H1, -2 z N H2) at (u1, u2) = (sqrt(N) t, N z^2)."""
    if not z > 0:
        raise ValueError("z must be positive")
    st = reach(math.sqrt(N) * t, N * z * z, cfg)
    return -math.sqrt(N) * eval_H1(st).real, -2 * z * N * eval_H2(st).real
