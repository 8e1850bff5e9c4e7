"""Adaptive integration of the u1-, u2- and reduced flows.

All integrations are complex-valued and run on scipy's embedded
Runge-Kutta steppers, driven step by step so that step counts, failures
and sample decimation stay under our control.  Near u2 = 0 the u2-flow is
integrated in s = sqrt(u2), where the u2^{-1/2} growth of Q1, Q2 becomes a
simple pole in s.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.integrate import DOP853, RK45

from .hamiltonian import (
    CanonicalState,
    DomainError,
    ReducedState,
    constraint_residual,
    eval_H1,
    eval_H2,
    gradient,
    lift,
    reduced_vector_field,
)
from .seeds import seed_reduced

SUBSTITUTION_THRESHOLD = 1e-3

_STEPPERS = {"RK45": RK45, "DOP853": DOP853}


class StepFailure(RuntimeError):
    """The adaptive stepper could not reach the target; ``last`` is the last good point."""

    def __init__(self, message: str, last_param: float, last_coords: np.ndarray):
        super().__init__(message)
        self.last_param = last_param
        self.last_coords = last_coords


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 500_000
    substitution: bool | None = None  # None: automatic below SUBSTITUTION_THRESHOLD
    method: str = "RK45"
    seed_u2: float = 1e-6
    max_samples: int = 1024

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")
        if self.method not in _STEPPERS:
            raise ValueError(f"unknown method {self.method!r}; choose from {sorted(_STEPPERS)}")
        if not 0 < self.seed_u2 <= 1e-3:
            raise ValueError("seed_u2 must lie in (0, 1e-3]")


@dataclass
class Trajectory:
    """Samples of a flow.  ``param`` is the flowed time (u1 or u2), strictly monotone."""

    kind: Literal["u1", "u2", "reduced"]
    fixed: float  # the other time: u2 for a u1-flow, u1 for a u2-flow
    param: np.ndarray
    coords: np.ndarray
    nsteps: int = 0
    nfev: int = 0
    substituted: bool = False
    stats: dict = field(default_factory=dict)

    def state_at(self, i: int) -> CanonicalState | ReducedState:
        p, y = float(self.param[i]), self.coords[i]
        if self.kind == "reduced":
            return ReducedState(p, complex(y[0]), complex(y[1]))
        if self.kind == "u1":
            return CanonicalState.from_coords(p, self.fixed, y)
        return CanonicalState.from_coords(self.fixed, p, y)

    @property
    def terminal(self):
        return self.state_at(len(self.param) - 1)

    def states(self):
        for i in range(len(self.param)):
            yield self.state_at(i)

    def to_csv(self, path) -> None:
        """Write parameter, Re/Im of each coordinate, H1, H2 and constraint residuals."""
        with open(path, "w", newline="") as fh:
            self.write_csv(fh)

    def write_csv(self, fh) -> None:
        if self.kind == "reduced":
            names = ["P", "Q"]
        else:
            names = ["P1", "Q1", "P2", "Q2"]
        header = ["parameter"]
        for n in names:
            header += [f"re_{n}", f"im_{n}"]
        if self.kind != "reduced":
            header += ["re_H1", "im_H1", "re_H2", "im_H2", "abs_res_P2", "abs_res_Q2"]
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, st in enumerate(self.states()):
            row = [_fmt(self.param[i])]
            for v in self.coords[i]:
                row += [_fmt(v.real), _fmt(v.imag)]
            if self.kind != "reduced":
                h1, h2 = eval_H1(st), eval_H2(st)
                rp, rq = constraint_residual(st)
                row += [_fmt(h1.real), _fmt(h1.imag), _fmt(h2.real), _fmt(h2.imag),
                        _fmt(abs(rp)), _fmt(abs(rq))]
            w.writerow(row)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _decimate(ts: list, ys: list, limit: int) -> tuple[np.ndarray, np.ndarray]:
    n = len(ts)
    if n > limit:
        idx = np.unique(np.linspace(0, n - 1, limit).round().astype(int))
        ts = [ts[i] for i in idx]
        ys = [ys[i] for i in idx]
    return np.asarray(ts, dtype=float), np.asarray(ys, dtype=complex)


def integrate(
    fun: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    t1: float,
    y0: np.ndarray,
    cfg: IntegratorConfig,
) -> tuple[list, list, int, int]:
    """Step ``y' = fun(t, y)`` from t0 to t1; return (ts, ys, nsteps, nfev)."""
    y0 = np.asarray(y0, dtype=complex)
    ts, ys = [t0], [y0.copy()]
    if t1 == t0:
        return ts, ys, 0, 0
    solver = _STEPPERS[cfg.method](fun, t0, y0, t1, rtol=cfg.rel_tol, atol=cfg.abs_tol)
    nsteps = 0
    while solver.status == "running":
        msg = solver.step()
        if solver.status == "failed":
            raise StepFailure(f"step failure at t={ts[-1]!r}: {msg}", ts[-1], ys[-1])
        nsteps += 1
        if not np.all(np.isfinite(solver.y)):
            raise StepFailure(f"non-finite state at t={solver.t!r}", ts[-1], ys[-1])
        ts.append(solver.t)
        ys.append(solver.y.copy())
        if nsteps >= cfg.max_steps and solver.status == "running":
            raise StepFailure(f"max_steps={cfg.max_steps} exceeded at t={solver.t!r}", ts[-1], ys[-1])
    ts[-1] = t1
    return ts, ys, nsteps, solver.nfev


def canonical_field(j: Literal[1, 2], other: float) -> Callable[[float, np.ndarray], np.ndarray]:
    """Hamilton's equations of H_j + h_j in the time u_j, the other time held at ``other``."""

    def f(u, y):
        if j == 1:
            st = CanonicalState(u, other, y[0], y[1], y[2], y[3])
        else:
            st = CanonicalState(other, u, y[0], y[1], y[2], y[3])
        return gradient(st, j).vector_field()

    return f


def _use_substitution(a: float, b: float, cfg: IntegratorConfig) -> bool:
    if cfg.substitution is None:
        return min(a, b) < SUBSTITUTION_THRESHOLD
    return cfg.substitution


def _u2_integrate(field_u2, u2a: float, u2b: float, y0, cfg: IntegratorConfig):
    if not (u2a > 0 and u2b > 0):
        raise DomainError(f"u2 endpoints must be positive, got {u2a!r} -> {u2b!r}")
    if _use_substitution(u2a, u2b, cfg):

        def fs(s, y):
            return 2 * s * field_u2(s * s, y)

        ts, ys, n, nfev = integrate(fs, math.sqrt(u2a), math.sqrt(u2b), y0, cfg)
        ts = [t * t for t in ts]
        ts[0], ts[-1] = u2a, u2b
        return ts, ys, n, nfev, True
    ts, ys, n, nfev = integrate(field_u2, u2a, u2b, y0, cfg)
    return ts, ys, n, nfev, False


def flow_u2(s: CanonicalState, u2_target: float, cfg: IntegratorConfig | None = None) -> Trajectory:
    cfg = cfg or IntegratorConfig()
    ts, ys, n, nfev, sub = _u2_integrate(canonical_field(2, s.u1), s.u2, float(u2_target), s.coords(), cfg)
    param, coords = _decimate(ts, ys, cfg.max_samples)
    return Trajectory("u2", s.u1, param, coords, n, nfev, sub)


def flow_u1(s: CanonicalState, u1_target: float, cfg: IntegratorConfig | None = None) -> Trajectory:
    cfg = cfg or IntegratorConfig()
    if not s.u2 > 0:
        raise DomainError(f"u2 must be positive, got {s.u2!r}")
    ts, ys, n, nfev = integrate(canonical_field(1, s.u2), s.u1, float(u1_target), s.coords(), cfg)
    param, coords = _decimate(ts, ys, cfg.max_samples)
    return Trajectory("u1", s.u2, param, coords, n, nfev)


def _reduced_field(u2, y):
    dP, dQ = reduced_vector_field(u2, y[0], y[1])
    return np.array([dP, dQ], dtype=complex)


def flow_reduced(r: ReducedState, u2_target: float, cfg: IntegratorConfig | None = None) -> Trajectory:
    cfg = cfg or IntegratorConfig()
    ts, ys, n, nfev, sub = _u2_integrate(_reduced_field, r.u2, float(u2_target), r.coords(), cfg)
    param, coords = _decimate(ts, ys, cfg.max_samples)
    return Trajectory("reduced", 0.0, param, coords, n, nfev, sub)


def reduced_at(u2: float, cfg: IntegratorConfig | None = None) -> ReducedState:
    """Reduced state on the physical branch at ``u2``, flowed from the series seed."""
    cfg = cfg or IntegratorConfig()
    return flow_reduced(seed_reduced(cfg.seed_u2), u2, cfg).terminal


def reach(u1: float, u2: float, cfg: IntegratorConfig | None = None) -> CanonicalState:
    """Canonical state at (u1, u2): lifted seed, u2-flow at u1 = 0, then u1-flow."""
    cfg = cfg or IntegratorConfig()
    if not u2 > 0:
        raise DomainError(f"u2 must be positive, got {u2!r}")
    st = lift(seed_reduced(cfg.seed_u2))
    st = flow_u2(st, u2, cfg).terminal
    if u1 != 0:
        st = flow_u1(st, u1, cfg).terminal
    return st


def commutativity_defect(u1: float, u2a: float, u2b: float, cfg: IntegratorConfig | None = None) -> float:
    """Endpoint gap between the u1-then-u2 and u2-then-u1 paths from reach(0, u2a)."""
    cfg = cfg or IntegratorConfig()
    if not 0 < u2a < u2b:
        raise ValueError("need 0 < u2a < u2b")
    base = reach(0.0, u2a, cfg)
    a = flow_u2(flow_u1(base, u1, cfg).terminal, u2b, cfg).terminal
    b = flow_u1(flow_u2(base, u2b, cfg).terminal, u1, cfg).terminal
    return float(np.max(np.abs(a.coords() - b.coords())))
