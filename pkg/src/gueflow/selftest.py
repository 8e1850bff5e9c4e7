"""Invariant checks across all modules, used by ``gueflow selftest``.

Each check returns a :class:`CheckResult`; ``run_selftest`` collects them.
The ``h1`` hook lets a caller substitute a perturbed H1 evaluator to confirm
the spectral check is sensitive to the transcription of H1.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import hamiltonian as ham
from .flows import IntegratorConfig, commutativity_defect, flow_reduced, flow_u1, flow_u2, reach
from .lax import reconstruct, spectral_expansion
from .oracle import WeightParams, build_basis, kernel_trace, log_E
from .predictor import log_prefactor
from .seeds import phi_table, seed_reduced


@dataclass
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name:<34s} value={self.value:.3e}  tol={self.tolerance:.1e}"


def _check(name: str, value: float, tol: float) -> CheckResult:
    return CheckResult(name, float(value), tol, bool(value < tol))


def _random_state(rng: np.random.Generator) -> ham.CanonicalState:
    v = rng.uniform(-2, 2, 4) + 1j * rng.uniform(-2, 2, 4)
    return ham.CanonicalState(rng.uniform(-2, 2), rng.uniform(0.1, 5), *v)


def check_gradients(n: int = 100, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        s = _random_state(rng)
        for j, f in ((1, lambda x: ham.eval_H1(x) + ham.eval_h1(x)),
                     (2, lambda x: ham.eval_H2(x) + ham.eval_h2(x))):
            g = ham.gradient(s, j)
            y = s.coords()
            for k, name in enumerate(("dP1", "dQ1", "dP2", "dQ2")):
                step = 1e-6
                yp, ym = y.copy(), y.copy()
                yp[k] += step
                ym[k] -= step
                fd = (f(ham.CanonicalState.from_coords(s.u1, s.u2, yp))
                      - f(ham.CanonicalState.from_coords(s.u1, s.u2, ym))) / (2 * step)
                an = getattr(g, name)
                worst = max(worst, abs(fd - an) / max(1.0, abs(an)))
    return _check("gradient vs finite differences", worst, 1e-6)


def check_spectral(n: int = 100, seed: int = 1, h1: Callable = ham.eval_H1) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        s = _random_state(rng)
        g = spectral_expansion(reconstruct(s, complex(rng.uniform(0.5, 2), rng.uniform(-1, 1))))
        scale = max(1.0, abs(h1(s)), abs(ham.eval_H2(s)))
        lead = max(abs(g[0] - s.u2 / 2), abs(g[1] + s.u1 / 2))
        worst = max(worst, lead, abs(g[3] - h1(s)) / scale, abs(g[4] + 2 * ham.eval_H2(s)) / scale)
    return _check("spectral expansion of A", worst, 1e-10)


def check_constraint_identity(n: int = 100, seed: int = 2) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        r = ham.ReducedState(rng.uniform(0.1, 5), *(rng.uniform(-2, 2, 2) + 1j * rng.uniform(-2, 2, 2)))
        s = ham.lift(r)
        h0, k0 = ham.eval_H0(r), ham.eval_h0(r)
        worst = max(worst, abs(ham.eval_H2(s) - h0) / max(1.0, abs(h0)),
                    abs(ham.eval_h2(s) - k0) / max(1.0, abs(k0)))
    return _check("H2 = H0 on the constraint", worst, 1e-12)


def check_phi_jumps() -> CheckResult:
    worst = 0.0
    for ut1 in (0.0, 0.5, -0.5, 2.0, -2.0):
        d = phi_table(ut1, 8).jumps()
        exact = [1, ut1, -0.5 + ut1**2 / 2, -0.5 * ut1 + ut1**3 / 6]
        worst = max(worst, max(abs(d[k] - exact[k]) for k in range(4)))
    return _check("phi jump relations", worst, 1e-12)


def check_constraint_drift(cfg: IntegratorConfig) -> CheckResult:
    tr = flow_u2(ham.lift(seed_reduced(cfg.seed_u2)), 4.0, cfg)
    worst = max(max(abs(v) for v in ham.constraint_residual(s)) for s in tr.states() if s.u2 >= 1e-4)
    return _check("constraint drift on u2-flow", worst, 1e-8)


def check_reduction(cfg: IntegratorConfig) -> CheckResult:
    r = seed_reduced(cfg.seed_u2)
    a = flow_reduced(r, 2.0, cfg).terminal
    b = ham.reduce(flow_u2(ham.lift(r), 2.0, cfg).terminal)
    return _check("reduced vs full flow", max(abs(a.P - b.P), abs(a.Q - b.Q)), 1e-8)


def check_commutativity(cfg: IntegratorConfig) -> CheckResult:
    return _check("commutativity defect (0.4,0.1,0.5)", commutativity_defect(0.4, 0.1, 0.5, cfg), 1e-6)


def check_parity(cfg: IntegratorConfig) -> CheckResult:
    base = reach(0.0, 0.5, cfg)
    hp = ham.eval_H1(flow_u1(base, 0.3, cfg).terminal)
    hm = ham.eval_H1(flow_u1(base, -0.3, cfg).terminal)
    return _check("H1 flow parity", abs(hp + hm), 1e-8)


def check_gaussian_baseline() -> CheckResult:
    worst = max(abs(log_E(WeightParams(0.0, 0.0, N)) - log_prefactor(N)) for N in range(1, 21))
    return _check("Gaussian baseline N<=20", worst, 1e-8)


def check_kernel_trace() -> CheckResult:
    p = WeightParams(math.sqrt(0.5 / 9), 0.4 / 3, 9)
    return _check("kernel trace = N", abs(kernel_trace(build_basis(p)) - p.N), 1e-10)


def run_selftest(cfg: IntegratorConfig | None = None, h1: Callable = ham.eval_H1) -> list[CheckResult]:
    cfg = cfg or IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)
    return [
        check_gradients(),
        check_spectral(h1=h1),
        check_constraint_identity(),
        check_phi_jumps(),
        check_constraint_drift(cfg),
        check_reduction(cfg),
        check_commutativity(IntegratorConfig()),
        check_parity(cfg),
        check_gaussian_baseline(),
        check_kernel_trace(),
    ]


def perturbed_h1(eps: float) -> Callable:
    """H1 with its -u2 Q1^3 / 4 coefficient shifted by ``eps``."""

    def h1(s: ham.CanonicalState) -> complex:
        return ham.eval_H1(s) - eps * s.u2 * s.Q1**3

    return h1


def summary(results: list[CheckResult]) -> dict:
    return {
        "passed": all(r.passed for r in results),
        "checks": [asdict(r) for r in results],
    }
