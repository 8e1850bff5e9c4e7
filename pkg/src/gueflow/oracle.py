"""Exact finite-N partition function from orthogonal polynomials.

E_N(z, t) is the Hankel determinant of the moments of

    w(x) = exp(-z^2 / (2 x^2) + t / x - x^2 / 2),

which equals prod_{j<N} h_j, the product of the squared norms of the monic
orthogonal polynomials.  The recurrence coefficients are produced by the
discretized Stieltjes procedure on a composite Gauss-Legendre rule, so raw
moments (and their ill-conditioned Hankel matrices) never appear.

The log-derivatives come from the one-point function
K_N(x, x) = w(x) sum_{j<N} p_j(x)^2 with orthonormal p_j:

    d/dt log E_N = int K_N(x, x) / x dx,
    d/dz log E_N = -z int K_N(x, x) / x^2 dx.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

N_MAX = 50
REFINE_TOL = 1e-9
_LOG_CUTOFF = 700.0  # weight below e^-700 ~ 1e-304 is dropped

# panel counts at refinement level 0; each level doubles them
_GRADED_PANELS = 48
_BULK_PANELS = 64
_NODES_PER_PANEL = 20


class RefinementError(RuntimeError):
    pass


@dataclass(frozen=True)
class WeightParams:
    z: float
    t: float
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.z < 0:
            raise ValueError(f"z must be >= 0, got {self.z}")
        if self.z == 0 and self.t != 0:
            raise ValueError("t != 0 needs z > 0: e^{t/x} is not integrable at the origin")

    def log_weight(self, x: np.ndarray) -> np.ndarray:
        if self.z == 0:
            return -0.5 * x * x
        return -self.z**2 / (2 * x * x) + self.t / x - 0.5 * x * x


@dataclass
class OrthoBasis:
    nodes: np.ndarray
    measure: np.ndarray  # quadrature weight times w(x)
    alpha: np.ndarray
    beta: np.ndarray  # beta[0] = h_0, beta[j] = h_j / h_{j-1}
    log_h: np.ndarray
    kernel_diag: np.ndarray  # K_N(x, x) at the nodes, times the quadrature weight
    refinement: int
    cutoff: float
    half_width: float

    @property
    def h(self) -> np.ndarray:
        return np.exp(self.log_h)


@dataclass(frozen=True)
class OracleReport:
    N: int
    z: float
    t: float
    log_E: float
    dlogE_dt: float | None
    dlogE_dz: float | None
    node_count: int
    refinement_level: int
    est_error: float


def hole_radius(z: float, t: float) -> float:
    """Radius below which -z^2/(2x^2) + |t|/x < -700, i.e. the weight is negligible."""
    if z == 0:
        return 0.0
    # positive root in y = 1/x of z^2 y^2 / 2 - |t| y - 700 = 0
    y = (abs(t) + math.sqrt(t * t + 2 * _LOG_CUTOFF * z * z)) / (z * z)
    return 1.0 / y


def quadrature_grid(p: WeightParams, refinement: int = 0) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Symmetric composite Gauss-Legendre nodes on [-L, -d0] U [d0, L]."""
    L = max(8.0, 3.0 * math.sqrt(2 * p.N))
    d0 = hole_radius(p.z, p.t)
    scale = 2**refinement
    x, w = np.polynomial.legendre.leggauss(_NODES_PER_PANEL)
    if d0 > 0:
        inner = min(1.0, L / 2)
        edges = np.concatenate([
            np.geomspace(d0, inner, _GRADED_PANELS * scale + 1),
            np.linspace(inner, L, _BULK_PANELS * scale + 1)[1:],
        ])
    else:
        edges = np.linspace(0.0, L, (_GRADED_PANELS + _BULK_PANELS) * scale + 1)
    a, b = edges[:-1, None], edges[1:, None]
    xs = ((b - a) / 2 * x + (a + b) / 2).ravel()
    ws = ((b - a) / 2 * w).ravel()
    return np.concatenate([-xs[::-1], xs]), np.concatenate([ws[::-1], ws]), d0, L


def build_basis(p: WeightParams, refinement: int = 0) -> OrthoBasis:
    """Stieltjes procedure on the discretized weight."""
    nodes, qw, d0, L = quadrature_grid(p, refinement)
    lw = p.log_weight(nodes)
    m = qw * np.exp(lw)
    N = p.N
    alpha = np.zeros(N)
    beta = np.zeros(N)
    log_h = np.zeros(N)
    kern = np.zeros_like(nodes)
    # orthonormal polynomial values q_j(x) at the nodes
    h0 = m.sum()
    beta[0] = h0
    log_h[0] = math.log(h0)
    q_prev = np.zeros_like(nodes)
    q = np.full_like(nodes, 1 / math.sqrt(h0))
    for j in range(N):
        kern += m * q * q
        alpha[j] = np.sum(m * nodes * q * q)
        if j == N - 1:
            break
        r = (nodes - alpha[j]) * q - (math.sqrt(beta[j]) * q_prev if j > 0 else 0.0)
        # second pass of Gram-Schmidt against the two previous vectors
        r -= np.sum(m * r * q) * q
        if j > 0:
            r -= np.sum(m * r * q_prev) * q_prev
        nb = np.sum(m * r * r)
        if not nb > 0:
            raise RefinementError(f"nonpositive norm at degree {j + 1}")
        beta[j + 1] = nb
        log_h[j + 1] = log_h[j] + math.log(nb)
        q_prev, q = q, r / math.sqrt(nb)
    return OrthoBasis(nodes, m, alpha, beta, log_h, kern, refinement, d0, L)


def log_E(p: WeightParams, basis: OrthoBasis | None = None) -> float:
    basis = basis or build_basis(p)
    return float(basis.log_h.sum())


def log_derivs(p: WeightParams, basis: OrthoBasis | None = None) -> tuple[float, float]:
    """(d/dt log E_N, d/dz log E_N) from the Christoffel-Darboux one-point function."""
    if p.z <= 0:
        raise ValueError("log_derivs requires z > 0")
    basis = basis or build_basis(p)
    x, k = basis.nodes, basis.kernel_diag
    # at t = 0 the weight is even and the t-derivative vanishes identically
    dt = 0.0 if p.t == 0 else float(np.sum(k / x))
    return dt, float(-p.z * np.sum(k / (x * x)))


def kernel_trace(basis: OrthoBasis) -> float:
    return float(basis.kernel_diag.sum())


def oracle_report(p: WeightParams, refinement: int = 0, derivs: bool = True) -> OracleReport:
    """Evaluate at ``refinement`` and ``refinement + 1``; fail if the norms move by > 1e-9."""
    b0 = build_basis(p, refinement)
    b1 = build_basis(p, refinement + 1)
    drift = np.max(np.abs(np.expm1(b1.log_h - b0.log_h)))
    if drift > REFINE_TOL:
        raise RefinementError(
            f"h_j changed by {drift:.3g} (relative) between refinement levels {refinement} and {refinement + 1}"
        )
    le = log_E(p, b1)
    dt = dz = None
    if derivs and p.z > 0:
        dt, dz = log_derivs(p, b1)
    return OracleReport(
        p.N, p.z, p.t, le, dt, dz, len(b1.nodes), refinement + 1, abs(le - log_E(p, b0))
    )


def report_json(r: OracleReport) -> str:
    return json.dumps(asdict(r), sort_keys=True, default=_json_float)


def _json_float(x):
    raise TypeError(f"not serializable: {x!r}")


def cache_key(p: WeightParams, refinement: int) -> str:
    return f"N{p.N}_z{p.z:.17g}_t{p.t:.17g}_r{refinement}"


def save_coefficients(path, basis: OrthoBasis) -> None:
    """One ``alpha beta`` pair per line, 17 significant digits."""
    with open(path, "w") as fh:
        for a, b in zip(basis.alpha, basis.beta):
            fh.write(f"{a:.17g} {b:.17g}\n")


def load_coefficients(path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, ndmin=2)
    return data[:, 0].copy(), data[:, 1].copy()


def cached_coefficients(cache_dir, p: WeightParams, refinement: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Recurrence coefficients, read from ``cache_dir`` when present, else computed and stored."""
    path = Path(cache_dir) / f"{cache_key(p, refinement)}.txt"
    if path.exists():
        return load_coefficients(path)
    basis = build_basis(p, refinement)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_coefficients(path, basis)
    return basis.alpha.copy(), basis.beta.copy()


def log_E_from_coefficients(beta: np.ndarray) -> float:
    """log prod h_j with h_j = beta_0 beta_1 ... beta_j."""
    return float(np.cumsum(np.log(beta)).sum())
