import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator
from scipy.linalg import LinAlgError, solve_banded

from errors import ParamsError, SolverError
from factory_profiles import GaussianFactory
from lab_config import get_settings
from lab_constants import *
from params_core import Params
from radial_toolkit import RadialGrid, RadialProfile, make_grid, sample_profile
from utils import log_lab_operation

logger = logging.getLogger(__name__)

CONTRACTIVITY_R_MINS = (1e-2, 1e-3, 1e-4)
RESIDUAL_WARNING = 1e-8


class EvolutionConfig(BaseModel):
    params: Params
    grid: RadialGrid
    dt: float = Field(gt=0)
    t_final: float = Field(gt=0)
    scheme: str = SCHEME_IMPLICIT_EULER
    boundary: str = BOUNDARY_DIRICHLET

    model_config = {"arbitrary_types_allowed": True}

    @field_validator("scheme")
    @classmethod
    def _check_scheme(cls, value: str) -> str:
        valid_schemes = [SCHEME_IMPLICIT_EULER, SCHEME_CRANK_NICOLSON]
        if value not in valid_schemes:
            raise ValueError(f"Invalid scheme: {value}. Valid schemes are: {valid_schemes}")
        return value

    @field_validator("boundary")
    @classmethod
    def _check_boundary(cls, value: str) -> str:
        if value != BOUNDARY_DIRICHLET:
            raise ValueError(f"Invalid boundary: {value}. Only {BOUNDARY_DIRICHLET} is supported")
        return value

    @model_validator(mode="after")
    def _check_times(self) -> "EvolutionConfig":
        if self.dt > self.t_final:
            raise ValueError(f"dt ≤ t_final required (got dt={self.dt}, t_final={self.t_final})")
        if self.grid.r_min <= 0:
            raise ValueError("grid r_min must be positive")
        return self

    @property
    def steps(self) -> int:
        return int(round(self.t_final / self.dt))

    @classmethod
    def from_document(cls, document: Dict[str, Any]) -> "EvolutionConfig":
        """Build a config from a JSON document; the grid is given as {r_min, r_max, M, layout}."""
        document = dict(document)
        settings = get_settings()
        grid_doc = dict(document.pop("grid", {}))
        grid = make_grid(float(grid_doc.get("r_min", settings.r_min)),
                         float(grid_doc.get("r_max", settings.r_max)),
                         int(grid_doc.get("M", settings.grid_m)),
                         grid_doc.get("layout", LAYOUT_LOG))
        document.setdefault("dt", settings.dt)
        document.setdefault("t_final", settings.t_final)
        return cls(grid=grid, **document)


class EvolutionTrace(BaseModel):
    times: List[float]
    lp_norms: List[float]
    minima: List[float]
    residuals: List[float]
    final_values: List[float] = Field(default_factory=list)
    growth_factor: float = 1.0
    max_step_growth: float = 0.0
    supercritical: bool = False

    @model_validator(mode="after")
    def _check_lengths(self) -> "EvolutionTrace":
        n = len(self.times)
        if not (len(self.lp_norms) == len(self.minima) == len(self.residuals) == n):
            raise ValueError("trace columns must have equal lengths")
        if any(v < 0 for v in self.lp_norms):
            raise ValueError("lp norms are nonnegative")
        return self

    def to_csv_rows(self) -> List[Dict[str, float]]:
        return [{"t": t, "lp_norm": n, "min_u": m, "residual": r}
                for t, n, m, r in zip(self.times, self.lp_norms, self.minima, self.residuals)]


class TridiagonalOperator(BaseModel):
    """Rows lower[i] u[i-1] + diag[i] u[i] + upper[i] u[i+1]; lower[0] and upper[-1] are unused."""
    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray

    model_config = {"arbitrary_types_allowed": True}

    def matvec(self, u: np.ndarray) -> np.ndarray:
        out = self.diag * u
        out[1:] += self.lower[1:] * u[:-1]
        out[:-1] += self.upper[:-1] * u[1:]
        return out

    def shifted(self, scale: float) -> "TridiagonalOperator":
        """I + scale * A."""
        return TridiagonalOperator(lower=scale * self.lower, diag=1.0 + scale * self.diag,
                                   upper=scale * self.upper)

    def banded(self) -> np.ndarray:
        """Storage for scipy.linalg.solve_banded with (l, u) = (1, 1)."""
        ab = np.zeros((3, len(self.diag)))
        ab[0, 1:] = self.upper[:-1]
        ab[1] = self.diag
        ab[2, :-1] = self.lower[1:]
        return ab

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.upper[:-1], 1) + np.diag(self.lower[1:], -1)


def radial_stencil(nodes: np.ndarray, N: int, alpha: float = 0.0, c: float = 0.0,
                   eta: Optional[float] = None, beta: Optional[float] = None) -> TridiagonalOperator:
    """Centered second-order discretization of (1+r^alpha)(u'' + (N-1)u'/r) + (c/r^2 - eta r^beta)u.

    Works on nonuniform nodes. The first and last rows are zero (Dirichlet ends).
    """
    r = np.asarray(nodes, dtype=float)
    if len(r) < 3:
        raise ParamsError("stencil needs at least three nodes")
    ri = r[1:-1]
    hl = ri - r[:-2]
    hr = r[2:] - ri
    hs = hl + hr
    diffusion = 1.0 + ri ** alpha
    drift = (N - 1) / ri

    lower = np.zeros_like(r)
    diag = np.zeros_like(r)
    upper = np.zeros_like(r)
    lower[1:-1] = diffusion * (2.0 - drift * hr) / (hl * hs)
    upper[1:-1] = diffusion * (2.0 + drift * hl) / (hr * hs)
    diag[1:-1] = diffusion * (-2.0 + drift * (hr - hl)) / (hl * hr) + c / ri ** 2
    if eta is not None:
        diag[1:-1] -= eta * ri ** beta
    return TridiagonalOperator(lower=lower, diag=diag, upper=upper)


def build_operator_matrix(config: EvolutionConfig) -> TridiagonalOperator:
    params = config.params
    return radial_stencil(config.grid.nodes, params.N, params.alpha, params.c, params.eta, params.beta)


def discrete_lp_norm(values: np.ndarray, grid: RadialGrid, p: float, N: int) -> float:
    """(sum_i w_i r_i^(N-1) |u_i|^p)^(1/p) with trapezoid weights w_i."""
    weights = grid.trapezoid_weights() * grid.nodes ** (N - 1)
    return float(weights @ np.abs(values) ** p) ** (1.0 / p)


class ThomasFactors(BaseModel):
    """No-pivot LU of a tridiagonal system: pivots beta and scaled upper band gamma.

    For an M-matrix (positive pivots, nonpositive off-diagonals) both sweeps
    only add nonnegative terms, so a nonnegative right-hand side gives a
    nonnegative solution exactly in floating point.
    """
    lower: List[float]
    beta: List[float]
    gamma: List[float]

    @classmethod
    def factor(cls, system: TridiagonalOperator) -> Optional["ThomasFactors"]:
        """Factors, or None when a pivot is not positive (pivoting is needed then)."""
        lower, diag, upper = system.lower.tolist(), system.diag.tolist(), system.upper.tolist()
        n = len(diag)
        beta, gamma = [0.0] * n, [0.0] * n
        beta[0] = diag[0]
        for i in range(1, n):
            if not beta[i - 1] > 0.0:
                return None
            gamma[i - 1] = upper[i - 1] / beta[i - 1]
            beta[i] = diag[i] - lower[i] * gamma[i - 1]
        if not (beta[-1] > 0.0 and math.isfinite(beta[-1])):
            return None
        return cls(lower=lower, beta=beta, gamma=gamma)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        lower, beta, gamma = self.lower, self.beta, self.gamma
        f = rhs.tolist()
        n = len(f)
        y = [0.0] * n
        y[0] = f[0] / beta[0]
        for i in range(1, n):
            y[i] = (f[i] - lower[i] * y[i - 1]) / beta[i]
        for i in range(n - 2, -1, -1):
            y[i] = y[i] - gamma[i] * y[i + 1]
        return np.array(y)


class StepSolver:
    """Solves the fixed step system, by Thomas sweeps when the system is an M-matrix."""

    def __init__(self, system: TridiagonalOperator):
        self.system = system
        self.factors = ThomasFactors.factor(system)
        self.ab = None
        if self.factors is None:
            logger.warning("⚠️ step matrix needs pivoting: falling back to banded LU, positivity not guaranteed")
            self.ab = system.banded()

    def __call__(self, rhs: np.ndarray, step: int) -> np.ndarray:
        if self.factors is not None:
            u = self.factors.solve(rhs)
        else:
            try:
                u = solve_banded((1, 1), self.ab, rhs)
            except (LinAlgError, ValueError) as e:
                raise SolverError(f"tridiagonal solve failed: {e}", step) from e
        if not np.all(np.isfinite(u)):
            raise SolverError("tridiagonal solve produced non-finite values", step)
        return u


@log_lab_operation(logging.INFO)
def evolve(config: EvolutionConfig, u0: RadialProfile) -> EvolutionTrace:
    """Time-step u_t = A u on the grid, recording the weighted p-norm, the minimum and the residual.

    Implicit Euler solves (I - dt A) u+ = u; Crank-Nicolson solves
    (I - dt/2 A) u+ = (I + dt/2 A) u and may undershoot zero transiently.

    Raises:
        SolverError: when a linear solve fails, with the step index.
    """
    grid, p, N = config.grid, config.params.p, config.params.N
    A = build_operator_matrix(config)
    theta = 1.0 if config.scheme == SCHEME_IMPLICIT_EULER else 0.5
    system = A.shifted(-theta * config.dt)
    explicit = A.shifted((1.0 - theta) * config.dt) if theta < 1.0 else None
    solve = StepSolver(system)

    u = np.array(sample_profile(u0, grid).values, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ParamsError("initial profile is not finite on the grid")
    u[0] = u[-1] = 0.0

    norm = discrete_lp_norm(u, grid, p, N)
    initial = norm
    times, norms, minima, residuals = [0.0], [norm], [float(u.min())], [0.0]
    max_step_growth = -math.inf
    logger.debug(f"🧮 evolve: {config.steps} {config.scheme} steps, M={grid.M}, dt={config.dt:g}")

    for step in range(1, config.steps + 1):
        rhs = explicit.matvec(u) if explicit is not None else u.copy()
        rhs[0] = rhs[-1] = 0.0
        u_next = solve(rhs, step)
        u_next[0] = u_next[-1] = 0.0
        residual = float(np.max(np.abs(system.matvec(u_next) - rhs)) / max(1.0, float(np.max(np.abs(rhs)))))
        if residual > RESIDUAL_WARNING:
            logger.warning(f"⚠️ step {step}: solve residual {residual:.2e}")

        next_norm = discrete_lp_norm(u_next, grid, p, N)
        if norm > 0:
            max_step_growth = max(max_step_growth, next_norm / norm - 1.0)
        u, norm = u_next, next_norm
        times.append(step * config.dt)
        norms.append(norm)
        minima.append(float(u.min()))
        residuals.append(residual)

    growth = max(norms) / initial if initial > 0 else 1.0
    supercritical = growth > SUPERCRITICAL_GROWTH
    if supercritical:
        logger.warning(f"⚠️ norm grew by {growth:.3g} within t={config.t_final:g}: flagged supercritical")
    return EvolutionTrace(times=times, lp_norms=norms, minima=minima, residuals=residuals,
                          final_values=u.tolist(), growth_factor=growth,
                          max_step_growth=0.0 if max_step_growth == -math.inf else max_step_growth,
                          supercritical=supercritical)


class ContractivityRow(BaseModel):
    c: float
    r_min: float
    growth_factor: float
    final_ratio: float
    max_step_growth: float
    min_value: float
    supercritical: bool

    def csv_row(self) -> Dict[str, Any]:
        return self.model_dump()


def _contractivity_run(params: Params, c: float, r_min: float, u0: RadialProfile, M: int, r_max: float,
                       dt: float, t_final: float, scheme: str) -> ContractivityRow:
    config = EvolutionConfig(params=params.model_copy(update={"c": c}),
                             grid=make_grid(r_min, r_max, M, LAYOUT_LOG),
                             dt=dt, t_final=t_final, scheme=scheme)
    trace = evolve(config, u0)
    initial = trace.lp_norms[0]
    return ContractivityRow(c=c, r_min=r_min, growth_factor=trace.growth_factor,
                            final_ratio=trace.lp_norms[-1] / initial if initial > 0 else 1.0,
                            max_step_growth=trace.max_step_growth, min_value=min(trace.minima),
                            supercritical=trace.supercritical)


@log_lab_operation(logging.INFO)
def contractivity_experiment(params: Params, c_values: Sequence[float],
                             r_mins: Sequence[float] = CONTRACTIVITY_R_MINS,
                             u0: Optional[RadialProfile] = None, M: Optional[int] = None,
                             r_max: Optional[float] = None, dt: Optional[float] = None,
                             t_final: Optional[float] = None, scheme: str = SCHEME_IMPLICIT_EULER,
                             workers: Optional[int] = None) -> List[ContractivityRow]:
    """Run evolve for every (c, r_min) pair; rows come back ordered by c, then r_min.

    Growth above the dissipativity threshold shows up as a trend in r_min,
    never as a proof of nonexistence.
    """
    settings = get_settings()
    u0 = u0 if u0 is not None else GaussianFactory.create_gaussian("standard")
    M = M or settings.grid_m
    r_max = r_max or settings.r_max
    dt = dt or settings.dt
    t_final = t_final or settings.t_final
    workers = workers or settings.workers
    jobs = [(c, r_min) for c in c_values for r_min in r_mins]

    def run(job):
        c, r_min = job
        return _contractivity_run(params, c, r_min, u0, M, r_max, dt, t_final, scheme)

    if workers <= 1:
        rows = [run(job) for job in jobs]
    else:
        rows: List[Optional[ContractivityRow]] = [None] * len(jobs)
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = {executor.submit(run, job): i for i, job in enumerate(jobs)}
            for future, index in futures.items():
                rows[index] = future.result()
    for row in rows:
        logger.info(f"📈 c={row.c:g} r_min={row.r_min:g}: growth {row.growth_factor:.6g}, "
                    f"max step growth {row.max_step_growth:.3e}")
    return rows


# ---------------------------------------------------------------------------
# Heat-kernel oracle
# ---------------------------------------------------------------------------

def gaussian_heat_solution(r: np.ndarray, t: float, N: int, diffusivity: float = 2.0) -> np.ndarray:
    """Solution of u_t = D Δu in R^N from u0 = e^{-r^2}."""
    spread = 1.0 + 4.0 * diffusivity * t
    return spread ** (-N / 2.0) * np.exp(-np.asarray(r, dtype=float) ** 2 / spread)


def heat_oracle_error(M: int = 2000, scheme: str = SCHEME_CRANK_NICOLSON, dt: float = 1e-4,
                      t_final: float = 0.1, N: int = 5, r_min: Optional[float] = None,
                      r_max: Optional[float] = None) -> float:
    """Relative weighted L2 error of the alpha = 0, c = 0 run (operator 2Δ) against the exact Gaussian."""
    settings = get_settings()
    grid = make_grid(r_min or settings.r_min, r_max or settings.r_max, M, LAYOUT_LOG)
    config = EvolutionConfig(params=Params(N=N, p=2.0, alpha=0.0, c=0.0), grid=grid,
                             dt=dt, t_final=t_final, scheme=scheme)
    trace = evolve(config, GaussianFactory.create_gaussian("standard"))
    exact = gaussian_heat_solution(grid.nodes, trace.times[-1], N, diffusivity=2.0)
    exact[0] = exact[-1] = 0.0
    error = discrete_lp_norm(np.asarray(trace.final_values) - exact, grid, 2.0, N)
    return error / discrete_lp_norm(exact, grid, 2.0, N)


def observed_order(errors: Sequence[float], ratio: float = 2.0) -> List[float]:
    """log_ratio(e_k / e_{k+1}) for successive refinements."""
    return [math.log(a / b) / math.log(ratio) for a, b in zip(errors[:-1], errors[1:])]
