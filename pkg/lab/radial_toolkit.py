import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy import integrate
from scipy.optimize import brentq
from scipy.special import gamma as gamma_fn

from errors import ParamsError, QuadratureError
from lab_config import get_settings
from lab_constants import *

logger = logging.getLogger(__name__)

MIN_GRID_NODES = 16
ROMBERG_START_INTERVALS = 16
ROMBERG_MIN_LEVELS = 4
MAX_PANEL_NODES = 2 ** 22
TAIL_SCAN_LIMIT = 1e4
TAIL_RELATIVE = 1e-16
QUAD_SUBINTERVALS = 200
QUAD_MIN_RTOL = 1e-13
CUTOFF_EDGE = 2e-3  # 1 - x^2 below this leaves chi under e^-499

RadialFunction = Callable[[np.ndarray], np.ndarray]


class RadialGrid(BaseModel):
    nodes: np.ndarray
    layout: str
    r_min: float
    r_max: float

    model_config = {"arbitrary_types_allowed": True}

    @model_validator(mode="after")
    def _check_nodes(self) -> "RadialGrid":
        if len(self.nodes) < MIN_GRID_NODES:
            raise ValueError(f"grid needs M ≥ {MIN_GRID_NODES} nodes")
        if self.nodes[0] <= 0:
            raise ValueError("grid nodes must be positive")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("grid nodes must be strictly increasing")
        return self

    @property
    def M(self) -> int:
        return len(self.nodes)

    def trapezoid_weights(self) -> np.ndarray:
        h = np.diff(self.nodes)
        w = np.zeros_like(self.nodes)
        w[:-1] += 0.5 * h
        w[1:] += 0.5 * h
        return w


class QuadratureResult(BaseModel):
    value: float
    abs_error_estimate: float = Field(ge=0)
    node_count: int

    def __add__(self, other: "QuadratureResult") -> "QuadratureResult":
        return QuadratureResult(value=self.value + other.value,
                                abs_error_estimate=self.abs_error_estimate + other.abs_error_estimate,
                                node_count=self.node_count + other.node_count)

    def scaled(self, factor: float) -> "QuadratureResult":
        return QuadratureResult(value=self.value * factor,
                                abs_error_estimate=self.abs_error_estimate * abs(factor),
                                node_count=self.node_count)


def make_grid(r_min: float, r_max: float, M: int, layout: str = LAYOUT_LOG) -> RadialGrid:
    """Build a radial grid of M nodes on [r_min, r_max].

    Raises:
        ParamsError: for r_min ≤ 0, r_max ≤ r_min, M < 16 or an unknown layout.
    """
    if not (0 < r_min < r_max):
        raise ParamsError(f"0 < r_min < r_max required (got r_min={r_min}, r_max={r_max})")
    if M < MIN_GRID_NODES:
        raise ParamsError(f"M ≥ {MIN_GRID_NODES} required (got M={M})")
    if layout == LAYOUT_LOG:
        nodes = np.geomspace(r_min, r_max, M)
    elif layout == LAYOUT_UNIFORM:
        nodes = np.linspace(r_min, r_max, M)
    else:
        raise ParamsError(f"Invalid layout: {layout}. Valid layouts are: {[LAYOUT_LOG, LAYOUT_UNIFORM]}")
    return RadialGrid(nodes=nodes, layout=layout, r_min=r_min, r_max=r_max)


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------

@dataclass
class RadialProfile:
    """Radially symmetric test function on (0, ∞)."""
    amplitude: float = 1.0
    kind: str = field(default=KIND_ANALYTIC, init=False)
    family: str = field(default="", init=False)

    def evaluate(self, r: np.ndarray, order: int = 0) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, r: np.ndarray) -> np.ndarray:
        return self.evaluate(r, 0)

    def breakpoints(self) -> List[float]:
        return []

    def family_parameters(self) -> dict:
        return {}

    def descriptor(self) -> str:
        items = dict(self.family_parameters())
        if self.amplitude != 1.0:
            items["A"] = self.amplitude
        body = ",".join(f"{k}={v:g}" for k, v in items.items())
        return f"{self.family}:{body}" if body else self.family

    def scaled(self, factor: float) -> "RadialProfile":
        return replace(self, amplitude=self.amplitude * factor)

    def laplacian(self, r: np.ndarray, N: int) -> np.ndarray:
        return self.evaluate(r, 2) + (N - 1) * self.evaluate(r, 1) / r

    def to_dict(self) -> dict:
        return {"kind": self.kind, "family": self.family, "descriptor": self.descriptor()}


def _check_order(order: int) -> None:
    if order not in (0, 1, 2):
        raise ParamsError(f"derivative order must be 0, 1 or 2 (got {order})")


@dataclass
class GaussianProfile(RadialProfile):
    a: float = 1.0

    def __post_init__(self):
        self.family = FAMILY_GAUSSIAN
        if self.a <= 0:
            raise ParamsError("gaussian rate a must be positive")

    def family_parameters(self) -> dict:
        return {"a": self.a}

    def evaluate(self, r, order=0):
        _check_order(order)
        r = np.asarray(r, dtype=float)
        u = self.amplitude * np.exp(-self.a * r * r)
        if order == 0:
            return u
        if order == 1:
            return -2.0 * self.a * r * u
        return (4.0 * self.a ** 2 * r * r - 2.0 * self.a) * u


@dataclass
class PowerExponentialProfile(RadialProfile):
    """A r^s exp(-r/q); with s = beta and q = p this is the sharpness family."""
    s: float = 0.0
    q: float = 1.0

    def __post_init__(self):
        self.family = FAMILY_POWER_EXPONENTIAL
        if self.q <= 0:
            raise ParamsError("power_exponential scale q must be positive")

    def family_parameters(self) -> dict:
        return {"s": self.s, "q": self.q}

    def evaluate(self, r, order=0):
        _check_order(order)
        r = np.asarray(r, dtype=float)
        u = self.amplitude * r ** self.s * np.exp(-r / self.q)
        if order == 0:
            return u
        log_slope = self.s / r - 1.0 / self.q
        if order == 1:
            return log_slope * u
        return (log_slope ** 2 - self.s / r ** 2) * u


@dataclass
class PowerGaussianProfile(RadialProfile):
    s: float = 1.0
    a: float = 1.0

    def __post_init__(self):
        self.family = FAMILY_POWER_GAUSSIAN
        if self.a <= 0:
            raise ParamsError("power_gaussian rate a must be positive")

    def family_parameters(self) -> dict:
        return {"s": self.s, "a": self.a}

    def evaluate(self, r, order=0):
        _check_order(order)
        r = np.asarray(r, dtype=float)
        u = self.amplitude * r ** self.s * np.exp(-self.a * r * r)
        if order == 0:
            return u
        log_slope = self.s / r - 2.0 * self.a * r
        if order == 1:
            return log_slope * u
        return (log_slope ** 2 - self.s / r ** 2 - 2.0 * self.a) * u


@dataclass
class CutoffPowerProfile(RadialProfile):
    """A r^s chi(x) with the bump chi(x) = exp(1 - 1/(1 - x^2)).

    x = (r - r0)/w on the linear scale, x = ln(r/r0)/w on the log scale.
    chi is 1 for x ≤ 0 and 0 for x ≥ 1; with r0 = 0 on the linear scale the
    bump is smooth down to the origin.
    """
    s: float = 0.0
    w: float = 1.0
    r0: float = 0.0
    scale: str = CUTOFF_LINEAR

    def __post_init__(self):
        self.family = FAMILY_CUTOFF_POWER
        if self.w <= 0:
            raise ParamsError("cutoff width w must be positive")
        if self.scale not in (CUTOFF_LINEAR, CUTOFF_LOG):
            raise ParamsError(f"Invalid cutoff scale: {self.scale}. Valid scales are: {[CUTOFF_LINEAR, CUTOFF_LOG]}")
        if self.scale == CUTOFF_LOG and self.r0 <= 0:
            raise ParamsError("log-scale cutoff needs r0 > 0")

    def family_parameters(self) -> dict:
        params = {"s": self.s, "w": self.w}
        if self.r0:
            params["r0"] = self.r0
        return params

    def descriptor(self) -> str:
        text = super().descriptor()
        return text + ",scale=log" if self.scale == CUTOFF_LOG else text

    def support_end(self) -> float:
        if self.scale == CUTOFF_LOG:
            return self.r0 * math.exp(self.w)
        return self.r0 + self.w

    def breakpoints(self) -> List[float]:
        points = [self.support_end()]
        if self.r0 > 0:
            points.insert(0, self.r0)
        return points

    def _x(self, r):
        if self.scale == CUTOFF_LOG:
            return np.log(r / self.r0) / self.w, 1.0 / (self.w * r), -1.0 / (self.w * r * r)
        return (r - self.r0) / self.w, np.full_like(r, 1.0 / self.w), np.zeros_like(r)

    def _chi(self, r):
        x, dx, ddx = self._x(r)
        chi = np.where(x <= 0, 1.0, 0.0)
        d1 = np.zeros_like(r)
        d2 = np.zeros_like(r)
        active = (x > 0) & (1.0 - x * x > CUTOFF_EDGE)
        xa = x[active]
        one_minus = 1.0 - xa * xa
        c = np.exp(1.0 - 1.0 / one_minus)
        h1 = -2.0 * xa / one_minus ** 2
        h2 = -2.0 / one_minus ** 2 - 8.0 * xa * xa / one_minus ** 3
        chi[active] = c
        d1[active] = h1 * c * dx[active]
        d2[active] = (h2 + h1 * h1) * c * dx[active] ** 2 + h1 * c * ddx[active]
        return chi, d1, d2

    def evaluate(self, r, order=0):
        _check_order(order)
        r = np.atleast_1d(np.asarray(r, dtype=float))
        chi, d1, d2 = self._chi(r)
        power = self.amplitude * r ** self.s
        if order == 0:
            return power * chi
        if order == 1:
            return power * (self.s / r * chi + d1)
        return power * (self.s * (self.s - 1.0) / r ** 2 * chi + 2.0 * self.s / r * d1 + d2)


@dataclass
class LinearGaussianProfile(RadialProfile):
    """A (1 - r/r1) exp(-a r^2); changes sign at r1."""
    r1: float = 1.0
    a: float = 1.0

    def __post_init__(self):
        self.family = FAMILY_LINEAR_GAUSSIAN
        if self.r1 <= 0 or self.a <= 0:
            raise ParamsError("linear_gaussian needs r1 > 0 and a > 0")

    def family_parameters(self) -> dict:
        return {"r1": self.r1, "a": self.a}

    def breakpoints(self) -> List[float]:
        return [self.r1]

    def evaluate(self, r, order=0):
        _check_order(order)
        r = np.asarray(r, dtype=float)
        g = self.amplitude * np.exp(-self.a * r * r)
        line = 1.0 - r / self.r1
        if order == 0:
            return line * g
        g1 = -2.0 * self.a * r * g
        if order == 1:
            return -g / self.r1 + line * g1
        g2 = (4.0 * self.a ** 2 * r * r - 2.0 * self.a) * g
        return -2.0 * g1 / self.r1 + line * g2


@dataclass
class ZeroProfile(RadialProfile):
    def __post_init__(self):
        self.family = "zero"

    def evaluate(self, r, order=0):
        _check_order(order)
        return np.zeros_like(np.asarray(r, dtype=float))


@dataclass(eq=False)
class SampledProfile(RadialProfile):
    """Values on a grid; derivatives come from finite differences."""
    grid: Optional[RadialGrid] = None
    values: Optional[np.ndarray] = None

    def __post_init__(self):
        self.kind = KIND_SAMPLED
        self.family = FAMILY_SAMPLED
        if self.grid is None or self.values is None:
            raise ParamsError("sampled profile needs a grid and values")
        if len(self.values) != self.grid.M:
            raise ParamsError("sampled values must match the grid size")
        self._cache = {}

    def family_parameters(self) -> dict:
        return {"M": self.grid.M}

    def scaled(self, factor: float) -> "SampledProfile":
        return SampledProfile(grid=self.grid, values=self.values * factor)

    def nodal(self, order: int = 0) -> np.ndarray:
        _check_order(order)
        if order == 0:
            return self.values
        if order not in self._cache:
            if order == 1:
                self._cache[1] = np.gradient(self.values, self.grid.nodes, edge_order=2)
            else:
                self._cache[2] = second_difference(self.values, self.grid.nodes)
        return self._cache[order]

    def evaluate(self, r, order=0):
        return np.interp(np.asarray(r, dtype=float), self.grid.nodes, self.nodal(order),
                         left=np.nan, right=np.nan)


def _one_sided_second_weights(x: np.ndarray) -> np.ndarray:
    """Weights for u''(x[0]) from four nodes x[0..3] (exact for cubics)."""
    d = x - x[0]
    vander = np.vstack([d ** k for k in range(4)])
    rhs = np.array([0.0, 0.0, 2.0, 0.0])
    return np.linalg.solve(vander, rhs)


def second_difference(values: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    """Second derivative on a nonuniform grid.

    Centered three-point stencil inside, four-point one-sided stencils at the ends.
    """
    h = np.diff(nodes)
    hl, hr = h[:-1], h[1:]
    out = np.empty_like(values, dtype=float)
    out[1:-1] = 2.0 * (hl * values[2:] - (hl + hr) * values[1:-1] + hr * values[:-2]) / (hl * hr * (hl + hr))
    left = _one_sided_second_weights(nodes[:4])
    right = _one_sided_second_weights(nodes[-4:][::-1])
    out[0] = left @ values[:4]
    out[-1] = right @ values[-4:][::-1]
    return out


@dataclass
class DerivedProfile(RadialProfile):
    """Closed-form derivative of an analytic profile."""
    base: Optional[RadialProfile] = None
    order: int = 1

    def __post_init__(self):
        self.family = f"d{self.order}"

    def descriptor(self) -> str:
        return f"d{self.order}[{self.base.descriptor()}]"

    def breakpoints(self) -> List[float]:
        return self.base.breakpoints()

    def evaluate(self, r, order=0):
        total = self.order + order
        if total > 2:
            raise ParamsError("analytic families provide derivatives up to order 2")
        return self.amplitude * self.base.evaluate(r, total)


def derivative(u: RadialProfile, order: int = 1) -> RadialProfile:
    """Derivative profile: closed form for analytic families, finite differences for sampled."""
    if order not in (1, 2):
        raise ParamsError(f"derivative order must be 1 or 2 (got {order})")
    if isinstance(u, SampledProfile):
        return SampledProfile(grid=u.grid, values=u.nodal(order).copy())
    return DerivedProfile(base=u, order=order)


def sample_profile(u: RadialProfile, grid: RadialGrid) -> SampledProfile:
    return SampledProfile(grid=grid, values=np.asarray(u.evaluate(grid.nodes), dtype=float))


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

def surface_measure(N: int) -> float:
    """Measure of the unit sphere in R^N."""
    return float(2.0 * math.pi ** (N / 2.0) / gamma_fn(N / 2.0))


def _quad_panel(phi: RadialFunction, a: float, b: float, tol: float) -> Optional[Tuple[float, float, int]]:
    """QUADPACK on [a, b]; None when it warns or misses the requested tolerance."""
    calls = [0]

    def scalar(t: float) -> float:
        calls[0] += 1
        return float(phi(np.array([t]))[0])

    with warnings.catch_warnings(record=True) as messages:
        warnings.simplefilter("always", category=integrate.IntegrationWarning)
        value, err = integrate.quad(scalar, a, b, epsabs=0.0, epsrel=max(tol, QUAD_MIN_RTOL), limit=QUAD_SUBINTERVALS)

    trouble = [m for m in messages if issubclass(m.category, integrate.IntegrationWarning)]
    for message in trouble:
        logger.debug(f"🔁 quad on [{a:g}, {b:g}]: {message.message}")
    if trouble or not (math.isfinite(value) and math.isfinite(err)) or err > tol * abs(value):
        return None
    return value, err, calls[0]


def _romberg_panel(phi: RadialFunction, a: float, b: float, tol: float, max_levels: int) -> Tuple[float, float, int]:
    n = ROMBERG_START_INTERVALS
    h = (b - a) / n
    y = phi(np.linspace(a, b, n + 1))
    if not np.all(np.isfinite(y)):
        raise QuadratureError(f"non-finite integrand on [{a:g}, {b:g}]", math.nan, math.inf, n + 1)
    trap = h * (y.sum() - 0.5 * (y[0] + y[-1]))
    scale = h * (np.abs(y).sum() - 0.5 * (abs(y[0]) + abs(y[-1])))
    prev = [trap]
    err = math.inf
    for level in range(1, max_levels):
        mids = phi(a + h * (np.arange(n) + 0.5))
        if not np.all(np.isfinite(mids)):
            raise QuadratureError(f"non-finite integrand on [{a:g}, {b:g}]", prev[-1], math.inf, 2 * n + 1)
        h *= 0.5
        n *= 2
        trap = 0.5 * prev[0] + h * mids.sum()
        scale = 0.5 * scale + h * np.abs(mids).sum()
        row = [trap]
        for k in range(1, level + 1):
            row.append(row[k - 1] + (row[k - 1] - prev[k - 1]) / (4.0 ** k - 1.0))
        err = abs(row[-1] - prev[-1])
        prev = row
        if level >= ROMBERG_MIN_LEVELS - 1 and err <= tol * max(scale, 1e-300):
            return row[-1], err, n + 1
        if 2 * n + 1 > MAX_PANEL_NODES:
            break
    logger.error(f"❌ Romberg did not converge on [{a:g}, {b:g}] (err={err:.3e}, nodes={n + 1})")
    raise QuadratureError("quadrature failure: no convergence after maximum refinement", prev[-1], err, n + 1)


def _auto_r_max(f: RadialFunction, r_min: float) -> Optional[float]:
    r = np.geomspace(r_min, TAIL_SCAN_LIMIT, 4001)
    g = np.abs(f(r)) * r
    if not np.all(np.isfinite(g)):
        g = np.where(np.isfinite(g), g, 0.0)
    peak = g.max()
    if peak == 0.0:
        return None
    above = np.nonzero(g > TAIL_RELATIVE * peak)[0]
    last = above[-1]
    if last >= len(r) - 2:
        raise QuadratureError(f"integrand does not decay before r={TAIL_SCAN_LIMIT:g}", math.nan, math.inf, len(r))
    return float(r[last + 2])


def _origin_tail(f: RadialFunction, r_min: float, scale: float, tol: float) -> float:
    """Integral over (0, r_min) assuming f behaves like a power of r there."""
    f1, f2 = (float(v) for v in f(np.array([r_min, 2.0 * r_min])))
    if f1 == 0.0 or abs(r_min * f1) <= tol * scale * 1e-3:
        return 0.0
    if f2 == 0.0 or np.sign(f1) != np.sign(f2):
        logger.warning(f"⚠️ origin tail skipped: no power law near r={r_min:g}")
        return 0.0
    exponent = math.log2(f2 / f1)
    if exponent <= -1.0:
        raise QuadratureError(f"integrand not integrable at the origin (exponent {exponent:.3f})",
                              math.nan, math.inf, 2)
    return r_min * f1 / (exponent + 1.0)


def _integrate_on_grid(f: RadialFunction, grid: RadialGrid) -> QuadratureResult:
    y = f(grid.nodes)
    full = float(grid.trapezoid_weights() @ y)
    coarse_nodes = grid.nodes[::2]
    if coarse_nodes[-1] != grid.nodes[-1]:
        coarse_nodes = np.append(coarse_nodes, grid.nodes[-1])
    coarse_values = f(coarse_nodes)
    coarse = float(np.sum(0.5 * (coarse_values[1:] + coarse_values[:-1]) * np.diff(coarse_nodes)))
    return QuadratureResult(value=full, abs_error_estimate=abs(full - coarse) / 3.0, node_count=grid.M)


def integrate_radial(f: RadialFunction,
                     r_min: Optional[float] = None,
                     r_max: Optional[float] = None,
                     *,
                     grid: Optional[RadialGrid] = None,
                     breakpoints: Sequence[float] = (),
                     tol: Optional[float] = None,
                     max_levels: Optional[int] = None,
                     log_scale: bool = True,
                     origin_tail: bool = True) -> QuadratureResult:
    """Integrate f over (0, ∞) truncated to [r_min, r_max].

    scipy's quad in t = ln r (or in r) on panels split at the breakpoints;
    a panel where quad warns falls back to Romberg. With no
    r_max, the upper limit is placed where |f(r)| r drops below 1e-16 of its
    peak. The contribution of (0, r_min) is added from the local power law.
    With a grid, the composite trapezoid rule on the nodes is used instead.

    Raises:
        QuadratureError: when refinement does not converge, carrying the partial value.
    """
    if grid is not None:
        return _integrate_on_grid(f, grid)

    settings = get_settings()
    tol = settings.quad_tol if tol is None else tol
    max_levels = settings.quad_max_levels if max_levels is None else max_levels
    r_min = settings.r_min if r_min is None else r_min
    if r_max is None:
        r_max = _auto_r_max(f, r_min)
        if r_max is None:
            return QuadratureResult(value=0.0, abs_error_estimate=0.0, node_count=4001)
    if not (0 < r_min < r_max):
        raise ParamsError(f"0 < r_min < r_max required (got {r_min}, {r_max})")

    cuts = sorted({b for b in breakpoints if r_min < b < r_max})
    edges = [r_min, *cuts, r_max]

    if log_scale:
        def phi(t):
            r = np.exp(t)
            return f(r) * r
        to_t = math.log
    else:
        phi = f
        to_t = float

    value, err, nodes = 0.0, 0.0, 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        panel = _quad_panel(phi, to_t(lo), to_t(hi), tol)
        if panel is None:
            logger.debug(f"🔁 Romberg fallback on [{lo:g}, {hi:g}]")
            try:
                panel = _romberg_panel(phi, to_t(lo), to_t(hi), tol, max_levels)
            except QuadratureError as e:
                raise QuadratureError(str(e), value + e.partial_value, err + e.abs_error_estimate,
                                      nodes + e.node_count) from e
        part, part_err, part_nodes = panel
        value += part
        err += part_err
        nodes += part_nodes

    if origin_tail:
        value += _origin_tail(f, r_min, max(abs(value), 1e-300), tol)
    return QuadratureResult(value=float(value), abs_error_estimate=float(err), node_count=nodes)


def weighted_radial_integral(f: RadialFunction, N: int, **quad) -> QuadratureResult:
    """sigma_{N-1} ∫ f(r) r^(N-1) dr, i.e. the integral over R^N of a radial f."""
    result = integrate_radial(lambda r: f(r) * r ** (N - 1), **quad)
    return result.scaled(surface_measure(N))


def lp_norm_weighted(u: RadialProfile, p: float, N: int, w: float = 0.0, **quad) -> float:
    """(sigma_{N-1} ∫ |u|^p r^w r^(N-1) dr)^(1/p)."""
    quad.setdefault("breakpoints", u.breakpoints())
    result = weighted_radial_integral(lambda r: np.abs(u.evaluate(r)) ** p * r ** w, N, **quad)
    return max(result.value, 0.0) ** (1.0 / p)


def positive_intervals(u: RadialProfile, r_min: float = 1e-6, r_max: float = 1e3,
                       samples: int = 4001) -> List[Tuple[float, float]]:
    """Maximal intervals of [r_min, r_max] where u > 0; sign changes refined by brentq."""
    r = np.geomspace(r_min, r_max, samples)
    v = u.evaluate(r)
    positive = v > 0
    intervals = []
    start = r_min if positive[0] else None
    for i in range(1, samples):
        if positive[i] == positive[i - 1]:
            continue
        lo, hi = r[i - 1], r[i]
        if v[i - 1] * v[i] < 0:
            root = brentq(lambda x: float(u.evaluate(np.array([x]))[0]), lo, hi, xtol=1e-14)
        else:
            root = hi if positive[i] else lo
        if positive[i]:
            start = root
        else:
            intervals.append((start, root))
            start = None
    if start is not None:
        intervals.append((start, r_max))
    return intervals
