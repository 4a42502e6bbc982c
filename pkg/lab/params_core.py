import logging
import math
from fractions import Fraction
from typing import Callable, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator
from scipy.optimize import minimize_scalar

from errors import LabError, ParamsError, UnboundedFormError
from utils import log_lab_operation

logger = logging.getLogger(__name__)

Number = Union[float, Fraction]

LOG_R_BOUNDS = (math.log(1e-8), math.log(1e8))
LOG_BRACKET_COUNT = 2001


class Params(BaseModel):
    """Parameter tuple (N, p, alpha, c[, eta, beta]) of the perturbed operator."""

    N: int
    p: float
    alpha: float
    c: float = 0.0
    eta: Optional[float] = None
    beta: Optional[float] = None

    model_config = {
        "frozen": True,
        "json_schema_extra": {
            "example": {"N": 5, "p": 2.0, "alpha": 1.0, "c": 1.0}
        },
    }

    @field_validator("N")
    @classmethod
    def _check_dimension(cls, value: int) -> int:
        if value < 3:
            raise ValueError(f"N ≥ 3 required (got N={value})")
        return value

    @field_validator("p")
    @classmethod
    def _check_exponent(cls, value: float) -> float:
        if not (1.0 < value < math.inf):
            raise ValueError(f"1 < p < ∞ required (got p={value})")
        return value

    @field_validator("alpha")
    @classmethod
    def _check_alpha(cls, value: float) -> float:
        if not (0.0 <= value < math.inf):
            raise ValueError(f"alpha ≥ 0 required (got alpha={value})")
        return value

    @model_validator(mode="after")
    def _check_tilde_pair(self) -> "Params":
        if self.eta is not None and self.beta is None:
            raise ValueError("beta must be given when eta is given")
        return self

    @property
    def has_tilde(self) -> bool:
        return self.eta is not None

    @property
    def p_dual(self) -> float:
        return dual_exponent(self.p)

    def without_tilde(self) -> "Params":
        return self.model_copy(update={"eta": None, "beta": None})


class ConstantSet(BaseModel):
    gamma_alpha: float
    gamma_zero: float
    beta_zero: float
    beta_alpha: float
    delta_alpha: float
    k: float
    k0: float
    k1: float
    mu: float
    c0: float
    baras_goldstein: float
    eta_threshold: Optional[float] = None
    m: Optional[float] = None

    @model_validator(mode="after")
    def _check_relations(self) -> "ConstantSet":
        if self.gamma_alpha < 0:
            raise ValueError("gamma_alpha must be nonnegative")
        if self.k > self.beta_zero:
            raise ValueError("k cannot exceed beta_zero")
        if self.m is not None and self.m > 0:
            raise ValueError("m is never positive")
        if self.mu != min(self.k0, self.k0 + self.k1):
            raise ValueError("mu must equal min(k0, k0 + k1)")
        return self


def dual_exponent(p: float) -> float:
    return p / (p - 1.0)


# Closed forms shared by the float and the exact (Fraction) paths.

def _gamma(N: Number, p: Number, alpha: Number) -> Number:
    return ((N + alpha - 2) / p) ** 2


def _beta_zero(N: Number, p: Number) -> Number:
    return N * (p - 1) * (N - 2 * p) / p ** 2


def _beta_alpha(N: Number, p: Number, alpha: Number) -> Number:
    return (N * p - N - alpha) * (N + alpha - 2 * p) / p ** 2


def _delta_alpha(N: Number, p: Number, alpha: Number) -> Number:
    return (p - 1) * (4 * alpha - 4 - 2 * N * p + 4 * N) / p ** 2


def _k0(N: Number, p: Number, alpha: Number) -> Number:
    return ((N + alpha - 2) / p) * (((p - 1) / p) * (N + alpha - 2) - alpha)


def _k1(N: Number, p: Number, alpha: Number) -> Number:
    return 4 * alpha * (p - 1) / p ** 2 - (p - 1) * (4 + 2 * N * p - 4 * N) / p ** 2


def gamma_alpha(params: Params) -> float:
    return float(_gamma(params.N, params.p, params.alpha))


def gamma_zero(params: Params) -> float:
    return float(_gamma(params.N, params.p, 0.0))


def beta_zero(params: Params) -> float:
    return float(_beta_zero(params.N, params.p))


def beta_alpha(params: Params) -> float:
    return float(_beta_alpha(params.N, params.p, params.alpha))


def delta_alpha(params: Params) -> float:
    return float(_delta_alpha(params.N, params.p, params.alpha))


def k_min(params: Params) -> float:
    return min(beta_zero(params), (params.p - 1.0) * gamma_zero(params))


def exact_constants(N: Number, p: Number, alpha: Number) -> dict:
    """Closed forms in rational arithmetic. Floats convert exactly."""
    N, p, alpha = Fraction(N), Fraction(p), Fraction(alpha)
    k0 = _k0(N, p, alpha)
    k1 = _k1(N, p, alpha)
    return {
        "gamma_alpha": _gamma(N, p, alpha),
        "beta_zero": _beta_zero(N, p),
        "beta_alpha": _beta_alpha(N, p, alpha),
        "delta_alpha": _delta_alpha(N, p, alpha),
        "k0": k0,
        "k1": k1,
        "mu": min(k0, k0 + k1),
    }


def k0_k1_identity_holds(N: Number, p: Number, alpha: Number) -> bool:
    exact = exact_constants(N, p, alpha)
    return exact["k0"] + exact["k1"] == exact["beta_alpha"]


def k0_k1_mu(params: Params) -> Tuple[float, float, float]:
    """Return (k0, k1, mu) with mu = min(k0, k0 + k1).

    Raises:
        LabError: if k0 + k1 differs from beta_alpha in exact arithmetic.
    """
    N, p, alpha = params.N, params.p, params.alpha
    if not k0_k1_identity_holds(N, p, alpha):
        logger.error(f"❌ k0 + k1 != beta_alpha for N={N}, p={p}, alpha={alpha}")
        raise LabError("identity k0 + k1 = beta_alpha failed")
    k0 = float(_k0(N, p, alpha))
    k1 = float(_k1(N, p, alpha))
    return k0, k1, min(k0, k0 + k1)


def eta_threshold(params: Params) -> float:
    """eta* = alpha(N+alpha-2)/p - (N+alpha-2)^2/(p p'); the condition reads eta ≥ eta*."""
    n_alpha = params.N + params.alpha - 2.0
    return params.alpha * n_alpha / params.p - n_alpha ** 2 / (params.p * params.p_dual)


def classical_thresholds(params: Params) -> Tuple[float, float]:
    bg = (params.N - 2.0) ** 2 / 4.0
    return bg - 1.0, bg


def _require_tilde(params: Params, what: str) -> Tuple[float, float]:
    if params.eta is None or params.beta is None:
        raise ParamsError(f"{what} needs eta and beta (tilde-branch only)")
    return params.eta, params.beta


def grid_search_minimum(fun: Callable[[np.ndarray], np.ndarray], lo: float = 1e-8,
                        hi: float = 1e8, count: int = 200001) -> Tuple[float, float]:
    """Brute-force minimum of fun over a log-spaced radius grid: (r_best, value)."""
    r = np.geomspace(lo, hi, count)
    with np.errstate(over="ignore", invalid="ignore"):
        values = fun(r)
    i = int(np.nanargmin(values))
    return float(r[i]), float(values[i])


def _bounded_log_extremum(fun: Callable, maximize: bool) -> float:
    """Log-grid bracket from grid_search_minimum, refined by a bounded search in t = ln r."""
    sign = -1.0 if maximize else 1.0
    lo, hi = LOG_R_BOUNDS
    r_best, coarse = grid_search_minimum(lambda r: sign * fun(r), math.exp(lo), math.exp(hi), LOG_BRACKET_COUNT)
    step = (hi - lo) / (LOG_BRACKET_COUNT - 1)
    t0 = math.log(r_best)
    res = minimize_scalar(lambda t: sign * fun(math.exp(t)), bounds=(max(t0 - step, lo), min(t0 + step, hi)),
                          method="bounded", options={"xatol": 1e-12})
    return sign * min(float(res.fun), coarse)


def m_shift(params: Params) -> float:
    """Minimum over r > 0 of K r^(alpha-2) + eta r^beta.

    K is the k0 constant. The minimum is zero when K ≥ 0, otherwise it is
    attained at the unique stationary point.

    Raises:
        ParamsError: unless alpha > 2, beta > alpha - 2 and eta > 0.
    """
    eta, beta = _require_tilde(params, "m_shift")
    alpha = params.alpha
    if not (alpha > 2.0 and beta > alpha - 2.0 and eta > 0.0):
        raise ParamsError("m_shift requires alpha > 2, beta > alpha - 2, eta > 0 (tilde-branch only)")

    K = float(_k0(params.N, params.p, alpha))
    if K >= 0.0:
        return 0.0

    a = alpha - 2.0

    def g(r):
        return K * r ** a + eta * r ** beta

    try:
        r_star = (-a * K / (eta * beta)) ** (1.0 / (beta - a))
        value = g(r_star)
        if not math.isfinite(value):
            raise OverflowError(value)
    except (OverflowError, ZeroDivisionError) as e:
        logger.warning(f"⚠️ m_shift closed form failed ({e}), using bounded search")
        value = _bounded_log_extremum(g, maximize=False)
    return min(value, 0.0)


def quasi_diss_bound_M(params: Params, epsilon: float) -> float:
    """Supremum over r ≥ 0 of (alpha²/(4 epsilon)) r^(alpha-2) - eta r^beta.

    Raises:
        UnboundedFormError: if beta ≤ alpha - 2.
        ParamsError: for alpha < 2, eta ≤ 0 or epsilon outside (0, p-1].
    """
    eta, beta = _require_tilde(params, "quasi_diss_bound_M")
    alpha = params.alpha
    if alpha < 2.0:
        raise ParamsError("quasi_diss_bound_M requires alpha ≥ 2")
    if beta <= alpha - 2.0:
        raise UnboundedFormError(f"sup is infinite: beta > alpha - 2 required (beta={beta}, alpha={alpha})")
    if eta <= 0.0:
        raise ParamsError("quasi_diss_bound_M requires eta > 0")
    if not (0.0 < epsilon <= params.p - 1.0):
        raise ParamsError(f"0 < epsilon ≤ p - 1 required (got epsilon={epsilon})")

    A = alpha ** 2 / (4.0 * epsilon)
    if alpha == 2.0:
        return A

    a = alpha - 2.0

    def f(r):
        return A * r ** a - eta * r ** beta

    try:
        r_star = (a * A / (eta * beta)) ** (1.0 / (beta - a))
        value = f(r_star)
        if not math.isfinite(value):
            raise OverflowError(value)
    except (OverflowError, ZeroDivisionError) as e:
        logger.warning(f"⚠️ quasi_diss_bound_M closed form failed ({e}), using bounded search")
        value = _bounded_log_extremum(f, maximize=True)
    return max(value, 0.0)


@log_lab_operation()
def compute_constants(params: Params) -> ConstantSet:
    k0, k1, mu = k0_k1_mu(params)
    c0, bg = classical_thresholds(params)
    extra = {}
    if params.has_tilde:
        extra["eta_threshold"] = eta_threshold(params)
        if params.alpha > 2.0 and params.beta > params.alpha - 2.0 and params.eta > 0.0:
            extra["m"] = m_shift(params)
    return ConstantSet(
        gamma_alpha=gamma_alpha(params),
        gamma_zero=gamma_zero(params),
        beta_zero=beta_zero(params),
        beta_alpha=beta_alpha(params),
        delta_alpha=delta_alpha(params),
        k=k_min(params),
        k0=k0,
        k1=k1,
        mu=mu,
        c0=c0,
        baras_goldstein=bg,
        **extra,
    )
