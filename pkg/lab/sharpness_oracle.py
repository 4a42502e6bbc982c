import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, Field, model_validator
from scipy.special import gammaln

from errors import ExtrapolationError, LabError, ParamsError
from factory_profiles import PowerExponentialFactory
from inequality_lab import yosida_pairing
from params_core import Params, beta_zero
from utils import log_lab_operation

logger = logging.getLogger(__name__)

DIRECT_PRODUCT_MAX_N = 6
PRODUCT_AGREEMENT = 1e-12
LIMIT_EXPONENTS = range(2, 9)
LIMIT_RATIO = 10.0
LIMIT_TOLERANCE = 1e-9


class SharpnessEvaluation(BaseModel):
    N: int
    p: float
    delta: float = Field(gt=0)
    beta_param: float
    alpha_n: int
    c_bound: float
    terms: Tuple[float, float]
    rising_product: float
    rising_product_direct: Optional[float] = None

    @model_validator(mode="after")
    def _check_sum(self) -> "SharpnessEvaluation":
        first, second = self.terms
        if self.c_bound != first + second:
            raise ValueError("c_bound must equal the sum of its terms")
        return self

    def csv_row(self) -> Dict[str, Any]:
        return {"delta": self.delta, "beta_param": self.beta_param, "alpha_n": self.alpha_n,
                "c_bound": self.c_bound, "first_term": self.terms[0], "second_term": self.terms[1]}


class QuadratureConsistency(BaseModel):
    delta: float
    closed_form: float
    quadrature: float
    abs_difference: float
    quadrature_error: float


def _validate(N: int, p: float, alpha_n: int) -> None:
    if N < 3:
        raise ParamsError(f"N ≥ 3 required (got N={N})")
    if not (1.0 < p < math.inf):
        raise ParamsError(f"1 < p < ∞ required (got p={p})")
    if int(alpha_n) != alpha_n or alpha_n < 1:
        raise ParamsError(f"alpha_n must be an integer ≥ 1 (got {alpha_n})")


def _a_poly(x: float, beta: float, N: int, p: float) -> float:
    return beta * (beta + N - 2.0) + ((1.0 - N - 2.0 * beta) / p) * x + x * (x + 1.0) / p ** 2


def rising_product(delta: float, n: int) -> float:
    """Gamma(delta + n) / Gamma(delta) through log-gamma differences."""
    return math.exp(gammaln(delta + n) - gammaln(delta))


def rising_product_direct(delta: float, n: int) -> float:
    return math.prod(delta + j for j in range(n))


def c_bound_of_delta(N: int, p: float, alpha_n: int, delta: float) -> SharpnessEvaluation:
    """Upper bound on the constant obtained from v(r) = r^beta e^{-r/p}.

    c_bound = -A(delta) - A(delta + n) Gamma(delta + n)/Gamma(delta) with
    beta = (delta + 2p - N)/p.

    Raises:
        ParamsError: for delta ≤ 0 or invalid (N, p, alpha_n).
        LabError: if log-gamma and direct products disagree (n ≤ 6).
    """
    _validate(N, p, alpha_n)
    if not delta > 0:
        raise ParamsError(f"delta > 0 required (got delta={delta})")
    n = int(alpha_n)
    beta = (delta + 2.0 * p - N) / p
    product = rising_product(delta, n)
    direct = None
    if n <= DIRECT_PRODUCT_MAX_N:
        direct = rising_product_direct(delta, n)
        if abs(product - direct) > PRODUCT_AGREEMENT * abs(direct):
            logger.error(f"❌ rising product mismatch at delta={delta}, n={n}: {product} vs {direct}")
            raise LabError(f"log-gamma product disagrees with direct product at delta={delta}")
    first = -_a_poly(delta, beta, N, p)
    second = -_a_poly(delta + n, beta, N, p) * product
    return SharpnessEvaluation(N=N, p=p, delta=delta, beta_param=beta, alpha_n=n,
                               c_bound=first + second, terms=(first, second),
                               rising_product=product, rising_product_direct=direct)


def richardson_extrapolate(values: Sequence[float], order: int = 1, ratio: float = LIMIT_RATIO) -> List[List[float]]:
    """Repeated Richardson table for values at steps h, h/ratio, h/ratio^2, ...

    Column j removes the error term of power order + j - 1.
    """
    table = [[float(v)] for v in values]
    for i in range(1, len(values)):
        for j in range(1, i + 1):
            factor = ratio ** (order + j - 1)
            table[i].append(table[i][j - 1] + (table[i][j - 1] - table[i - 1][j - 1]) / (factor - 1.0))
    return table


@log_lab_operation(logging.INFO)
def c_limit(N: int, p: float, alpha_n: int) -> float:
    """delta → 0+ limit of c_bound_of_delta along delta = 10^-k, k = 2..8.

    Raises:
        ExtrapolationError: when the last two extrapolated entries disagree.
    """
    values = [c_bound_of_delta(N, p, alpha_n, 10.0 ** -k).c_bound for k in LIMIT_EXPONENTS]
    table = richardson_extrapolate(values, order=1, ratio=LIMIT_RATIO)
    last, previous = table[-1][-1], table[-1][-2]
    if not math.isfinite(last) or abs(last - previous) > LIMIT_TOLERANCE * max(1.0, abs(last)):
        logger.error(f"❌ Richardson table did not settle: {previous} vs {last}")
        raise ExtrapolationError("non-convergent extrapolation", table)
    logger.info(f"📉 c_limit(N={N}, p={p}, n={alpha_n}) = {last:.12g} (beta_0 = {beta_zero(Params(N=N, p=p, alpha=alpha_n)):.12g})")
    return last


def sharpness_table(N: int, p: float, alpha_n: int, deltas: Sequence[float]) -> List[SharpnessEvaluation]:
    return [c_bound_of_delta(N, p, alpha_n, d) for d in deltas]


def quadrature_c_bound(N: int, p: float, alpha_n: int, delta: float, **quad) -> QuadratureConsistency:
    """The same ratio <-Lu, |Vu|^(p-2)Vu> / ‖Vu‖_p^p by quadrature, V = 1/r^2 exactly.

    The surface measure cancels in the ratio.
    """
    closed = c_bound_of_delta(N, p, alpha_n, delta).c_bound
    params = Params(N=N, p=p, alpha=float(alpha_n))
    u = PowerExponentialFactory.create_sharpness_profile(N, p, delta)
    pairing, vnorm = yosida_pairing(u, params, 0.0, **quad)
    ratio = pairing.value / vnorm.value
    err = (pairing.abs_error_estimate + abs(ratio) * vnorm.abs_error_estimate) / vnorm.value
    return QuadratureConsistency(delta=delta, closed_form=closed, quadrature=ratio,
                                 abs_difference=abs(ratio - closed), quadrature_error=err)
