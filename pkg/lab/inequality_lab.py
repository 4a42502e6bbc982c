import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.optimize import minimize_scalar

from errors import DegenerateProfileError, ParamsError, UnboundedFormError
from factory_profiles import CutoffPowerFactory, PowerExponentialFactory
from lab_constants import *
from params_core import (Params, beta_alpha, beta_zero, delta_alpha, gamma_alpha,
                         k0_k1_mu, m_shift, quasi_diss_bound_M)
from radial_toolkit import (PowerExponentialProfile, QuadratureResult, RadialProfile,
                            positive_intervals, weighted_radial_integral)
from utils import log_lab_operation

logger = logging.getLogger(__name__)

FORM_TOLERANCE = 1e-8

VIOLATION_SPLIT = "split"
VIOLATION_FULL = "full"


class FormEvaluation(BaseModel):
    """Both sides of an inequality evaluated on one profile.

    gap ≥ 0 means the inequality holds; its orientation is documented per form.
    """
    form: str
    lhs: float
    rhs: float
    gap: float
    quadrature_error: float = Field(ge=0)
    profile_descriptor: str
    ratio: Optional[float] = None
    holds: Optional[bool] = None
    details: Dict[str, Any] = Field(default_factory=dict)

    model_config = {
        "json_schema_extra": {
            "example": {
                "form": "hardy",
                "lhs": 0.5,
                "rhs": 1.875,
                "gap": 0.75,
                "quadrature_error": 1e-12,
                "profile_descriptor": "gaussian:a=1",
                "ratio": 3.75,
                "holds": True,
            }
        }
    }

    def csv_row(self) -> Dict[str, Any]:
        return {"form": self.form, "profile": self.profile_descriptor, "lhs": self.lhs, "rhs": self.rhs,
                "gap": self.gap, "ratio": self.ratio, "holds": self.holds,
                "quadrature_error": self.quadrature_error}


class ViolationSearch(BaseModel):
    found: bool
    parameter_name: str
    best_parameter: float
    best_value: float
    target: str
    evaluations: List[FormEvaluation] = Field(default_factory=list)
    note: str = ""


def _abs_pow(u: np.ndarray, exponent: float) -> np.ndarray:
    """|u|^exponent; |u|^0 = 1, and 0 where u vanishes for a negative exponent."""
    if exponent == 0.0:
        return np.ones_like(u)
    out = np.zeros_like(u)
    nz = u != 0
    out[nz] = np.abs(u[nz]) ** exponent
    return out


def _yosida_potential(r: np.ndarray, epsilon: float) -> np.ndarray:
    return 1.0 / (r * r + epsilon)


def _integral(f: Callable, N: int, u: RadialProfile, **quad) -> QuadratureResult:
    quad.setdefault("breakpoints", u.breakpoints())
    return weighted_radial_integral(f, N, **quad)


def _tolerance(*values: float) -> float:
    return FORM_TOLERANCE * max(1.0, *(abs(v) for v in values))


# ---------------------------------------------------------------------------
# Hardy inequality
# ---------------------------------------------------------------------------

def hardy_ratio(u: RadialProfile, params: Params, **quad) -> FormEvaluation:
    """lhs = ∫|u|^p r^(alpha-2), rhs = ∫|u'|^2 |u|^(p-2) r^alpha; gap = rhs - gamma_alpha lhs.

    Raises:
        DegenerateProfileError: when lhs vanishes (u ≡ 0).
    """
    N, p, alpha = params.N, params.p, params.alpha
    lhs = _integral(lambda r: np.abs(u.evaluate(r)) ** p * r ** (alpha - 2.0), N, u, **quad)
    rhs = _integral(lambda r: u.evaluate(r, 1) ** 2 * _abs_pow(u.evaluate(r), p - 2.0) * r ** alpha, N, u, **quad)
    if lhs.value <= 0.0:
        raise DegenerateProfileError(f"hardy ratio undefined: profile {u.descriptor()} vanishes")
    gamma = gamma_alpha(params)
    ratio = rhs.value / lhs.value
    evaluation = FormEvaluation(
        form="hardy",
        lhs=lhs.value,
        rhs=rhs.value,
        gap=rhs.value - gamma * lhs.value,
        quadrature_error=rhs.abs_error_estimate + gamma * lhs.abs_error_estimate,
        profile_descriptor=u.descriptor(),
        ratio=ratio,
        holds=bool(ratio >= gamma - FORM_TOLERANCE),
        details={"gamma_alpha": gamma},
    )
    logger.debug(f"📐 hardy {u.descriptor()}: ratio={ratio:.10g} (gamma={gamma:.10g})")
    return evaluation


def hardy_optimizer_profile(params: Params, eps: float) -> RadialProfile:
    """r^{-(N+alpha-2)/p + eps} times a cutoff switching off over r in [1, 1000] on a log scale."""
    return CutoffPowerFactory.create_hardy_optimizer(params.N, params.p, params.alpha, eps)


@log_lab_operation(logging.INFO)
def hardy_infimum_search(params: Params, eps_sequence: Sequence[float], **quad) -> List[FormEvaluation]:
    eps_sequence = list(eps_sequence)
    if not eps_sequence or any(e <= 0 for e in eps_sequence):
        raise ParamsError("eps_sequence must be non-empty and positive")
    if any(b >= a for a, b in zip(eps_sequence, eps_sequence[1:])):
        raise ParamsError("eps_sequence must be strictly decreasing")
    results = []
    for eps in eps_sequence:
        evaluation = hardy_ratio(hardy_optimizer_profile(params, eps), params, **quad)
        evaluation.details["eps"] = eps
        results.append(evaluation)
        logger.info(f"🔎 eps={eps:g}: ratio={evaluation.ratio:.8f}")
    return results


# ---------------------------------------------------------------------------
# Dissipativity and dispersivity
# ---------------------------------------------------------------------------

def _dissipativity_integrals(u: RadialProfile, params: Params, positive_part: bool = False,
                             **quad) -> Dict[str, QuadratureResult]:
    """The integrals I_0^2, I_alpha^2, J_0^2, J_alpha^2 (and ‖u‖_p^p, the drift term)."""
    N, p, alpha = params.N, params.p, params.alpha

    # positive_part: panels end at the sign changes, only round-off below zero is clipped
    def values(r):
        v, d = u.evaluate(r), u.evaluate(r, 1)
        if positive_part:
            v = np.maximum(v, 0.0)
        return np.abs(v), d

    def grad_term(r, weight):
        v, d = values(r)
        return d * d * _abs_pow(v, p - 2.0) * weight

    def potential_term(r, weight):
        v, _ = values(r)
        return v ** p * weight

    def drift(r):
        v, d = values(r)
        return r ** (alpha - 1.0) * v ** (p - 1.0) * d

    return {
        "I0_sq": _integral(lambda r: grad_term(r, 1.0), N, u, **quad),
        "Ia_sq": _integral(lambda r: grad_term(r, r ** alpha), N, u, **quad),
        "J0_sq": _integral(lambda r: potential_term(r, r ** -2.0), N, u, **quad),
        "Ja_sq": _integral(lambda r: potential_term(r, r ** (alpha - 2.0)), N, u, **quad),
        "norm_pp": _integral(lambda r: potential_term(r, 1.0), N, u, **quad),
        "drift": _integral(drift, N, u, **quad),
    }


def _sum_integrals(parts: List[Dict[str, QuadratureResult]]) -> Dict[str, QuadratureResult]:
    total = dict(parts[0])
    for part in parts[1:]:
        for key, value in part.items():
            total[key] = total[key] + value
    return total


def _estimate_from_integrals(ints: Dict[str, QuadratureResult], params: Params) -> Dict[str, float]:
    p, alpha, c = params.p, params.alpha, params.c
    I0, Ia, J0, Ja = (ints[k].value for k in ("I0_sq", "Ia_sq", "J0_sq", "Ja_sq"))
    cross = alpha * math.sqrt(max(Ia, 0.0) * max(Ja, 0.0))
    err = ((p - 1.0) * (ints["I0_sq"].abs_error_estimate + ints["Ia_sq"].abs_error_estimate)
           + abs(c) * ints["J0_sq"].abs_error_estimate)
    if Ia > 0 and Ja > 0:
        err += 0.5 * alpha * (math.sqrt(Ja / Ia) * ints["Ia_sq"].abs_error_estimate
                              + math.sqrt(Ia / Ja) * ints["Ja_sq"].abs_error_estimate)
    split = -(p - 1.0) * I0 + c * J0
    alpha_part = -(p - 1.0) * Ia + cross
    pairing = -(p - 1.0) * (I0 + Ia) - alpha * ints["drift"].value + c * J0
    return {"lhs": split + alpha_part, "split_lhs": split, "alpha_part": alpha_part,
            "pairing": pairing, "error": err, "norm_pp": ints["norm_pp"].value,
            "I0_sq": I0, "Ia_sq": Ia, "J0_sq": J0, "Ja_sq": Ja}


def _dissipativity_evaluation(form: str, u: RadialProfile, est: Dict[str, float],
                              normalize: bool, rhs: float = 0.0) -> FormEvaluation:
    scale = 1.0
    if normalize:
        if est["norm_pp"] <= 0:
            raise DegenerateProfileError(f"cannot normalize vanishing profile {u.descriptor()}")
        scale = 1.0 / est["norm_pp"]
    lhs, rhs = est["lhs"] * scale, rhs * scale
    details = {k: v * scale for k, v in est.items() if k not in ("error", "norm_pp", "M")}
    details["norm_pp"] = est["norm_pp"]
    if "M" in est:
        details["M"] = est["M"]
    details["normalized"] = normalize
    return FormEvaluation(
        form=form,
        lhs=lhs,
        rhs=rhs,
        gap=rhs - lhs,
        quadrature_error=est["error"] * scale,
        profile_descriptor=u.descriptor(),
        holds=bool(lhs <= rhs + _tolerance(lhs, rhs)),
        details=details,
    )


def dissipativity_form(u: RadialProfile, params: Params, normalize: bool = False, **quad) -> FormEvaluation:
    """Upper estimate of Re<(L + c/r^2)u, u|u|^(p-2)>.

    lhs = -(p-1)(I_0^2 + I_alpha^2) + c J_0^2 + alpha I_alpha J_alpha, rhs = 0,
    gap = -lhs. details carry the split term -(p-1)I_0^2 + c J_0^2, the
    alpha part and the exact pairing.
    """
    est = _estimate_from_integrals(_dissipativity_integrals(u, params, **quad), params)
    evaluation = _dissipativity_evaluation(FORM_DISSIPATIVITY, u, est, normalize)
    logger.debug(f"📐 dissipativity {u.descriptor()}: lhs={evaluation.lhs:.6e}")
    return evaluation


def tilde_dissipativity_form(u: RadialProfile, params: Params, normalize: bool = False, **quad) -> FormEvaluation:
    """Dissipativity estimate for L - eta r^beta.

    lhs = dissipativity lhs - eta ∫|u|^p r^beta. For beta > alpha - 2 the rhs is
    M ‖u‖_p^p with M = quasi_diss_bound_M(params, p - 1); for beta = alpha - 2
    the rhs is 0. gap = rhs - lhs.

    Raises:
        ParamsError: without eta/beta.
        UnboundedFormError: for beta < alpha - 2.
    """
    if not params.has_tilde:
        raise ParamsError("tilde_dissipativity_form needs eta and beta")
    eta, beta = params.eta, params.beta
    alpha = params.alpha
    ints = _dissipativity_integrals(u, params, **quad)
    confining = _integral(lambda r: np.abs(u.evaluate(r)) ** params.p * r ** beta, params.N, u, **quad)
    est = _estimate_from_integrals(ints, params)
    est["lhs"] -= eta * confining.value
    est["pairing"] -= eta * confining.value
    est["error"] += abs(eta) * confining.abs_error_estimate
    est["confining"] = confining.value

    if beta > alpha - 2.0:
        M = quasi_diss_bound_M(params, params.p - 1.0)
        rhs = M * est["norm_pp"]
        est["M"] = M
        branch = "quasi"
    elif beta == alpha - 2.0:
        rhs = 0.0
        branch = "critical"
    else:
        raise UnboundedFormError(f"beta ≥ alpha - 2 required (beta={beta}, alpha={alpha})")
    evaluation = _dissipativity_evaluation(FORM_TILDE, u, est, normalize, rhs=rhs)
    evaluation.details["branch"] = branch
    return evaluation


def dispersivity_form(u: RadialProfile, params: Params, r_max: float = 1e3, **quad) -> FormEvaluation:
    """Dissipativity estimate on the positive part u_+ (sign-changing u allowed).

    The integrals run over the intervals where u > 0; u_+ ≡ 0 gives the trivial
    value 0. gap = -lhs.
    """
    r_min = quad.pop("r_min", None) or 1e-6
    intervals = positive_intervals(u, r_min, r_max)
    if not intervals:
        logger.info(f"ℹ️ u_+ vanishes for {u.descriptor()}: trivial pass")
        return FormEvaluation(form=FORM_DISPERSIVITY, lhs=0.0, rhs=0.0, gap=0.0, quadrature_error=0.0,
                              profile_descriptor=u.descriptor(), holds=True, details={"trivial": True})
    parts = []
    for lo, hi in intervals:
        upper = hi if hi < r_max else None
        parts.append(_dissipativity_integrals(u, params, positive_part=True, r_min=lo, r_max=upper,
                                              origin_tail=lo <= r_min, **quad))
    est = _estimate_from_integrals(_sum_integrals(parts), params)
    evaluation = _dissipativity_evaluation(FORM_DISPERSIVITY, u, est, normalize=False)
    evaluation.details["intervals"] = [list(i) for i in intervals]
    return evaluation


def _violation_target(evaluation: FormEvaluation, target: str) -> float:
    return evaluation.details["split_lhs"] if target == VIOLATION_SPLIT else evaluation.lhs


@log_lab_operation(logging.INFO)
def dissipativity_violation_scan(params: Params, s_values: Optional[Sequence[float]] = None,
                                 target: str = VIOLATION_SPLIT, **quad) -> ViolationSearch:
    """Scan u = r^s e^{-r} for a positive normalized dissipativity value.

    s runs over the integrable range (-(N-2)/p, 0). target "split" watches
    -(p-1)I_0^2 + c J_0^2, whose sign is governed by the constant (p-1)gamma_0;
    target "full" watches the whole estimate. A best grid point that is not
    positive is refined with a bounded scalar search. Not finding a violation
    says nothing about its existence.
    """
    if target not in (VIOLATION_SPLIT, VIOLATION_FULL):
        raise ParamsError(f"Invalid target: {target}. Valid targets are: {[VIOLATION_SPLIT, VIOLATION_FULL]}")
    s_lo = -(params.N - 2.0) / params.p
    if s_values is None:
        s_values = s_lo * (1.0 - np.linspace(0.02, 0.98, 25))
    if any(not (s_lo < s < 0) for s in s_values):
        raise ParamsError(f"s must lie in ({s_lo}, 0)")

    def evaluate(s: float) -> FormEvaluation:
        evaluation = dissipativity_form(PowerExponentialProfile(s=float(s), q=1.0), params, normalize=True, **quad)
        evaluation.details["s"] = float(s)
        return evaluation

    evaluations = [evaluate(s) for s in s_values]
    values = [_violation_target(e, target) for e in evaluations]
    best = int(np.argmax(values))
    best_s, best_value = float(s_values[best]), values[best]

    if best_value <= 0:
        lo = s_values[max(best - 1, 0)]
        hi = s_values[min(best + 1, len(s_values) - 1)]
        if hi > lo:
            res = minimize_scalar(lambda s: -_violation_target(evaluate(s), target),
                                  bounds=(lo, hi), method="bounded", options={"xatol": 1e-6})
            if -res.fun > best_value:
                best_s, best_value = float(res.x), float(-res.fun)
                evaluations.append(evaluate(best_s))

    found = bool(best_value > FORM_TOLERANCE)
    note = "" if found else "no violation found on the scanned family; this is not a proof of absence"
    logger.info(f"🔎 violation scan ({target}): best s={best_s:.4f}, value={best_value:.6e}, found={found}")
    return ViolationSearch(found=found, parameter_name="s", best_parameter=best_s, best_value=best_value,
                           target=target, evaluations=evaluations, note=note)


# ---------------------------------------------------------------------------
# Yosida forms
# ---------------------------------------------------------------------------

def yosida_pairing(u: RadialProfile, params: Params, epsilon: float,
                   **quad) -> Tuple[QuadratureResult, QuadratureResult]:
    """(Re<-Lu, |V u|^(p-2) V u>, ∫V^p |u|^p) with V = 1/(r^2 + epsilon).

    epsilon = 0 uses the exact potential 1/r^2. The pairing is integrated
    directly from u'' and u', without integrating by parts.
    """
    if epsilon < 0:
        raise ParamsError(f"epsilon ≥ 0 required (got {epsilon})")
    N, p, alpha = params.N, params.p, params.alpha

    def pairing(r):
        v = u.evaluate(r)
        lap = u.evaluate(r, 2) + (N - 1.0) * u.evaluate(r, 1) / r
        V = _yosida_potential(r, epsilon)
        return -(1.0 + r ** alpha) * lap * V ** (p - 1.0) * _abs_pow(v, p - 2.0) * v

    def vnorm(r):
        return _yosida_potential(r, epsilon) ** p * np.abs(u.evaluate(r)) ** p

    return _integral(pairing, N, u, **quad), _integral(vnorm, N, u, **quad)


def _weighted_v(u: RadialProfile, params: Params, epsilon: float, v_power: float,
                weight: Callable[[np.ndarray], np.ndarray], **quad) -> QuadratureResult:
    p = params.p
    return _integral(lambda r: _yosida_potential(r, epsilon) ** v_power * np.abs(u.evaluate(r)) ** p * weight(r),
                     params.N, u, **quad)


def _check_epsilon(epsilon: float) -> None:
    if epsilon <= 0:
        raise ParamsError(f"epsilon > 0 required (got {epsilon})")


def _yosida_evaluation(form: str, u: RadialProfile, lhs: float, rhs: float, err: float,
                       vnorm: float, details: Dict[str, Any]) -> FormEvaluation:
    gap = lhs - rhs
    return FormEvaluation(
        form=form,
        lhs=lhs,
        rhs=rhs,
        gap=gap,
        quadrature_error=err,
        profile_descriptor=u.descriptor(),
        ratio=lhs / vnorm if vnorm > 0 else None,
        holds=bool(gap >= -_tolerance(lhs, rhs)),
        details=details,
    )


def yosida_form_gap(u: RadialProfile, params: Params, epsilon: float, **quad) -> FormEvaluation:
    """lhs = Re<-Lu, |V_eps u|^(p-2) V_eps u>,
    rhs = beta_0 ∫V_eps^p|u|^p + beta_alpha ∫V_eps^p|u|^p r^alpha, gap = lhs - rhs.
    """
    _check_epsilon(epsilon)
    pairing, vnorm = yosida_pairing(u, params, epsilon, **quad)
    weighted = _weighted_v(u, params, epsilon, params.p, lambda r: r ** params.alpha, **quad)
    b0, ba = beta_zero(params), beta_alpha(params)
    rhs = b0 * vnorm.value + ba * weighted.value
    err = pairing.abs_error_estimate + abs(b0) * vnorm.abs_error_estimate + abs(ba) * weighted.abs_error_estimate
    evaluation = _yosida_evaluation(FORM_YOSIDA, u, pairing.value, rhs, err, vnorm.value,
                                    {"epsilon": epsilon, "beta_zero": b0, "beta_alpha": ba,
                                     "v_norm_pp": vnorm.value, "v_alpha_pp": weighted.value})
    logger.debug(f"📐 yosida {u.descriptor()} eps={epsilon:g}: gap={evaluation.gap:.6e}")
    return evaluation


def shifted_yosida_form_gap(u: RadialProfile, params: Params, epsilon: float, **quad) -> FormEvaluation:
    """lhs = Re<-Lu - mu r^(alpha-2) u, |V_eps u|^(p-2) V_eps u>, rhs = beta_0 ∫V_eps^p|u|^p."""
    _check_epsilon(epsilon)
    _, _, mu = k0_k1_mu(params)
    pairing, vnorm = yosida_pairing(u, params, epsilon, **quad)
    shift = _weighted_v(u, params, epsilon, params.p - 1.0, lambda r: r ** (params.alpha - 2.0), **quad)
    b0 = beta_zero(params)
    lhs = pairing.value - mu * shift.value
    rhs = b0 * vnorm.value
    err = pairing.abs_error_estimate + abs(mu) * shift.abs_error_estimate + abs(b0) * vnorm.abs_error_estimate
    return _yosida_evaluation(FORM_SHIFTED, u, lhs, rhs, err, vnorm.value,
                              {"epsilon": epsilon, "mu": mu, "beta_zero": b0, "v_norm_pp": vnorm.value})


def tilde_yosida_form_gap(u: RadialProfile, params: Params, epsilon: float, **quad) -> FormEvaluation:
    """lhs = Re<-(L - eta r^beta)u - m u, |V_eps u|^(p-2) V_eps u>,
    rhs = beta_0 ∫V_eps^p|u|^p + delta_alpha ∫V_eps^p|u|^p r^alpha.

    Raises:
        ParamsError: unless beta > alpha - 2 > 0 and eta > 0.
    """
    _check_epsilon(epsilon)
    m = m_shift(params)
    eta, beta = params.eta, params.beta
    pairing, vnorm = yosida_pairing(u, params, epsilon, **quad)
    confining = _weighted_v(u, params, epsilon, params.p - 1.0, lambda r: r ** beta, **quad)
    mass = _weighted_v(u, params, epsilon, params.p - 1.0, lambda r: np.ones_like(r), **quad)
    weighted = _weighted_v(u, params, epsilon, params.p, lambda r: r ** params.alpha, **quad)
    b0, da = beta_zero(params), delta_alpha(params)
    lhs = pairing.value + eta * confining.value - m * mass.value
    rhs = b0 * vnorm.value + da * weighted.value
    err = (pairing.abs_error_estimate + eta * confining.abs_error_estimate + abs(m) * mass.abs_error_estimate
           + abs(b0) * vnorm.abs_error_estimate + abs(da) * weighted.abs_error_estimate)
    return _yosida_evaluation(FORM_TILDE_YOSIDA, u, lhs, rhs, err, vnorm.value,
                              {"epsilon": epsilon, "m": m, "beta_zero": b0, "delta_alpha": da,
                               "v_norm_pp": vnorm.value})


@log_lab_operation(logging.INFO)
def yosida_violation_scan(params: Params, epsilon: float = 1e-6, surplus: float = 0.5,
                          deltas: Optional[Sequence[float]] = None, **quad) -> ViolationSearch:
    """Raise the beta_0 coefficient by surplus and look for a negative gap.

    Scans v(r) = r^b e^{-r/p}, b = (delta + 2p - N)/p, over delta > 0. The
    rhs becomes (beta_0 + surplus)∫V^p|u|^p + beta_alpha ∫V^p|u|^p r^alpha.
    """
    if surplus <= 0:
        raise ParamsError("surplus must be positive")
    deltas = list(np.geomspace(0.05, 2.0, 12) if deltas is None else deltas)
    evaluations = []
    for delta in deltas:
        u = PowerExponentialFactory.create_sharpness_profile(params.N, params.p, delta)
        evaluation = yosida_form_gap(u, params, epsilon, **quad)
        perturbed = evaluation.gap - surplus * evaluation.details["v_norm_pp"]
        evaluation.details.update({"delta": float(delta), "perturbed_gap": perturbed})
        evaluations.append(evaluation)
    normalized = [e.details["perturbed_gap"] / e.details["v_norm_pp"] for e in evaluations]
    best = int(np.argmin(normalized))
    found = bool(normalized[best] < -FORM_TOLERANCE)
    logger.info(f"🔎 yosida c-side scan: best delta={deltas[best]:.4g}, normalized gap={normalized[best]:.6e}")
    return ViolationSearch(found=found, parameter_name="delta", best_parameter=float(deltas[best]),
                           best_value=float(normalized[best]), target="yosida_surplus", evaluations=evaluations,
                           note="" if found else "no violation found on the scanned family")


FORM_EVALUATORS: Dict[str, Callable[..., FormEvaluation]] = {
    FORM_DISSIPATIVITY: dissipativity_form,
    FORM_TILDE: tilde_dissipativity_form,
    FORM_YOSIDA: yosida_form_gap,
    FORM_SHIFTED: shifted_yosida_form_gap,
    FORM_TILDE_YOSIDA: tilde_yosida_form_gap,
    FORM_DISPERSIVITY: dispersivity_form,
}


def evaluate_corpus(form: Callable[..., FormEvaluation], profiles: Sequence[RadialProfile], params: Params,
                    workers: int = 1, **kwargs) -> List[FormEvaluation]:
    """Run a form over a corpus; with workers > 1 entries run concurrently, merged by index."""
    if workers <= 1:
        return [form(u, params, **kwargs) for u in profiles]
    results: List[Optional[FormEvaluation]] = [None] * len(profiles)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(form, u, params, **kwargs): i for i, u in enumerate(profiles)}
        for future, index in futures.items():
            results[index] = future.result()
    return results
