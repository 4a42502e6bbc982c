import json
import logging
from fractions import Fraction
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from errors import LabError, ParamsError
from lab_constants import *
from params_core import ConstantSet, Params, compute_constants, exact_constants
from texts.theorem_texts import (get_boundary_notice, get_half_dimension_notice,
                                 get_no_result_notice, get_theorem_statement)
from utils import log_lab_operation

logger = logging.getLogger(__name__)

MAIN_PROPERTIES = {PROP_CONTRACTIVE, PROP_POSITIVE, PROP_CORE_CC}
BIS_PROPERTIES = {PROP_CONTRACTIVE, PROP_ANALYTIC}
TILDE_PROPERTIES = {PROP_QUASI_CONTRACTIVE, PROP_POSITIVE, PROP_CORE_CC}
TILDE_BIS_PROPERTIES = {PROP_QUASI_CONTRACTIVE}


class HypothesisCheck(BaseModel):
    condition: str
    holds: bool
    required: bool = False


class ClassificationReport(BaseModel):
    theorem_tag: str
    properties: List[str] = Field(default_factory=list)
    domain_label: str = DOMAIN_NONE
    constants_used: ConstantSet
    hypothesis_trace: List[HypothesisCheck] = Field(default_factory=list)
    cited_results: List[str] = Field(default_factory=list)
    boundary_of: Optional[str] = None
    statement: str = ""
    note: str = ""

    model_config = {
        "json_schema_extra": {
            "example": {
                "theorem_tag": TH_3_MAIN_SMALL_ALPHA,
                "properties": [PROP_CONTRACTIVE, PROP_CORE_CC, PROP_POSITIVE],
                "domain_label": DOMAIN_P,
            }
        }
    }

    @model_validator(mode="after")
    def _check_consistency(self) -> "ClassificationReport":
        if self.theorem_tag not in THEOREM_TAGS:
            raise ValueError(f"Invalid theorem tag: {self.theorem_tag}")
        if self.theorem_tag == NO_RESULT and self.properties:
            raise ValueError("NO_RESULT reports carry no properties")
        if self.theorem_tag != NO_RESULT and not all(h.holds for h in self.hypothesis_trace if h.required):
            raise ValueError("a required hypothesis fails for a positive classification")
        return self

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, indent=2, ensure_ascii=False)


class _Trace:
    """Ordered record of every tested inequality."""

    def __init__(self):
        self.checks: List[HypothesisCheck] = []

    def rule(self, conditions: List[Tuple[str, bool]]) -> List[HypothesisCheck]:
        checks = [HypothesisCheck(condition=text, holds=bool(holds)) for text, holds in conditions]
        self.checks.extend(checks)
        return checks

    @staticmethod
    def passes(checks: List[HypothesisCheck]) -> bool:
        return all(c.holds for c in checks)

    @staticmethod
    def require(checks: List[HypothesisCheck]) -> None:
        for c in checks:
            c.required = True

    def failing(self) -> List[str]:
        return [c.condition for c in self.checks if not c.holds]


def _f(x) -> Fraction:
    return Fraction(x)


def _bound(x: Fraction) -> float:
    """Correctly rounded bound; user values are compared against it exactly."""
    return float(x)


def _report(tag: str, properties, domain: str, constants: ConstantSet, trace: _Trace,
            cited: List[str], boundary_of: Optional[str] = None, note: str = "") -> ClassificationReport:
    statement = get_theorem_statement(boundary_of or tag) if tag not in (NO_RESULT,) else ""
    return ClassificationReport(theorem_tag=tag, properties=sorted(properties), domain_label=domain,
                                constants_used=constants, hypothesis_trace=trace.checks,
                                cited_results=cited, boundary_of=boundary_of, statement=statement, note=note)


def _open_or_boundary(tag: str, properties: set, domain: str, c: float, bound: float, bound_name: str,
                      constants: ConstantSet, trace: _Trace, cited: List[str]) -> ClassificationReport:
    if c < bound:
        return _report(tag, properties, domain, constants, trace, cited)
    closure = (properties - {PROP_CORE_CC}) | {PROP_CLOSURE}
    logger.warning(f"⚠️ c = {bound_name} = {bound}: closure case of {tag}")
    return _report(BOUNDARY_CLOSURE, closure, domain, constants, trace, cited, boundary_of=tag,
                   note=get_boundary_notice(tag, bound_name))


@log_lab_operation(logging.INFO)
def classify_L0(params: Params) -> ClassificationReport:
    """Rule table for L + c/|x|^2, evaluated in order; c exactly at the bound gives BOUNDARY_CLOSURE."""
    if params.has_tilde:
        raise ParamsError("classify_L0 takes parameters without eta/beta")
    N, p, c = _f(params.N), _f(params.p), params.c
    a = params.alpha
    exact = exact_constants(params.N, params.p, params.alpha)
    k = _bound(min(exact["beta_zero"], (p - 1) * ((N - 2) / p) ** 2))
    b0 = _bound(exact["beta_zero"])
    constants = compute_constants(params)
    trace = _Trace()

    small_alpha = a <= 2.0
    large_alpha = a > 2.0
    main_split = N > 2 * p
    bis_split = 2 * p >= N
    if main_split and bis_split:
        raise LabError("rule disjointness violated: N > 2p and 2p ≥ N both hold")

    rule_a = trace.rule([
        ("alpha ≤ 2", small_alpha),
        ("N > 2p", main_split),
        ("alpha ≤ (N-2)(p-1)", a <= _bound((N - 2) * (p - 1))),
        (f"c ≤ k = {k:g}", c <= k),
    ])
    if trace.passes(rule_a):
        trace.require(rule_a)
        return _open_or_boundary(TH_3_MAIN_SMALL_ALPHA, MAIN_PROPERTIES, DOMAIN_P, c, k, "k",
                                 constants, trace, [TH_2_1])

    rule_b = trace.rule([
        ("alpha ≤ 2", small_alpha),
        ("2p ≥ N", bis_split),
        ("2p - N ≤ alpha", _bound(2 * p - N) <= a),
        ("alpha ≤ (N-2)(p-1)", a <= _bound((N - 2) * (p - 1))),
        (f"c ≤ beta_0 = {b0:g}", c <= b0),
    ])
    if trace.passes(rule_b):
        trace.require(rule_b)
        return _open_or_boundary(TH_3_BIS_SMALL_ALPHA, BIS_PROPERTIES, f"{DOMAIN_P} ∩ {DOMAIN_INVERSE_SQUARE}",
                                 c, b0, "beta_0", constants, trace, [TH_2_1])

    rule_c = trace.rule([
        ("alpha > 2", large_alpha),
        ("p ≤ N/(N-2)", p * (N - 2) <= N),
    ])
    if trace.passes(rule_c):
        trace.require(rule_c)
        logger.info("ℹ️ alpha > 2 and p ≤ N/(N-2): the unperturbed operator generates no C0-semigroup")
        return _report(NO_RESULT, set(), DOMAIN_NONE, constants, trace, [TH_2_2_NEG],
                       note=get_no_result_notice(["p ≤ N/(N-2) with alpha > 2: no realization of L "
                                                  "generates a strongly continuous semigroup"]))

    rule_d = trace.rule([
        ("alpha > 2", large_alpha),
        ("N/(N-2) < p", p * (N - 2) > N),
        ("p < N/2", main_split),
        ("alpha < N(p-1)/p", a < _bound(N * (p - 1) / p)),
        (f"c ≤ k = {k:g}", c <= k),
    ])
    if trace.passes(rule_d):
        trace.require(rule_d)
        return _open_or_boundary(TH_3_MAIN_LARGE_ALPHA, MAIN_PROPERTIES, DOMAIN_HAT, c, k, "k",
                                 constants, trace, [TH_2_2_GEN])

    rule_e = trace.rule([
        ("alpha > 2", large_alpha),
        ("2p ≥ N", bis_split),
        ("2p - N ≤ alpha", _bound(2 * p - N) <= a),
        ("alpha < N(p-1)/p", a < _bound(N * (p - 1) / p)),
        (f"c ≤ beta_0 = {b0:g}", c <= b0),
    ])
    if trace.passes(rule_e):
        trace.require(rule_e)
        report = _open_or_boundary(TH_3_BIS_LARGE_ALPHA, BIS_PROPERTIES, f"{DOMAIN_HAT} ∩ {DOMAIN_INVERSE_SQUARE}",
                                   c, b0, "beta_0", constants, trace, [TH_2_2_GEN])
        if 2 * p == N:
            report.note = (report.note + " " + get_half_dimension_notice()).strip()
        return report

    note = get_no_result_notice(trace.failing())
    if large_alpha and 2 * p == N:
        note = note + " " + get_half_dimension_notice()
    return _report(NO_RESULT, set(), DOMAIN_NONE, constants, trace, [], note=note)


@log_lab_operation(logging.INFO)
def classify_tilde(params: Params) -> ClassificationReport:
    """Rule table for L - eta|x|^beta + c/|x|^2."""
    if params.eta is None or params.beta is None:
        raise ParamsError("classify_tilde needs eta and beta")
    if params.eta <= 0:
        raise ParamsError(f"eta > 0 required (got eta={params.eta})")
    N, p = _f(params.N), _f(params.p)
    a, beta, c = params.alpha, params.beta, params.c
    exact = exact_constants(params.N, params.p, params.alpha)
    k = _bound(min(exact["beta_zero"], (p - 1) * ((N - 2) / p) ** 2))
    b0 = _bound(exact["beta_zero"])
    constants = compute_constants(params)
    trace = _Trace()

    shared = [
        ("beta > alpha - 2", beta > a - 2.0),
        ("alpha - 2 > 0", a > 2.0),
        ("alpha ≥ 1 + N(p-2)/2", a >= _bound(1 + N * (p - 2) / 2)),
    ]
    rule_a = trace.rule(shared + [("N > 2p", N > 2 * p), (f"c ≤ k = {k:g}", c <= k)])
    if trace.passes(rule_a):
        trace.require(rule_a)
        return _open_or_boundary(TH_TILDE_CONTRACTIVE, TILDE_PROPERTIES, DOMAIN_TILDE, c, k, "k",
                                 constants, trace, [TH_2_3])

    rule_b = trace.rule(shared + [("N ≤ 2p", N <= 2 * p), (f"c ≤ beta_0 = {b0:g}", c <= b0)])
    if trace.passes(rule_b):
        trace.require(rule_b)
        return _open_or_boundary(TH_TILDE_BIS, TILDE_BIS_PROPERTIES, f"{DOMAIN_TILDE} ∩ {DOMAIN_INVERSE_SQUARE}",
                                 c, b0, "beta_0", constants, trace, [TH_2_3])

    return _report(NO_RESULT, set(), DOMAIN_NONE, constants, trace, [],
                   note=get_no_result_notice(trace.failing()))


def classify(params: Params) -> ClassificationReport:
    return classify_tilde(params) if params.has_tilde else classify_L0(params)


@log_lab_operation(logging.INFO)
def classify_unperturbed(params: Params) -> ClassificationReport:
    """Generation results for c = 0 recalled from the literature (the inputs of the rule tables)."""
    N, p = _f(params.N), _f(params.p)
    a = params.alpha
    constants = compute_constants(params)
    trace = _Trace()

    if params.has_tilde:
        checks = trace.rule([("alpha > 2", a > 2.0), ("beta > alpha - 2", params.beta > a - 2.0),
                             ("eta > 0", params.eta > 0)])
        if trace.passes(checks):
            trace.require(checks)
            return _report(TH_2_3, {PROP_POSITIVE, PROP_QUASI_CONTRACTIVE, PROP_ANALYTIC, PROP_CORE_CC},
                           DOMAIN_TILDE, constants, trace, [TH_2_3])
        return _report(NO_RESULT, set(), DOMAIN_NONE, constants, trace, [],
                       note=get_no_result_notice(trace.failing()))

    small = trace.rule([("alpha ≤ 2", a <= 2.0)])
    if trace.passes(small):
        trace.require(small)
        return _report(TH_2_1, {PROP_POSITIVE, PROP_ANALYTIC, PROP_CORE_CC}, DOMAIN_P, constants, trace, [TH_2_1])

    negative = trace.rule([("p ≤ N/(N-2)", p * (N - 2) <= N)])
    if trace.passes(negative):
        trace.require(negative)
        return _report(TH_2_2_NEG, set(), DOMAIN_NONE, constants, trace, [TH_2_2_NEG],
                       note="no realization of L generates a strongly continuous semigroup")

    limit = _bound((p - 1) * (N - 2))
    generation = trace.rule([("p > N/(N-2)", True), ("alpha ≤ (p-1)(N-2)", a <= limit)])
    if not trace.passes(generation):
        return _report(NO_RESULT, set(), DOMAIN_NONE, constants, trace, [],
                       note=get_no_result_notice(trace.failing()))
    trace.require(generation)
    properties = {PROP_CONTRACTIVE, PROP_POSITIVE}
    if trace.passes(trace.rule([("alpha < (p-1)(N-2)", a < limit)])):
        properties.add(PROP_ANALYTIC)
    domain = DOMAIN_MAX
    if trace.passes(trace.rule([("alpha < N(p-1)/p", a < _bound(N * (p - 1) / p))])):
        properties.add(PROP_CORE_CC)
        domain = DOMAIN_HAT
    return _report(TH_2_2_GEN, properties, domain, constants, trace, [TH_2_2_GEN])
