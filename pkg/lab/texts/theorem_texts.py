from lab_constants import *

_STATEMENTS = {
    TH_2_1: "For 0 ≤ alpha ≤ 2 and every p in (1, ∞) the realization of L with domain D_p "
            "generates a positive analytic C0-semigroup; C_c^∞ is a core.",
    TH_2_2_NEG: "For alpha > 2 and p ≤ N/(N-2) no realization of L in L^p generates a "
                "strongly continuous semigroup.",
    TH_2_2_GEN: "For alpha > 2, p > N/(N-2) and alpha ≤ (p-1)(N-2) the maximal realization of L "
                "generates a positive contraction C0-semigroup, analytic when alpha < (p-1)(N-2); "
                "for alpha < N(p-1)/p the maximal domain equals D_hat_p and C_c^∞ is a core.",
    TH_2_3: "For alpha > 2 and beta > alpha - 2 the realization of L - eta|x|^beta with domain "
            "D_tilde_p generates a positive quasi-contractive analytic semigroup; C_c^∞ is a core.",
    TH_3_MAIN_SMALL_ALPHA: "For 0 ≤ alpha ≤ 2, 2p < N, alpha ≤ (N-2)(p-1) and c < k the operator "
                           "L + c/|x|^2 with domain D_p generates a contractive positive C0-semigroup; "
                           "C_c^∞ is a core.",
    TH_3_MAIN_LARGE_ALPHA: "For alpha > 2, N/(N-2) < p < N/2, alpha < N(p-1)/p and c < k the operator "
                           "L + c/|x|^2 with domain D_hat_p generates a contractive positive C0-semigroup; "
                           "C_c^∞ is a core.",
    TH_3_BIS_SMALL_ALPHA: "For 0 ≤ alpha ≤ 2, 2p ≥ N, 2p - N ≤ alpha ≤ (N-2)(p-1) and c < beta_0 the operator "
                          "L + c/|x|^2 with domain D_p ∩ D(|x|^{-2}) generates a contractive analytic C0-semigroup.",
    TH_3_BIS_LARGE_ALPHA: "For alpha > 2, 2p ≥ N, 2p - N ≤ alpha < N(p-1)/p and c < beta_0 the operator "
                          "L + c/|x|^2 with domain D_hat_p ∩ D(|x|^{-2}) generates a contractive analytic "
                          "C0-semigroup.",
    TH_TILDE_CONTRACTIVE: "For beta > alpha - 2 > 0, eta > 0, alpha ≥ 1 + N(p-2)/2, N > 2p and c < k the operator "
                          "L - eta|x|^beta + c/|x|^2 with domain D_tilde_p generates a positive quasi-contractive "
                          "C0-semigroup; C_c^∞ is a core.",
    TH_TILDE_BIS: "For beta > alpha - 2 > 0, eta > 0, alpha ≥ 1 + N(p-2)/2, N ≤ 2p and c < beta_0 the operator "
                  "L - eta|x|^beta + c/|x|^2 with domain D_tilde_p ∩ D(|x|^{-2}) generates a quasi-contractive "
                  "C0-semigroup.",
}


def get_theorem_statement(tag: str) -> str:
    """Plain-text statement of the generation result behind a tag."""
    if tag not in _STATEMENTS:
        valid_tags = list(_STATEMENTS.keys())
        raise ValueError(f"Invalid theorem tag: {tag}. Valid tags are: {valid_tags}")
    return _STATEMENTS[tag]


def get_boundary_notice(open_tag: str, bound_name: str) -> str:
    return (f"c equals {bound_name}: the operator is not claimed to generate on the stated domain; "
            f"its closure generates a semigroup with the properties of {open_tag}.")


def get_no_result_notice(failed_conditions) -> str:
    failed = "; ".join(failed_conditions) if failed_conditions else "none of the rule tables matched"
    return ("No generation theorem of the source applies to these parameters. This does not mean "
            f"that generation fails. Failing conditions: {failed}.")


def get_half_dimension_notice() -> str:
    return ("p = N/2 with alpha > 2: the large-alpha theorem needs p < N/2, so only the bis branch "
            "can apply here.")
