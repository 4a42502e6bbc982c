# Theorem tags
TH_2_1 = "TH_2_1"
TH_2_2_NEG = "TH_2_2_NEG"
TH_2_2_GEN = "TH_2_2_GEN"
TH_2_3 = "TH_2_3"
TH_3_MAIN_SMALL_ALPHA = "TH_3_MAIN_SMALL_ALPHA"
TH_3_MAIN_LARGE_ALPHA = "TH_3_MAIN_LARGE_ALPHA"
TH_3_BIS_SMALL_ALPHA = "TH_3_BIS_SMALL_ALPHA"
TH_3_BIS_LARGE_ALPHA = "TH_3_BIS_LARGE_ALPHA"
TH_TILDE_CONTRACTIVE = "TH_TILDE_CONTRACTIVE"
TH_TILDE_BIS = "TH_TILDE_BIS"
BOUNDARY_CLOSURE = "BOUNDARY_CLOSURE"
NO_RESULT = "NO_RESULT"

THEOREM_TAGS = (
    TH_2_1, TH_2_2_NEG, TH_2_2_GEN, TH_2_3,
    TH_3_MAIN_SMALL_ALPHA, TH_3_MAIN_LARGE_ALPHA,
    TH_3_BIS_SMALL_ALPHA, TH_3_BIS_LARGE_ALPHA,
    TH_TILDE_CONTRACTIVE, TH_TILDE_BIS,
    BOUNDARY_CLOSURE, NO_RESULT,
)

# Semigroup properties
PROP_CONTRACTIVE = "contractive"
PROP_QUASI_CONTRACTIVE = "quasi-contractive"
PROP_ANALYTIC = "analytic"
PROP_POSITIVE = "positive"
PROP_CORE_CC = "core_is_Cc_infinity"
PROP_CLOSURE = "closure_generates"

# Domain labels
DOMAIN_P = "D_p"
DOMAIN_MAX = "D_max"
DOMAIN_HAT = "D_hat_p"
DOMAIN_TILDE = "D_tilde_p"
DOMAIN_INVERSE_SQUARE = "D(|x|^{-2})"
DOMAIN_NONE = ""

# Grid layouts
LAYOUT_LOG = "log_uniform"
LAYOUT_UNIFORM = "uniform"

# Time-stepping schemes
SCHEME_IMPLICIT_EULER = "implicit_euler"
SCHEME_CRANK_NICOLSON = "crank_nicolson"
BOUNDARY_DIRICHLET = "dirichlet_zero"

# Profile families
FAMILY_GAUSSIAN = "gaussian"
FAMILY_POWER_EXPONENTIAL = "power_exponential"
FAMILY_POWER_GAUSSIAN = "power_gaussian"
FAMILY_CUTOFF_POWER = "cutoff_power"
FAMILY_LINEAR_GAUSSIAN = "linear_gaussian"
FAMILY_SAMPLED = "sampled"

KIND_ANALYTIC = "analytic_family"
KIND_SAMPLED = "sampled"

CUTOFF_LINEAR = "linear"
CUTOFF_LOG = "log"

# Forms
FORM_DISSIPATIVITY = "dissipativity"
FORM_TILDE = "tilde"
FORM_YOSIDA = "yosida"
FORM_SHIFTED = "shifted"
FORM_TILDE_YOSIDA = "tilde_yosida"
FORM_DISPERSIVITY = "dispersivity"

FORMS = (FORM_DISSIPATIVITY, FORM_TILDE, FORM_YOSIDA, FORM_SHIFTED, FORM_TILDE_YOSIDA, FORM_DISPERSIVITY)

# CLI
SUBCOMMANDS = ("constants", "classify", "hardy", "forms", "sharpness", "evolve")

OUTPUT_JSON = "json"
OUTPUT_CSV = "csv"
OUTPUT_PRETTY = "pretty"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2

SUPERCRITICAL_GROWTH = 10.0
