"""
Command-line front door of the lab.

Every subcommand builds one document (JSON object, CSV table or a coloured
console report) and emits it only when the whole computation succeeded.
Exit codes: 0 success, 1 validation error, 2 numerical failure.
"""

import argparse
import csv
import io
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

from colorama import Fore, Style, init
from pydantic import ValidationError

from classifier import ClassificationReport, classify, classify_unperturbed
from errors import NUMERICAL_ERRORS, LabError, ParamsError
from evolution import EvolutionConfig, contractivity_experiment, evolve
from factory_profiles import ProfileFactory, build_profile_corpus, random_power_gaussians
from inequality_lab import FORM_EVALUATORS, evaluate_corpus, hardy_infimum_search, hardy_ratio
from lab_config import get_settings
from lab_constants import *
from params_core import Params, compute_constants
from radial_toolkit import make_grid
from sharpness_oracle import c_limit, quadrature_c_bound, sharpness_table
from utils import configure_logging

logger = logging.getLogger(__name__)

DEFAULT_PROFILE = "gaussian:a=1"
DEFAULT_HARDY_EPS = "0.2,0.1,0.05,0.025"
DEFAULT_DELTAS = "1,0.1,0.01,0.001"
YOSIDA_FORMS = (FORM_YOSIDA, FORM_SHIFTED, FORM_TILDE_YOSIDA)


class CliUsageError(ParamsError):
    """Unknown flags or malformed values on the command line."""


class LabArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise CliUsageError(f"{self.prog}: {message}")


class Document:
    """One result: a JSON payload, CSV rows and pretty lines."""

    def __init__(self, payload: Any, rows: List[Dict[str, Any]], lines: Optional[List[str]] = None,
                 json_text: Optional[str] = None):
        self.payload = payload
        self.rows = rows
        self.lines = lines or []
        self.json_text = json_text

    def render(self, output: str) -> str:
        if output == OUTPUT_JSON:
            return (self.json_text or json.dumps(self.payload, sort_keys=True, indent=2, ensure_ascii=False)) + "\n"
        if output == OUTPUT_CSV:
            buffer = io.StringIO()
            if self.rows:
                writer = csv.DictWriter(buffer, fieldnames=list(self.rows[0].keys()), lineterminator="\n")
                writer.writeheader()
                writer.writerows(self.rows)
            return buffer.getvalue()
        return "\n".join(self.lines) + "\n"


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise CliUsageError(f"expected a comma-separated list of numbers, got {text!r}")


def _ok(flag: bool) -> str:
    return f"{Fore.GREEN}✔{Style.RESET_ALL}" if flag else f"{Fore.RED}✘{Style.RESET_ALL}"


def _header(title: str) -> str:
    return f"{Fore.CYAN}{Style.BRIGHT}{title}{Style.RESET_ALL}"


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    common = LabArgumentParser(add_help=False)
    common.add_argument("--N", type=int, help="Dimension (N ≥ 3)")
    common.add_argument("--p", type=float, help="Exponent 1 < p < ∞")
    common.add_argument("--alpha", type=float, help="Diffusion exponent alpha ≥ 0")
    common.add_argument("--c", type=float, help="Coefficient of the inverse-square potential")
    common.add_argument("--eta", type=float, help="Coefficient of the confining term (tilde branch)")
    common.add_argument("--beta", type=float, help="Exponent of the confining term (tilde branch)")
    common.add_argument("--params-file", help="JSON document with the Params fields; flags override it")
    common.add_argument("--output", choices=[OUTPUT_JSON, OUTPUT_CSV, OUTPUT_PRETTY], default=OUTPUT_JSON)
    common.add_argument("--output-path", help="Write the document to this file instead of stdout")
    common.add_argument("--log-level", default=None, help=f"Logging level (default {settings.log_level})")
    common.add_argument("--quad-tol", type=float, default=settings.quad_tol, help="Quadrature tolerance")
    common.add_argument("--workers", type=int, default=settings.workers, help="Concurrent evaluations")

    parser = LabArgumentParser(
        prog="hardy-lab",
        description="Verification lab for (1+|x|^alpha)Δ + c/|x|^2: constants, classification, "
                    "inequality checks, sharpness oracle and evolution runs.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=LabArgumentParser)

    subparsers.add_parser("constants", parents=[common], help="Closed-form constants for (N, p, alpha)")

    p_classify = subparsers.add_parser("classify", parents=[common], help="Applicable generation theorem")
    p_classify.add_argument("--unperturbed", action="store_true",
                            help="Report the c = 0 generation results instead of the perturbed rule table")

    p_hardy = subparsers.add_parser("hardy", parents=[common], help="Weighted Hardy ratio checks")
    p_hardy.add_argument("--eps", default=DEFAULT_HARDY_EPS, help="Decreasing eps sequence for the optimizer family")
    p_hardy.add_argument("--profile", help="Evaluate the ratio on one profile descriptor instead")

    p_forms = subparsers.add_parser("forms", parents=[common], help="Dissipativity and Yosida forms")
    p_forms.add_argument("--form", choices=list(FORMS), default=FORM_DISSIPATIVITY)
    p_forms.add_argument("--profile", default=DEFAULT_PROFILE, help="Profile descriptor, e.g. gaussian:a=1")
    p_forms.add_argument("--corpus", action="store_true", help="Run on the 100-profile corpus")
    p_forms.add_argument("--random", type=int, metavar="COUNT", help="Run on COUNT random power-Gaussian profiles")
    p_forms.add_argument("--seed", type=int, default=0, help="Seed for --random")
    p_forms.add_argument("--epsilon", type=float, default=1e-2, help="Yosida parameter")
    p_forms.add_argument("--normalize", action="store_true", help="Scale dissipativity forms by ‖u‖_p^p")

    p_sharp = subparsers.add_parser("sharpness", parents=[common], help="Limit of the c bound as delta → 0")
    p_sharp.add_argument("--deltas", default=DEFAULT_DELTAS, help="delta values for the table")
    p_sharp.add_argument("--check-quadrature", action="store_true",
                         help="Cross-check each table entry by quadrature")

    p_evolve = subparsers.add_parser("evolve", parents=[common], help="Time-step the radial problem")
    p_evolve.add_argument("--config", help="JSON document for EvolutionConfig")
    p_evolve.add_argument("--profile", default=DEFAULT_PROFILE, help="Initial profile descriptor")
    p_evolve.add_argument("--M", type=int, default=settings.grid_m)
    p_evolve.add_argument("--r-min", type=float, default=settings.r_min)
    p_evolve.add_argument("--r-max", type=float, default=settings.r_max)
    p_evolve.add_argument("--dt", type=float, default=settings.dt)
    p_evolve.add_argument("--t-final", type=float, default=settings.t_final)
    p_evolve.add_argument("--scheme", choices=[SCHEME_IMPLICIT_EULER, SCHEME_CRANK_NICOLSON],
                          default=SCHEME_IMPLICIT_EULER)
    p_evolve.add_argument("--c-values", help="Run the contractivity experiment for these c values")
    p_evolve.add_argument("--r-mins", default="1e-2,1e-3,1e-4", help="r_min sequence for --c-values")
    return parser


def params_from_args(args: argparse.Namespace, required: bool = True) -> Optional[Params]:
    """Merge --params-file with the flags and validate against the Params invariants."""
    fields: Dict[str, Any] = {}
    if args.params_file:
        try:
            with open(args.params_file, "r") as f:
                fields.update(json.load(f))
        except (OSError, json.JSONDecodeError) as e:
            raise CliUsageError(f"cannot read params file {args.params_file}: {e}")
    for name in ("N", "p", "alpha", "c", "eta", "beta"):
        value = getattr(args, name, None)
        if value is not None:
            fields[name] = value
    if not fields and not required:
        return None
    missing = [name for name in ("N", "p", "alpha") if name not in fields]
    if missing:
        raise CliUsageError(f"missing parameters: {', '.join('--' + m for m in missing)}")
    return Params(**fields)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_constants(args: argparse.Namespace) -> Document:
    params = params_from_args(args)
    constants = compute_constants(params)
    payload = {"params": params.model_dump(exclude_none=True), "constants": constants.model_dump(exclude_none=True)}
    lines = [_header(f"Constants for N={params.N}, p={params.p:g}, alpha={params.alpha:g}")]
    lines += [f"  {name:<16} {value:.12g}" for name, value in payload["constants"].items()]
    return Document(payload, [payload["constants"]], lines)


def _classification_lines(report: ClassificationReport) -> List[str]:
    color = Fore.RED if report.theorem_tag == NO_RESULT else (
        Fore.YELLOW if report.theorem_tag == BOUNDARY_CLOSURE else Fore.GREEN)
    lines = [_header("Classification"),
             f"  theorem:    {color}{report.theorem_tag}{Style.RESET_ALL}"
             + (f" (boundary of {report.boundary_of})" if report.boundary_of else ""),
             f"  properties: {', '.join(report.properties) or '-'}",
             f"  domain:     {report.domain_label or '-'}",
             _header("Hypotheses")]
    for check in report.hypothesis_trace:
        marker = " *" if check.required else ""
        lines.append(f"  {_ok(check.holds)} {check.condition}{marker}")
    if report.note:
        lines += [_header("Note"), f"  {report.note}"]
    return lines


def cmd_classify(args: argparse.Namespace) -> Document:
    params = params_from_args(args)
    report = classify_unperturbed(params) if args.unperturbed else classify(params)
    rows = [{"theorem_tag": report.theorem_tag, "condition": h.condition, "holds": h.holds,
             "required": h.required} for h in report.hypothesis_trace]
    return Document(report.model_dump(mode="json"), rows, _classification_lines(report),
                    json_text=report.to_json())


def cmd_hardy(args: argparse.Namespace) -> Document:
    params = params_from_args(args)
    quad = {"tol": args.quad_tol}
    if args.profile:
        evaluations = [hardy_ratio(ProfileFactory.from_descriptor(args.profile), params, **quad)]
    else:
        evaluations = hardy_infimum_search(params, _float_list(args.eps), **quad)
    gamma = evaluations[0].details["gamma_alpha"]
    payload = {"params": params.model_dump(exclude_none=True), "gamma_alpha": gamma,
               "evaluations": [e.model_dump() for e in evaluations]}
    lines = [_header(f"Hardy ratios (gamma_alpha = {gamma:.10g})")]
    for e in evaluations:
        eps = e.details.get("eps")
        label = f"eps={eps:g}" if eps is not None else e.profile_descriptor
        lines.append(f"  {_ok(e.holds)} {label:<28} ratio={e.ratio:.10g}")
    return Document(payload, [dict(e.csv_row(), eps=e.details.get("eps")) for e in evaluations], lines)


def cmd_forms(args: argparse.Namespace) -> Document:
    params = params_from_args(args)
    evaluator = FORM_EVALUATORS[args.form]
    kwargs: Dict[str, Any] = {"tol": args.quad_tol}
    if args.form in YOSIDA_FORMS:
        kwargs["epsilon"] = args.epsilon
    elif args.form != FORM_DISPERSIVITY:
        kwargs["normalize"] = args.normalize
    if args.corpus:
        profiles = build_profile_corpus()
    elif args.random:
        profiles = random_power_gaussians(args.random, seed=args.seed)
    else:
        profiles = [ProfileFactory.from_descriptor(args.profile)]
    evaluations = evaluate_corpus(evaluator, profiles, params, workers=args.workers, **kwargs)
    failures = sum(1 for e in evaluations if not e.holds)
    payload = {"params": params.model_dump(exclude_none=True), "form": args.form,
               "violations": failures, "evaluations": [e.model_dump() for e in evaluations]}
    lines = [_header(f"Form {args.form} on {len(evaluations)} profile(s): {failures} violation(s)")]
    lines += [f"  {_ok(e.holds)} {e.profile_descriptor:<36} lhs={e.lhs:.6e} rhs={e.rhs:.6e} gap={e.gap:.3e}"
              for e in evaluations]
    return Document(payload, [e.csv_row() for e in evaluations], lines)


def cmd_sharpness(args: argparse.Namespace) -> Document:
    params = params_from_args(args)
    if params.alpha != int(params.alpha) or params.alpha < 1:
        raise ParamsError(f"sharpness needs an integer alpha ≥ 1 (got alpha={params.alpha})")
    n = int(params.alpha)
    limit = c_limit(params.N, params.p, n)
    table = sharpness_table(params.N, params.p, n, _float_list(args.deltas))
    rows = [entry.csv_row() for entry in table]
    if args.check_quadrature:
        for row, entry in zip(rows, table):
            check = quadrature_c_bound(params.N, params.p, n, entry.delta, tol=args.quad_tol)
            row["quadrature"] = check.quadrature
            row["abs_difference"] = check.abs_difference
    b0 = compute_constants(params).beta_zero
    payload = {"N": params.N, "p": params.p, "alpha_n": n, "c_limit": limit, "beta_zero": b0, "table": rows}
    lines = [_header(f"Sharpness: c_limit = {limit:.12g}, beta_0 = {b0:.12g}")]
    lines += [f"  delta={row['delta']:<10g} c_bound={row['c_bound']:.12g}" for row in rows]
    return Document(payload, rows, lines)


def cmd_evolve(args: argparse.Namespace) -> Document:
    profile = ProfileFactory.from_descriptor(args.profile)
    if args.c_values:
        params = params_from_args(args)
        rows = contractivity_experiment(params, _float_list(args.c_values), _float_list(args.r_mins),
                                        u0=profile, M=args.M, r_max=args.r_max, dt=args.dt,
                                        t_final=args.t_final, scheme=args.scheme, workers=args.workers)
        table = [row.csv_row() for row in rows]
        lines = [_header("Contractivity experiment")]
        lines += [f"  {_ok(not row.supercritical)} c={row.c:<8g} r_min={row.r_min:<8g} "
                  f"growth={row.growth_factor:.6g} max step growth={row.max_step_growth:.3e}" for row in rows]
        return Document({"params": params.model_dump(exclude_none=True), "rows": table}, table, lines)

    if args.config:
        try:
            with open(args.config, "r") as f:
                document = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise CliUsageError(f"cannot read config {args.config}: {e}")
        params = params_from_args(args, required=False)
        if params is not None:
            document["params"] = params.model_dump(exclude_none=True)
        config = EvolutionConfig.from_document(document)
    else:
        config = EvolutionConfig(params=params_from_args(args), grid=make_grid(args.r_min, args.r_max, args.M),
                                 dt=args.dt, t_final=args.t_final, scheme=args.scheme)
    trace = evolve(config, profile)
    payload = trace.model_dump(exclude={"final_values"})
    lines = [_header(f"Evolution ({config.scheme}, M={config.grid.M}, {config.steps} steps)"),
             f"  growth factor   {trace.growth_factor:.8g}",
             f"  max step growth {trace.max_step_growth:.3e}",
             f"  min value       {min(trace.minima):.3e}",
             f"  {_ok(not trace.supercritical)} supercritical: {trace.supercritical}"]
    return Document(payload, trace.to_csv_rows(), lines)


COMMANDS = {
    "constants": cmd_constants,
    "classify": cmd_classify,
    "hardy": cmd_hardy,
    "forms": cmd_forms,
    "sharpness": cmd_sharpness,
    "evolve": cmd_evolve,
}


def _validation_message(error: ValidationError) -> str:
    return "; ".join(f"{'.'.join(str(x) for x in err['loc']) or 'params'}: {err['msg']}" for err in error.errors())


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    """Parse, dispatch and emit; returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        settings = get_settings()
        configure_logging(args.log_level or settings.log_level, settings.log_file)
        document = COMMANDS[args.command](args)
        text = document.render(args.output)
    except ValidationError as e:
        print(f"validation error: {_validation_message(e)}", file=stderr)
        return EXIT_VALIDATION
    except ParamsError as e:
        print(f"validation error: {e}", file=stderr)
        return EXIT_VALIDATION
    except NUMERICAL_ERRORS as e:
        print(f"numerical failure: {type(e).__name__}: {e}", file=stderr)
        return EXIT_NUMERICAL
    except LabError as e:
        print(f"numerical failure: {e}", file=stderr)
        return EXIT_NUMERICAL

    if args.output_path:
        with open(args.output_path, "w") as f:
            f.write(text)
        logger.info(f"💾 wrote {args.command} output to {args.output_path}")
    else:
        stdout.write(text)
    return EXIT_OK


def main() -> None:
    init()
    sys.exit(run())


if __name__ == "__main__":
    main()
