"""Command-line front end.

    python -m dfinvariant df --input a1_pgl2.json
    python -m dfinvariant fano --input my_instance.json --format json

Exit codes: 0 success, 1 invalid input, 2 computation failure. Reports go to
stdout, logging to stderr.
"""

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from typing import Any

import sympy as sp
from pydantic import BaseModel

from dfinvariant import config
from dfinvariant.core import futaki
from dfinvariant.core.polynomial_core import verify_density_identities
from dfinvariant.core.polytope_lab import (
    check_fano,
    classify_facets,
    facets,
    is_weyl_invariant,
    pl_is_weyl_invariant,
    positive_part,
    vertices,
    volume,
)
from dfinvariant.core.root_system import weyl_group
from dfinvariant.errors import ComputationError, NotWeylInvariantFunction, NotWeylInvariantPolytope, ValidationError
from dfinvariant.instance_loader import Instance, InstanceLoader, build_instance
from dfinvariant.models.df_models import (
    BarycenterReport,
    ValidationSummary,
    VolumeReport,
    decimal_string,
    format_rational,
)

logger = logging.getLogger(__name__)

COMMANDS = ("validate", "fano", "identities", "volume", "barycenter", "df", "instances")


# ── Commands ──────────────────────────────────────────────────────────

def cmd_validate(inst: Instance, args: argparse.Namespace) -> ValidationSummary:
    rs, P, f = inst.root_system, inst.polytope, inst.function
    group = weyl_group(rs)
    if not is_weyl_invariant(P, group):
        raise NotWeylInvariantPolytope(f"P is not stable under W({rs.name})", field="polytope")
    Pplus = positive_part(P, rs)
    classify_facets(Pplus, rs)

    function_invariant = None
    if f is not None:
        function_invariant = pl_is_weyl_invariant(f, P, group)
        if not function_invariant and not _allow_override(inst, args):
            raise NotWeylInvariantFunction(f"f is not W({rs.name})-invariant on P", field="function")

    return ValidationSummary(
        root_system=rs.name,
        n=rs.n,
        r=rs.r,
        weyl_order=group.order,
        vertices=[list(v) for v in vertices(P).vertices],
        facets=len(facets(P)),
        positive_part_vertices=[list(v) for v in vertices(Pplus).vertices],
        function_invariant=function_invariant,
    )


def cmd_fano(inst: Instance, args: argparse.Namespace):
    return check_fano(inst.polytope, inst.root_system)


def cmd_identities(inst: Instance, args: argparse.Namespace):
    return verify_density_identities(inst.root_system)


def cmd_volume(inst: Instance, args: argparse.Namespace) -> VolumeReport:
    Pplus = positive_part(inst.polytope, inst.root_system)
    return VolumeReport(
        vol_dh=futaki.dh_volume(Pplus, inst.root_system),
        volume=volume(inst.polytope),
        volume_positive_part=volume(Pplus),
    )


def cmd_barycenter(inst: Instance, args: argparse.Namespace) -> BarycenterReport:
    Pplus = positive_part(inst.polytope, inst.root_system)
    return BarycenterReport(
        bar_dh=list(futaki.dh_barycenter(Pplus, inst.root_system)),
        two_rho=list(inst.root_system.two_rho),
    )


def cmd_df(inst: Instance, args: argparse.Namespace):
    if inst.function is None:
        raise ValidationError("the df command needs a 'function' in the instance", field="function")
    if args.mc_samples is not None and args.mc_samples < 1:
        raise ValidationError(f"--mc-samples must be at least 1, got {args.mc_samples}", field="mc_samples")
    return futaki.df_report(
        inst.polytope,
        inst.root_system,
        inst.function,
        allow_non_invariant_f=_allow_override(inst, args),
        mc_samples=args.mc_samples or inst.options.mc_samples,
        mc_seed=inst.options.seed if args.seed is None else args.seed,
        with_monte_carlo=args.mc_check,
    )


def _allow_override(inst: Instance, args: argparse.Namespace) -> bool:
    return args.allow_non_invariant_f or inst.options.allow_non_invariant_f


HANDLERS = {
    "validate": cmd_validate,
    "fano": cmd_fano,
    "identities": cmd_identities,
    "volume": cmd_volume,
    "barycenter": cmd_barycenter,
    "df": cmd_df,
}


# ── Rendering ─────────────────────────────────────────────────────────

def _text_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "n/a"
    if isinstance(value, sp.Rational):
        exact = format_rational(value)
        return exact if value.q == 1 else f"{exact}  (~{decimal_string(value)})"
    if isinstance(value, list) and not value:
        return "[]"
    if isinstance(value, list) and all(isinstance(v, sp.Rational) for v in value):
        exact = ", ".join(format_rational(v) for v in value)
        if all(v.q == 1 for v in value):
            return f"({exact})"
        return f"({exact})  (~({', '.join(decimal_string(v) for v in value)}))"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _text_lines(data: dict, prefix: str = "") -> list[str]:
    lines = []
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            lines.extend(_text_lines(value, f"{name}."))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            for i, item in enumerate(value):
                lines.extend(_text_lines(item, f"{name}[{i}]."))
        elif isinstance(value, list) and value and isinstance(value[0], list):
            lines.append(f"{name} = [{'; '.join(_text_value(v) for v in value)}]")
        else:
            lines.append(f"{name} = {_text_value(value)}")
    return lines


def _json_ready(data: Any) -> Any:
    """Rationals become "p/q"; each exact scalar or vector gets a <key>_decimal sibling."""
    if isinstance(data, dict):
        out = {}
        for key, value in data.items():
            out[key] = _json_ready(value)
            if isinstance(value, sp.Rational):
                out[f"{key}_decimal"] = decimal_string(value)
            elif isinstance(value, list) and value and all(isinstance(v, sp.Rational) for v in value):
                out[f"{key}_decimal"] = [decimal_string(v) for v in value]
        return out
    if isinstance(data, (list, tuple)):
        return [_json_ready(v) for v in data]
    if isinstance(data, sp.Rational):
        return format_rational(data)
    return data


def render(report: BaseModel | list[dict], fmt: str) -> str:
    if isinstance(report, list):
        if fmt == "json":
            return json.dumps(report, sort_keys=True, indent=2)
        return "\n".join(f"{item['id']}  {item['path']}" for item in report)
    if fmt == "json":
        return json.dumps(_json_ready(report.model_dump()), sort_keys=True, indent=2)
    return "\n".join(_text_lines(report.model_dump()))


# ── Entry point ───────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dfinvariant",
        description="Exact Donaldson-Futaki invariants of W-invariant lattice polytopes.",
    )
    parser.add_argument("command", choices=COMMANDS, help="What to compute")
    parser.add_argument("--input", help="Instance file, or the name of a bundled instance")
    parser.add_argument("--format", choices=("text", "json"), default="text", help="Report format (default: text)")
    parser.add_argument("--mc-check", action="store_true", help="Append a Monte-Carlo corroboration block (df only)")
    parser.add_argument("--mc-samples", type=int, default=None, help="Override options.mc_samples")
    parser.add_argument("--seed", type=int, default=None, help="Override options.seed")
    parser.add_argument(
        "--allow-non-invariant-f",
        action="store_true",
        help="Proceed even when f is not W-invariant (marked in the report)",
    )
    return parser


def _describe(exc: ValidationError | ComputationError) -> str:
    field = f" [field: {exc.field}]" if exc.field else ""
    return f"{type(exc).__name__}: {exc}{field}"


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=config.LOG_LEVEL,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    loader = InstanceLoader()

    if args.command == "instances":
        print(render(loader.list_instances(), args.format))
        return 0
    if not args.input:
        print("error: --input is required for this command", file=sys.stderr)
        return 1

    try:
        spec = loader.load(args.input)
        inst = build_instance(spec, source=args.input)
        report = HANDLERS[args.command](inst, args)
    except ValidationError as exc:
        print(f"error: {_describe(exc)}", file=sys.stderr)
        return 1
    except ComputationError as exc:
        print(f"error: {_describe(exc)}", file=sys.stderr)
        return 2

    print(render(report, args.format))
    return 0
