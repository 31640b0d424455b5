"""
Command-line front end.

    python -m backend.app.main family --affine q=2 t=2 -o f.json
    python -m backend.app.main verify f.json
    python -m backend.app.main design --theorems f.json
    python -m backend.app.main construct --seed-ext g.json --cyclic -o ghat.json
    python -m backend.app.main pa source.json f.json --iid 2

Exit codes: 0 success, 1 verification or theorem failure, 2 usage or input error.
"""
import argparse
import json
import logging
import random
import sys
from fractions import Fraction
from typing import Optional

import pandas as pd
from pydantic import ValidationError

from ..config import API_VERSION, SERVICE_NAME, override_settings, setup_logging
from . import construct, designs, privacy, storage
from .errors import HashDesignError, TheoremViolationError, UnsupportedParametersError
from .hash_family import HashFamily, build_named
from .models import rational_str
from .verify import classify

logger = logging.getLogger(__name__)

PARAM_ORDER = {
    "affine": ("q", "t"),
    "dual_affine": ("q", "t"),
    "transversal": ("q",),
    "toeplitz": ("q", "m", "n"),
    "field_multiply": ("q", "n", "m"),
}


def parse_family_params(kind: str, tokens: list[str]) -> dict:
    """key=value tokens or bare integers in the family's parameter order."""
    names = PARAM_ORDER[kind]
    params: dict = {}
    position = 0
    for token in tokens:
        if "=" in token:
            key, value = token.split("=", 1)
        else:
            if position >= len(names):
                raise UnsupportedParametersError(f"{kind}: unexpected parameter {token!r}")
            key, value = names[position], token
            position += 1
        if key == "H":
            params["H"] = [int(v) for v in value.split(",") if v != ""]
            continue
        if key not in names:
            raise UnsupportedParametersError(f"{kind}: unknown parameter {key!r}")
        try:
            params[key] = int(value)
        except ValueError:
            raise UnsupportedParametersError(f"{kind}: {key} must be an integer, got {value!r}") from None
    missing = [n for n in names if n not in params]
    if missing:
        raise UnsupportedParametersError(f"{kind}: missing {', '.join(missing)}")
    return params


def _flatten(data, prefix: str = "") -> dict:
    out = {}
    if isinstance(data, dict):
        for key, value in data.items():
            out.update(_flatten(value, f"{prefix}.{key}" if prefix else str(key)))
    elif isinstance(data, list) and data and isinstance(data[0], (dict, list)):
        for i, value in enumerate(data):
            out.update(_flatten(value, f"{prefix}[{i}]"))
    else:
        out[prefix] = json.dumps(data) if isinstance(data, list) else data
    return out


def render(data, fmt: str) -> str:
    if fmt == "table":
        frame = pd.DataFrame(sorted(_flatten(data).items()), columns=["field", "value"])
        return frame.to_string(index=False) + "\n"
    return storage.dumps(data)


def emit(data, args) -> None:
    """Report to -o when the command produced no file of its own, else to stdout."""
    text = render(data, args.format)
    target = args.output if not getattr(args, "_file_written", False) else None
    if target and target != "-":
        with open(target, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def write_file(payload: dict, args) -> None:
    if args.output and args.output != "-":
        storage.save_json(payload, args.output)
        args._file_written = True
    else:
        storage.save_json(payload, None)
        args._file_written = True
        args._quiet = True


def finish(summary: dict, args) -> None:
    if getattr(args, "_quiet", False):
        logger.info(json.dumps(summary, sort_keys=True))
    else:
        emit(summary, args)


def cmd_family(args) -> int:
    if args.random:
        x, s, a = args.random
        rng = random.Random(args.rng_seed_value)
        f = construct.random_table(x, s, a, rng)
    else:
        kind, tokens = next((k, v) for k, v in (
            ("affine", args.affine),
            ("dual_affine", args.dual_affine),
            ("transversal", args.transversal),
            ("toeplitz", args.toeplitz),
            ("field_multiply", args.field_multiply),
        ) if v is not None)
        params = parse_family_params(kind, tokens)
        if kind == "transversal":
            if args.H is not None:
                params["H"] = [int(v) for v in args.H.split(",") if v != ""]
            elif not args.full_H and "H" not in params:
                raise UnsupportedParametersError("transversal: give --full-H or --H i,j,...")
            params["include_infinity"] = args.infinity
        if kind == "field_multiply":
            params["exclude_zero"] = args.exclude_zero
        f = build_named(kind, **params)
    write_file(storage.family_to_file(f), args)
    x, s, a = f.sizes
    finish({"family": f.name, "x_size": x, "s_size": s, "a_size": a}, args)
    return 0


def cmd_verify(args) -> int:
    f = storage.load_family(args.family)
    report = classify(f)
    emit(report.to_dict(), args)
    return 0


def cmd_design(args) -> int:
    item = storage.load_structure(args.input)
    if args.theorems:
        if not isinstance(item, HashFamily):
            raise UnsupportedParametersError("--theorems needs a family file")
        report = designs.check_structure_theorems(item)
        emit(report.to_dict(), args)
        report.raise_for_violations()
        return 0
    if args.dual or args.sum:
        mosaic = storage.load_mosaic(args.input)
        if args.dual:
            dual = designs.dual_mosaic(mosaic)
            write_file(storage.mosaic_to_file(dual), args)
            summary = {"members": [designs.analyze_structure(m).to_dict() for m in dual.members]}
        else:
            total = designs.sum_mosaic(mosaic)
            write_file(storage.incidence_to_file(total), args)
            summary = {"sum": designs.analyze_structure(total).to_dict()}
        finish(summary, args)
        return 0
    if args.resolve:
        if isinstance(item, designs.IncidenceStructure):
            structure = item
        else:
            structure = designs.sum_mosaic(storage.load_mosaic(args.input))
        result = designs.find_resolution(structure)
        if isinstance(result, designs.Resolution):
            data = {"resolvable": True, **result.to_dict(structure)}
        else:
            data = result.to_dict()
        emit(data, args)
        return 0
    if isinstance(item, designs.IncidenceStructure):
        emit(designs.analyze_structure(item).to_dict(), args)
    else:
        mosaic = item if isinstance(item, designs.Mosaic) else designs.mosaic_from_function(item)
        emit({"members": {a: designs.analyze_structure(m).to_dict() for a, m in zip(mosaic.a_labels, mosaic.members)}}, args)
    return 0


def _quasigroup(args, order: int) -> construct.Quasigroup:
    if args.latin:
        return storage.load_latin_square(args.latin)
    return construct.cyclic_quasigroup(order)


def cmd_construct(args) -> int:
    notes: dict = {}
    if args.seed_ext:
        g = storage.load_family(args.seed_ext)
        f = construct.seed_extension(g, _quasigroup(args, len(g.a_domain)))
    elif args.point_ext:
        g = storage.load_family(args.point_ext)
        f = construct.point_extension(g, _quasigroup(args, len(g.a_domain)))
    elif args.concat:
        f1, f2 = (storage.load_family(p) for p in args.concat)
        f, bound = construct.concatenate_with_bound(f1, f2)
        notes["acfu_bound"] = rational_str(bound)
    elif args.krawczyk:
        f = construct.krawczyk_lift(storage.load_family(args.krawczyk), _eps(args.eps))
        notes["eps_balanced"] = f.params["eps_balanced"]
    else:
        f = construct.double_extension(storage.load_family(args.double_ext), _eps(args.eps))
        notes["eps_balanced"] = f.params["eps_balanced"]
    write_file(storage.family_to_file(f, notes), args)
    x, s, a = f.sizes
    finish({"family": f.name, "x_size": x, "s_size": s, "a_size": a, **notes}, args)
    return 0


def _eps(text: Optional[str]) -> Optional[Fraction]:
    return Fraction(text) if text is not None else None


def cmd_pa(args) -> int:
    src = storage.load_source(args.source)
    f = storage.load_family(args.family)
    if args.iid > 1:
        src = privacy.iid_extend(src, args.iid)
    if args.by_position:
        src = src.with_x_labels(f.x_labels)
    result = privacy.run_pa(src, f)
    data = result.to_dict()
    data["iid"] = args.iid
    emit(data, args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", default=argparse.SUPPRESS, help="output file ('-' for stdout)")
    common.add_argument("--format", choices=("json", "table"), default=argparse.SUPPRESS)
    common.add_argument("--budget", type=int, default=argparse.SUPPRESS, help="table budget in entries")
    common.add_argument("--rng-seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(
        prog="uhash",
        description=f"{SERVICE_NAME} {API_VERSION}: universal hash families, designs and privacy amplification",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fam = sub.add_parser("family", parents=[common], help="tabulate a closed-form family")
    kinds = fam.add_mutually_exclusive_group(required=True)
    kinds.add_argument("--affine", nargs="+", metavar="q=Q t=T")
    kinds.add_argument("--dual-affine", nargs="+", metavar="q=Q t=T")
    kinds.add_argument("--transversal", nargs="+", metavar="q=Q")
    kinds.add_argument("--toeplitz", nargs="+", metavar="q=Q m=M n=N")
    kinds.add_argument("--field-multiply", nargs="+", metavar="q=Q n=N m=M")
    kinds.add_argument("--random", nargs=3, type=int, metavar=("X", "S", "A"))
    fam.add_argument("--full-H", action="store_true")
    fam.add_argument("--H", help="comma-separated element indices")
    fam.add_argument("--infinity", action="store_true")
    fam.add_argument("--exclude-zero", action="store_true")
    fam.set_defaults(handler=cmd_family)

    ver = sub.add_parser("verify", parents=[common], help="minimal epsilon per class and seed bounds")
    ver.add_argument("family")
    ver.set_defaults(handler=cmd_verify)

    des = sub.add_parser("design", parents=[common], help="mosaic and design analysis")
    des.add_argument("input")
    mode = des.add_mutually_exclusive_group()
    mode.add_argument("--dual", action="store_true")
    mode.add_argument("--sum", action="store_true")
    mode.add_argument("--resolve", action="store_true")
    mode.add_argument("--theorems", action="store_true")
    des.set_defaults(handler=cmd_design)

    con = sub.add_parser("construct", parents=[common], help="extensions and concatenation")
    how = con.add_mutually_exclusive_group(required=True)
    how.add_argument("--seed-ext", metavar="G")
    how.add_argument("--point-ext", metavar="G")
    how.add_argument("--concat", nargs=2, metavar=("F1", "F2"))
    how.add_argument("--double-ext", metavar="A")
    how.add_argument("--krawczyk", metavar="G")
    square = con.add_mutually_exclusive_group()
    square.add_argument("--cyclic", action="store_true", help="cyclic group on the values (default)")
    square.add_argument("--latin", metavar="PATH")
    con.add_argument("--eps", help="required balance, e.g. 1/3")
    con.set_defaults(handler=cmd_construct)

    pa = sub.add_parser("pa", parents=[common], help="privacy amplification report")
    pa.add_argument("source")
    pa.add_argument("family")
    pa.add_argument("--iid", type=int, default=1)
    pa.add_argument("--by-position", action="store_true", help="match source x values to points by order")
    pa.set_defaults(handler=cmd_pa)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("output", None), ("format", "json"), ("budget", None), ("rng_seed", None), ("jobs", None)):
        if not hasattr(args, name):
            setattr(args, name, default)
    setup_logging()
    try:
        settings = override_settings(table_budget=args.budget, rng_seed=args.rng_seed, jobs=args.jobs)
        args.rng_seed_value = settings.rng_seed
        return args.handler(args)
    except TheoremViolationError as exc:
        logger.error(f"❌ {exc}")
        if exc.dump:
            sys.stdout.write(storage.dumps(exc.dump))
        return exc.exit_code
    except HashDesignError as exc:
        logger.error(f"❌ {type(exc).__name__}: {exc}")
        return exc.exit_code
    except ValidationError as exc:
        logger.error(f"❌ invalid input file: {exc}")
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        logger.error(f"❌ {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
