"""Command-line front end: ``tracemonoid <command> SPEC [options]``.

Exit status is 0 on success, 1 when the requested object does not exist for
the given input (reducible monoid, non-Möbius valuation, ...), and 2 on usage
or parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import markov, measures, mobius, monoid
from .errors import DomainError, InputError

DEFAULT_DIGITS = 12


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


class _Failure(Exception):
    """Domain failure that still carries a report for standard output."""

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


def _round(x, digits):
    return float(f"{x:.{digits}g}")


def _rounded(obj, digits):
    if isinstance(obj, float):
        return _round(obj, digits)
    if isinstance(obj, dict):
        return {k: _rounded(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v, digits) for v in obj]
    return obj


def _monoid_json(m):
    pairs = sorted(sorted(p, key=m.index) for p in m.independent)
    pairs.sort(key=lambda p: (m.index(p[0]), m.index(p[1])))
    return {"letters": list(m.letters), "independent": pairs}


def _valuation(m, args):
    return measures.parse_valuation(m, args.valuation)


# -- commands ------------------------------------------------------------------


def cmd_info(m, args):
    poly = mobius.mobius_polynomial(m)
    irreducible = monoid.is_irreducible(m)
    cliques = monoid.enumerate_cliques(m)
    return {
        "alphabet_size": m.n,
        "cliques": len(cliques),
        "max_clique_size": cliques[-1].bit_count(),
        "irreducible": irreducible,
        "mobius_polynomial": str(poly),
        "coefficients": list(poly.coeffs),
        "p0": mobius.smallest_root(poly) if irreducible else None,
    }


def cmd_cliques(m, args):
    return {"cliques": [m.clique_names(c) for c in monoid.enumerate_cliques(m)]}


def cmd_mobius(m, args):
    poly = mobius.mobius_polynomial(m)
    result = {"mobius_polynomial": str(poly), "coefficients": list(poly.coeffs)}
    roots = sorted(poly.roots(), key=lambda z: (abs(z), z.real, z.imag))
    result["roots"] = [[float(z.real), float(z.imag)] for z in roots]
    if monoid.is_irreducible(m):
        result["p0"] = mobius.smallest_root(poly, certify=True)
    return result


def cmd_count(m, args):
    return {"counts": mobius.count_traces(m, args.max_length)}


def _report_json(m, report):
    return {
        "h0": report.h0,
        "h": {m.clique_str(c): x for c, x in report.h_pos.items()},
        "is_mobius": report.is_mobius,
        "violations": [[m.clique_str(c), x] for c, x in report.violations],
    }


def cmd_check(m, args):
    v = _valuation(m, args)
    report = measures.classify_valuation(m, v)
    result = {"valuation": v.as_dict(m), **_report_json(m, report)}
    if not report.is_mobius:
        raise _Failure(f"valuation is not Möbius (h(ε) = {report.h0:.12g})", result)
    return result


def cmd_complete(m, args):
    fixed = measures.parse_assignments(args.fixed)
    v = measures.complete_valuation(m, fixed, args.free)
    report = measures.classify_valuation(m, v)
    result = {"valuation": v.as_dict(m), **_report_json(m, report)}
    if not report.is_mobius:
        raise _Failure("completed valuation is not Möbius", result)
    return result


def cmd_chain(m, args):
    chain = markov.build_chain(m, _valuation(m, args))
    return {
        "states": [m.clique_names(c) for c in chain.states],
        "initial": chain.initial.tolist(),
        "transition": chain.transition.tolist(),
        "g": chain.g.tolist(),
    }


def cmd_sample(m, args):
    chain = markov.build_chain(m, _valuation(m, args))
    run = markov.sample_prefix(chain, args.steps, args.seed)
    length, height = run.trace.length, run.trace.height
    return {
        "rng": run.algorithm,
        "seed": run.seed,
        "steps": run.steps,
        "cliques": [m.clique_names(c) for c in run.cliques],
        "trace": m.trace_str(run.trace),
        "length": length,
        "height": height,
        "ratio": length / height if height else None,
        "_text": markov.format_sample_run(m, run),
    }


def cmd_speedup(m, args):
    v = _valuation(m, args)
    if args.mc:
        chain = markov.build_chain(m, v)
        rho = markov.speedup_montecarlo(chain, args.steps, args.seed, chains=args.chains, workers=args.threads)
        return {"method": "montecarlo", "steps": args.steps, "seed": args.seed, "chains": args.chains,
                "rho": rho, "gamma": 1.0 / rho}
    rho, gamma = markov.speedup_exact(m, v)
    return {"method": "exact", "rho": rho, "gamma": gamma}


def cmd_cylinder(m, args):
    v = _valuation(m, args)
    u = monoid.normal_form(m, args.trace)
    result = {"trace": m.trace_str(u), "length": u.length, "height": u.height}
    if args.mc:
        chain = markov.build_chain(m, v)
        result.update(method="montecarlo", runs=args.runs, seed=args.seed,
                      probability=markov.empirical_cylinder(chain, m, u, args.runs, args.seed))
    else:
        result.update(method="exact", probability=measures.cylinder_probability(m, v, u))
    return result


COMMANDS = {
    "info": cmd_info,
    "cliques": cmd_cliques,
    "mobius": cmd_mobius,
    "count": cmd_count,
    "check": cmd_check,
    "complete": cmd_complete,
    "chain": cmd_chain,
    "sample": cmd_sample,
    "speedup": cmd_speedup,
    "cylinder": cmd_cylinder,
}


def _seed(text):
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _nonnegative(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("spec", help="monoid spec file")
    common.add_argument("--json", action="store_true", help="emit one JSON object")
    common.add_argument("--digits", type=_positive, default=DEFAULT_DIGITS, help="significant digits for floats")

    parser = _Parser(prog="tracemonoid", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "info": "alphabet size, clique count, irreducibility, Möbius polynomial and p0",
        "cliques": "list all cliques",
        "mobius": "Möbius polynomial, its roots and p0",
        "count": "number of traces of each length",
        "check": "test whether a valuation is Möbius",
        "chain": "initial law and transition matrix of the clique chain",
        "complete": "solve for one characteristic number so the valuation is Möbius",
        "sample": "sample a random prefix of an infinite trace",
        "speedup": "expected clique size rho and its inverse gamma",
        "cylinder": "probability that a random infinite trace starts with a trace",
    }
    for name in ("info", "cliques", "mobius"):
        sub.add_parser(name, parents=[common], help=helps[name])
    p = sub.add_parser("count", parents=[common], help=helps["count"])
    p.add_argument("--max-length", type=_nonnegative, required=True)
    for name in ("check", "chain"):
        p = sub.add_parser(name, parents=[common], help=helps[name])
        p.add_argument("--valuation", required=True, help="'uniform' or name=value,...")
    p = sub.add_parser("complete", parents=[common], help=helps["complete"])
    p.add_argument("--fixed", required=True)
    p.add_argument("--free", required=True)
    p = sub.add_parser("sample", parents=[common], help=helps["sample"])
    p.add_argument("--valuation", required=True, help="'uniform' or name=value,...")
    p.add_argument("--steps", type=_nonnegative, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p = sub.add_parser("speedup", parents=[common], help=helps["speedup"])
    p.add_argument("--valuation", required=True, help="'uniform' or name=value,...")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--mc", action="store_true")
    p.add_argument("--steps", type=_positive)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--chains", type=_positive, default=1)
    p.add_argument("--threads", type=_positive, default=1)
    p = sub.add_parser("cylinder", parents=[common], help=helps["cylinder"])
    p.add_argument("--valuation", required=True, help="'uniform' or name=value,...")
    p.add_argument("--trace", required=True, help="a word, e.g. 'acba' or 'a c b a'")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--mc", action="store_true")
    p.add_argument("--runs", type=_positive)
    p.add_argument("--seed", type=_seed)
    return parser


def _validate(parser, args):
    if args.command == "speedup" and args.mc and (args.steps is None or args.seed is None):
        parser.error("speedup --mc needs --steps and --seed")
    if args.command == "cylinder" and args.mc and (args.runs is None or args.seed is None):
        parser.error("cylinder --mc needs --runs and --seed")


def _format_value(x, digits):
    if isinstance(x, float):
        return f"{x:.{digits}g}"
    if isinstance(x, list):
        return "[" + ", ".join(_format_value(v, digits) for v in x) + "]"
    if isinstance(x, dict):
        return ", ".join(f"{k}={_format_value(v, digits)}" for k, v in x.items())
    if x is None:
        return "-"
    if isinstance(x, bool):
        return str(x).lower()
    return str(x)


def _emit(out, command, m, result, args):
    text = result.pop("_text", None)
    if args.json:
        payload = {"command": command, "monoid": _monoid_json(m), "result": _rounded(result, args.digits)}
        out.write(dumps(payload) + "\n")
    elif text is not None:
        out.write(text + "\n")
    else:
        for key, value in result.items():
            if key == "transition":
                out.write("transition:\n")
                for row in value:
                    out.write("  " + _format_value(row, args.digits) + "\n")
            else:
                out.write(f"{key}: {_format_value(value, args.digits)}\n")


def dumps(payload) -> str:
    """Stable JSON serialization used for ``--json`` output."""
    return json.dumps(payload, ensure_ascii=False, separators=(", ", ": "))


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _validate(parser, args)
    except _UsageError as exc:
        stderr.write(f"{exc}\n")
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        m = monoid.load_pair(args.spec)
        result = COMMANDS[args.command](m, args)
    except _Failure as exc:
        _emit(stdout, args.command, m, exc.result, args)
        stderr.write(f"error: {exc}\n")
        return 1
    except (InputError, OSError, UnicodeDecodeError) as exc:
        stderr.write(f"error: {exc}\n")
        return 2
    except DomainError as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1
    _emit(stdout, args.command, m, result, args)
    return 0


def main():
    sys.exit(run())
