"""Command-line entry point ``hadamard-rho``.

Exit status: 0 on success, 1 when a computed verdict is negative (a broken
bound, an invalid matrix, a conjecture counterexample), 2 on usage, input or
budget errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bounds, characteristics, report, search
from .errors import HadamardRhoError, ValidationError
from .matrices import SignMatrix, catalog_representative, format_matrix, read_matrix, sylvester_matrix, validate_hadamard
from .norms import NormSpec, parse_norm

EXIT_OK, EXIT_VERDICT, EXIT_USAGE = 0, 1, 2


class UsageError(HadamardRhoError):
    pass


def load_matrix(spec: str, budget: int | None = None) -> SignMatrix:
    """``sylvester:N``, ``catalog:ORDER`` or a path to a matrix file."""
    kind, _, arg = spec.partition(":")
    if kind in ("sylvester", "catalog") and arg:
        try:
            k = int(arg)
        except ValueError:
            raise UsageError(f"bad matrix spec {spec!r}") from None
        return sylvester_matrix(k, budget) if kind == "sylvester" else catalog_representative(k, budget)
    path = Path(spec)
    if not path.is_file():
        raise UsageError(f"matrix {spec!r} is neither sylvester:N, catalog:ORDER nor a readable file")
    return read_matrix(path)


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _norm(text: str) -> NormSpec:
    try:
        return parse_norm(text)
    except HadamardRhoError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _type_p(text: str) -> tuple[float, float]:
    p, _, t = text.partition(":")
    try:
        return float(p), float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected P:T_P, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hadamard-rho", description="Prefix-sum characteristics of Hadamard matrices.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, fmt=("json", "csv")):
        p.add_argument("--format", choices=fmt, default=fmt[0])
        p.add_argument("--output", help="write the report here instead of stdout")
        return p

    p = common(sub.add_parser("gen", help="emit a matrix in the text format"), ("text", "json"))
    p.add_argument("--matrix", required=True, help="sylvester:N or catalog:ORDER")
    p.add_argument("--budget", type=_positive, help="max matrix entries")

    p = common(sub.add_parser("validate", help="check orthogonality of rows and columns"), ("json",))
    p.add_argument("--matrix", required=True)

    p = common(sub.add_parser("alpha", help="column prefix sums of S^(n)"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--budget", type=_positive)

    p = common(sub.add_parser("rho", help="prefix characteristic profile of a matrix"))
    p.add_argument("--matrix", required=True)
    p.add_argument("--norm", type=_norm, default="l1")

    p = common(sub.add_parser("closed-form", help="closed-form l1 maximum for S^(n)"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--verify", action="store_true", help="compare with the brute-force profile")

    p = common(sub.add_parser("bounds", help="estimates with verdicts against computed values"))
    p.add_argument("--n", type=int, help="Sylvester exponent, or order for --kind hadamard")
    p.add_argument("--norm", type=_norm, default="l1")
    p.add_argument("--kind", choices=("sylvester", "hadamard"), default="sylvester")
    p.add_argument("--basis-class", choices=("symmetric", "subsymmetric"), default="symmetric")
    p.add_argument("--type-p", type=_type_p, metavar="P:T_P")
    p.add_argument("--no-rho", action="store_true", help="skip computing rho")
    p.add_argument("--crossover", type=_positive, metavar="N_MAX", help="tabulate which upper term is smaller")
    p.add_argument("--budget", type=_positive)

    p = common(sub.add_parser("rho-n", help="maximum over Hadamard matrices of an order"))
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--norm", type=_norm, default="l1")
    p.add_argument("--mode", choices=("auto", "exhaustive", "subset-sign", "anneal"), default="auto")
    p.add_argument("--budget", type=_positive)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive, default=1)

    p = common(sub.add_parser("conjecture", help="minimum over row subsets of S^(n)"), ("json",))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=search.CONJECTURE_MODES, default="branch-and-bound")
    p.add_argument("--prefix", choices=("m", "m_prime"), default="m")
    p.add_argument("--seed", type=int)
    p.add_argument("--budget", type=_positive)
    p.add_argument("--checkpoint")
    p.add_argument("--stop-after", type=_positive)
    p.add_argument("--no-symmetry", action="store_true")
    p.add_argument("--workers", type=_positive, default=1)

    p = common(sub.add_parser("hat-rho", help="random unit-ball families against the ceiling"))
    p.add_argument("--kind", choices=("sylvester", "hadamard"), default="sylvester")
    p.add_argument("--n", type=int, required=True, help="Sylvester exponent, or order for --kind hadamard")
    p.add_argument("--norm", type=_norm, default="l1")
    p.add_argument("--trials", type=_positive, default=100)
    p.add_argument("--seed", type=int, default=0)

    p = common(sub.add_parser("diagnostics", help="ratios rho/(n 2^n) or rho_n/(n sqrt n)"))
    p.add_argument("--kind", choices=("sylvester", "hadamard"), default="sylvester")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--norm", type=_norm, default="l1")
    return ap


def _emit(args, text: str) -> None:
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _json(args, obj) -> None:
    _emit(args, report.dumps(obj))


# -- commands ------------------------------------------------------------------


def cmd_gen(args) -> int:
    m = load_matrix(args.matrix, args.budget)
    if args.format == "text":
        _emit(args, format_matrix(m))
    else:
        _json(args, {"order": m.order, "source": m.source, "entries": m.tolist()})
    return EXIT_OK


def cmd_validate(args) -> int:
    m = load_matrix(args.matrix)
    try:
        validate_hadamard(m)
    except ValidationError as exc:
        _json(args, {"order": m.order, "valid": False, "reason": str(exc)})
        return EXIT_VERDICT
    _json(args, {"order": m.order, "valid": True})
    return EXIT_OK


def cmd_alpha(args) -> int:
    table = characteristics.alpha_table(args.n, args.budget)
    vals = table.values
    if args.format == "csv":
        rows = [[i + 1, m + 1, int(vals[i, m])] for i in range(vals.shape[0]) for m in range(vals.shape[1])]
        _emit(args, report.write_csv(["i", "m", "alpha"], rows))
    else:
        _json(args, {
            "n": args.n,
            "values": vals.astype(int).tolist(),
            "max_abs": np.abs(vals).max(axis=1).astype(int).tolist(),
            "f": [characteristics.f_exponent(args.n, i) for i in range(1, vals.shape[0] + 1)],
        })
    return EXIT_OK


def _profile(spec: str, norm: NormSpec):
    kind, _, arg = spec.partition(":")
    if kind == "sylvester" and arg.isdigit():
        return characteristics.sylvester_profile(int(arg), norm)
    return characteristics.rho_profile(load_matrix(spec), norm)


def cmd_rho(args) -> int:
    prof = _profile(args.matrix, args.norm)
    if args.format == "csv":
        _emit(args, prof.to_csv())
    else:
        _json(args, prof.to_json())
    return EXIT_OK


def cmd_closed_form(args) -> int:
    cf = characteristics.rho_l1_closed_form(args.n)
    out = {"n": args.n, "value": cf.value, "m": cf.m, "m_prime": cf.m_prime}
    code = EXIT_OK
    if args.verify:
        prof = characteristics.sylvester_profile(args.n, NormSpec.l1())
        ok = prof.rho_max == cf.value and cf.m in prof.argmax and cf.m_prime in prof.argmax
        out.update({"brute_force": prof.rho_max, "argmax": list(prof.argmax), "ok": ok})
        code = EXIT_OK if ok else EXIT_VERDICT
    if args.format == "csv":
        _emit(args, report.write_csv(list(out), [[str(v) if isinstance(v, list) else v for v in out.values()]]))
    else:
        _json(args, out)
    return code


def cmd_bounds(args) -> int:
    if args.crossover:
        table = bounds.crossover_table(args.norm, args.crossover)
        rows = [[c.n, c.term_a, c.term_b, c.smaller] for c in table]
        if args.format == "csv":
            _emit(args, report.write_csv(["n", "term_a", "term_b", "smaller"], rows))
        else:
            _json(args, [
                {"n": c.n, "term_a": report.encode_number(c.term_a), "term_b": report.encode_number(c.term_b),
                 "smaller": c.smaller}
                for c in table
            ])
        return EXIT_OK
    if args.n is None:
        raise UsageError("bounds needs --n unless --crossover is given")
    if args.kind == "sylvester":
        rho = None if args.no_rho else characteristics.sylvester_profile(args.n, args.norm).rho_max
        rep = bounds.sylvester_report(args.n, args.norm, rho, args.basis_class, args.type_p)
    else:
        rho, lower_only = None, False
        if not args.no_rho:
            res = search.rho_n(args.n, args.norm, budget=args.budget)
            rho, lower_only = res.objective, not res.exact_over_all
        rep = bounds.hadamard_report(args.n, args.norm, rho, lower_only)
    if args.format == "csv":
        verdicts = {v.name: v for v in rep.verdicts}
        rows = []
        for b in rep.bounds:
            v = verdicts.get(b.name)
            rows.append([b.name, b.side, b.value, "" if v is None or v.ok is None else str(v.ok).lower(),
                         "" if v is None or v.slack is None else v.slack])
        _emit(args, report.write_csv(["name", "side", "value", "ok", "slack"], rows))
    else:
        _json(args, rep.to_json())
    return EXIT_OK if rep.ok else EXIT_VERDICT


def cmd_rho_n(args) -> int:
    if args.mode == "exhaustive":
        res = search.rho_n_exhaustive(args.order, args.norm)
    elif args.mode == "subset-sign":
        res = search.rho_n_subset_sign(catalog_representative(args.order), args.norm, args.budget, args.workers)
    elif args.mode == "anneal":
        steps = args.budget or search.DEFAULT_ANNEAL_STEPS
        res = search.rho_n_anneal(catalog_representative(args.order), args.norm, args.seed, steps)
    else:
        res = search.rho_n(args.order, args.norm, args.budget, args.workers)
    out = res.to_json()
    if args.format == "csv":
        _emit(args, report.write_csv(
            ["order", "norm", "objective", "mode", "exact", "label"],
            [[args.order, args.norm.label, out["objective"], res.mode, str(res.exact).lower(), res.label]],
        ))
    else:
        _json(args, out)
    return EXIT_OK


def cmd_conjecture(args) -> int:
    res = search.conjecture_min(
        args.n,
        mode=args.mode,
        seed=args.seed,
        budget=args.budget,
        prefix=args.prefix,
        symmetry=not args.no_symmetry,
        checkpoint=args.checkpoint,
        stop_after=args.stop_after,
        workers=args.workers,
    )
    _json(args, res.to_json())
    return EXIT_VERDICT if res.verdict == "counterexample" else EXIT_OK


def cmd_hat_rho(args) -> int:
    if args.kind == "sylvester":
        m = sylvester_matrix(args.n)
    else:
        m = catalog_representative(args.n)
    ceiling = bounds.hat_rho_bounds(args.kind, args.n)
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.trials):
        vecs = characteristics.random_unit_ball(rng, m.order, m.order, args.norm)
        worst = max(worst, float(characteristics.hat_rho(vecs, m, args.norm).rho_max))
    ok = worst <= float(ceiling) * (1 + bounds.VERDICT_RTOL)
    out = {"kind": args.kind, "n": args.n, "norm": args.norm.label, "trials": args.trials, "seed": args.seed,
           "max_hat_rho": worst, "ceiling": report.encode_number(ceiling), "ok": ok,
           "tolerance": bounds.VERDICT_RTOL}
    if args.format == "csv":
        _emit(args, report.write_csv(list(out), [list(out.values())]))
    else:
        _json(args, out)
    return EXIT_OK if ok else EXIT_VERDICT


def cmd_diagnostics(args) -> int:
    diags = [characteristics.ratio_diagnostics(n, args.norm, args.kind) for n in args.n]
    rows = [[d.n, d.rho, d.ratio, d.note] for d in diags]
    if args.format == "csv":
        _emit(args, report.write_csv(["n", "rho", "ratio", "note"], rows))
    else:
        _json(args, [
            {"kind": d.kind, "n": d.n, "rho": report.encode_number(d.rho), "ratio": report.encode_number(d.ratio),
             "note": d.note}
            for d in diags
        ])
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "validate": cmd_validate,
    "alpha": cmd_alpha,
    "rho": cmd_rho,
    "closed-form": cmd_closed_form,
    "bounds": cmd_bounds,
    "rho-n": cmd_rho_n,
    "conjecture": cmd_conjecture,
    "hat-rho": cmd_hat_rho,
    "diagnostics": cmd_diagnostics,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (HadamardRhoError, OSError) as exc:
        print(f"hadamard-rho {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
