"""Command-line interface.

Exit codes: 0 success, 1 usage, 2 numeric or validation failure, 3 I/O.
JSON numbers are emitted as {"value": ..., "provenance": ...} where the
provenance is one of closed-form, quadrature, enumeration, monte-carlo,
exact-sweep, or point-count.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
from fractions import Fraction
from typing import Callable

import numpy as np

from . import __version__, enumeration, kernels, lattice, local, period, rmt, special
from .curve import Curve, admissible_classes

log = logging.getLogger("echeur")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class ValidationFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _num(value, provenance: str, **meta) -> dict:
    if isinstance(value, Fraction):
        out = {"value": float(value), "exact": str(value)}
    else:
        out = {"value": value}
    out["provenance"] = provenance
    out.update(meta)
    return out


def _emit_json(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_csv(header: list[str], rows, path: str | None) -> None:
    fh = open(path, "w", newline="") if path else io.StringIO()
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in r])
        if not path:
            sys.stdout.write(fh.getvalue())
    finally:
        fh.close()


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("EC_HEUR_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"EC_HEUR_THREADS must be an integer, got {env!r}")
    return 1


def _curve(text: str) -> Curve:
    try:
        return Curve.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc))


# ---------------------------------------------------------------- subcommands


def cmd_enumerate(args) -> int:
    X = int(float(args.x))
    if X > 10**9:
        log.warning("X = %d: the sweep is large and may take a very long time", X)
    writer = None
    fh = None
    if args.emit_curves:
        fh = open(args.emit_curves, "w", newline="")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["c4", "c6", "delta", "sign"])

    def sink(c4, c6, delta):
        for a, b, d in zip(c4.tolist(), c6.tolist(), delta.tolist()):
            writer.writerow([a, b, d, 1 if d > 0 else -1])

    stats = tuple(args.stats_prime or ())
    t0 = time.perf_counter()
    try:
        rep = enumeration.count_by_discriminant(X, sink if writer else None, c4_max=args.c4_max,
                                                threads=_threads(args), stats_primes=stats,
                                                k_cap=args.kmax)
    finally:
        if fh:
            fh.close()
    d = rep.to_dict()
    out = {
        "x_bound": X,
        "c4_max": rep.c4_max,
        "backend": rep.backend,
        "seconds": time.perf_counter() - t0,
        "count_pos": _num(rep.count_pos, "enumeration"),
        "count_neg": _num(rep.count_neg, "enumeration"),
        "predicted_pos": _num(d["predicted_pos"], "closed-form"),
        "predicted_neg": _num(d["predicted_neg"], "closed-form"),
        "pos_over_predicted": _num(d["pos_over_predicted"], "enumeration"),
        "neg_over_predicted": _num(d["neg_over_predicted"], "enumeration"),
        "neg_over_pos": _num(d["neg_over_pos"], "enumeration"),
        "fraction_neg": _num(d["fraction_neg"], "enumeration"),
        "cusp_tail_estimate_per_sign": _num(rep.cusp_tail_estimate, "closed-form",
                                            note="models with c4 > c4_max are not swept"),
        "valuation_histogram": d["valuation_histogram"],
        "class_histogram": d["class_histogram"],
    }
    _emit_json(out, args.report)
    return EXIT_OK


def cmd_constants(args) -> int:
    c = special.alpha_constants()
    wp, wn = special.w_integral_pos(), special.w_integral_neg()
    out = {
        "zeta10": _num(c.zeta10, "closed-form", method="Euler-Maclaurin",
                       residual_vs_pi10=c.residuals["zeta10_closed_form"]),
        "alpha_plus": _num(c.alpha_plus, "closed-form", formula="(sqrt3/30) B(1/2,1/6)",
                           residual_vs_quadrature=c.residuals["alpha_plus_quadrature"]),
        "alpha_minus": _num(c.alpha_minus, "closed-form", formula="(sqrt3/10) B(1/2,1/3)",
                            residual_vs_quadrature=c.residuals["alpha_minus_quadrature"]),
        "alpha_R_hat": _num(c.alpha_R_hat, "closed-form", formula="2^(1/8) G(1/2) pi^(-1/4)",
                            residual_barnes_series=c.residuals["barnes_g_half_series"]),
        "w_integral_pos": _num(wp.value, "quadrature", error_estimate=wp.error_estimate,
                               closed_form=special.beta(0.5, 1 / 6) / 5),
        "w_integral_neg": _num(wn.value, "quadrature", error_estimate=wn.error_estimate,
                               closed_form=0.6 * special.beta(0.5, 1 / 3)),
        "admissible_classes": _num(len(admissible_classes()), "exact-sweep"),
        "f_hat_1": _num(float(local.ratio_constant()), "closed-form",
                        rational=str(local.ratio_constant().rational), times="pi^8"),
        "beta_tau": _num(local.beta_tau(10_000), "closed-form", truncation="5 <= p <= 10000",
                         tail_log_estimate=local.beta_tau_tail(10_000)),
    }
    _emit_json(out, args.out)
    return EXIT_OK


def cmd_localprobs(args) -> int:
    p, kmax = args.p, args.kmax
    rows = []
    for k in range(kmax + 1):
        rows.append({"k": k, "P_m": local.prob_m(p, k), "P_a_n": local.prob_a_n(p, k),
                     "P_a_t": local.prob_a_t(p, k), "P_0": local.prob_0(p, k),
                     "eps_m": local.epsilon_m(k), "eps_a_n": local.epsilon_a_n(k),
                     "eps_a_t": local.epsilon_a_t(p, k)})
    total = local.completeness_check(p)
    K = local.expected_sqrt_tamagawa_local(p)
    if args.format == "csv":
        header = ["k", "P_m", "P_a_n", "P_a_t", "P_0", "eps_m", "eps_a_n", "eps_a_t"]
        body = [[r[h] if not isinstance(r[h], Fraction) else str(r[h]) for h in header] for r in rows]
        body.append(["completeness", str(total), "", "", "", "", "", ""])
        body.append(["K(p)", repr(K), "", "", "", "", "", ""])
        _emit_csv(header, body, args.out)
    else:
        out = {
            "p": p,
            "kmax": kmax,
            "table": [{key: (_num(v, "closed-form") if key != "k" else v) for key, v in r.items()} for r in rows],
            "K_p": _num(K, "closed-form", note="sqrt(k) p^-k series summed to double precision"),
            "completeness": str(total),
        }
        _emit_json(out, args.out)
    if total != 1:
        log.error("completeness sum is %s, not 1", total)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_ratio_dist(args) -> int:
    qs = local.rough_numbers(args.qmax)
    rows = []
    for q in qs:
        f = local.prob_ratio(q)
        rows.append([q, str(f.rational), f.tag, float(f), local.eta(q)])
    if args.format == "csv":
        _emit_csv(["q", "f_hat_rational", "tag", "f_hat", "eta"], rows, args.out)
        return EXIT_OK
    out = {
        "qmax": args.qmax,
        "rows": [{"q": q, "f_hat": _num(v, "closed-form", rational=r, times=tag), "eta": _num(e, "closed-form")}
                 for q, r, tag, v, e in rows],
        "partial_sum": _num(math.fsum(r[3] for r in rows), "closed-form"),
    }
    if args.conductor:
        cc = local.conductor_count_constant(p_max=args.pmax, q_max=args.qmax)
        out["conductor_constant"] = {
            "c_q_sum": _num(cc.c, "closed-form", q_max=cc.q_max, note="partial q-sum; converges slowly"),
            "c_euler": _num(cc.c_euler, "closed-form", p_max=cc.p_max, tail_log=cc.euler_tail_log),
            "comparison_bound": _num(cc.comparison_bound, "closed-form"),
        }
    _emit_json(out, args.out)
    return EXIT_OK


def cmd_period(args) -> int:
    E = _curve(args.curve)
    if E.singular:
        raise ValidationFailure("singular model")
    rd = period.real_roots(E)
    omega = period.real_period(E)
    quad = period.real_period_quadrature(E)
    out = {"curve": list(E.ainvs), "c4": E.c4, "c6": E.c6, "delta": E.delta, "sign": rd.sign,
           "omega_re": _num(omega, "closed-form", method="agm" if rd.sign > 0 else "c-formula"),
           "omega_re_quadrature": _num(quad, "quadrature")}
    if rd.sign > 0:
        out["t"] = _num(rd.t, "closed-form")
        out["profile"] = _num(period.profile_pos(rd.t), "closed-form")
        lam, mu = period.mu_coordinates(E)
        out["lambda"] = _num(lam, "closed-form")
        out["mu"] = _num(mu, "closed-form")
    else:
        out["c"] = _num(rd.c, "closed-form")
        out["C"] = _num(rd.C, "closed-form")
        out["profile"] = _num(period.profile_neg(rd.c), "closed-form")
    _emit_json(out, args.out)
    return EXIT_OK


def cmd_profile(args) -> int:
    n = args.n
    rows = []
    if args.scan == "pos":
        for i in range(1, n + 1):
            t = i / (n + 1)
            rows.append([t, period.profile_pos(t)])
        header = ["t", "profile"]
    else:
        for i in range(1, n + 1):
            C = i / (n + 1)
            c = math.tan(math.pi * (C - 0.5))
            rows.append([C, c, period.profile_neg(c)])
        header = ["C", "c", "profile"]
    _emit_csv(header, rows, args.out)
    return EXIT_OK


def cmd_rmt(args) -> int:
    E = _curve(args.curve)
    if E.singular:
        raise ValidationFailure("singular model")
    factors = rmt.local_factors(E, args.pmax)
    model = rmt.vanishing_probability(E, assume_T=args.torsion, p_max=args.pmax)
    out = {
        "curve": list(E.ainvs),
        "delta": E.delta,
        "pmax": args.pmax,
        "local_factors": [{"p": f.p, "a_p": f.a_p, "good": f.good_reduction,
                           "F_p": _num(f.F_p, "point-count")} for f in factors],
        "alpha_A": _num(model.alpha_A_trunc, "point-count", truncation=f"p <= {args.pmax}"),
        "alpha_R_hat": _num(model.alpha_R, "closed-form"),
        "M": model.M,
        "omega_re": _num(model.omega, "closed-form"),
        "tau": model.tau,
        "torsion": model.torsion,
        "threshold": _num(model.threshold, "closed-form"),
        "probability": _num(model.probability, "closed-form", clamped=model.probability >= 1.0),
    }
    _emit_json(out, args.out)
    return EXIT_OK


def cmd_rmt_scan(args) -> int:
    X0 = float(args.x)
    shape = {s: rmt.shape_integral(s) for s in (1, -1)}
    rows = []
    for i in range(args.steps):
        X = X0 * 2**i
        a = rmt.delta_integral(X)
        b = rmt.delta_integral(2 * X)
        target = 2 ** (19 / 24) * (math.log(2 * X) / math.log(X)) ** 0.375
        rows.append([X, a * shape[1], a * shape[-1], b / a, target, b / a / target - 1])
    _emit_csv(["X", "w_hat_pos", "w_hat_neg", "ratio", "target", "rel_dev"], rows, args.out)
    return EXIT_OK


def cmd_mwlattice(args) -> int:
    if args.haar_sample:
        x, y = lattice.sample_haar_array(args.haar_sample, args.seed)
        provenance = "monte-carlo"
    elif args.input:
        try:
            grams = lattice.ingest_gram_csv(args.input, strict=not args.skip_bad)
        except lattice.GramParseError as exc:
            raise ValidationFailure(str(exc))
        if not grams:
            raise ValidationFailure("no Gram matrices in input")
        pts = [lattice.reduce(g) for g in grams]
        x = np.array([p.x for p in pts])
        y = np.array([p.y for p in pts])
        provenance = "closed-form"
    else:
        raise UsageError("mwlattice needs --in or --haar-sample")
    if args.out:
        _emit_csv(["x", "y"], zip(x.tolist(), y.tolist()), args.out)
    table = lattice.bin_x((x, y), bins=args.bins)
    fr = lattice.y_threshold_fractions((x, y))
    summary = {
        "n": int(x.size),
        "seed": args.seed if args.haar_sample else None,
        "bins": [dict(r, fraction=_num(r["fraction"], provenance)) for r in table.rows()],
        "y_at_least": {str(Y): {"observed": _num(v, provenance),
                                "haar": _num(lattice.haar_fraction_y_at_least(Y), "closed-form")}
                       for Y, v in fr.items()},
    }
    _emit_json(summary, args.summary)
    return EXIT_OK


# ---------------------------------------------------------------- validate


def _checks(quick: bool) -> list[tuple[str, Callable[[], bool]]]:
    checks = [
        ("admissible classes = 288", lambda: len(admissible_classes()) == 288),
        ("completeness p=5,7,11,13,10007",
         lambda: all(local.completeness_check(p) == 1 for p in (5, 7, 11, 13, 10007))),
        ("mu lam (lam+mu) = 1/4 on a grid",
         lambda: max(abs(m * period.lambda_of_mu(m) * (period.lambda_of_mu(m) + m) - 0.25)
                     for m in np.logspace(-6, 6, 1001)) < 1e-12),
        ("I0* sqrt-Tamagawa census p=5,7,11,13",
         lambda: all(local.i0_star_sqrt_tamagawa_average(p)
                     == (Fraction(2, 3) - Fraction(1, 3 * p), Fraction(1, 2)) for p in (5, 7, 11, 13))),
    ]
    if quick:
        return checks

    def local_law():
        for p in (5, 7):
            stats = enumeration.empirical_valuation_stats(p, 6)
            for (k, cat), v in stats.items():
                closed = {"good": local.prob_0, "multiplicative": local.prob_m,
                          "additive_nontwist": local.prob_a_n, "additive_twist": local.prob_a_t}[cat](p, k)
                if v != closed:
                    return False
        return True

    def periods():
        rng = np.random.Generator(np.random.PCG64(1))
        n = 0
        while n < 50:
            E = Curve(*(int(v) for v in rng.integers(-40, 41, 5)))
            if E.singular:
                continue
            n += 1
            a, b = period.real_period(E), period.real_period_quadrature(E)
            if abs(a - b) > 1e-9 * b:
                return False
        return True

    def maxima():
        mp, mn = period.profile_pos_maximum(), period.profile_neg_maximum()
        return (abs(mp.argmax - 0.0388505246188) < 1e-8 and mp.value < 4.414499094
                and abs(mn.argmax + 33.58515148525) < 1e-8 and mn.value < 8.82921518)

    def alpha():
        c = special.alpha_constants()
        return abs(c.alpha_minus / c.alpha_plus - math.sqrt(3)) < 1e-12

    def w_integrals():
        return (abs(special.w_integral_pos().value - special.beta(0.5, 1 / 6) / 5) < 1e-8
                and abs(special.w_integral_neg().value - 0.6 * special.beta(0.5, 1 / 3)) < 1e-8)

    def enumerate_small():
        rep = enumeration.count_by_discriminant(12)
        return rep.count_neg >= 1 and enumeration.count_by_discriminant(1).total == 0

    def haar():
        x, y = lattice.sample_haar_array(200_000, 7)
        return all(abs(np.mean(y >= Y) - lattice.haar_fraction_y_at_least(Y)) < 5e-3 for Y in (1, 2, 4))

    def w_hat():
        X = 1e12
        r = rmt.delta_integral(2 * X) / rmt.delta_integral(X)
        return abs(r / (2 ** (19 / 24) * (math.log(2 * X) / math.log(X)) ** 0.375) - 1) < 0.01

    checks += [
        ("local law equals residue sweep p=5,7 k<=6", local_law),
        ("AGM period equals quadrature (50 curves)", periods),
        ("profile maxima", maxima),
        ("alpha_-/alpha_+ = sqrt3", alpha),
        ("w-integral closed forms", w_integrals),
        ("enumeration X=1, X=12", enumerate_small),
        ("Haar fractions 3/(pi Y)", haar),
        ("W-hat doubling ratio", w_hat),
    ]
    return checks


def cmd_validate(args) -> int:
    failed = 0
    results = []
    for name, fn in _checks(args.quick):
        t0 = time.perf_counter()
        try:
            ok = bool(fn())
            err = None
        except Exception as exc:  # a crashing check is a failing check
            ok, err = False, f"{type(exc).__name__}: {exc}"
        dt = time.perf_counter() - t0
        results.append({"check": name, "pass": ok, "seconds": round(dt, 3), "error": err})
        print(f"{'PASS' if ok else 'FAIL'}  {name}  ({dt:.2f}s){'  ' + err if err else ''}", file=sys.stderr)
        failed += not ok
    if args.report:
        _emit_json({"backend": kernels.BACKEND, "results": results}, args.report)
    return EXIT_NUMERIC if failed else EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="echeur", description="Heuristics for elliptic curve counts, local statistics, "
                 "vanishing of central values and lattice shapes.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("enumerate", help="count minimal models with 0 < |delta| < X")
    s.add_argument("--x", required=True, help="discriminant bound X (accepts 1e6)")
    s.add_argument("--c4-max", type=int, default=None, help="truncate the c4 sweep (default 256X+16)")
    s.add_argument("--emit-curves", metavar="CSV", help="stream c4,c6,delta,sign rows to this file")
    s.add_argument("--stats-prime", type=int, action="append", help="tally valuations at this prime (>= 5)")
    s.add_argument("--kmax", type=int, default=12, help="cap on tallied valuations")
    s.add_argument("--report", metavar="JSON", help="write the report here (default stdout)")
    s.add_argument("--threads", type=int, default=None, help="worker threads (default EC_HEUR_THREADS or 1)")
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("constants", help="alpha+-, zeta(10), alpha_R_hat and the w-integrals")
    s.add_argument("--out", metavar="JSON")
    s.set_defaults(func=cmd_constants)

    s = sub.add_parser("localprobs", help="exact local reduction probabilities at a prime p >= 5")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--kmax", type=int, default=8)
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.add_argument("--out")
    s.set_defaults(func=cmd_localprobs)

    s = sub.add_parser("ratio-dist", help="law of D/N: f_hat(q) and eta(q)")
    s.add_argument("--qmax", type=int, default=1000)
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.add_argument("--conductor", action="store_true", help="also compute the conductor-count constant")
    s.add_argument("--pmax", type=int, default=100_000, help="Euler product truncation for --conductor")
    s.add_argument("--out")
    s.set_defaults(func=cmd_ratio_dist)

    s = sub.add_parser("period", help="real period and shape coordinates of a curve")
    s.add_argument("--curve", required=True, help="a1,a2,a3,a4,a6")
    s.add_argument("--out")
    s.set_defaults(func=cmd_period)

    s = sub.add_parser("profile", help="tabulate the scale-free period profile")
    s.add_argument("--scan", choices=("pos", "neg"), required=True)
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--out", metavar="CSV")
    s.set_defaults(func=cmd_profile)

    s = sub.add_parser("rmt", help="local factors and vanishing probability of a curve")
    s.add_argument("--curve", required=True, help="a1,a2,a3,a4,a6")
    s.add_argument("--pmax", type=int, default=1000)
    s.add_argument("--torsion", type=int, default=1, help="assumed torsion order T")
    s.add_argument("--out")
    s.set_defaults(func=cmd_rmt)

    s = sub.add_parser("rmt-scan", help="W-hat doubling ratios against 2^(19/24)")
    s.add_argument("--x", default="1e12")
    s.add_argument("--steps", type=int, default=20)
    s.add_argument("--out", metavar="CSV")
    s.set_defaults(func=cmd_rmt_scan)

    s = sub.add_parser("mwlattice", help="reduce Gram matrices or sample the Haar reference")
    s.add_argument("--in", dest="input", metavar="CSV", help="rows g11,g12,g22")
    s.add_argument("--haar-sample", type=int, metavar="N")
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--bins", type=int, default=10)
    s.add_argument("--skip-bad", action="store_true", help="skip malformed rows instead of failing")
    s.add_argument("--out", metavar="CSV", help="x,y rows")
    s.add_argument("--summary", metavar="JSON", help="bin table and y fractions (default stdout)")
    s.set_defaults(func=cmd_mwlattice)

    s = sub.add_parser("validate", help="run the cross-check suite")
    s.add_argument("--quick", action="store_true", help="exact identities only")
    s.add_argument("--report", metavar="JSON")
    s.set_defaults(func=cmd_validate)
    return ap


def run(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    for key in ("n", "steps", "bins", "haar_sample", "pmax", "qmax", "kmax", "threads"):
        v = getattr(args, key, None)
        if v is not None and v < 1 and not (key == "kmax" and v == 0):
            print(f"echeur: --{key.replace('_', '-')} must be positive", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"echeur: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"echeur: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationFailure, ArithmeticError, ValueError) as exc:
        print(f"echeur: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
