"""Command-line front end.

Every command prints a JSON document to stdout; with ``--out DIR`` it is also
written to ``DIR/result.json`` (and simulations add ``DIR/trajectories.csv``).
Exit status is 0 on success, 1 when a hard invariant fails (normalization,
dominance, precision) and 2 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

from .group_algebra import tp_format
from .hall_littlewood import hl_expand, lr_coefficients
from .markov_sim import (
    Kernels,
    discrepancy_runs,
    lln_clt_report,
    run_trajectories,
    simulate_corner_sum,
    simulate_product_chain,
    summarize_discrepancy,
)
from .padic_oracle import validate_corners, validate_products
from .root_system import (
    CartanSpec,
    RootSystem,
    build_root_system,
    dominance_leq,
    poincare_polynomial,
)
from .satake import (
    LatticeDistribution,
    ProbabilityContext,
    as_fraction,
    corner_tail_mass,
    corners_distribution,
    expected_corner_height,
    g_coefficient,
    g_polynomial,
    orbit_volume,
    product_transition,
)

CONFIG_KEYS = {"rootSystem", "q", "stepLaw", "K", "M", "seed", "epsilon", "lambda", "mu",
               "nu", "samples", "p", "N", "threads", "burnIn", "n", "threshold"}


class ConfigError(ValueError):
    pass


def _coweight(text, what: str) -> tuple[int, ...]:
    val = json.loads(text) if isinstance(text, str) else text
    if not isinstance(val, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in val):
        raise ConfigError(f"{what} must be a JSON array of integers, got {text!r}")
    return tuple(val)


def load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(cfg) - CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config fields: {', '.join(unknown)}")
    return cfg


def _merged(args, cfg: dict, attr: str, key: str | None = None, default=None):
    val = getattr(args, attr, None)
    if val is not None:
        return val
    return cfg.get(key or attr, default)


def root_system_from(args, cfg: dict) -> RootSystem:
    if args.cartan is not None:
        spec = CartanSpec.from_json({"cartan": json.loads(args.cartan)})
    elif args.family is not None:
        if args.rank is None:
            raise ConfigError("--family needs --rank")
        spec = CartanSpec.from_json({"family": args.family, "rank": args.rank})
    elif "rootSystem" in cfg:
        spec = CartanSpec.from_json(cfg["rootSystem"])
    elif getattr(args, "n", None) is not None:
        spec = CartanSpec.from_json({"family": "A", "rank": args.n})
    else:
        raise ConfigError("a root system is required (--family/--rank, --cartan or config rootSystem)")
    return build_root_system(spec)


def context_from(args, cfg: dict) -> ProbabilityContext:
    q = _merged(args, cfg, "q")
    if q is None:
        raise ConfigError("--q is required")
    return ProbabilityContext(root_system_from(args, cfg), as_fraction(str(q)))


def _need_cw(args, cfg, attr: str, key: str, flag: str):
    val = getattr(args, attr, None)
    if val is None:
        val = cfg.get(key)
    if val is None:
        raise ConfigError(f"{flag} is required")
    return _coweight(val, flag)


def step_law_from(args, cfg: dict, q) -> LatticeDistribution:
    raw = args.step if args.step is not None else cfg.get("stepLaw")
    if raw is None:
        raise ConfigError("--step is required")
    obj = json.loads(raw) if isinstance(raw, str) else raw
    law = LatticeDistribution.from_json(obj)
    return LatticeDistribution(law.support, q)


# -- commands ----------------------------------------------------------------


def cmd_roots(args, cfg) -> tuple[dict, bool]:
    rs = root_system_from(args, cfg)
    W = poincare_polynomial(rs)
    return {
        "root_system": rs.label,
        "rank": rs.rank,
        "cartan": rs.cartan.tolist(),
        "weyl_order": rs.weyl_order,
        "poincare": list(W),
        "poincare_text": tp_format(W),
        "positive_roots": [list(r) for r in rs.positive_roots],
        "positive_coroots": [list(r) for r in rs.positive_coroots],
        "two_rho_vee": list(rs.two_rho_vee),
    }, True


def cmd_hl(args, cfg) -> tuple[dict, bool]:
    rs = root_system_from(args, cfg)
    lam = _need_cw(args, cfg, "lam", "lambda", "--lambda")
    return {"root_system": rs.label, **hl_expand(rs, lam).to_json()}, True


def cmd_lr(args, cfg) -> tuple[dict, bool]:
    rs = root_system_from(args, cfg)
    mu = _need_cw(args, cfg, "mu", "mu", "--mu")
    nu = _need_cw(args, cfg, "nu", "nu", "--nu")
    return {"root_system": rs.label, **lr_coefficients(rs, mu, nu).to_json()}, True


def cmd_prob(args, cfg) -> tuple[dict, bool]:
    ctx = context_from(args, cfg)
    out: dict = {"root_system": ctx.rs.label, "q": str(ctx.q), "kind": args.kind}
    ok = True
    if args.kind == "corners":
        lam = _need_cw(args, cfg, "lam", "lambda", "--lambda")
        d = corners_distribution(ctx, lam)
        out.update(**{"lambda": list(lam)}, **d.to_json())
    elif args.kind == "product":
        mu = _need_cw(args, cfg, "mu", "mu", "--mu")
        nu = _need_cw(args, cfg, "nu", "nu", "--nu")
        d = product_transition(ctx, mu, nu)
        out.update(mu=list(mu), nu=list(nu), **d.to_json())
    elif args.kind == "g":
        mu = _need_cw(args, cfg, "mu", "mu", "--mu")
        nu = _need_cw(args, cfg, "nu", "nu", "--nu")
        lam = _need_cw(args, cfg, "lam", "lambda", "--lambda")
        g = g_coefficient(ctx, mu, nu, lam)
        ok = g.denominator == 1 and g >= 0
        out.update(mu=list(mu), nu=list(nu), **{"lambda": list(lam)}, g=str(g),
                   g_polynomial=list(g_polynomial(ctx.rs, mu, nu, lam)))
    elif args.kind == "volume":
        lam = _need_cw(args, cfg, "lam", "lambda", "--lambda")
        out.update(**{"lambda": list(lam)}, volume=str(orbit_volume(ctx, lam)))
    elif args.kind == "expectation":
        lam = _need_cw(args, cfg, "lam", "lambda", "--lambda")
        out.update(**{"lambda": list(lam)},
                   expected_corner_height=str(expected_corner_height(ctx, lam)))
    elif args.kind == "tail":
        lam = _need_cw(args, cfg, "lam", "lambda", "--lambda")
        thr = _merged(args, cfg, "threshold")
        if thr is None:
            raise ConfigError("--threshold is required")
        out.update(**{"lambda": list(lam)}, threshold=thr,
                   tail_mass=str(corner_tail_mass(ctx, lam, int(thr))))
    return out, ok


def _csv_rows(rank: int, index: int, tr) -> list[list]:
    rows = []
    K = max(len(tr.lambdas), len(tr.nus))
    for k in range(K):
        lam = tr.lambdas[k] if tr.lambdas else None
        nu = tr.nus[k] if tr.nus else None
        rows.append([index, k + 1,
                     *(lam if lam else [""] * rank),
                     *(nu if nu else [""] * rank),
                     sum(lam) if lam else "", sum(nu) if nu else ""])
    return rows


def write_trajectories(path: Path, rank: int, trajectories) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trajectory", "k", *(f"lambda_{i + 1}" for i in range(rank)),
                    *(f"nu_{i + 1}" for i in range(rank)), "h_lambda", "h_nu"])
        for i, tr in enumerate(trajectories):
            w.writerows(_csv_rows(rank, i, tr))


def _counts(points) -> list[dict]:
    c: dict = {}
    for p in points:
        c[p] = c.get(p, 0) + 1
    return [{"coweight": list(k), "count": v}
            for k, v in sorted(c.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)]


def cmd_simulate(args, cfg) -> tuple[dict, bool, list]:
    ctx = context_from(args, cfg)
    step = step_law_from(args, cfg, ctx.q)
    for cw in step.support:
        ctx.rs.require_dominant(cw, "step atom")
    K = int(_merged(args, cfg, "K", default=100))
    M = int(_merged(args, cfg, "M", default=1))
    seed = int(_merged(args, cfg, "seed", default=0))
    threads = int(_merged(args, cfg, "threads", default=1))
    eps = float(_merged(args, cfg, "epsilon", default=0.5))
    burn = int(_merged(args, cfg, "burn_in", "burnIn", default=100))
    if K < 1 or M < 1:
        raise ConfigError("K and M must be positive")
    kernels = Kernels(ctx)
    out: dict = {"root_system": ctx.rs.label, "q": str(ctx.q), "kind": args.kind,
                 "K": K, "M": M, "seed": seed, "step": step.to_json()["support"]}
    rs = ctx.rs
    if args.kind == "chain":
        trajs = run_trajectories(
            lambda i, rng: simulate_product_chain(ctx, step, K, rng, kernels, seed, i),
            M, seed, threads)
        bad = 0
        for tr in trajs:
            prev = (0,) * rs.rank
            for s, lam in zip(tr.steps, tr.lambdas):
                if not dominance_leq(rs, lam, tuple(a + b for a, b in zip(prev, s))):
                    bad += 1
                prev = lam
        out.update(final_lambda=_counts(tr.lambdas[-1] for tr in trajs),
                   subadditivity_failures=bad)
        return out, bad == 0, trajs
    if args.kind == "corners":
        trajs = run_trajectories(
            lambda i, rng: simulate_corner_sum(ctx, step, K, rng, kernels, seed, i),
            M, seed, threads)
        hs = [sum(tr.nus[-1]) for tr in trajs]
        out.update(final_nu=_counts(tr.nus[-1] for tr in trajs),
                   mean_height_over_K=float(f"{sum(hs) / (len(hs) * K):.17g}"))
        return out, True, trajs
    if args.kind == "discrepancy":
        results = discrepancy_runs(ctx, step, K, M, seed, eps, threads, kernels)
        summary = summarize_discrepancy(results, burn)
        out.update(discrepancy=summary)
        return out, summary["dominance_failures"] == 0, [r.trajectory for r in results]
    # lln
    rep = lln_clt_report(ctx, step, K, M, seed, threads,
                         epsilon=eps if args.coupled else None, burn_in=burn, kernels=kernels)
    out.update(report=rep.to_json())
    ok = rep.covariance_psd
    if rep.discrepancy is not None:
        ok = ok and rep.discrepancy["dominance_failures"] == 0
    return out, ok, []


def cmd_oracle(args, cfg) -> tuple[dict, bool, list]:
    n = _merged(args, cfg, "n")
    if n is None:
        raise ConfigError("--n is required")
    p = int(_merged(args, cfg, "p", default=2))
    N = _merged(args, cfg, "N")
    samples = int(_merged(args, cfg, "samples", default=10_000))
    seed = int(_merged(args, cfg, "seed", default=0))
    threads = int(_merged(args, cfg, "threads", default=1))
    lam = _need_cw(args, cfg, "lam", "lambda", "--lambda")
    raw: list = []
    hook = (lambda i, cw: raw.append((i, cw))) if args.csv else None
    if args.kind == "corners":
        rep = validate_corners(int(n), p, N, lam, samples, seed, threads, on_sample=hook)
    else:
        mu = _need_cw(args, cfg, "mu", "mu", "--mu")
        rep = validate_products(int(n), p, N, lam, mu, samples, seed, threads, on_sample=hook)
    return rep.to_json(), rep.precision_failures == 0, raw


# -- parser ------------------------------------------------------------------


def _add_root(p):
    g = p.add_argument_group("root system")
    g.add_argument("--family", help="Cartan type letter A-G")
    g.add_argument("--rank", type=int)
    g.add_argument("--cartan", help="Cartan matrix as JSON")
    p.add_argument("--config", help="JSON run config")
    p.add_argument("--out", help="directory for result.json (and CSV output)")


def _add_cw(p, *names):
    for name in names:
        dest = "lam" if name == "lambda" else name
        p.add_argument(f"--{name}", dest=dest, help="JSON integer array in coroot coordinates")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hlwalk", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("roots", help="root system summary")
    _add_root(p)

    p = sub.add_parser("hl", help="Hall-Littlewood expansion of P_lambda")
    _add_root(p)
    _add_cw(p, "lambda")

    p = sub.add_parser("lr", help="structure constants of P_mu P_nu")
    _add_root(p)
    _add_cw(p, "mu", "nu")

    p = sub.add_parser("prob", help="exact laws and Hecke constants at t = 1/q")
    p.add_argument("kind", choices=["corners", "product", "g", "volume", "expectation", "tail"])
    _add_root(p)
    p.add_argument("--q")
    p.add_argument("--threshold", type=int)
    _add_cw(p, "lambda", "mu", "nu")

    p = sub.add_parser("simulate", help="Monte Carlo of the product chain and corner walk")
    p.add_argument("kind", choices=["chain", "corners", "discrepancy", "lln"])
    _add_root(p)
    p.add_argument("--q")
    p.add_argument("--step", help='step law, e.g. \'[{"cw":[1],"p":"1"}]\'')
    p.add_argument("--K", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--coupled", action="store_true",
                   help="lln: run the coupled (lambda, nu) chain and add discrepancy counts")
    p.add_argument("--no-csv", dest="csv", action="store_false")

    p = sub.add_parser("oracle", help="p-adic matrix oracle for SL_{n+1}")
    p.add_argument("kind", choices=["corners", "product"])
    p.add_argument("--n", type=int, help="rank (matrices are (n+1) x (n+1))")
    p.add_argument("--p", type=int)
    p.add_argument("--N", type=int, help="working precision")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--csv", action="store_true", help="write raw samples to samples.csv")
    p.add_argument("--config")
    p.add_argument("--out")
    _add_cw(p, "lambda", "mu")
    return ap


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, default=lambda o: str(o) if isinstance(o, Fraction) else o)


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = load_config(getattr(args, "config", None))
        extra = None
        if args.command == "roots":
            out, ok = cmd_roots(args, cfg)
        elif args.command == "hl":
            out, ok = cmd_hl(args, cfg)
        elif args.command == "lr":
            out, ok = cmd_lr(args, cfg)
        elif args.command == "prob":
            out, ok = cmd_prob(args, cfg)
        elif args.command == "simulate":
            out, ok, extra = cmd_simulate(args, cfg)
        else:
            out, ok, extra = cmd_oracle(args, cfg)
    except (ConfigError, ValueError, json.JSONDecodeError, KeyError, OSError) as exc:
        print(f"hlwalk: error: {exc}", file=sys.stderr)
        return 2
    out["passed"] = bool(ok) and out.get("passed", True)
    text = _dump(out)
    print(text)
    if args.out:
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        (d / "result.json").write_text(text + "\n")
        if args.command == "simulate" and extra and args.csv:
            rank = len(out["step"][0]["coweight"])
            write_trajectories(d / "trajectories.csv", rank, extra)
        elif args.command == "oracle" and extra:
            with open(d / "samples.csv", "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["sample", "coweight"])
                for i, cw in extra:
                    w.writerow([i, "" if cw is None else json.dumps(list(cw))])
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
