"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .arith import ContinuedFraction, beta_estimate, liouville_build, cf_from_real
from .config import ConfigError, RunConfig, parse_config, parse_labels

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(row[h]) for h in header))
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def write_json(path, payload):
    text = json.dumps(payload, indent=2, default=_fmt) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_config(args) -> RunConfig:
    if args.config:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
    else:
        cfg = RunConfig()
    for name in ("l1", "l2", "l3"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg, name, v)
    if getattr(args, "alpha_cf", None):
        cfg.alpha_cf = tuple(int(a) for a in args.alpha_cf.split(","))
        cfg.alpha_real = ""
        cfg.alpha_beta = 0.0
    if getattr(args, "alpha_real", None):
        cfg.alpha_real = args.alpha_real
        cfg.alpha_cf = ()
        cfg.alpha_beta = 0.0
    if getattr(args, "alpha_liouville", None):
        parts = dict(kv.split("=") for kv in args.alpha_liouville.split(","))
        cfg.alpha_beta = float(parts["beta"])
        cfg.alpha_depth = int(parts.get("depth", 8))
        cfg.alpha_cf = ()
        cfg.alpha_real = ""
    if getattr(args, "depth", None):
        cfg.alpha_depth = args.depth
    if getattr(args, "labels", None):
        cfg.labels = parse_labels(args.labels)
    for name in ("iters", "phases", "threads", "tol_e"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg, "iterations" if name == "iters" else name, v)
    if getattr(args, "out", None):
        cfg.out = args.out
    if getattr(args, "format", None):
        cfg.format = args.format
    if not cfg.alpha_cf and not cfg.alpha_real and cfg.alpha_beta <= 0:
        # golden mean by default, the workhorse frequency
        cfg.alpha_cf = (1,) * 40
    return cfg


def _add_common(p, energy=False):
    p.add_argument("--l1", type=float)
    p.add_argument("--l2", type=float)
    p.add_argument("--l3", type=float)
    p.add_argument("--alpha-cf", dest="alpha_cf")
    p.add_argument("--alpha-real", dest="alpha_real")
    p.add_argument("--alpha-liouville", dest="alpha_liouville",
                   help="beta=B,depth=D")
    p.add_argument("--depth", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--threads", type=int)
    if energy:
        p.add_argument("--energy", type=float, required=True)


def build_parser():
    ap = argparse.ArgumentParser(prog="ehm",
                                 description="extended Harper model toolkit")
    ap.add_argument("--config", help="key=value configuration file")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lyapunov", help="transfer-matrix growth rate")
    _add_common(p, energy=True)
    p.add_argument("--variant", choices=("a", "abar", "m"), default="abar")
    p.add_argument("--im-eps", type=float, default=0.0)
    p.add_argument("--iters", type=int)
    p.add_argument("--phases", type=int)

    p = sub.add_parser("rho", help="fibered rotation number")
    _add_common(p, energy=True)
    p.add_argument("--iters", type=int)
    p.add_argument("--phases", type=int)

    p = sub.add_parser("spectrum", help="bands of a rational approximant")
    _add_common(p)
    p.add_argument("--pq", required=True, help="p/q, e.g. 34/55")

    p = sub.add_parser("gaps", help="gap edges for a label range")
    _add_common(p)
    p.add_argument("--labels", required=True)
    p.add_argument("--tol-e", dest="tol_e", type=float)

    p = sub.add_parser("resonances", help="resonance structure of a phase")
    _add_common(p)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--eps0", default="auto")
    p.add_argument("--nmax", type=int, default=10_000)

    p = sub.add_parser("localize", help="dual eigenvector decay profile")
    _add_common(p)
    p.add_argument("--label", type=int, required=True)
    p.add_argument("--box", type=int, default=1000)

    p = sub.add_parser("reduce", help="normal form at a gap edge")
    _add_common(p)
    p.add_argument("--label", type=int, required=True)
    p.add_argument("--K", default="auto")

    p = sub.add_parser("certify", help="gap-length certificates")
    _add_common(p)
    p.add_argument("--labels", required=True)
    p.add_argument("--tol-e", dest="tol_e", type=float)

    p = sub.add_parser("decay", help="gap-length decay experiment")
    _add_common(p)
    p.add_argument("--labels")

    p = sub.add_parser("verify", help="cross-module invariant checks")
    _add_common(p)

    p = sub.add_parser("beta", help="frequency approximation-rate surrogate")
    _add_common(p)
    return ap


def _run(args) -> int:
    from .operator import CocycleSampler, lyapunov_numeric, rotation_number
    from .spectrum import bands_rational, gap_edges
    from .experiments import decay_experiment, verify_suite

    cfg = _load_config(args)
    coupling = cfg.coupling()
    alpha = cfg.alpha()
    alpha_f = alpha.alpha_float

    if args.command == "lyapunov":
        sampler = CocycleSampler(coupling, alpha_f, args.energy, args.variant,
                                 eps_im=args.im_eps)
        est = lyapunov_numeric(sampler, iterations=cfg.iterations,
                               phase_count=cfg.phases)
        payload = est.to_dict()
        payload["params"] = {"coupling": coupling.triple, "energy": args.energy,
                             "variant": args.variant, "im_eps": args.im_eps,
                             "iterations": cfg.iterations, "phases": cfg.phases}
        write_json(cfg.out, payload)
        return EXIT_OK

    if args.command == "rho":
        sampler = CocycleSampler(coupling, alpha_f, args.energy, "abar")
        est = rotation_number(sampler, iterations=cfg.iterations,
                              phase_count=cfg.phases)
        payload = est.to_dict()
        payload["params"] = {"coupling": coupling.triple, "energy": args.energy,
                             "iterations": cfg.iterations, "phases": cfg.phases}
        write_json(cfg.out, payload)
        return EXIT_OK

    if args.command == "spectrum":
        p, q = (int(s) for s in args.pq.split("/"))
        bands = bands_rational(coupling, p, q)
        rows = [{"band": i, "E_lo": lo, "E_hi": hi}
                for i, (lo, hi) in enumerate(bands)]
        if cfg.format == "json":
            write_json(cfg.out, rows)
        else:
            write_csv(cfg.out, ["band", "E_lo", "E_hi"], rows)
        return EXIT_OK

    if args.command == "gaps":
        rows = []
        for m in cfg.labels:
            gap = gap_edges(coupling, alpha, m, tol_e=cfg.tol_e)
            rows.append({"m": gap.label, "E_minus": gap.e_minus,
                         "E_plus": gap.e_plus, "length": gap.length,
                         "rho_residual": gap.rho_residual, "status": gap.status})
        header = ["m", "E_minus", "E_plus", "length", "rho_residual", "status"]
        if cfg.format == "json":
            write_json(cfg.out, rows)
        else:
            write_csv(cfg.out, header, rows)
        return EXIT_OK

    if args.command == "resonances":
        from .localization import resonances
        from .operator import ParameterSet

        if args.eps0 == "auto":
            eps0 = ParameterSet.from_coupling(coupling).eps0
        else:
            eps0 = float(args.eps0)
        rs = resonances(args.theta, alpha, eps0, args.nmax)
        payload = {"theta": args.theta, "eps0": eps0, "n_max": args.nmax,
                   "entries": [{"n": n, "distance": d} for n, d in rs.entries],
                   "finite_scale_surrogate": True}
        write_json(cfg.out, payload)
        return EXIT_OK

    if args.command == "localize":
        from .localization import decay_measure, dual_eigenvector, resonances
        from .operator import ParameterSet

        gap = gap_edges(coupling, alpha, args.label, tol_e=cfg.tol_e)
        params = ParameterSet.from_coupling(coupling)
        tau = float(alpha.frac_multiple(args.label))
        theta = tau / 2.0
        u, ev, resid = dual_eigenvector(coupling, alpha, theta, gap.e_plus,
                                        box=args.box)
        rs = resonances(theta, alpha, params.eps0, min(10_000, 10 * args.box))
        profile = decay_measure(u, rs, floor_rate=2.0 * math.pi * params.h)
        n = profile.half_width
        rows = [{"k": k - n, "u_k": profile.amplitudes[k],
                 "kept_flag": int(profile.kept[k])}
                for k in range(profile.amplitudes.size)]
        write_csv(cfg.out, ["k", "u_k", "kept_flag"], rows)
        return EXIT_OK

    if args.command == "reduce":
        from .reducibility import normal_form_at_edge

        gap = gap_edges(coupling, alpha, args.label, tol_e=cfg.tol_e)
        order = args.K if args.K == "auto" else int(args.K)
        nf = normal_form_at_edge(coupling, alpha, gap.e_plus, args.label,
                                 order=order)
        payload = {"label": args.label, "E_plus": gap.e_plus, "sign": nf.sign,
                   "a_m": nf.a_m, "degree": nf.degree, "residual": nf.residual,
                   "n_tilde": nf.n_tilde, "order": nf.order,
                   "section_residual": nf.section_residual,
                   "finite_scale_surrogate": True}
        write_json(cfg.out, payload)
        return EXIT_OK

    if args.command == "certify":
        from .reducibility import certify_gap

        rows = []
        for m in cfg.labels:
            cert = certify_gap(coupling, alpha, m, tol_e=cfg.tol_e)
            g = cert.gap
            rows.append({"m": g.label, "E_plus": g.e_plus, "a_m": g.a_m,
                         "eps_m": g.eps_m, "delta_pred": g.delta_pred,
                         "length_measured": g.length,
                         "bound_ok": g.bound_ok, "status": g.cert_status})
        header = ["m", "E_plus", "a_m", "eps_m", "delta_pred",
                  "length_measured", "bound_ok", "status"]
        if cfg.format == "json":
            write_json(cfg.out, rows)
        else:
            write_csv(cfg.out, header, rows)
        return EXIT_OK

    if args.command == "decay":
        fit, rows = decay_experiment(cfg)
        header = ["m", "E_minus", "E_plus", "length", "a_m", "eps_m", "status"]
        if cfg.format == "json":
            write_json(cfg.out, {"fit": fit.to_dict(), "rows": rows})
        else:
            write_csv(cfg.out, header, rows)
            sys.stderr.write(json.dumps(fit.to_dict(), default=_fmt) + "\n")
        return EXIT_OK

    if args.command == "verify":
        report = verify_suite(cfg)
        write_json(cfg.out, report)
        return EXIT_OK if report["passed"] else EXIT_VERIFY

    if args.command == "beta":
        est = beta_estimate(alpha)
        payload = {"samples": list(est.samples), "tail_start": est.tail_start,
                   "tail_sup": est.tail_sup, "note": est.note,
                   "finite_scale_surrogate": True}
        write_json(cfg.out, payload)
        return EXIT_OK

    raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return _run(args)
    except (ConfigError, ValueError, FileNotFoundError) as e:
        sys.stderr.write(f"configuration error: {e}\n")
        return EXIT_CONFIG
    except ArithmeticError as e:
        sys.stderr.write(f"numerical failure: {e}\n")
        return EXIT_NUMERICAL
    except RuntimeError as e:
        sys.stderr.write(f"numerical failure: {e}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
