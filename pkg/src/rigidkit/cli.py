"""Command-line front end: ``rigidkit <command> [flags]``.

Every artifact carries the SHA-256 of its resolved configuration, as a
``# config-sha256: ...`` first line for CSV/graph text or a ``_config``
field for JSON.  Failures print one JSON object to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys

EXIT_RUNTIME = 1
EXIT_USAGE = 2
CACHE_ENV = "RIGIDKIT_CACHE"
# flags that never change the output, so they are excluded from the hash
_NOT_HASHED = {"out", "config", "threads"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _exponent(text):
    return math.inf if text.lower() in ("inf", "infinity") else float(text)


def _build_parser():
    p = _Parser(prog="rigidkit", description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=int, default=None, help="BLAS thread count")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def cmd(name, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--out", default=None, help="output file (default: stdout)")
        s.add_argument("--config", default=None, help="JSON file overriding flags")
        s.add_argument("--seed", type=int, default=0)
        return s

    s = cmd("phi", "table of spherical functions phi_k(x)")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--kmax", type=int, required=True)
    s.add_argument("--grid", type=int, default=5, help="number of equispaced x in [-1, 1]")

    s = cmd("schatten", "certified Schatten norms of T_delta (or T_delta - T_delta2)")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--p", type=_exponent, required=True)
    s.add_argument("--delta", type=_floats, default=[0.0])
    s.add_argument("--delta2", type=float, default=None)
    s.add_argument("--tol", type=float, default=1e-8)

    s = cmd("holder-fit", "fit C_p, alpha_p on a delta grid")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--p", type=_exponent, required=True)
    s.add_argument("--grid-size", type=int, default=25)
    s.add_argument("--tol", type=float, default=1e-6)

    s = cmd("kak", "2x2 KAK solve (v, u given) or forward map (theta given)")
    s.add_argument("--s", type=float, required=True)
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--v", type=float, default=None)
    s.add_argument("--u", type=float, default=None)
    s.add_argument("--theta", type=float, default=None)

    s = cmd("epsilon", "decay table (t, eps_p(t))")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--p", type=_exponent, required=True)
    s.add_argument("--C", type=float, default=None, help="manual C_p (else fitted)")
    s.add_argument("--alpha", type=float, default=None, help="manual alpha_p (else fitted)")
    s.add_argument("--t", type=_floats, default=[float(t) for t in range(1, 21)])
    s.add_argument("--tol", type=float, default=1e-6)

    for name in ("cayley", "schreier"):
        s = cmd(name, f"{name} graph of SL(n, Z/qZ), elementary generators")
        s.add_argument("--n", type=int, required=True)
        s.add_argument("--q", type=int, required=True)
        if name == "schreier":
            s.add_argument("--action", choices=["projective", "vectors"], default="projective")

    def graph_flags(s):
        s.add_argument("--n", type=int, required=True)
        s.add_argument("--q", type=int, required=True)
        s.add_argument("--kind", choices=["cayley", "schreier"], default="cayley")

    s = cmd("spectrum", "top eigenvalues of A/|S|")
    graph_flags(s)
    s.add_argument("--k", type=int, default=5)
    s.add_argument("--tol", type=float, default=1e-10)

    s = cmd("cheeger", "exact Cheeger constant with spectral bounds")
    graph_flags(s)

    s = cmd("expander-report", "spectral gaps across q")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--q", type=_ints, required=True)
    s.add_argument("--threshold", type=float, default=0.0)
    s.add_argument("--tol", type=float, default=1e-10)

    s = cmd("poincare", "Poincare and half-mass checks on random 1-Lipschitz maps")
    graph_flags(s)
    s.add_argument("--d", type=int, default=8)
    s.add_argument("--samples", type=int, default=100)

    s = cmd("embed", "distortion optimisation vs spectral lower bound")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--q", type=_ints, required=True)
    s.add_argument("--p", type=float, default=2.0)
    s.add_argument("--d", type=int, default=8)
    s.add_argument("--iterations", type=int, default=300)
    s.add_argument("--samples", type=int, default=20)
    s.add_argument("--format", choices=["json", "csv"], default="json")
    return p


def _apply_config(args, parser):
    if not args.config:
        return
    with open(args.config) as fh:
        override = json.load(fh)
    if not isinstance(override, dict):
        raise UsageError("config file must hold a JSON object")
    known = set(vars(args)) - {"command", "config"}
    unknown = sorted(set(override) - known)
    if unknown:
        raise UsageError(f"unknown config keys for {args.command!r}: {unknown}")
    for key, value in override.items():
        setattr(args, key, value)


def _config_hash(args):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_HASHED}
    blob = json.dumps(cfg, sort_keys=True, default=repr)
    return hashlib.sha256(blob.encode()).hexdigest(), cfg


def _csv_artifact(digest, body, extra=()):
    head = [f"# config-sha256: {digest}"] + [f"# {line}" for line in extra]
    return "\n".join(head) + "\n" + body


def _json_artifact(digest, cfg, payload):
    payload = dict(payload)
    payload["_config"] = {"sha256": digest, "parameters": cfg}
    return json.dumps(payload, sort_keys=True, indent=2, default=_jsonable) + "\n"


def _jsonable(x):
    import numpy as np

    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialise {type(x).__name__}")


def _graph(args):
    from .congruence_graphs import cayley_build, elementary_generators, enumerate_group, schreier_build

    gens = elementary_generators(args.n, args.q)
    if getattr(args, "kind", "cayley") == "schreier" or args.command == "schreier":
        return schreier_build(args.n, args.q, gens, getattr(args, "action", "projective"))
    table = enumerate_group(args.n, args.q, gens, cache_dir=os.environ.get(CACHE_ENV))
    return cayley_build(table, gens)


def _cayley_family(n, qs):
    from .congruence_graphs import cayley_build, elementary_generators, enumerate_group

    out = []
    for q in qs:
        gens = elementary_generators(n, q)
        out.append(cayley_build(enumerate_group(n, q, gens, cache_dir=os.environ.get(CACHE_ENV)), gens))
    return out


def _holder(args):
    from .schatten import HolderConstants, holder_fit

    if (args.C is None) != (args.alpha is None):
        raise UsageError("give both --C and --alpha, or neither")
    if args.C is not None:
        return HolderConstants.manual(args.n, args.p, args.C, args.alpha)
    return holder_fit(args.n, args.p, tol=args.tol)


def _run(args, digest, cfg):
    import numpy as np

    c = args.command
    if c == "phi":
        from .gegenbauer import spherical_table

        xs = np.linspace(-1.0, 1.0, args.grid) if args.grid > 1 else np.array([0.0])
        return _csv_artifact(digest, spherical_table(args.n, args.kmax, xs.tolist()).to_csv())
    if c == "schatten":
        from .schatten import results_to_csv, schatten_diff, schatten_norm, spectral_operator

        if args.delta2 is None:
            res = [schatten_norm(spectral_operator(args.n, d), args.p, args.tol) for d in args.delta]
        else:
            res = [schatten_diff(args.n, d, args.delta2, args.p, args.tol) for d in args.delta]
        return _csv_artifact(digest, results_to_csv(res))
    if c == "holder-fit":
        from dataclasses import asdict

        from .schatten import holder_fit

        grid = np.linspace(-0.5, 0.5, args.grid_size)
        h = holder_fit(args.n, args.p, grid, args.tol)
        return _json_artifact(digest, cfg, asdict(h))
    if c == "kak":
        from .weyl_path import kak2_forward, kak2_solve

        if args.theta is not None:
            x, y = kak2_forward(args.s, args.t, args.theta)
            return _json_artifact(digest, cfg, {"x": x, "y": y, "theta": args.theta})
        if args.v is None or args.u is None:
            raise UsageError("kak needs --theta, or both --v and --u")
        theta = kak2_solve(args.v, args.u, args.s, args.t)
        x, y = kak2_forward(args.s, args.t, theta)
        return _json_artifact(digest, cfg, {
            "theta": theta,
            "abs_cos_theta": abs(math.cos(theta)),
            "cos_bound": math.exp(args.t - args.u),
            "roundtrip_error": max(abs(x - args.v), abs(y - args.u)),
        })
    if c == "epsilon":
        from .weyl_path import decay_table_csv

        h = _holder(args)
        extra = [f"C_p: {h.C_p!r}", f"alpha_p: {h.alpha_p!r}"]
        return _csv_artifact(digest, decay_table_csv(args.n, h, args.t), extra)
    if c in ("cayley", "schreier"):
        return _csv_artifact(digest, _graph(args).to_text())
    if c == "spectrum":
        from .spectral import spectrum_topk

        vals, _, res = spectrum_topk(_graph(args), args.k, tol=args.tol, seed=args.seed)
        lines = ["index,eigenvalue,residual"]
        lines += [f"{i},{v!r},{r!r}" for i, (v, r) in enumerate(zip(vals.tolist(), res.tolist()))]
        return _csv_artifact(digest, "\n".join(lines) + "\n")
    if c == "cheeger":
        from .spectral import spectral_report

        r = spectral_report(_graph(args), seed=args.seed)
        return _json_artifact(digest, cfg, {
            "graph_id": r.graph_id, "num_vertices": r.num_vertices, "degree": r.degree,
            "lambda2": r.lambda2, "spectral_gap": r.spectral_gap,
            "cheeger_lower": r.cheeger_lower, "cheeger_upper": r.cheeger_upper,
            "h_exact": r.h_exact, "sandwich_holds": r.sandwich_holds(),
        })
    if c == "expander-report":
        from .spectral import expander_report

        rep = expander_report(_cayley_family(args.n, args.q), args.threshold, args.tol, args.seed)
        extra = [f"uniform-gap: {str(rep.uniform).lower()}", f"min-gap: {rep.min_gap!r}",
                 f"min-cheeger-lower: {rep.min_cheeger_lower!r}"]
        return _csv_artifact(digest, rep.to_csv(), extra)
    if c == "poincare":
        from .embedding import default_measure, halfmass_check, poincare_check, random_lipschitz_embedding

        g = _graph(args)
        mu, nrm, power = default_measure(g)
        rng = np.random.default_rng(args.seed)
        ratios, fracs = [], []
        for _ in range(args.samples):
            f = random_lipschitz_embedding(g, args.d, rng)
            ratios.append(poincare_check(g, f, mu, nrm).ratio)
            fracs.append(halfmass_check(g, f, mu, mu_norm=nrm))
        return _json_artifact(digest, cfg, {
            "graph_id": g.graph_id, "num_vertices": g.num_vertices, "mu_norm": nrm,
            "mu_power": power, "K": mu.max_word_length, "samples": args.samples,
            "max_poincare_ratio": max(ratios) if ratios else None,
            "min_halfmass_fraction": min(fracs) if fracs else None,
        })
    if c == "embed":
        from .embedding import embedding_report, report_to_csv

        rep = embedding_report(_cayley_family(args.n, args.q), args.p, args.d, args.samples,
                               args.iterations, args.seed)
        if args.format == "csv":
            return _csv_artifact(digest, report_to_csv(rep))
        return _json_artifact(digest, cfg, rep)
    raise UsageError(f"unknown command {c!r}")


def _fail(kind, exc, command, code):
    err = {"error": kind, "type": type(exc).__name__, "message": str(exc), "command": command}
    sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
    return code


def main(argv=None):
    parser = _build_parser()
    command = None
    try:
        args = parser.parse_args(argv)
        command = args.command
        if command is None:
            raise UsageError("no command given")
        _apply_config(args, parser)
        if args.threads:
            for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
                os.environ[var] = str(args.threads)
        digest, cfg = _config_hash(args)
        text = _run(args, digest, cfg)
    except UsageError as exc:
        return _fail("usage", exc, command, EXIT_USAGE)
    except Exception as exc:  # noqa: BLE001 - every failure becomes error JSON
        return _fail("runtime", exc, command, EXIT_RUNTIME)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
