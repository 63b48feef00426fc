"""Command-line entry point.

Subcommands: level, approximate, verify, smooth, analyze.  Each prints a JSON
report to stdout.  Exit codes: 0 ok, 1 usage, 2 bad input, 3 dimension cap
exceeded, 4 verification failure.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .approx import build_approx_norm, support_profile, verify_elements, verify_sandwich
from .core import l1_norm
from .errors import CapExceededError, NormforgeError
from .exposed import decompose_Dnm, exposed_points, not_exposed, verify_lemma_geometry
from .io import (ParseError, approx_from_json, approx_to_json, dump_json, emit_plot_data,
                 functional_from_json, load_json, normspec_from_json)
from .leveling import (h_approx, h_level_sum, j_approx, lambda_weights, convex_reconstruct,
                       level_sequence)
from .normspec import dual_norm
from .smooth import SmoothNorm

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_CAP, EXIT_VERIFY = 0, 1, 2, 3, 4

SANDWICH_COLUMNS = ("vertex_id", "source_norm", "approx_norm", "ratio", "lower_margin",
                    "upper_margin")
SMOOTH_COLUMNS = ("sample_id", "base", "smooth", "ratio", "grad_rel_err")
ANALYZE_COLUMNS = ("point_id", "functional", "witness", "radius", "n_f", "m_f")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _record(name, passed, margin=None, **extra) -> dict:
    rec = {"name": name, "pass": bool(passed)}
    if margin is not None:
        rec["margin"] = float(margin)
    rec.update(extra)
    return rec


def _report(command, inputs, results, **summary) -> dict:
    failed = sum(not r["pass"] for r in results)
    return {"command": command, "inputs": inputs, "results": results,
            "summary": {"checks": len(results), "failed": failed, "passed": failed == 0,
                        **summary}}


def _load_norm(path):
    return normspec_from_json(load_json(path), where=str(path))


def _epsilon(value: float) -> float:
    if not 0.0 < value < 1.0:
        raise ParseError(f"--epsilon must lie in (0, 1), got {value}")
    return value


def cmd_level(args):
    N = _load_norm(args.norm)
    f = functional_from_json(load_json(args.functional), N.dim, str(args.functional))
    L = level_sequence(f)
    ns = [args.n] if args.n is not None else list(range(1, L.M + 1))
    results, h_table, j_table = [], [], []
    for n in ns:
        h = h_approx(L, n)
        lit = h_level_sum(L, n)
        h_table.append({"n": n, "h": h.to_dict(), "residual_l1": l1_norm(f - h),
                        "dual_distance": dual_norm(N, f - h)})
        dom = min(abs(f.coeff(k)) - abs(h.coeff(k)) for k in f.support)
        results.append(_record(f"domination[n={n}]", dom >= 0.0, dom))
        diff = float(np.abs((h - lit).to_dense()).max())
        results.append(_record(f"level_sum_form[n={n}]", diff <= 1e-12, 1e-12 - diff))
        ident = sum((L.p(i) - L.p(i + 1)) * len(L.G(i)) for i in range(1, n + 1))
        err = abs(l1_norm(h) - ident)
        results.append(_record(f"l1_identity[n={n}]", err <= 1e-12, 1e-12 - err))
        for m in range(n + 1, L.M + 1):
            j = j_approx(L, n, m)
            slack = 2 * l1_norm(f - h) + 1e-12 - l1_norm(f - j)
            j_table.append({"n": n, "m": m, "j": j.to_dict(), "residual_l1": l1_norm(f - j),
                            "dual_distance": dual_norm(N, f - j)})
            results.append(_record(f"j_residual_bound[n={n},m={m}]", slack >= 0, slack))
        if n < L.M:
            weights = lambda_weights(L, n)
            total = sum(lam for _, lam in weights)
            results.append(_record(f"lambda_sum[n={n}]", abs(total - 1) <= 1e-12,
                                   1e-12 - abs(total - 1)))
            rec = float(np.abs((convex_reconstruct(L, n) - f).to_dense()).max())
            results.append(_record(f"convex_reconstruct[n={n}]", rec <= 1e-12, 1e-12 - rec))
    exact = h_approx(L, L.M) == f
    results.append(_record("h_at_M_equals_f", exact))
    report = _report("level", {"norm": str(args.norm), "functional": str(args.functional),
                               "n": args.n}, results, M=L.M)
    report["levels"] = [{"i": i, "p": L.p(i), "G": sorted(L.G(i))} for i in range(1, L.M + 1)]
    report["h"] = h_table
    report["j"] = j_table
    return report, None


def cmd_approximate(args):
    N = _load_norm(args.norm)
    A = build_approx_norm(N, _epsilon(args.epsilon), args.m_extra)
    payload = approx_to_json(A)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(dump_json(payload))
    prof = support_profile(A)
    results = [_record(f"element[{k}]", c.passed, c.distance_bound - c.distance,
                       source_index=c.source_index)
               for k, c in enumerate(verify_elements(A))]
    report = _report("approximate", {"norm": str(args.norm), "epsilon": args.epsilon,
                                     "m_extra": args.m_extra, "out": args.out}, results,
                     elements=len(A.elements), induced_boundary=A.induced.k,
                     max_support=prof.max_support, max_source_support=prof.max_source_support)
    if not args.out:
        report["approximation"] = payload
    return report, None


def cmd_verify(args):
    N = _load_norm(args.norm)
    eps = _epsilon(args.epsilon)
    A, listed = approx_from_json(load_json(args.approx), N, eps, where=str(args.approx))
    sandwich = verify_sandwich(A)
    results = []
    for rec, row in zip(sandwich.records(), sandwich.rows):
        ok_lo = rec["lower_margin"] >= -1e-9
        ok_hi = rec["upper_margin"] >= -1e-9
        results.append(_record(f"sandwich[{rec['vertex_id']}]", ok_lo and ok_hi,
                               min(rec["lower_margin"], rec["upper_margin"]),
                               ratio=rec["ratio"], r=row.r))
    for msg in sandwich.failures:
        if "does not define a norm" in msg:
            results.append(_record("approx_is_norm", False, detail=msg))
    for c in verify_elements(A):
        results.append(_record(f"element[{c.index}]", c.passed,
                               min(c.distance_bound - c.distance, c.dual_bound - c.dual_norm),
                               source_index=c.source_index))
    prof = support_profile(A)
    for r in prof.records:
        results.append(_record(f"support[{r.index}]", r.within_level_set,
                               r.level_support - r.scaled_support,
                               source_support=r.source_support, scaled_support=r.scaled_support))
    # the boundary listed in the file must define the same norm as the elements
    pts = np.vstack([N.vertices().vertices, listed.vertices().vertices])
    gap = float(np.abs(A.values(pts) - listed.norms(pts)).max())
    results.append(_record("listed_boundary_consistent", gap <= 1e-9, 1e-9 - gap))
    report = _report("verify", {"norm": str(args.norm), "approx": str(args.approx),
                                "epsilon": eps}, results,
                     max_support=prof.max_support, mean_support=prof.mean_support,
                     max_source_support=prof.max_source_support)
    csv_rows = (sandwich.records(), SANDWICH_COLUMNS)
    return report, csv_rows


def cmd_smooth(args):
    N = _load_norm(args.norm)
    eps = args.epsilon
    if not eps > 0:
        raise ParseError(f"--epsilon must be positive, got {eps}")
    S = SmoothNorm.for_epsilon(N, eps)
    rng = np.random.default_rng(args.seed)
    xs = rng.standard_normal((args.samples, N.dim))
    xs = xs[np.any(xs != 0, axis=1)]
    base = N.norms(xs)
    xs = xs / base[:, None]
    base = N.norms(xs)
    val, grad = S.values(xs)
    step = 1e-5
    fd = np.empty_like(xs)
    for i in range(N.dim):
        e = np.zeros(N.dim)
        e[i] = step
        fd[:, i] = (S.values(xs + e)[0] - S.values(xs - e)[0]) / (2 * step)
    grad_err = np.linalg.norm(grad - fd, axis=1) / np.linalg.norm(grad, axis=1)
    euler = np.abs(np.einsum("ij,ij->i", grad, xs) - val) / val
    ratio = val / base
    results = [
        _record("lower_bound", bool(np.all(val >= base * (1 - 1e-9))), float((ratio - 1).min())),
        _record("upper_bound", bool(np.all(val <= (1 + eps) * base * (1 + 1e-9))),
                float((1 + eps - ratio).min())),
        _record("gradient_fd", bool(np.all(grad_err <= 1e-5)), float(1e-5 - grad_err.max())),
        _record("euler_identity", bool(np.all(euler <= 1e-9)), float(1e-9 - euler.max())),
    ]
    report = _report("smooth", {"norm": str(args.norm), "epsilon": eps, "samples": args.samples,
                                "seed": args.seed}, results, p=S.p, k=S.k,
                     max_ratio=float(ratio.max()), min_ratio=float(ratio.min()))
    records = [{"sample_id": i, "base": float(base[i]), "smooth": float(val[i]),
                "ratio": float(ratio[i]), "grad_rel_err": float(grad_err[i])}
               for i in range(xs.shape[0])]
    return report, (records, SMOOTH_COLUMNS)


def cmd_analyze(args):
    N = _load_norm(args.norm)
    points = exposed_points(N)
    lemma = verify_lemma_geometry(points, N, seed=args.seed)
    dnm = decompose_Dnm(points, N)
    results = [_record(c.name, c.passed, c.margin, detail=c.detail) for c in lemma.checks]
    results += [_record(c.name, c.passed, c.margin, detail=c.detail) for c in dnm.checks]
    # the exposed set must itself be a boundary of the norm
    verts = N.vertices().vertices
    fmat = np.array([p.f.to_dense() for p in points])
    normed = float((verts @ fmat.T).max(axis=1).min())
    results.append(_record("exposed_set_is_boundary", normed >= 1 - 1e-9, normed - 1))
    table = [{"point_id": i, "functional": p.f.to_dict(), "witness": p.witness.tolist(),
              "radius": p.radius, "n_f": p.n_f, "m_f": p.m_f,
              "class_witness": p.class_witness.tolist(), "class_radius": p.class_radius}
             for i, p in enumerate(points)]
    report = _report("analyze", {"norm": str(args.norm), "seed": args.seed}, results,
                     exposed=len(points), not_exposed=not_exposed(N),
                     classes={f"D_({n},{m})": len(v) for (n, m), v in dnm.classes.items()})
    report["points"] = table
    records = [{"point_id": t["point_id"], "functional": repr(t["functional"]),
                "witness": " ".join(format(v, ".17g") for v in t["witness"]),
                "radius": t["radius"], "n_f": t["n_f"], "m_f": t["m_f"]} for t in table]
    return report, (records, ANALYZE_COLUMNS)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="normforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("level", help="leveling decomposition of a functional")
    p.add_argument("--norm", required=True)
    p.add_argument("--functional", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_level)

    p = sub.add_parser("approximate", help="build the finite-support approximating norm")
    p.add_argument("--norm", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--m-extra", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_approximate)

    p = sub.add_parser("verify", help="certify an approximation file against its source")
    p.add_argument("--norm", required=True)
    p.add_argument("--approx", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("smooth", help="p-power smoothing with sandwich and gradient checks")
    p.add_argument("--norm", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("analyze", help="exposed points, separation lemma, D_(n,m) classes")
    p.add_argument("--norm", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_analyze)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "m_extra", 1) < 1 or getattr(args, "samples", 1) < 1:
            raise UsageError("--m-extra and --samples must be >= 1")
        report, csv_rows = args.func(args)
    except UsageError as exc:
        print(exc, file=stderr)
        return EXIT_USAGE
    except CapExceededError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_CAP
    except (ParseError, NormforgeError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_PARSE
    if getattr(args, "csv", None) and csv_rows is not None:
        emit_plot_data(csv_rows[0], csv_rows[1], args.csv)
    stdout.write(dump_json(report))
    return EXIT_OK if report["summary"]["passed"] else EXIT_VERIFY


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
