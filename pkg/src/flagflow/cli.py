"""Command-line interface.

Subcommands: ``decompose``, ``verify-flow``, ``kahler-check``,
``extrinsic-check``, ``morse``. Every run writes one JSON document (or a CSV
table of its checks) and exits with:

* 0  all checks pass
* 1  verdict failure (``decompose``, ``verify-flow``)
* n  number of failed checks, capped at 125 (``kahler-check``,
  ``extrinsic-check``, ``morse``)
* 2  validation error
* 3  degeneracy (ambiguous eigenvalue grouping, rank-deficient transport)
"""
import argparse
import csv
import io
import math
import sys

import numpy as np

from . import _backend
from .analysis import (
    critical_points, is_extrinsic_symmetric, multinomial_count, verify_theorem_5_1,
)
from .errors import DegeneracyError, FlagFlowError, GroupingAmbiguityError
from .flow import HeightFunction, ambient_gradient, s_gradient, s_inner, verify_theorem_4_1
from .kahler import (
    CompactOrbitPoint, complex_structure, kahler_form, kahler_form_from_generators,
    kahler_metric, tangent_space_basis, transport, verify_theorem_6_1,
)
from .lie import AlgebraContext, Family, bracket, sigma
from .orbit import OrbitPoint
from .roots import decompose

EXIT_VALIDATION = 2
EXIT_DEGENERACY = 3
SPECTRUM_MIN_GAP = 1e-3


class ValidationError(Exception):
    pass


# ---------------------------------------------------------------- serialization

def _fmt_float(x):
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def dumps(obj):
    """JSON with floats written to 17 significant digits."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        import json
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv(checks):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["check", "params", "max_deviation", "tolerance", "pass", "notes"])
    for c in checks:
        w.writerow([
            c["check"], dumps(c["params"]), dumps(c["max_deviation"]),
            dumps(c["tolerance"]), "true" if c["pass"] else "false", c["notes"],
        ])
    return buf.getvalue()


def check(name, params, deviation, tolerance, passed, notes=""):
    return {
        "check": name,
        "params": params,
        "max_deviation": float(deviation),
        "tolerance": float(tolerance),
        "pass": bool(passed),
        "notes": notes,
    }


# ---------------------------------------------------------------- config

def parse_seeds(text):
    try:
        if ".." in text:
            lo, hi = (int(p) for p in text.split("..", 1))
            seeds = list(range(lo, hi + 1))
        else:
            seeds = [int(text)]
    except ValueError:
        raise ValidationError(f"invalid seed specification {text!r}") from None
    if not seeds:
        raise ValidationError(f"empty seed range {text!r}")
    for s in seeds:
        if not 0 <= s < 2 ** 64:
            raise ValidationError(f"seed {s} is not a 64-bit unsigned integer")
    return seeds


def parse_spectrum(text):
    try:
        values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ValidationError(f"malformed spectrum {text!r}") from None
    if not values or not all(math.isfinite(v) for v in values):
        raise ValidationError(f"malformed spectrum {text!r}")
    trace = math.fsum(values)
    if abs(trace) > 1e-12 * max(1.0, max(abs(v) for v in values)):
        raise ValidationError(f"spectrum must be trace-free: its trace (sum) is {trace!r}")
    return values


def build_config(args, default_algebra):
    algebra = args.algebra or default_algebra
    if args.command == "kahler-check" and algebra != "su_complexified":
        raise ValidationError("kahler-check works on su(n); use --algebra su_complexified")
    spectrum = parse_spectrum(args.spectrum) if args.spectrum is not None else None
    n = args.n
    if spectrum is not None:
        if n is not None and n != len(spectrum):
            raise ValidationError(f"--n {n} does not match the {len(spectrum)} spectrum entries")
        n = len(spectrum)
    if n is None:
        n = 3
    if not 2 <= n <= 64:
        raise ValidationError(f"n must lie in [2, 64], got {n}")
    if not 1e-13 <= args.tol <= 1e-3:
        raise ValidationError(f"tol must lie in [1e-13, 1e-3], got {args.tol}")
    if not (math.isfinite(args.t_end) and args.t_end >= 0):
        raise ValidationError("t-end must be a finite non-negative number")
    if args.samples < 2:
        raise ValidationError("samples must be at least 2")
    return {
        "algebra": algebra,
        "n": n,
        "spectrum": spectrum,
        "seeds": parse_seeds(args.seed),
        "tol": args.tol,
        "t_end": args.t_end,
        "samples": args.samples,
        "snap": args.snap,
    }


# ---------------------------------------------------------------- instances

def random_spectrum(rng, n):
    while True:
        s = np.sort(rng.uniform(-1.0, 1.0, n))
        s = s - s.mean()
        if np.min(np.diff(s)) >= SPECTRUM_MIN_GAP:
            return s


def make_instance(cfg, seed, q_in="p"):
    """Seeded (ctx, spectrum, frame, q) with the documented draw order."""
    ctx = AlgebraContext(Family(cfg["algebra"]), cfg["n"])
    rng = np.random.default_rng(seed)
    spec = np.sort(np.array(cfg["spectrum"])) if cfg["spectrum"] is not None else random_spectrum(rng, cfg["n"])
    frame = ctx.random_compact(rng)
    q = ctx.random_p(rng, normalize=True) if q_in == "p" else ctx.random_k(rng, normalize=True)
    return ctx, spec, frame, q


def _params(cfg, seed, **extra):
    out = {"algebra": cfg["algebra"], "n": cfg["n"], "seed": seed}
    out.update(extra)
    return out


# ---------------------------------------------------------------- commands

def cmd_decompose(cfg):
    checks, data = [], []
    for seed in cfg["seeds"]:
        ctx, spec, frame, _ = make_instance(cfg, seed)
        mat = (frame * spec) @ frame.conj().T
        x = ctx.element(0.5 * (mat + mat.conj().T))
        dec = decompose(x)
        dims = dec.dimensions()
        params = _params(cfg, seed)
        checks.append(check("dimension_audit", params, abs(dims["total"] - (ctx.n ** 2 - 1)), 0,
                            dims["total"] == ctx.n ** 2 - 1,
                            f"{dims['n_plus']}+{dims['c']}+{dims['n_minus']}={dims['total']}"))
        rng = np.random.default_rng(seed)
        u = dec.frame.frame
        flip = grading = adx = 0.0
        for root in dec.positive_roots:
            z = np.where(dec.sector_mask(root.upper, root.lower), ctx.random_element(rng).mat, 0)
            zg = dec.from_frame(z)
            flipped = dec.to_frame(sigma(ctx.element(zg, check=False)).mat)
            flip = max(flip, float(np.linalg.norm(np.where(dec.sector_mask(root.lower, root.upper), 0, flipped))))
            adx = max(adx, float(np.linalg.norm(x.mat @ zg - zg @ x.mat - root.alpha * zg)))
            for other in dec.positive_roots:
                w = np.where(dec.sector_mask(other.upper, other.lower), ctx.random_element(rng).mat, 0)
                br = dec.to_frame(bracket(ctx.element(zg, check=False), ctx.element(dec.from_frame(w), check=False)).mat)
                allowed = dec.sector_mask(root.upper, other.lower) if root.lower == other.upper else 0
                allowed = allowed | (dec.sector_mask(other.upper, root.lower) if other.lower == root.upper else False)
                grading = max(grading, float(np.linalg.norm(np.where(allowed, 0, br))))
        del u
        checks.append(check("sigma_flip", params, flip, 1e-10, flip < 1e-10))
        checks.append(check("ad_eigenvalue", params, adx, 1e-10, adx < 1e-10))
        checks.append(check("bracket_grading", params, grading, 1e-10, grading < 1e-10))
        data.append({
            "seed": seed,
            "blocks": [{"value": b.value, "multiplicity": b.multiplicity} for b in dec.blocks],
            "positive_roots": [{"upper": r.upper, "lower": r.lower, "alpha": r.alpha,
                                "dimension": dec.root_space_dimension(r)} for r in dec.positive_roots],
            "dimensions": dims,
        })
    return checks, data, (0 if all(c["pass"] for c in checks) else 1)


def cmd_verify_flow(cfg):
    checks, data = [], []
    for seed in cfg["seeds"]:
        ctx, spec, frame, q = make_instance(cfg, seed)
        x0 = OrbitPoint.from_spectrum(ctx, spec, frame)
        rep = verify_theorem_4_1(HeightFunction(q), x0, cfg["t_end"], cfg["tol"], cfg["samples"], cfg["snap"])
        notes = (f"spectral_drift={_fmt_float(rep.spectral_drift)}; "
                 f"f_monotone={'true' if rep.f_monotone else 'false'}; steps={rep.n_steps}")
        checks.append(check("flow_equivalence", _params(cfg, seed, t_end=cfg["t_end"], tol=cfg["tol"]),
                            rep.max_deviation, rep.threshold, rep.verdict, notes))
        data.append({"seed": seed, "spectrum": list(spec), "spectral_drift": rep.spectral_drift,
                     "f_monotone": rep.f_monotone, "f_start": rep.f_values[0], "f_end": rep.f_values[-1]})
    return checks, data, (0 if all(c["pass"] for c in checks) else 1)


def _rel(diff, ref):
    """Error relative to max(1, |ref|); the form and metric scale like 1/alpha."""
    return abs(diff) / max(1.0, abs(ref))


def cmd_kahler_check(cfg):
    checks, data = [], []
    for seed in cfg["seeds"]:
        ctx, spec, frame, q = make_instance(cfg, seed, q_in="k")
        x = CompactOrbitPoint.from_spectrum(ctx, spec, frame)
        rng = np.random.default_rng([seed, 1])
        basis = tangent_space_basis(x)
        params = _params(cfg, seed)

        jj = max(np.linalg.norm(complex_structure(x, complex_structure(x, v)) + v) for v in basis)
        checks.append(check("j_squared", params, jj, 1e-10, jj < 1e-10))

        def rand_tangent():
            return sum(rng.standard_normal() * b for b in basis)

        pairs = [(rand_tangent(), rand_tangent()) for _ in range(10)]
        anti = max(_rel(kahler_form(x, v, w) + kahler_form(x, w, v), kahler_form(x, v, w)) for v, w in pairs)
        checks.append(check("omega_antisymmetric", params, anti, 1e-9, anti < 1e-9))

        inv = 0.0
        for v, w in pairs:
            k = ctx.random_compact(rng)
            y, kv, kw = transport(k, x, v, w)
            inv = max(inv, _rel(kahler_form(y, kv, kw) - kahler_form(x, v, w), kahler_form(x, v, w)))
        checks.append(check("omega_ad_invariant", params, inv, 1e-9, inv < 1e-9))

        gram = np.array([[kahler_form(x, a, b) for b in basis] for a in basis])
        cond = np.linalg.cond(gram)
        rank = np.linalg.matrix_rank(gram)
        checks.append(check("omega_nondegenerate", params, len(basis) - rank, 0, rank == len(basis),
                            f"condition_number={_fmt_float(cond)}"))

        metric = 0.0
        herm = x.hermitian
        for _, mats in tangent_space_basis(x, by_root=True):
            for v in mats:
                for w in mats:
                    ref = s_inner(-1j * v, -1j * w, herm)
                    size = math.sqrt(s_inner(-1j * v, -1j * v, herm) * s_inner(-1j * w, -1j * w, herm))
                    metric = max(metric, _rel(kahler_metric(x, v, w) - ref, size))
        checks.append(check("kahler_equals_s_metric", params, metric, 1e-12, metric < 1e-12,
                            "per root-space basis, relative to max(1, |v|_s |w|_s)"))

        chain = 0.0
        for _ in range(5):
            a, b = ctx.random_k(rng).mat, ctx.random_k(rng).mat
            va, wb = a @ x.mat - x.mat @ a, b @ x.mat - x.mat @ b
            chain = max(chain, abs(kahler_form_from_generators(x, a, b) - kahler_form(x, va, wb)))
        checks.append(check("omega_defining_chain", params, chain, 1e-10, chain < 1e-10))

        rep = verify_theorem_6_1(q, x, cfg["t_end"], cfg["tol"], cfg["samples"], cfg["snap"])
        checks.append(check("kahler_flow_equivalence", _params(cfg, seed, t_end=cfg["t_end"], tol=cfg["tol"]),
                            rep.max_deviation, rep.threshold, rep.verdict,
                            f"f_monotone={'true' if rep.f_monotone else 'false'}"))
        data.append({"seed": seed, "spectrum": list(spec), "tangent_dimension": len(basis)})
    failed = sum(not c["pass"] for c in checks)
    return checks, data, min(failed, 125)


def default_extrinsic_spectrum(n):
    m_hi = n // 2
    m_lo = n - m_hi
    a = m_lo / n
    return [a - 1.0] * m_lo + [a] * m_hi


def _sector_ratios(f, x):
    """Per root: |s-gradient component| / |ambient-gradient component| (equals alpha)."""
    dec = x.decomposition
    sg = dec.to_frame(s_gradient(f, x))
    ag = dec.to_frame(ambient_gradient(f, x))
    out = []
    for r in dec.positive_roots:
        m = dec.root_mask(r)
        out.append({"alpha": r.alpha, "ratio": float(np.linalg.norm(sg[m]) / np.linalg.norm(ag[m]))})
    return out


def cmd_extrinsic_check(cfg):
    checks, data = [], []
    if cfg["spectrum"] is None:
        cfg = dict(cfg, spectrum=default_extrinsic_spectrum(cfg["n"]))
    for seed in cfg["seeds"]:
        ctx, spec, frame, q = make_instance(cfg, seed)
        x0 = OrbitPoint.from_spectrum(ctx, spec, frame)
        params = _params(cfg, seed)
        rep = is_extrinsic_symmetric(x0)
        checks.append(check("extrinsic_symmetric", params, rep.max_violation, 1e-10, bool(rep), rep.note))
        f = HeightFunction(q)
        if rep:
            weights = [1.0 / r.alpha for r in x0.decomposition.positive_roots]
            wdev = max((abs(w - 1.0) for w in weights), default=0.0)
            checks.append(check("unit_metric_weights", params, wdev, 1e-10, wdev < 1e-10))
            fr = verify_theorem_5_1(x0, f, cfg["t_end"], cfg["tol"], cfg["samples"], cfg["snap"])
            ident = fr.extras["identity_residual"]
            checks.append(check("s_gradient_equals_projection", params, ident, 1e-10, ident < 1e-10))
            checks.append(check("extrinsic_flow_equivalence", _params(cfg, seed, t_end=cfg["t_end"], tol=cfg["tol"]),
                                fr.max_deviation, fr.threshold, fr.max_deviation < fr.threshold and fr.f_monotone,
                                f"f_monotone={'true' if fr.f_monotone else 'false'}"))
        else:
            diff = np.linalg.norm(s_gradient(f, x0) - ambient_gradient(f, x0))
            ratios = _sector_ratios(f, x0)
            checks.append(check("extrinsic_flow_equivalence", params, diff, 0, False,
                                "precondition failed: orbit is not extrinsic symmetric; "
                                "s-gradient and ambient gradient differ"))
        entry = {"seed": seed, "spectrum": list(spec), "root_values": rep.root_values}
        if not rep:
            entry["sector_ratios"] = ratios
        data.append(entry)
    failed = sum(not c["pass"] for c in checks)
    return checks, data, min(failed, 125)


def cmd_morse(cfg):
    checks, data = [], []
    for seed in cfg["seeds"]:
        ctx, spec, frame, q = make_instance(cfg, seed)
        f = HeightFunction(q)
        crit = critical_points(f, spec)
        params = _params(cfg, seed)
        expected = multinomial_count(spec)
        checks.append(check("critical_count", params, abs(crit.count - expected), 0,
                            crit.count == expected, f"multinomial={expected}"))
        grad = max(np.linalg.norm(s_gradient(f, p)) for p in crit.points)
        checks.append(check("gradient_vanishes", params, grad, 1e-10, grad < 1e-10))
        checks.append(check("maximizer_sorted_alignment", params, 0.0 if crit.maximizer == 0 else 1.0, 0,
                            crit.maximizer == 0))
        data.append({
            "seed": seed,
            "spectrum": list(spec),
            "critical_points": [{"assignment": list(a), "f_value": fv}
                                for a, fv in zip(crit.assignments, crit.f_values)],
        })
    failed = sum(not c["pass"] for c in checks)
    return checks, data, min(failed, 125)


COMMANDS = {
    "decompose": (cmd_decompose, "sl_real", "root decomposition and dimension audit"),
    "verify-flow": (cmd_verify_flow, "sl_real", "closed-form vs integrated s-gradient flow"),
    "kahler-check": (cmd_kahler_check, "su_complexified", "Kaehler structure battery on su(n)"),
    "extrinsic-check": (cmd_extrinsic_check, "sl_real", "extrinsic symmetric detector and flow"),
    "morse": (cmd_morse, "sl_real", "critical points of a generic height function"),
}


def make_parser():
    parser = argparse.ArgumentParser(prog="flagflow", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, _, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--algebra", choices=[f.value for f in Family], default=None)
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--spectrum", default=None,
                       help="comma-separated trace-free spectrum; use --spectrum=-1,1 for a leading minus")
        p.add_argument("--seed", default="0", help="seed or inclusive range a..b")
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--t-end", dest="t_end", type=float, default=2.0)
        p.add_argument("--samples", type=int, default=21)
        p.add_argument("--snap", dest="snap", action="store_true", default=True)
        p.add_argument("--no-snap", dest="snap", action="store_false")
        p.add_argument("--output", choices=["json", "csv"], default="json")
        p.add_argument("--out", default=None)
    return parser


def main(argv=None):
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code else 0
    fn, default_algebra, _ = COMMANDS[args.command]
    try:
        cfg = build_config(args, default_algebra)
        checks, data, code = fn(cfg)
    except ValidationError as exc:
        print(f"flagflow: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (GroupingAmbiguityError, DegeneracyError) as exc:
        print(f"flagflow: degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERACY
    except FlagFlowError as exc:
        print(f"flagflow: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    if args.output == "csv":
        text = _csv(checks)
    else:
        params = {k: v for k, v in cfg.items() if k != "seeds"}
        params["seeds"] = cfg["seeds"]
        params["backend"] = _backend.NAME
        text = dumps({"command": args.command, "params": params, "checks": checks, "data": data}) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
