"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
import json
import subprocess
import sys
import time

import numpy as np
import pytest

from flagflow import cli
from flagflow.analysis import (
    classify_limit, critical_points, is_extrinsic_symmetric, multinomial_count, verify_theorem_5_1,
)
from flagflow.flow import (
    HeightFunction, ambient_gradient, closed_form_flow, s_gradient, s_inner, verify_theorem_4_1,
)
from flagflow.lie import AlgebraContext, Family, bracket
from flagflow.numerics import expm
from flagflow.orbit import OrbitPoint, group_act, infinitesimal_act

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} {title}: {detail}")
        return ok
    return emit


def instance(family, n, seed):
    """Seeded instance drawn exactly like the command-line generator."""
    cfg = {"algebra": family.value, "n": n, "spectrum": None}
    ctx, spec, frame, q = cli.make_instance(cfg, seed)
    return ctx, OrbitPoint.from_spectrum(ctx, spec, frame), HeightFunction(q)


def test_flow_equivalence_sweep(report):
    start = time.perf_counter()
    worst, fails = 0.0, 0
    for n in range(2, 7):
        for seed in range(1, 21):
            _, x0, f = instance(Family.SL_REAL, n, seed)
            rep = verify_theorem_4_1(f, x0, t_end=2.0, tol=1e-10)
            worst = max(worst, rep.max_deviation)
            fails += not (rep.max_deviation < 5e-8 and rep.f_monotone)
    elapsed = time.perf_counter() - start
    ok = fails == 0 and worst < 5e-8 and elapsed < 60
    assert report(1, "closed-form vs integrated s-gradient flow", ok,
                  f"100 instances, worst deviation {worst:.2e} (< 5e-8), {fails} failures, {elapsed:.1f} s (< 60 s)")


def test_gradient_identity(report):
    worst_id, worst_fd = 0.0, 0.0
    for family in Family:
        for n in (2, 3, 4, 5):
            ctx, x, f = instance(family, n, 100 + n)
            rng = np.random.default_rng(n)
            g = s_gradient(f, x)
            for _ in range(100):
                a = ctx.random_k(rng).mat
                v = a @ x.mat - x.mat @ a
                v /= np.linalg.norm(v)
                worst_id = max(worst_id, abs(s_inner(g, v, x) - f.differential(v)))
            fd = infinitesimal_act(-f.q, x, method="fd")
            worst_fd = max(worst_fd, float(np.linalg.norm(g - fd)))
    ok = worst_id < 1e-10 and worst_fd < 1e-6
    assert report(2, "gradient defining equation and -q.x", ok,
                  f"|<grad,v>_s - <q,v>| max {worst_id:.2e} (< 1e-10, unit v); "
                  f"|grad - fd(-q.x)| max {worst_fd:.2e} (< 1e-6)")


def test_sl2_hand_closed_form(report):
    ctx = AlgebraContext(Family.SL_REAL, 2)
    x0 = OrbitPoint(ctx, np.array([[0.0, 1.0], [1.0, 0.0]]))
    f = HeightFunction(ctx.element(np.diag([1.0, -1.0])))
    times = np.linspace(0.0, 4.0, 20)
    dev = 0.0
    for t, x in zip(times, closed_form_flow(f, x0, times)):
        th, sh = np.tanh(2 * t), 1 / np.cosh(2 * t)
        dev = max(dev, float(np.max(np.abs(x.mat - np.array([[th, sh], [sh, -th]])))))
    gdev = float(np.max(np.abs(s_gradient(f, x0) - np.diag([2.0, -2.0]))))
    rep = verify_theorem_4_1(f, x0, t_end=2.0, tol=1e-10)
    ok = dev < 1e-9 and gdev < 1e-12 and rep.verdict
    assert report(3, "sl(2) tanh/sech closed form", ok,
                  f"trajectory error {dev:.2e} (< 1e-9, 20 times), gradient error {gdev:.2e} (< 1e-12), "
                  f"integrated deviation {rep.max_deviation:.2e}")


def test_extrinsic_specialization(report):
    worst_id, worst_flow, verdicts = 0.0, 0.0, True
    for family in Family:
        for spectrum in ([0.5, 0.5, -0.5, -0.5], [2 / 3, -1 / 3, -1 / 3], [0.6, 0.6, -0.4, -0.4, -0.4]):
            for seed in range(5):
                cfg = {"algebra": family.value, "n": len(spectrum), "spectrum": spectrum}
                ctx, spec, frame, q = cli.make_instance(cfg, seed)
                x0 = OrbitPoint.from_spectrum(ctx, spec, frame)
                assert is_extrinsic_symmetric(x0)
                rep = verify_theorem_5_1(x0, HeightFunction(q), t_end=2.0, tol=1e-10)
                worst_id = max(worst_id, rep.extras["identity_residual"])
                worst_flow = max(worst_flow, rep.max_deviation)
                verdicts &= rep.f_monotone
    ctx = AlgebraContext(Family.SL_REAL, 3)
    rng = np.random.default_rng(0)
    x = OrbitPoint.from_spectrum(ctx, [-1.0, 0.0, 1.0], ctx.random_compact(rng))
    f = HeightFunction(ctx.random_p(rng, normalize=True))
    dec = x.decomposition
    sg, ag = dec.to_frame(s_gradient(f, x)), dec.to_frame(ambient_gradient(f, x))
    top = max(dec.positive_roots, key=lambda r: r.alpha)
    m = dec.root_mask(top)
    ratio = float(np.linalg.norm(sg[m]) / np.linalg.norm(ag[m]))
    ok = worst_id < 1e-10 and worst_flow < 5e-8 and verdicts and abs(ratio - 2.0) < 1e-10
    assert report(4, "extrinsic symmetric specialization", ok,
                  f"identity residual {worst_id:.2e} (< 1e-10), flow deviation {worst_flow:.2e} (< 5e-8), "
                  f"negative control sector ratio {ratio:.12f} (2 within 1e-10)")


def test_kahler_battery(report):
    limits = {"j_squared": 1e-10, "omega_antisymmetric": 1e-9, "omega_ad_invariant": 1e-9,
              "kahler_equals_s_metric": 1e-12, "kahler_flow_equivalence": 5e-8, "omega_defining_chain": 1e-10}
    worst = dict.fromkeys(limits, 0.0)
    nondegenerate = True
    for n in (2, 3):
        cfg = {"algebra": "su_complexified", "n": n, "spectrum": None, "seeds": list(range(1, 11)),
               "tol": 1e-10, "t_end": 2.0, "samples": 21, "snap": True}
        checks, _, _ = cli.cmd_kahler_check(cfg)
        for c in checks:
            if c["check"] in worst:
                worst[c["check"]] = max(worst[c["check"]], c["max_deviation"])
            elif c["check"] == "omega_nondegenerate":
                nondegenerate &= c["pass"]
    ok = nondegenerate and all(worst[k] < limits[k] for k in limits)
    assert report(5, "Kaehler battery on su(2), su(3)", ok,
                  ", ".join(f"{k} {worst[k]:.1e} (< {limits[k]:.0e})" for k in limits))


def test_structural_invariants(report):
    audit_ok, grading, flip_amb, flip_exact = True, 0.0, 0.0, True
    action, iso, inblock = 0.0, 0.0, 0.0
    rng = np.random.default_rng(6)
    spectra = [[2.0, -1.0, -1.0], [-1.5, -0.5, 0.5, 1.5], [1.0, 1.0, 0.0, -1.0, -1.0], [0.2, -0.2],
               [3.0, 1.0, 1.0, -1.0, -1.0, -3.0]]
    for family in Family:
        for spec in spectra:
            ctx = AlgebraContext(family, len(spec))
            x = OrbitPoint.from_spectrum(ctx, spec, ctx.random_compact(rng))
            dec = x.decomposition
            audit_ok &= dec.dimensions()["total"] == ctx.n ** 2 - 1
            k = len(dec.blocks)
            for i in range(k):
                for j in range(k):
                    zt = np.where(dec.sector_mask(i, j), ctx.random_element(rng).mat, 0)
                    st = ctx.sigma_mat(zt)
                    flip_exact &= bool(np.all(st[~dec.sector_mask(j, i)] == 0))
                    z = dec.from_frame(zt)
                    amb = dec.to_frame(ctx.sigma_mat(z))
                    flip_amb = max(flip_amb, float(np.linalg.norm(np.where(dec.sector_mask(j, i), 0, amb))))
                    for l in range(k):
                        if l == i:
                            continue
                        w = dec.from_frame(np.where(dec.sector_mask(j, l), ctx.random_element(rng).mat, 0))
                        br = dec.to_frame(bracket(ctx.element(z, check=False), ctx.element(w, check=False)).mat)
                        grading = max(grading, float(np.linalg.norm(np.where(dec.sector_mask(i, l), 0, br))))
            g1 = expm(0.5 * ctx.random_element(rng).mat)
            g2 = expm(0.5 * ctx.random_element(rng).mat)
            action = max(action, float(np.linalg.norm(
                group_act(g1 @ g2, x).mat - group_act(g1, group_act(g2, x)).mat)))
            y = group_act(g1, x)
            iso = max(iso, float(np.max(np.abs(np.linalg.eigvalsh(y.mat) - x.spectrum))))
            r = np.zeros((ctx.n, ctx.n), dtype=ctx.dtype)
            for b in dec.blocks:
                sl = slice(b.start, b.start + b.multiplicity)
                blk = rng.standard_normal((b.multiplicity, b.multiplicity))
                if ctx.is_complex:
                    blk = blk + 1j * rng.standard_normal(blk.shape)
                r[sl, sl] = np.linalg.qr(blk)[0]
            x2 = OrbitPoint.from_frame(ctx, x.frame.frame @ r, x.blocks)
            inblock = max(inblock, float(np.linalg.norm(x2.mat - x.mat)),
                          float(np.linalg.norm(group_act(g1, x2).mat - y.mat)))
    ok = (audit_ok and flip_exact and grading < 1e-10 and flip_amb < 1e-10 and action < 1e-9
          and iso < 1e-9 and inblock < 1e-10)
    assert report(6, "structural invariants", ok,
                  f"dimension audit {'exact' if audit_ok else 'WRONG'}, grading {grading:.1e}, "
                  f"sigma flip support {'exact' if flip_exact else 'WRONG'} (ambient {flip_amb:.1e}), "
                  f"action law {action:.1e}, isospectrality {iso:.1e}, in-block invariance {inblock:.1e}")


def test_sorting_limits(report):
    ctx = AlgebraContext(Family.SL_REAL, 4)
    lam = np.array([-1.2, -0.4, 0.4, 1.2])
    runs, converged, maximal, monotone, worst = 0, 0, 0, 0, 0.0
    for seed in range(60):
        _, x0, _ = instance(Family.SL_REAL, 4, seed)
        k = ctx.random_compact(np.random.default_rng([seed, 7]))
        f = HeightFunction(ctx.element((k * lam) @ k.T))
        rep = classify_limit(f, x0, 25.0, tol=1e-8)
        runs += 1
        converged += rep.converged
        maximal += rep.is_maximizer
        monotone += rep.f_monotone
        worst = max(worst, rep.distance)
    counts_ok = True
    rng = np.random.default_rng(1)
    for spec in ([2.0, -1.0, -1.0], [1.0, 1.0, -1.0, -1.0], [-1.5, -0.5, 0.5, 1.5], [3.0, 1.0, 1.0, -1.0, -1.0, -3.0],
                 [0.5, 0.5, 0.5, -1.5]):
        c = AlgebraContext(Family.SL_REAL, len(spec))
        crit = critical_points(HeightFunction(c.random_p(rng, normalize=True)), spec)
        counts_ok &= crit.count == multinomial_count(spec) and crit.maximizer == 0
    # informational: Gaussian q with unit Frobenius norm converges too slowly at t = 25
    gauss = 0
    for seed in range(50):
        _, x0, f = instance(Family.SL_REAL, 4, seed)
        gauss += classify_limit(f, x0, 25.0, tol=1e-8).converged
    ok = runs >= 50 and converged == monotone == maximal == runs and counts_ok
    assert report(7, "sorting and flow limits", ok,
                  f"{runs} runs (q spectrum -1.2,-0.4,0.4,1.2): monotone {monotone}, converged {converged}, "
                  f"maximizer {maximal}, worst distance {worst:.1e} (< 1e-6); multinomial counts "
                  f"{'match' if counts_ok else 'MISMATCH'}; info: unit-Frobenius Gaussian q converged "
                  f"{gauss}/50 at t = 25")


def _cli(*args):
    proc = subprocess.run([sys.executable, "-m", "flagflow", *args], capture_output=True)
    return proc.returncode, proc.stdout


def test_determinism_and_interface(report, monkeypatch, capsys):
    a = _cli("verify-flow", "--n", "4", "--seed", "1..3")
    b = _cli("verify-flow", "--n", "4", "--seed", "1..3")
    c = _cli("decompose", "--n", "5", "--seed", "7", "--output", "csv")
    d = _cli("decompose", "--n", "5", "--seed", "7", "--output", "csv")
    identical = a == b and c == d and a[1] and c[1]
    validation, _ = _cli("decompose", "--spectrum", "2,-1,-2")
    passing, _ = _cli("verify-flow", "--spectrum", "1,-1", "--seed", "1")

    tight_code, tight_out = _cli("verify-flow", "--n", "4", "--seed", "1..5", "--tol", "1e-13")
    tight = json.loads(tight_out)["checks"]
    tight_all_pass = all(ch["pass"] for ch in tight)
    tight_consistent = tight_code == (0 if tight_all_pass else 1)
    tight_dev = max(ch["max_deviation"] for ch in tight)

    # the tight-tolerance run is reached by the integrator, so the failing-verdict
    # branch is exercised with an injected failure
    real = cli.verify_theorem_4_1

    def failing(*args, **kwargs):
        rep = real(*args, **kwargs)
        rep.verdict = False
        return rep

    monkeypatch.setattr(cli, "verify_theorem_4_1", failing)
    injected = cli.main(["verify-flow", "--seed", "1"])
    capsys.readouterr()

    ok = identical and validation == 2 and passing == 0 and tight_consistent and injected == 1
    note = ("verdict failed as expected" if not tight_all_pass else
            f"NOTE tol 1e-13 was reached (worst deviation {tight_dev:.1e} < 5e-12), so its verdict passed; "
            f"exit-1 checked with an injected failing verdict")
    assert report(8, "determinism and exit codes", ok,
                  f"byte-identical {'yes' if identical else 'NO'}; validation exit {validation} (2); "
                  f"pass exit {passing} (0); tol 1e-13 exit {tight_code} consistent with its verdict; "
                  f"injected fail exit {injected} (1); {note}")
