"""Acceptance gate: every criterion at its stated tolerance, one line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the PASS lines and
timings; the budgets here are generous on a laptop-class machine.
"""

import math
import random
import time
from fractions import Fraction

import pytest

from padicorb.bruhat import (
    BruhatFn,
    MellinCharacter,
    fourier,
    gamma_factor,
    negate_argument,
    tate_zeta,
)
from padicorb.groups import (
    HeckeElt,
    KSection,
    brute_convolution,
    coset_basis_to_hecke,
    satake_transform,
)
from padicorb.localfield import LocalFieldCtx, QuadExt
from padicorb.orbital import (
    baby_orbital,
    basic_fW0,
    fW_series_value,
    fourier_baby,
    nonsplit_germ_data,
    o_baby_nonsplit,
    o_baby_split,
    o_kuz_closed,
    o_kuz_direct,
    random_baby_data,
    split_germ_data,
    sx_from_baby,
    verify_fl,
    verify_matching,
    whittaker_unfolding_check,
)
from padicorb.spaces import g_value_SX


def report(name: str, passed: bool, detail: str, elapsed: float):
    print(f"\n[{'PASS' if passed else 'FAIL'}] {name}: {detail} ({elapsed:.1f}s)")
    assert passed, f"{name}: {detail}"


def random_window_fn(ctx, rng, n_atoms=4):
    atoms = []
    for _ in range(n_atoms):
        c = Fraction(rng.randrange(-2 * ctx.p ** 2, 2 * ctx.p ** 2),
                     ctx.p ** rng.randrange(0, 2))
        atoms.append((c, rng.randrange(0, 3),
                      complex(rng.gauss(0, 1), rng.gauss(0, 1))))
    return BruhatFn.from_atoms(ctx, "F", atoms)


def test_criterion_1_fourier_involution():
    """200 seeded random BruhatFn at p in {3,5,7}: ||FFf - f(-.)||_inf <= 1e-10."""
    t0 = time.time()
    rng = random.Random(2024)
    worst = 0.0
    for p in (3, 5, 7):
        ctx = LocalFieldCtx(p)
        for _ in range(67):
            f = random_window_fn(ctx, rng)
            diff = (fourier(fourier(f)) - negate_argument(f)).canonicalize()
            worst = max(worst, max((abs(a.coef) for a in diff.atoms), default=0.0))
    elapsed = time.time() - t0
    report("criterion 1 (Fourier involution, 201 f)", worst <= 1e-10,
           f"max residual {worst:.2e} <= 1e-10", elapsed)
    assert elapsed < 5 * 6  # soft budget guard


def test_criterion_2_tate_functional_equation():
    """gamma solves the FE as a sampled rational identity, 50 random f."""
    t0 = time.time()
    ctx = LocalFieldCtx(3)
    ext = QuadExt(ctx, "inert")
    rng = random.Random(7)
    ts = [complex(rng.uniform(-1.4, 1.4), rng.uniform(-1.0, 1.0)) for _ in range(20)]
    worst = 0.0
    for i in range(50):
        chi = MellinCharacter(ext, "trivial" if i % 2 == 0 else "eta")
        gam = gamma_factor(chi)
        f = random_window_fn(ctx, rng)
        lhs = gam * tate_zeta(f, chi)
        rhs = tate_zeta(fourier(f), chi.inverse()).subs_recip_scaled(1.0 / ctx.q)
        for t in ts:
            try:
                a, b = lhs.eval(t), rhs.eval(t)
            except Exception:
                continue
            worst = max(worst, abs(a - b) / max(1.0, abs(a), abs(b)))
    elapsed = time.time() - t0
    report("criterion 2 (Tate functional equation, 50 f x 20 t)", worst <= 1e-8,
           f"max residual {worst:.2e} <= 1e-8", elapsed)


def test_criterion_3_baby_germs():
    """Brute-force germ fits reproduce the closed germ formulas, 50 + 50 inputs."""
    t0 = time.time()
    ctx = LocalFieldCtx(3)
    ext = QuadExt(ctx, "inert")
    rng = random.Random(31)
    worst = 0.0
    for _ in range(50):
        phi = random_baby_data(ctx, "split", rng)
        germ = split_germ_data(phi)
        # independent dual path: fit a + b*val on deep orbital values
        j = germ.level + 1
        v1 = o_baby_split(phi, Fraction(3) ** j)
        v2 = o_baby_split(phi, Fraction(3) ** (j + 1))
        b_fit = v2 - v1
        a_fit = v1 - b_fit * j
        worst = max(worst, abs(b_fit - germ.b), abs(a_fit - germ.a))
    for _ in range(50):
        inp = random_baby_data(ctx, "inert", rng)
        germ, _ = nonsplit_germ_data(inp)
        j = germ.level + 2 - germ.level % 2  # even probe
        ve = o_baby_nonsplit(inp, Fraction(3) ** j)
        vo = o_baby_nonsplit(inp, Fraction(3) ** (j + 1))
        worst = max(worst, abs((ve + vo) / 2 - germ.a), abs((ve - vo) / 2 - germ.b))
    elapsed = time.time() - t0
    report("criterion 3 (baby germ formulas, 50+50)", worst <= 1e-9,
           f"max germ residual {worst:.2e} <= 1e-9", elapsed)


def test_criterion_4_fourier_baby():
    """O_xi(Phi-hat) = G(O_.(Phi))(xi) on |val| <= 4, both sides independent."""
    t0 = time.time()
    ctx = LocalFieldCtx(3)
    rng = random.Random(44)
    worst = 0.0
    for i in range(50):
        kind = "split" if i % 2 == 0 else "inert"
        phi = random_baby_data(ctx, kind, rng)
        sx = sx_from_baby(phi, kind)
        phihat = fourier_baby(phi, kind)
        for v in range(-4, 5):
            for u in (1, 2):
                xi = Fraction(u) * Fraction(3) ** v
                lhs = baby_orbital(kind, phihat, xi)
                rhs = g_value_SX(sx, xi)
                worst = max(worst, abs(lhs - rhs))
    elapsed = time.time() - t0
    report("criterion 4 (Prop Fourier-baby dual path, 50 Phi)", worst <= 1e-9,
           f"max |O(Phi-hat) - G f| {worst:.2e} <= 1e-9", elapsed)
    assert elapsed < 120 * 3


def test_criterion_5_kuznetsov_oracles():
    """o_kuz_direct == o_kuz_closed on m <= 4, |val| <= 4, p in {3,5}.

    This run adjudicates the m-index of the displayed closed form: the
    Kloosterman case belongs to m = 0 (the m = 1 reading fails against the
    direct engine, which the last block checks explicitly)."""
    t0 = time.time()
    worst = 0.0
    for p in (3, 5):
        ctx = LocalFieldCtx(p)
        y0 = KSection.basic()
        for m in range(5):
            sec = KSection.of({m: 1.0})
            for v in range(-4, 5):
                for u in (1, 2):
                    xi = Fraction(u) * Fraction(p) ** v
                    worst = max(worst, abs(o_kuz_closed(ctx, m, xi)
                                           - o_kuz_direct(ctx, sec, y0, xi)))
    # adjudication: at m=1 and |xi| >= q^3 the direct engine vanishes while the
    # "m=1" reading of the closed form would produce the Kloosterman value
    ctx = LocalFieldCtx(3)
    from padicorb.orbital import kloosterman

    separated = False
    for u in (1, 2, 4, 5, 7, 8):
        xi = Fraction(u, 81)
        direct_m1 = o_kuz_direct(ctx, KSection.of({1: 1.0}), KSection.basic(), xi)
        assert abs(direct_m1) < 1e-14
        if abs(kloosterman(ctx, xi)) > 0.1:
            separated = True
    assert separated, "no probe separated the two readings"
    elapsed = time.time() - t0
    report("criterion 5 (Kuznetsov oracle equivalence + m=0 adjudication)",
           worst <= 1e-10, f"max |direct - closed| {worst:.2e} <= 1e-10", elapsed)
    assert elapsed < 60 * 3


def test_criterion_6_lemma_blue():
    """Closed-form f_s^0 vs the truncated H_s series at s = 1, 3/2, both kinds."""
    t0 = time.time()
    ctx = LocalFieldCtx(3)
    worst = 0.0
    for kind in ("split", "inert"):
        for s in (1.0, 1.5):
            fw = basic_fW0(ctx, kind, s)
            for v in range(-4, 5):
                for u in (1, 2):
                    xi = Fraction(u) * Fraction(3) ** v
                    worst = max(worst, abs(fw(xi) - fW_series_value(ctx, kind, s, xi)))
    elapsed = time.time() - t0
    report("criterion 6 (Lemma blue closed form vs series)", worst <= 1e-8,
           f"max residual {worst:.2e} <= 1e-8", elapsed)


def test_criterion_7_whittaker_unfolding():
    """Truncated torus integral of W_pi = Vol * L(pi, 1/2+s) at s=1, 20 params."""
    t0 = time.time()
    ctx = LocalFieldCtx(3)
    rng = random.Random(77)
    worst = 0.0
    for _ in range(20):
        import cmath

        r = rng.choice([1.0, 1.0, 0.9, 1.1])
        alpha = r * cmath.exp(2j * math.pi * rng.random())
        lhs, rhs = whittaker_unfolding_check(ctx, alpha, 1.0)
        worst = max(worst, abs(lhs - rhs))
    elapsed = time.time() - t0
    report("criterion 7 (Whittaker unfolding, 20 Satake params)", worst <= 1e-8,
           f"max residual {worst:.2e} <= 1e-8", elapsed)


def test_criterion_8_matching():
    """Matching: 50 seeded random SZ elements per kind at p=3."""
    t0 = time.time()
    results = []
    ctx = LocalFieldCtx(3)
    for kind in ("split", "inert"):
        rep = verify_matching(ctx, kind, samples=50, seed=2024, tolerance=1e-8)
        results.append(rep)
    worst_shape = max(r.max_shape_residual for r in results)
    worst_ip = max(r.max_ip_error for r in results)
    passed = all(r.passed for r in results)
    elapsed = time.time() - t0
    report("criterion 8 (matching theorem, 50 per kind)", passed,
           f"shape {worst_shape:.2e} <= 1e-8, inner product {worst_ip:.2e} <= 1e-8",
           elapsed)
    assert elapsed < 300 * 3


@pytest.mark.parametrize("p", [3, 5])
def test_criterion_9_fundamental_lemma(p):
    """FL: h in {h0, h1, h2, 1_{K pi K}}, both kinds, val in [-4,4], const = 1."""
    t0 = time.time()
    ctx = LocalFieldCtx(p)
    hs = {
        "h0": HeckeElt.basis(0),
        "h1": HeckeElt.basis(1),
        "h2": HeckeElt.basis(2),
        "1_KpiK": coset_basis_to_hecke(ctx, {1: 1.0}),
    }
    worst = 0.0
    worst_const = 0.0
    ok = True
    for kind in ("split", "inert"):
        for name, h in hs.items():
            rep = verify_fl(ctx, kind, h, window=(-4, 4), tolerance=1e-8)
            worst = max(worst, rep.max_error)
            worst_const = max(worst_const, abs(rep.fitted_constant - 1))
            ok = ok and rep.passed
            print(f"    fl p={p} {kind:5s} {name:7s} maxErr={rep.max_error:.2e} "
                  f"|const-1|={abs(rep.fitted_constant - 1):.2e}")
    elapsed = time.time() - t0
    report(f"criterion 9 (fundamental lemma, p={p})", ok,
           f"max error {worst:.2e} <= 1e-8, |const-1| {worst_const:.2e} <= 1e-8",
           elapsed)
    budget = 600 if p == 3 else 3600
    assert elapsed < budget


def test_criterion_10_satake_clebsch_gordan():
    """S(h * h') = S(h) S(h') with brute-force convolution, m <= 3 at p = 3."""
    t0 = time.time()
    ctx = LocalFieldCtx(3)
    worst = 0.0
    for m1 in range(4):
        for m2 in range(4):
            conv = brute_convolution(ctx, m1, m2)
            lhs = satake_transform(ctx, conv)
            rhs = satake_transform(ctx, {m1: 1.0}).mul(satake_transform(ctx, {m2: 1.0}))
            for alpha in (1.3, 0.7 + 0.4j, -1.1, 0.5j, 2.0):
                a, b = lhs.eval(alpha), rhs.eval(alpha)
                worst = max(worst, abs(a - b) / max(1.0, abs(b)))
    elapsed = time.time() - t0
    report("criterion 10 (Satake/Clebsch-Gordan, m <= 3)", worst <= 1e-9,
           f"max residual {worst:.2e} <= 1e-9", elapsed)
    assert elapsed < 120 * 3
