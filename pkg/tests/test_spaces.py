import random
from fractions import Fraction

import pytest

from padicorb.errors import DomainError, KindError, WindowError
from padicorb.bruhat import BruhatFn, MellinCharacter, gamma_factor
from padicorb.localfield import QuadExt, psi_eval_frac
from padicorb.spaces import (
    Germ,
    KLTail,
    SWElem,
    SXElem,
    SZElem,
    element_from_json,
    element_to_json,
    extract_O0,
    extract_O01,
    extract_O0kappa,
    extract_Ou,
    g_transform_SX,
    g_value_SX,
    iota_eval,
    iota_window,
    ip_kuz,
    ip_torus,
    kloosterman_germ,
    oscillatory_shell_integral,
    shell_psi_integral,
    sw_extract_O0_delta,
    sw_extract_second,
    sx_mellin,
)

import math


def test_shell_psi_integral_closed_form(ctx3):
    # against direct unit sums
    for k in (-2, -1, 0, 1, 2):
        for a in (Fraction(1), Fraction(1, 3), Fraction(1, 27), Fraction(9), Fraction(2, 9)):
            mod = 3 ** 6
            units = [u for u in range(1, mod) if u % 3]
            brute = sum(psi_eval_frac(ctx3, a * Fraction(u) * Fraction(3) ** (-k))
                        for u in units) / len(units) * (1 - 1 / 3) * 3.0 ** k
            assert abs(shell_psi_integral(ctx3, a, k) - brute) < 1e-10


def test_oscillatory_examples(ctx3):
    q = 3
    # a = b = 0: shell volume
    for k in (-1, 0, 2):
        got = oscillatory_shell_integral(ctx3, 0, 0, k)
        assert abs(got - q ** k * (1 - 1 / q)) < 1e-12
    # b = 0, |a| q^k >= q^2: cancellation
    assert oscillatory_shell_integral(ctx3, Fraction(1, 9), 0, 0) == 0
    assert oscillatory_shell_integral(ctx3, Fraction(1, 3), 0, 1) == 0
    # Kloosterman shell: matches the KL germ normal form
    xi = Fraction(7, 81)
    got = oscillatory_shell_integral(ctx3, -1, xi, 2)
    assert abs(got - kloosterman_germ(ctx3, xi)) < 1e-14


def test_oscillatory_vs_brute(ctx3):
    rng = random.Random(5)
    for _ in range(40):
        va, vb = rng.randrange(-3, 2), rng.randrange(-3, 2)
        au = rng.choice([1, 2, 4, 5, 7, 8])
        bu = rng.choice([1, 2, 4, 5])
        a = Fraction(au) * Fraction(3) ** va
        b = Fraction(bu) * Fraction(3) ** vb
        m = max(1, -va, -vb) + 1
        mod = 3 ** m
        units = [u for u in range(1, mod) if u % 3]
        brute = sum(psi_eval_frac(ctx3, a * u + b / Fraction(u)) for u in units)
        brute = brute / len(units) * (1 - 1 / 3)
        got = oscillatory_shell_integral(ctx3, a, b, 0)
        assert abs(got - brute) < 1e-10


def test_eta_twist_factor(ctx3):
    a, b = Fraction(1, 3), Fraction(2)
    for k in (-1, 1, 3):
        plain = oscillatory_shell_integral(ctx3, a, b, k)
        tw = oscillatory_shell_integral(ctx3, a, b, k, twist="eta")
        assert abs(tw - (-1) ** (k % 2) * plain) < 1e-14


def test_kloosterman_germ_domain(ctx3):
    with pytest.raises(DomainError):
        kloosterman_germ(ctx3, Fraction(1))
    assert kloosterman_germ(ctx3, Fraction(1, 3)) == 0  # odd shell


def test_iota_involution_and_examples(ctx3, ext3i, ext3s):
    rng = random.Random(1)
    units = [n for n in range(1, 40) if n % 3]
    atoms = [(Fraction(rng.choice(units)), 2, complex(rng.gauss(0, 1))) for _ in range(4)]
    atoms += [(Fraction(1, 3), 2, 1.5), (Fraction(7, 9), 3, -0.5j)]
    f = BruhatFn.from_atoms(ctx3, "F", atoms)
    for ext in (ext3i, ext3s):
        ff = iota_window(ext, iota_window(ext, f))
        diff = (ff - f).canonicalize()
        assert max((abs(a.coef) for a in diff.atoms), default=0.0) < 1e-12
        # pointwise meaning
        for _ in range(20):
            x = Fraction(rng.randrange(1, 50), 3 ** rng.randrange(0, 3))
            got = iota_window(ext, f).eval(x)
            want = iota_eval(ext, f.eval, x)
            assert abs(got - want) < 1e-12
    # unit shell fixed for the indicator of o^x
    units = BruhatFn.from_atoms(ctx3, "F", [(1, 1, 1.0), (2, 1, 1.0)])
    im = iota_window(ext3s, units)
    for x in (Fraction(1), Fraction(2), Fraction(5)):
        assert abs(im.eval(x) - units.eval(x)) < 1e-12
    # p o^x maps to eta * q^{-1} on the |xi| = q shell
    pshell = BruhatFn.from_atoms(ctx3, "F", [(3, 2, 1.0), (6, 2, 1.0)])
    im2 = iota_window(ext3i, pshell)
    assert abs(im2.eval(Fraction(1, 3)) - (-1.0 / 3)) < 1e-12
    assert im2.eval(Fraction(3)) == 0


def test_g_transform_zero(ctx3):
    z = SXElem(ctx3, "split", BruhatFn.zero(ctx3, "F"), Germ(0, 0, 1))
    out = g_transform_SX(z)
    assert out.window.is_zero()
    assert abs(out.germ0.a) < 1e-14 and abs(out.germ0.b) < 1e-14


def test_g_transform_selfdual_orbital(ctx3):
    beta = 1 - Fraction(1, 3)
    f = SXElem(ctx3, "split", BruhatFn.zero(ctx3, "F"), Germ(float(beta), float(beta), 0))
    for v in range(-3, 6):
        for u in (1, 2):
            xi = Fraction(u) * Fraction(3) ** v
            want = (v + 1) * float(beta) if v >= 0 else 0.0
            assert abs(g_value_SX(f, xi) - want) < 1e-12


def test_g_transform_shape_closure_and_bijectivity(ctx3):
    """G is a bijection on S(X); applying it twice composes with the parity
    action on lifts, which is trivial on orbital integrals (N(-z) = N(z),
    eta(-1) = +1 for the unramified eta), so G^2 = id."""
    for kind in ("split", "inert"):
        f = SXElem(
            ctx3, kind,
            BruhatFn.from_atoms(ctx3, "F", [(Fraction(1, 3), 2, 0.4 + 0.1j), (2, 1, -0.8)]),
            Germ(0.3, -0.2 if kind == "split" else 0.2j, 1),
        )
        gf = g_transform_SX(f)
        g2 = g_transform_SX(gf)
        for v in range(-2, 5):
            for u in (1, 2):
                xi = Fraction(u) * Fraction(3) ** v
                assert abs(g2.eval(xi) - f.eval(xi)) < 1e-9


def test_mellin_conjugation_property(ctx3):
    """Sampled identity: (G f)-check(chi) = gamma(chi,1/2)gamma(chi eta,1/2) f-check(chi^-1)."""
    q = 3
    rng = random.Random(8)
    for kind in ("split", "inert"):
        ext = QuadExt(ctx3, kind)
        units = [n for n in range(1, 30) if n % 3]
        for trial in range(3):
            atoms = [(Fraction(rng.choice(units), 3 ** rng.randrange(0, 2)),
                      rng.randrange(1, 3), complex(rng.gauss(0, 1), rng.gauss(0, 1)))
                     for _ in range(3)]
            germ = Germ(complex(rng.gauss(0, 1)), complex(rng.gauss(0, 1)), 1)
            f = SXElem(ctx3, kind, BruhatFn.from_atoms(ctx3, "F", atoms), germ)
            gf = g_transform_SX(f)
            for tag in ("trivial", "eta"):
                chi = MellinCharacter(ext, tag)
                m_f = sx_mellin(f, chi)
                m_gf = sx_mellin(gf, chi)
                g1 = gamma_factor(chi)
                g2 = gamma_factor(chi.twist_eta())
                for t in (0.31, 0.62, 0.45 + 0.3j, 1.6):
                    lhs = m_gf.eval(t)
                    rhs = g1.eval(q ** -0.5 / t) * g2.eval(q ** -0.5 / t) * m_f.eval(1 / t)
                    assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(lhs), abs(rhs))


def test_extractors(ctx3):
    beta = 2 / 3
    f = SXElem(ctx3, "split", BruhatFn.zero(ctx3, "F"), Germ(beta, beta, 0))
    assert abs(extract_O0(f) - beta / math.log(3)) < 1e-12
    assert abs(extract_Ou(f) - beta) < 1e-12
    with pytest.raises(KindError):
        extract_O01(f)
    fi = SXElem(ctx3, "inert", BruhatFn.zero(ctx3, "F"), Germ(0.25, -0.5, 0))
    assert extract_O01(fi) == 0.25
    assert extract_O0kappa(fi) == -0.5
    with pytest.raises(KindError):
        extract_O0(fi)
    # pure window: zero germ coefficients
    w = SXElem(ctx3, "split", BruhatFn.from_atoms(ctx3, "F", [(1, 1, 1.0)]), Germ(0, 0, 2))
    assert extract_O0(w) == 0 and extract_Ou(w) == 0


def test_extractors_linear(ctx3):
    g1 = Germ(0.5, 1.5, 1)
    g2 = Germ(-0.25j, 0.75, 1)
    f1 = SXElem(ctx3, "split", BruhatFn.zero(ctx3, "F"), g1)
    f2 = SXElem(ctx3, "split", BruhatFn.zero(ctx3, "F"), g2)
    s = SXElem(ctx3, "split", BruhatFn.zero(ctx3, "F"),
               Germ(g1.a + g2.a, g1.b + g2.b, 1))
    assert abs(extract_O0(s) - (extract_O0(f1) + extract_O0(f2))) < 1e-12
    assert abs(extract_Ou(s) - (extract_Ou(f1) + extract_Ou(f2))) < 1e-12


def test_ip_torus_and_kuz(ctx3):
    f = SZElem(ctx3, "split", BruhatFn.zero(ctx3, "F"), Germ(0, 0, 2), Germ(1.0, 2.0, 2))
    assert abs(ip_torus(f) - 2.0 / math.log(3)) < 1e-12
    fi = SZElem(ctx3, "inert", BruhatFn.zero(ctx3, "F"), Germ(0, 0, 2), Germ(1.0, 2.0, 2))
    assert ip_torus(fi) == 2.0
    w = SWElem(ctx3, "split", 0.0, BruhatFn.zero(ctx3, "F"), (0, 0, 2), KLTail(3.5j, 4))
    assert ip_kuz(w) == 3.5j
    w0 = SWElem(ctx3, "split", 0.0, BruhatFn.zero(ctx3, "F"), (0, 0, 2), KLTail(0, 4))
    assert ip_kuz(w0) == 0


def test_sw_zero_germ_relation(ctx3):
    """O~_{0,delta^{1/2}}-type extractors equal the baby extractors of |.|^{-1} f."""
    c1, c2 = 0.7, -0.3
    w = SWElem(ctx3, "split", 0.0, BruhatFn.zero(ctx3, "F"), (c1, c2, 2), KLTail(0, 5))
    assert abs(sw_extract_O0_delta(w) - c1 / math.log(3)) < 1e-12
    assert sw_extract_second(w) == c2
    # representation faithfulness on the germ region
    for v in (3, 4):
        got = w.eval(Fraction(3) ** v)
        want = 3.0 ** (-v) * (c1 * v + c2)
        assert abs(got - want) < 1e-12
    wi = SWElem(ctx3, "inert", 0.0, BruhatFn.zero(ctx3, "F"), (c1, c2, 2), KLTail(0, 5))
    for v in (3, 4):
        got = wi.eval(Fraction(3) ** v)
        want = 3.0 ** (-v) * (c1 + c2 * (-1) ** v)
        assert abs(got - want) < 1e-12


def test_serialization_roundtrip(ctx3):
    f = SXElem(ctx3, "split",
               BruhatFn.from_atoms(ctx3, "F", [(Fraction(2, 3), 2, 1 + 2j)]),
               Germ(0.5, -0.25, 2))
    doc = element_to_json(f)
    back = element_from_json(ctx3, doc)
    for x in (Fraction(2, 3), Fraction(1), Fraction(27)):
        assert abs(back.eval(x) - f.eval(x)) < 1e-12
    z = SZElem(ctx3, "inert", BruhatFn.from_atoms(ctx3, "F", [(1, 1, 0.5)]),
               Germ(0.1, 0.2, 2), Germ(-0.3, 0.4j, 3))
    z2 = element_from_json(ctx3, element_to_json(z))
    for x in (Fraction(1), Fraction(9), Fraction(-1) + Fraction(27)):
        assert abs(z2.eval(x) - z.eval(x)) < 1e-12
    w = SWElem(ctx3, "split", 0.0, BruhatFn.from_atoms(ctx3, "F", [(1, 1, 2.0)]),
               (0.5, 0.6, 3), KLTail(1.25, 4))
    w2 = element_from_json(ctx3, element_to_json(w))
    for x in (Fraction(1), Fraction(81), Fraction(7, 81)):
        assert abs(w2.eval(x) - w.eval(x)) < 1e-12
    import json
    d = json.loads(element_to_json(w))
    assert d["type"] == "SW" and d["infTail"]["tag"] == "kloosterman"
    assert all(len(a) == 5 for a in d["atoms"])


def test_serialization_golden(ctx3):
    """Frozen wire format: atoms as [centerNumerator, centerValuation, level,
    re, im], germs as tagged objects (schema drift guard)."""
    z = SZElem(ctx3, "inert",
               BruhatFn.from_atoms(ctx3, "F", [(Fraction(2, 3), 1, 0.5),
                                               (2, 2, 1 - 0.25j)]),
               Germ(0.125, -0.5, 2), Germ(0.75, 0.25, 3))
    golden = (
        '{"atoms": [[11, -1, 2, 0.5, 0.0], [2, 0, 2, 1.0, -0.25], '
        '[2, -1, 2, 0.5, 0.0], [20, -1, 2, 0.5, 0.0]], '
        '"germ0": {"a": [0.125, 0.0], "b": [-0.5, 0.0], "level": 2, "tag": "germ"}, '
        '"germAtMinus1": {"a": [0.75, 0.0], "b": [0.25, 0.0], "level": 3, "tag": "germ"}, '
        '"kind": "inert", "p": 3, "type": "SZ"}'
    )
    assert element_to_json(z) == golden


def test_window_error_on_uncertified_range(ctx3):
    from padicorb.orbital import hecke_apply_Z
    from padicorb.groups import HeckeElt
    from padicorb.spaces import g_transform_Z_to_W

    fz = hecke_apply_Z(ctx3, "split", HeckeElt.basis(0))
    with pytest.raises(WindowError):
        g_transform_Z_to_W(fz, window_vals=(-50, 2))
