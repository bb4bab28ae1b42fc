"""Window-plus-germ models of S(X), S(Z), S(W^s) and the transform G = F.iota.F.

The engine never truncates: the Fourier transform of a window atom and of a
germ tail are closed forms, so G f evaluates at any regular point as a finite
sum of shell integrals

    S(a, k)    = int_{|y|=q^k} psi(a y) dy,
    K(a, b, k) = int_{|y|=q^k} psi(a y + b/y) dy,

with explicit vanishing bounds (the truncation bound of the matching proof).
Output windows and germ depths are certified from the input data and re-checked
by residual fits; values outside a certified window raise WindowError.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    DomainError,
    KindError,
    RepresentationError,
    UnsupportedAtomError,
    WindowError,
)
from .bruhat import Atom, BruhatFn, MellinCharacter, mellin_component
from .localfield import (
    INF,
    LocalFieldCtx,
    PadicScalar,
    QuadExt,
    exact_fraction,
    rational_valuation,
)
from .rational import RationalFnT

# --- exact shell integrals ---------------------------------------------------------


from functools import lru_cache


@lru_cache(maxsize=1 << 18)
def _frac_unit_key(x: Fraction, p: int, v: int, m: int) -> int:
    mod = p ** m
    unit = x / Fraction(p) ** v
    return unit.numerator * pow(unit.denominator, -1, mod) % mod


def _val_and_unit_key(ctx: LocalFieldCtx, x, m: int) -> tuple[int, int]:
    """(valuation, unit residue mod p^m) of a nonzero exact scalar."""
    if isinstance(x, PadicScalar):
        return x.valuation(), x.unit_residue(m) if m > 0 else 0
    xf = Fraction(x)
    v = rational_valuation(xf, ctx.p)
    if v >= INF:
        return INF, 0
    if m == 0:
        return v, 0
    return v, _frac_unit_key(xf, ctx.p, v, m)


def shell_psi_integral(ctx: LocalFieldCtx, a, k: int) -> float:
    """S(a, k) = int_{|y|=q^k} psi(a y) dy; depends on a through val(a) only."""
    if isinstance(a, PadicScalar):
        va = a.valuation() if not a.is_exact_zero() else INF
    else:
        va = rational_valuation(Fraction(a), ctx.p)
    q = ctx.q
    out = 0.0
    if va >= k:
        out += float(q) ** k
    if va >= k - 1:
        out -= float(q) ** (k - 1)
    return out


_units_cache: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
_osc_cache: dict[tuple, complex] = {}


def _units(p: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    key = (p, m)
    if key not in _units_cache:
        mod = p ** m
        u = np.array([x for x in range(1, mod) if x % p != 0], dtype=np.int64)
        uinv = np.array([pow(int(x), -1, mod) for x in u], dtype=np.int64)
        _units_cache[key] = (u, uinv)
    return _units_cache[key]


def oscillatory_shell_integral(ctx: LocalFieldCtx, a, b, k: int,
                               twist: str = "trivial") -> complex:
    """K(a,b,k) = int_{|y|=q^k} twist(y) psi(a y + b/y) dy, exactly.

    The integrand is constant on cosets of 1 + p^m o^x for the minimal
    sufficient m; the integral is the corresponding finite exponential sum.
    Vanishing bound: zero when max(|A|, |B|) >= q^2 with |A| != |B|, where
    A = a pi^{-k}, B = b pi^{k} are the scaled parameters on the unit shell.
    """
    p, q = ctx.p, ctx.q
    if isinstance(a, PadicScalar) and a.is_exact_zero():
        va = INF
    else:
        va = (a.valuation() if isinstance(a, PadicScalar)
              else rational_valuation(Fraction(a), p))
    if isinstance(b, PadicScalar) and b.is_exact_zero():
        vb = INF
    else:
        vb = (b.valuation() if isinstance(b, PadicScalar)
              else rational_valuation(Fraction(b), p))
    tw = -1.0 if (twist == "eta" and k % 2) else 1.0
    vA = (va - k) if va < INF else INF
    vB = (vb + k) if vb < INF else INF
    m = max(0, -vA if vA < INF else 0, -vB if vB < INF else 0)
    if m == 0:
        return tw * float(q) ** k * float(ctx.vol_Ox)
    if vA != vB and min(vA, vB) <= -2:
        return 0j
    mod = p ** m
    _, au = _val_and_unit_key(ctx, a, m) if vA < INF else (INF, 0)
    _, bu = _val_and_unit_key(ctx, b, m) if vB < INF else (INF, 0)
    key = (p, m, vA if vA < INF else "z", au, vB if vB < INF else "z", bu)
    unit_integral = _osc_cache.get(key)
    if unit_integral is None:
        u, uinv = _units(p, m)
        t = np.zeros_like(u)
        if vA < INF:
            t = (t + (au * p ** (vA + m) % mod) * u) % mod
        if vB < INF:
            t = (t + (bu * p ** (vB + m) % mod) * uinv) % mod
        unit_integral = complex(np.exp(2j * np.pi * t / mod).sum()) / mod
        _osc_cache[key] = unit_integral
    return tw * float(q) ** k * unit_integral


# --- germ data and their Fourier transforms ---------------------------------------


@dataclass(frozen=True)
class Germ:
    """f(x) = a + b*val(x) (split) or a + b*eta(x) (inert) on val(x) >= level."""

    a: complex
    b: complex
    level: int

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def eval(self, kind: str, v: int) -> complex:
        if v < self.level:
            raise WindowError("point outside the germ region")
        if kind == "split":
            return self.a + self.b * v
        return self.a + self.b * (-1) ** v


@dataclass(frozen=True)
class _GermTransform:
    """F(germ) is shellwise constant: `const` for val z >= -L, and the pure
    tail c_tail * sigma^k q^k for val z <= -(L+1), sigma = +1/-1 split/inert."""

    const: complex
    c_tail: complex
    L: int

    def at(self, k: int, sigma: int, q: int) -> complex:
        if k >= -self.L:
            return self.const
        return self.c_tail * (sigma ** (k % 2)) * float(q) ** k


def _germ_transform(ctx: LocalFieldCtx, kind: str, g: Germ) -> _GermTransform:
    q = ctx.q
    L = g.level
    if kind == "split":
        const = g.a * float(q) ** (-L) + g.b * (
            L * float(q) ** (-L) + float(q) ** (-(L + 1)) / float(ctx.vol_Ox)
        )
        c_tail = g.b / float(ctx.vol_Ox)
    else:
        const = g.a * float(q) ** (-L) + g.b * (
            (-1) ** L * float(q) ** (-L)
            + 2 * (-1) ** (L + 1) * float(q) ** (-(L + 1)) / (1 + 1 / q)
        )
        c_tail = 2 * g.b / (1 + 1 / q)
    return _GermTransform(const, c_tail, L)


# --- elements ----------------------------------------------------------------------


def _check_kind(kind: str):
    if kind not in ("split", "inert"):
        raise KindError(f"kind must be split or inert, got {kind!r}")


@dataclass(frozen=True)
class SXElem:
    """Element of S(X): window on F^x plus the germ at 0."""

    ctx: LocalFieldCtx
    kind: str
    window: BruhatFn
    germ0: Germ

    def __post_init__(self):
        _check_kind(self.kind)

    def eval(self, xi) -> complex:
        v = rational_valuation(exact_fraction(xi), self.ctx.p)
        if v >= INF:
            raise DomainError("S(X) elements live on F^x")
        if v >= self.germ0.level:
            return self.germ0.eval(self.kind, v) + self.window.eval(xi)
        return self.window.eval(xi)

    def atom_triples(self) -> list[tuple[Fraction, int, complex]]:
        return [(a.center[0], a.level, a.coef) for a in self.window.atoms]


@dataclass(frozen=True)
class SZElem:
    """Element of S(Z): window on F minus {0,-1}, germs at 0 and at -1.

    The germ at -1 is stored in the local coordinate zeta = xi + 1."""

    ctx: LocalFieldCtx
    kind: str
    window: BruhatFn
    germ0: Germ
    germ_m1: Germ

    def __post_init__(self):
        _check_kind(self.kind)

    def eval(self, xi) -> complex:
        xi = exact_fraction(xi)
        v = rational_valuation(xi, self.ctx.p)
        vz = rational_valuation(xi + 1, self.ctx.p)
        if v >= INF or vz >= INF:
            raise DomainError("irregular point")
        out = self.window.eval(xi)
        if v >= self.germ0.level:
            out += self.germ0.eval(self.kind, v)
        if vz >= self.germ_m1.level:
            out += self.germ_m1.eval(self.kind, vz)
        return out

    def atom_triples(self) -> list[tuple[Fraction, int, complex]]:
        return [(a.center[0], a.level, a.coef) for a in self.window.atoms]


@dataclass(frozen=True)
class KLTail:
    """C * KL(xi) for |xi| >= q^M, KL the Kloosterman germ at infinity."""

    C: complex
    M: int


@dataclass(frozen=True)
class SWElem:
    """Element of S(W^s): window, the |xi|^{s+1}-weighted germ at 0, KL tail.

    split zero germ: |xi|^{s+1} (c1*val(xi) + c2);
    inert zero germ: |xi|^{s+1} (c1 + c2*eta(xi)).
    """

    ctx: LocalFieldCtx
    kind: str
    s: complex
    window: BruhatFn
    zero_germ: tuple[complex, complex, int]  # (c1, c2, level)
    inf_tail: KLTail

    def __post_init__(self):
        _check_kind(self.kind)

    def eval(self, xi) -> complex:
        xi = exact_fraction(xi)
        v = rational_valuation(xi, self.ctx.p)
        if v >= INF:
            raise DomainError("S(W) elements live on F^x")
        out = self.window.eval(xi)
        c1, c2, L = self.zero_germ
        if v >= L:
            w = complex(self.ctx.q) ** (-v * (self.s + 1))
            if self.kind == "split":
                out += w * (c1 * v + c2)
            else:
                out += w * (c1 + c2 * (-1) ** v)
        if v <= -self.inf_tail.M:
            out += self.inf_tail.C * kloosterman_germ(self.ctx, xi)
        return out


def kloosterman_germ(ctx: LocalFieldCtx, xi) -> complex:
    """KL(xi) = int_{|x|^2=|xi|} psi(xi/x - x) dx; zero on odd shells."""
    xi = exact_fraction(xi)
    v = rational_valuation(xi, ctx.p)
    if v >= 0:
        raise DomainError("the Kloosterman germ lives on |xi| > 1")
    if v % 2:
        return 0j
    return oscillatory_shell_integral(ctx, -1, xi, -v // 2)


# --- iota --------------------------------------------------------------------------


def iota_window(ext: QuadExt, f: BruhatFn) -> BruhatFn:
    """iota(f)(x) = eta(x)|x|^{-1} f(1/x) for a window away from 0 (exact)."""
    if f.domain != "F":
        raise DomainError("iota acts on functions on F^x")
    atoms = []
    for a in f.canonicalize().atoms:
        c = a.center[0]
        vc = rational_valuation(c, f.ctx.p)
        if vc >= a.level:
            raise UnsupportedAtomError("window atom touches 0; iota needs F^x support")
        # the inverse of c + p^n o (n > val c) is 1/c + p^{n - 2 val c} o,
        # where |x|^{-1} = q^{-val c} and eta is constant on the shell
        w = a.coef * ext.eta_of_val(vc) * float(Fraction(f.ctx.q) ** (-vc))
        atoms.append((1 / c, a.level - 2 * vc, w))
    return BruhatFn.from_atoms(f.ctx, "F", atoms)


def iota_eval(ext: QuadExt, f_eval, xi) -> complex:
    xi = exact_fraction(xi)
    v = rational_valuation(xi, ext.ctx.p)
    if v >= INF:
        raise DomainError("iota at 0")
    return ext.eta_of_val(v) * float(Fraction(ext.ctx.q) ** v) * f_eval(1 / xi)


# --- the transform engine ----------------------------------------------------------


@dataclass(frozen=True)
class _FData:
    """Closed-form description of F = fourier(f) used by the G engine."""

    atoms: tuple[tuple[Fraction, int, int, complex], ...]  # (center, val c, level, coef)
    g0: _GermTransform | None
    g1: _GermTransform | None  # modulated by psi(z): the germ at -1


def _fdata(ctx: LocalFieldCtx, kind: str, atoms, germ0: Germ | None,
           germ_m1: Germ | None) -> _FData:
    packed = []
    for (c, n, w) in atoms:
        c = Fraction(c)
        vc = rational_valuation(c, ctx.p)
        packed.append((c, vc, int(n), complex(w)))
    g0 = _germ_transform(ctx, kind, germ0) if germ0 and not germ0.is_zero() else None
    g1 = _germ_transform(ctx, kind, germ_m1) if germ_m1 and not germ_m1.is_zero() else None
    return _FData(tuple(packed), g0, g1)


def _g_value(ctx: LocalFieldCtx, kind: str, fd: _FData, xi: Fraction,
             stats: dict | None = None) -> complex:
    """G f(xi) = (F . iota . F f)(xi) as a finite exact sum.

    When `stats` is given, stats["xi_level"] records how many digits of the
    unit of xi the value actually consumed (certified atom level for windows).
    """
    xi = exact_fraction(xi)
    q = ctx.q
    vxi = rational_valuation(xi, ctx.p)
    if vxi >= INF:
        raise DomainError("G is evaluated on F^x")
    sigma = -1 if kind == "inert" else 1
    total = 0j

    def shell_sign(k: int) -> float:
        return -1.0 if (sigma < 0 and k % 2) else 1.0

    def K_eval(b, k: int) -> complex:
        # the unit of xi enters mod p^{-vA} when vA = vxi - k < 0
        if stats is not None:
            vA = vxi - k
            if vA < 0:
                stats["xi_level"] = max(stats.get("xi_level", 1), -vA)
        return oscillatory_shell_integral(ctx, -xi, b, k, twist="trivial")

    # window atoms: contributions q^{-n} K(-xi, -c, k) on shells k >= -n
    for (c, vc, n, w) in fd.atoms:
        ks = set()
        if c == 0:
            ks.update(range(-n, vxi + 2))
        else:
            ks.update(range(max(-n, -vc - 1), vxi + 2))
            if (vxi - vc) % 2 == 0:
                k0 = (vxi - vc) // 2
                if k0 >= -n:
                    ks.add(k0)
        piece = 0j
        for k in sorted(ks):
            kk = K_eval(-c, k)
            if kk != 0:
                piece += shell_sign(k) * float(q) ** (-k) * kk
        total += w * float(q) ** (-n) * piece

    # germ at 0: pure tail in closed form + the constant regime loop
    if fd.g0 is not None:
        K0 = -(fd.g0.L + 1)
        if vxi >= K0:
            total += fd.g0.c_tail * float(q) ** K0
        for k in range(-fd.g0.L, vxi + 2):
            s = shell_psi_integral(ctx, -xi, k)
            if s:
                total += shell_sign(k) * float(q) ** (-k) * fd.g0.const * s

    # germ at -1: psi(z)-modulated transform -> K(-xi, 1, k) weights
    if fd.g1 is not None:
        for k in range(-1, vxi + 2):
            g1k = fd.g1.at(k, sigma, q)
            kk = K_eval(1, k)
            if kk != 0:
                total += shell_sign(k) * float(q) ** (-k) * g1k * kk
        if vxi % 2 == 0 and vxi // 2 <= -2:
            k0 = vxi // 2
            g1k = fd.g1.at(k0, sigma, q)
            kk = K_eval(1, k0)
            total += shell_sign(k0) * float(q) ** (-k0) * g1k * kk
    if kind == "inert" and vxi % 2:
        # G carries the eta(xi) twist in the inert case: with the plain
        # composition F.iota.F the Mellin conjugation would land on eta*chi^-1
        # instead of chi^-1, contradicting the E-side transform (checked
        # against the torsor functional equation).
        total = -total
    return total


def _support_bound(fd: _FData) -> int:
    """All of G f vanishes on val(xi) < this bound."""
    bounds = []
    for (c, vc, n, w) in fd.atoms:
        if c == 0:
            bounds.append(-n - 1)
        else:
            bounds.append(min(max(-n, -vc - 1) - 1, vc - 2 * n))
    if fd.g0 is not None:
        bounds.append(-(fd.g0.L + 1))
    if fd.g1 is not None:
        bounds.append(-INF)  # the Kloosterman tail never dies
    return min(bounds, default=0)


def _germ_depth(fd: _FData) -> int:
    """val(xi) >= this depth puts G f exactly in germ form (a' + b' val/eta)."""
    depth = 2
    for (c, vc, n, w) in fd.atoms:
        depth = max(depth, vc + 2 * n + 2, -vc + 2, n + 2)
    if fd.g0 is not None:
        depth = max(depth, -fd.g0.L + 1)
    if fd.g1 is not None:
        depth = max(depth, fd.g1.L + 2, 2)
    return depth


def _fit_germ(ctx: LocalFieldCtx, kind: str, values: dict[int, complex],
              tol: float = 1e-9) -> Germ:
    """Fit a + b*val (split) or a + b*eta (inert) to exact deep-shell values."""
    vs = sorted(values)
    if len(vs) < 4:
        raise RepresentationError("need at least four shells to certify a germ fit")
    v0, v1 = vs[0], vs[1]
    if kind == "split":
        b = (values[v1] - values[v0]) / (v1 - v0)
        a = values[v0] - b * v0
    else:
        if (v1 - v0) % 2 == 0:
            raise RepresentationError("inert germ fit needs both parities")
        e0, e1 = (-1) ** v0, (-1) ** v1
        b = (values[v0] - values[v1]) / (e0 - e1)
        a = values[v0] - b * e0
    g = Germ(a, b, vs[0])
    scale = max(1.0, max(abs(x) for x in values.values()))
    for v in vs[2:]:
        pred = g.eval(kind, v)
        if abs(pred - values[v]) > tol * scale:
            raise RepresentationError(
                f"germ fit residual {abs(pred - values[v]):.2e} at val={v}"
            )
    return g


def _unit_reps(ctx: LocalFieldCtx, level: int) -> list[int]:
    """Unit representatives mod p^level (level >= 1)."""
    return [u for u in range(1, ctx.p ** level) if u % ctx.p != 0]


def g_transform_SX(f: SXElem, out_level: int | None = None) -> SXElem:
    """G f for f in S(X); output is again an S(X) element (shape closure)."""
    ctx, kind = f.ctx, f.kind
    fd = _fdata(ctx, kind, f.atom_triples(), f.germ0, None)
    vmin = _support_bound(fd)
    depth = _germ_depth(fd)

    # germ fit on four deep shells at two different units (constancy check)
    vals = {}
    for v in range(depth, depth + 4):
        x1 = _g_value(ctx, kind, fd, Fraction(ctx.p) ** v)
        x2 = _g_value(ctx, kind, fd, 2 * Fraction(ctx.p) ** v) if ctx.p > 2 else x1
        if abs(x1 - x2) > 1e-9 * max(1.0, abs(x1)):
            raise RepresentationError("germ region not unit-independent; depth bug")
        vals[v] = x1
    germ = _fit_germ(ctx, kind, vals)

    # window atoms by exact evaluation on unit cosets at the certified level
    atoms = []
    for v in range(vmin, depth):
        stats: dict = {}
        first = _g_value(ctx, kind, fd, Fraction(ctx.p) ** v, stats)
        level = out_level if out_level is not None else max(1, stats.get("xi_level", 1))
        for u in _unit_reps(ctx, level):
            x = Fraction(u) * Fraction(ctx.p) ** v
            w = first if u == 1 else _g_value(ctx, kind, fd, x)
            if abs(w) > 1e-12:
                atoms.append((x, v + level, w))
    window = BruhatFn.from_atoms(ctx, "F", atoms)
    out = SXElem(ctx, kind, window, Germ(germ.a, germ.b, depth))
    # representation guard: window+germ reproduces the engine at sample points
    for v in (vmin, depth - 1, depth + 1):
        x = Fraction(ctx.p) ** v
        got = out.eval(x)
        want = _g_value(ctx, kind, fd, x)
        if abs(got - want) > 1e-8 * max(1.0, abs(want)):
            raise RepresentationError("assembled S(X) element disagrees with the engine")
    return out


def g_value_SX(f: SXElem, xi) -> complex:
    """Pointwise G f(xi) without assembling the output element."""
    fd = _fdata(f.ctx, f.kind, f.atom_triples(), f.germ0, None)
    return _g_value(f.ctx, f.kind, fd, Fraction(xi))


def g_transform_Z_to_W(f: SZElem, window_vals: tuple[int, int] | None = None,
                       out_level: int | None = None) -> SWElem:
    """|.|G f in S(W) with s = 0: the matching transform S(Z) -> S(W)."""
    ctx, kind = f.ctx, f.kind
    fd = _fdata(ctx, kind, f.atom_triples(), f.germ0, f.germ_m1)
    q = ctx.q

    depth = _germ_depth(fd)
    vals = {}
    for v in range(depth, depth + 4):
        vals[v] = _g_value(ctx, kind, fd, Fraction(ctx.p) ** v)
    germ = _fit_germ(ctx, kind, vals)  # germ of G f (before the |xi| factor)
    if kind == "split":
        zero_germ = (germ.b, germ.a, depth)
    else:
        zero_germ = (germ.a, germ.b, depth)

    # Kloosterman tail: closed form from the -1 germ, certified on deep shells
    if kind == "split":
        C = f.germ_m1.b / float(ctx.vol_Ox)
    else:
        C = 2 * f.germ_m1.b / (1 + 1 / q)
    atom_bound = min(
        (min(max(-n, -vc - 1) - 1, vc - 2 * n) if c != 0 else -n - 1
         for (c, vc, n, w) in fd.atoms),
        default=0,
    )
    g0_bound = -(fd.g0.L + 2) if fd.g0 is not None else 0
    tail_val = min(atom_bound - 1, g0_bound, -2 * (fd.g1.L + 1) if fd.g1 else -4, -4)
    for v in (tail_val, tail_val - 2):
        xi = Fraction(1, ctx.p ** (-v))
        got = float(q) ** (-v) * _g_value(ctx, kind, fd, xi)
        want = C * kloosterman_germ(ctx, xi) if v % 2 == 0 else 0j
        if abs(got - want) > 1e-8 * max(1.0, abs(want)):
            raise RepresentationError("Kloosterman tail mismatch; normalization bug")
    tail = KLTail(C, -tail_val)

    # window on the requested valuation range
    lo, hi = window_vals if window_vals is not None else (tail_val + 1, depth - 1)
    if lo <= tail_val or hi >= depth:
        raise WindowError(
            f"certified window is ({tail_val}, {depth}); requested [{lo}, {hi}]"
        )
    atoms = []
    for v in range(lo, hi + 1):
        stats: dict = {}
        first = float(q) ** (-v) * _g_value(ctx, kind, fd, Fraction(ctx.p) ** v, stats)
        level = out_level if out_level is not None else max(1, stats.get("xi_level", 1))
        for u in _unit_reps(ctx, level):
            x = Fraction(u) * Fraction(ctx.p) ** v
            w = first if u == 1 else float(q) ** (-v) * _g_value(ctx, kind, fd, x)
            if abs(w) > 1e-12:
                atoms.append((x, v + level, w))
    window = BruhatFn.from_atoms(ctx, "F", atoms)
    return SWElem(ctx, kind, 0.0, window, zero_germ, tail)


def g_value_Z_to_W(f: SZElem, xi) -> complex:
    """Pointwise (|.|G f)(xi)."""
    fd = _fdata(f.ctx, f.kind, f.atom_triples(), f.germ0, f.germ_m1)
    xi = exact_fraction(xi)
    v = rational_valuation(xi, f.ctx.p)
    return float(f.ctx.q) ** (-v) * _g_value(f.ctx, f.kind, fd, xi)


# --- singular-coefficient extractors ----------------------------------------------


def extract_O0(f: SXElem) -> complex:
    """O~_0 = (val-coefficient)/ln q, so that it multiplies -ln|xi|."""
    if f.kind != "split":
        raise KindError("O~_0/O~_u are the split extractors")
    return f.germ0.b / math.log(f.ctx.q)


def extract_Ou(f: SXElem) -> complex:
    if f.kind != "split":
        raise KindError("O~_0/O~_u are the split extractors")
    return f.germ0.a


def extract_O01(f: SXElem) -> complex:
    if f.kind != "inert":
        raise KindError("O~_{0,1}/O~_{0,kappa0} are the inert extractors")
    return f.germ0.a


def extract_O0kappa(f: SXElem) -> complex:
    if f.kind != "inert":
        raise KindError("O~_{0,1}/O~_{0,kappa0} are the inert extractors")
    return f.germ0.b


def ip_torus(f: SZElem) -> complex:
    """<f>: the log coefficient (split) / kappa_0 coefficient (inert) at xi=-1."""
    if f.kind == "split":
        return f.germ_m1.b / math.log(f.ctx.q)
    return f.germ_m1.b


def ip_kuz(f: SWElem) -> complex:
    """<f> = the Kloosterman tail constant."""
    return f.inf_tail.C


def sw_extract_O0_delta(f: SWElem) -> complex:
    """O~_{0,delta^{1/2}}(f) = O~_0(|.|^{-1} f): the val/1-part of the zero germ."""
    c1, c2, _ = f.zero_germ
    if f.kind == "split":
        return c1 / math.log(f.ctx.q)
    return c1


def sw_extract_second(f: SWElem) -> complex:
    """O~_{u,delta^{1/2}} (split) / O~_{0,eta delta^{1/2}} (inert)."""
    c1, c2, _ = f.zero_germ
    return c2


# --- Mellin components of S(X) elements -------------------------------------------


def sx_mellin(f: SXElem, chi: MellinCharacter) -> RationalFnT:
    germ = (f.germ0.a, f.germ0.b, f.germ0.level) if not f.germ0.is_zero() else None
    return mellin_component(f.window, chi, germ=germ, germ_kind=f.kind)


# --- serialization -----------------------------------------------------------------


def _atom_json(ctx: LocalFieldCtx, a: Atom) -> list:
    c = a.center[0]
    if c == 0:
        num, cv = 0, 0
    else:
        cv = rational_valuation(c, ctx.p)
        red = c / Fraction(ctx.p) ** cv
        # canonical integer numerator modulo the coset depth
        mod = ctx.p ** max(a.level - cv, 1)
        num = red.numerator * pow(red.denominator, -1, mod) % mod
    return [num, cv, a.level, a.coef.real, a.coef.imag]


def _germ_json(g: Germ) -> dict:
    return {"tag": "germ", "a": [g.a.real, g.a.imag], "b": [g.b.real, g.b.imag],
            "level": g.level}


def element_to_json(elem) -> str:
    """JSON document for SX/SZ/SW elements (atoms as arrays, germs tagged)."""
    ctx = elem.ctx
    base = {"p": ctx.p, "kind": elem.kind,
            "atoms": [_atom_json(ctx, a) for a in elem.window.canonicalize().atoms]}
    if isinstance(elem, SXElem):
        base["type"] = "SX"
        base["germ0"] = _germ_json(elem.germ0)
    elif isinstance(elem, SZElem):
        base["type"] = "SZ"
        base["germ0"] = _germ_json(elem.germ0)
        base["germAtMinus1"] = _germ_json(elem.germ_m1)
    elif isinstance(elem, SWElem):
        base["type"] = "SW"
        base["s"] = [complex(elem.s).real, complex(elem.s).imag]
        c1, c2, L = elem.zero_germ
        base["zeroGerm"] = {"tag": "sw-germ", "c1": [c1.real, c1.imag],
                            "c2": [c2.real, c2.imag], "level": L}
        base["infTail"] = {"tag": "kloosterman", "C": [elem.inf_tail.C.real,
                                                       elem.inf_tail.C.imag],
                           "M": elem.inf_tail.M}
    else:
        raise DomainError("unknown element type")
    return json.dumps(base, sort_keys=True)


def element_from_json(ctx: LocalFieldCtx, doc: str):
    d = json.loads(doc)
    if d["p"] != ctx.p:
        raise DomainError("context prime mismatch")
    atoms = [(Fraction(num) * Fraction(ctx.p) ** cv, lev, complex(re, im))
             for (num, cv, lev, re, im) in d["atoms"]]
    window = BruhatFn.from_atoms(ctx, "F", atoms)

    def germ_of(g):
        return Germ(complex(*g["a"]), complex(*g["b"]), g["level"])

    if d["type"] == "SX":
        return SXElem(ctx, d["kind"], window, germ_of(d["germ0"]))
    if d["type"] == "SZ":
        return SZElem(ctx, d["kind"], window, germ_of(d["germ0"]),
                      germ_of(d["germAtMinus1"]))
    if d["type"] == "SW":
        zg = d["zeroGerm"]
        tail = d["infTail"]
        return SWElem(ctx, d["kind"], complex(*d["s"]), window,
                      (complex(*zg["c1"]), complex(*zg["c2"]), zg["level"]),
                      KLTail(complex(*tail["C"]), tail["M"]))
    raise DomainError("unknown element type tag")
