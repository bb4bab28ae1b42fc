"""Locally constant compactly supported functions on F, F^2, E and E^alpha.

Atoms are cosets c + p^n*o^d with complex weights; all transforms are closed
form (finite character sums), so a BruhatFn is closed under Fourier transform
and the double transform is exactly f(-x).  Tate zeta integrals, Mellin
components and gamma factors are produced as rational functions in t = q^(-s),
the gamma factor always by solving the local functional equation with a test
function rather than from a hard-coded formula.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, KindError, PrecisionError, UnsupportedAtomError
from .localfield import (
    LocalFieldCtx,
    PadicScalar,
    QuadExt,
    rational_valuation,
)
from .rational import Poly, RationalFnT, geometric_tail, weighted_geometric_tail

Point = tuple[Fraction, ...]

_DOMAIN_DIM = {"F": 1, "F2": 2, "E": 2, "Ealpha": 2}


def _as_point(x, dim: int) -> Point:
    if isinstance(x, (tuple, list)):
        if len(x) != dim:
            raise DomainError(f"point has {len(x)} coordinates, expected {dim}")
        return tuple(Fraction(c) for c in x)
    if dim != 1:
        raise DomainError("scalar point given for a 2-dimensional domain")
    return (Fraction(x),)


@dataclass(frozen=True)
class Atom:
    center: Point
    level: int
    coef: complex

    def contains(self, x: Point, p: int) -> bool:
        return all(rational_valuation(xc - cc, p) >= self.level for xc, cc in zip(x, self.center))


@dataclass(frozen=True)
class BruhatFn:
    """Finite atom sum on the tagged domain; `canonical` means one common level
    with pairwise disjoint cosets."""

    ctx: LocalFieldCtx
    domain: str
    atoms: tuple[Atom, ...]
    canonical: bool = False
    torsor_scale: Fraction | None = None  # E^alpha: a = N(e) of the base point

    def __post_init__(self):
        if self.domain not in _DOMAIN_DIM:
            raise DomainError(f"unknown domain tag {self.domain!r}")
        if self.domain == "Ealpha" and self.torsor_scale is None:
            raise DomainError("E^alpha data needs its torsor scale")

    # --- constructors ---

    @staticmethod
    def from_atoms(ctx, domain, triples, torsor_scale=None) -> "BruhatFn":
        dim = _DOMAIN_DIM[domain]
        atoms = tuple(
            Atom(_as_point(c, dim), int(n), complex(w)) for (c, n, w) in triples if complex(w) != 0
        )
        return BruhatFn(ctx, domain, atoms,
                        torsor_scale=Fraction(torsor_scale) if torsor_scale is not None else None)

    @staticmethod
    def indicator_ball(ctx, domain, center, level, torsor_scale=None) -> "BruhatFn":
        return BruhatFn.from_atoms(ctx, domain, [(center, level, 1.0)], torsor_scale)

    @staticmethod
    def zero(ctx, domain="F", torsor_scale=None) -> "BruhatFn":
        ts = Fraction(torsor_scale) if torsor_scale is not None else (
            Fraction(ctx.p) if domain == "Ealpha" else None)
        return BruhatFn(ctx, domain, (), canonical=True, torsor_scale=ts)

    @property
    def dim(self) -> int:
        return _DOMAIN_DIM[self.domain]

    def is_zero(self) -> bool:
        return not self.atoms

    # --- algebra ---

    def scale(self, w) -> "BruhatFn":
        return BruhatFn(self.ctx, self.domain,
                        tuple(Atom(a.center, a.level, a.coef * complex(w)) for a in self.atoms),
                        self.canonical, self.torsor_scale)

    def __add__(self, other: "BruhatFn") -> "BruhatFn":
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.domain != other.domain or self.torsor_scale != other.torsor_scale:
            raise DomainError("cannot add functions on different domains")
        return BruhatFn(self.ctx, self.domain, self.atoms + other.atoms,
                        canonical=False, torsor_scale=self.torsor_scale)

    def __sub__(self, other: "BruhatFn") -> "BruhatFn":
        return self + other.scale(-1.0)

    # --- evaluation and canonical form ---

    def eval(self, x) -> complex:
        """Sum of the coefficients of the atoms containing x (atom overlap sums)."""
        pt = self._point_of(x)
        return sum((a.coef for a in self.atoms if a.contains(pt, self.ctx.p)), 0j)

    def _point_of(self, x) -> Point:
        if isinstance(x, PadicScalar):
            max_level = max((a.level for a in self.atoms), default=0)
            if not x.is_exact_zero() and not x.is_zero_like():
                if x.val + x.prec < max_level:
                    raise PrecisionError("point precision below atom level")
            elif not x.is_exact_zero() and x.val < max_level:
                raise PrecisionError("inexact zero below atom level")
            return (x.to_fraction_approx(),)
        return _as_point(x, self.dim)

    def canonicalize(self) -> "BruhatFn":
        if self.canonical or not self.atoms:
            return BruhatFn(self.ctx, self.domain, self.atoms, True, self.torsor_scale)
        p = self.ctx.p
        level = max(a.level for a in self.atoms)
        acc: dict[tuple, complex] = {}
        for a in self.atoms:
            split = level - a.level
            shifts = range(p ** split)
            for combo in itertools.product(shifts, repeat=self.dim):
                center = tuple(
                    c + Fraction(s * p ** a.level) for c, s in zip(a.center, combo)
                )
                key = tuple(_coset_key(c, level, p) for c in center)
                acc[key] = acc.get(key, 0j) + a.coef
        atoms = tuple(
            Atom(tuple(Fraction(n, d) for (n, d) in key), level, w)
            for key, w in sorted(acc.items(), key=lambda kv: str(kv[0]))
            if abs(w) > 1e-14
        )
        return BruhatFn(self.ctx, self.domain, atoms, True, self.torsor_scale)

    def support_radius(self) -> int:
        """Smallest R with supp f inside p^-R * o^d (valuation >= -R)."""
        r = 0
        for a in self.atoms:
            for c in a.center:
                v = rational_valuation(c, self.ctx.p)
                r = max(r, -min(v, a.level))
        return r

    def max_level(self) -> int:
        return max((a.level for a in self.atoms), default=0)

    def make_evaluator(self):
        """O(1)-per-point evaluator: canonical coset-key dictionary lookup."""
        fc = self.canonicalize()
        if fc.is_zero():
            return lambda x: 0j
        level = fc.max_level()
        p = self.ctx.p
        table = {tuple(_coset_key(c, level, p) for c in a.center): a.coef
                 for a in fc.atoms}
        dim = self.dim

        def ev(x) -> complex:
            pt = x if isinstance(x, tuple) else (x,)
            if len(pt) != dim:
                raise DomainError("point dimension mismatch")
            key = tuple(_coset_key(Fraction(c), level, p) for c in pt)
            return table.get(key, 0j)

        return ev


def _coset_key(c: Fraction, level: int, p: int) -> tuple[int, int]:
    """Canonical representative of c + p^level*o as a reduced fraction pair."""
    v = rational_valuation(c, p)
    if v >= level:
        return (0, 1)
    # write c = m / p^k with m int, k >= 0 (prime-to-p denominator inverted)
    k = max(0, -v)
    scaled = c * p ** k
    den = scaled.denominator  # coprime to p
    m_mod = p ** (level + k)
    m = scaled.numerator * pow(den, -1, m_mod) % m_mod
    red = Fraction(m, p ** k)
    return (red.numerator, red.denominator)


# --- Fourier transforms -----------------------------------------------------------


def fourier(f: BruhatFn) -> BruhatFn:
    """Schoolbook transform on F: f^(y) = int f(x) psi^{-1}(xy) dx, self-dual dx."""
    if f.domain != "F":
        raise DomainError("fourier() is the one-variable transform on F")
    return _fourier_nd(f, scales=(Fraction(1),))


def fourier_F2(f: BruhatFn) -> BruhatFn:
    """Transform on F^2 with kernel psi^{-1}(x1 y1 + x2 y2)."""
    if f.domain != "F2":
        raise DomainError("fourier_F2 expects F^2 data")
    return _fourier_nd(f, scales=(Fraction(1), Fraction(1)))


def fourier_E(f: BruhatFn, ext: QuadExt) -> BruhatFn:
    """Transform on E (or E^alpha) with kernel psi^{-1}(tr(x*conj(y))).

    In coordinates x = x1 + x2*sqrt(u): tr(x*conj(y)) = 2(x1 y1 - u x2 y2).
    On the torsor the pairing acquires the scale a = N(e) and the measure a
    factor |a|, giving hat(Phi^alpha)(y) = |a| * hat(Phi^0)(a y).
    """
    if ext.kind != "inert":
        raise KindError("fourier_E needs an inert extension (split is coordinatewise)")
    if f.domain == "E":
        return _fourier_nd(f, scales=(Fraction(2), Fraction(-2 * ext.u)))
    if f.domain != "Ealpha":
        raise DomainError("fourier_E expects E or E^alpha data")
    a = f.torsor_scale
    base = BruhatFn(f.ctx, "E", f.atoms, f.canonical)
    hat0 = _fourier_nd(base, scales=(Fraction(2), Fraction(-2 * ext.u)))
    va = rational_valuation(a, f.ctx.p)
    abs_a = Fraction(f.ctx.q) ** (-va)
    # substitute y -> a*y atomwise and multiply by |a|
    atoms = tuple(
        Atom(tuple(c / a for c in at.center), at.level - va, at.coef * float(abs_a))
        for at in hat0.atoms
    )
    return BruhatFn(f.ctx, "Ealpha", atoms, hat0.canonical, torsor_scale=a)


def _fourier_nd(f: BruhatFn, scales: tuple[Fraction, ...]) -> BruhatFn:
    """Product-kernel transform psi^{-1}(sum_i s_i x_i y_i), coordinatewise.

    Output cosets at the common conductor level are indexed by integers
    r (centers r p^-n), so the whole transform is a sum of outer products of
    vectorized one-dimensional character sums.
    """
    import numpy as np

    f = f.canonicalize()
    ctx = f.ctx
    p = ctx.p
    if f.is_zero():
        return BruhatFn.zero(ctx, f.domain, f.torsor_scale)
    n = f.max_level()
    out_level = -n
    for a in f.atoms:
        for c, s in zip(a.center, scales):
            if c != 0:
                out_level = max(out_level, -rational_valuation(s * c, p))
    span = p ** (out_level + n)
    vol1 = float(Fraction(ctx.q) ** (-n))
    r_idx = np.arange(span, dtype=np.int64)

    def factor_vector(c: Fraction, s: Fraction) -> "np.ndarray":
        # weights of q^-n psi^{-1}(s c y) over y = r p^-n, r = 0..span-1
        sc = s * c
        if sc == 0:
            return np.full(span, vol1, dtype=np.complex128)
        v = rational_valuation(sc, p)
        m = n - v  # conductor exponent of the phase in r
        if m <= 0:
            return np.full(span, vol1, dtype=np.complex128)
        mod = p ** m
        unit = sc * Fraction(p) ** (-v)
        a_int = unit.numerator * pow(unit.denominator, -1, mod) % mod
        t = (a_int * (r_idx % mod)) % mod
        return vol1 * np.exp(-2j * np.pi * t / mod)

    if f.dim == 1:
        total = np.zeros(span, dtype=np.complex128)
        for a in f.atoms:
            total += a.coef * factor_vector(a.center[0], scales[0])
    else:
        total = np.zeros((span, span), dtype=np.complex128)
        for a in f.atoms:
            v1 = factor_vector(a.center[0], scales[0])
            v2 = factor_vector(a.center[1], scales[1])
            total += a.coef * np.outer(v1, v2)
    scale_ref = float(np.abs(total).max(initial=0.0))
    thresh = 1e-12 * max(1.0, scale_ref)
    atoms = []
    pn = Fraction(p) ** n
    if f.dim == 1:
        for r in np.nonzero(np.abs(total) > thresh)[0]:
            atoms.append(Atom((Fraction(int(r)) / pn,), out_level, complex(total[r])))
    else:
        for r1, r2 in zip(*np.nonzero(np.abs(total) > thresh)):
            atoms.append(Atom((Fraction(int(r1)) / pn, Fraction(int(r2)) / pn),
                              out_level, complex(total[r1, r2])))
    return BruhatFn(ctx, f.domain, tuple(atoms), True, f.torsor_scale)


def negate_argument(f: BruhatFn) -> BruhatFn:
    atoms = tuple(Atom(tuple(-c for c in a.center), a.level, a.coef) for a in f.atoms)
    return BruhatFn(f.ctx, f.domain, atoms, f.canonical, f.torsor_scale)


def inner_product(f: BruhatFn, g: BruhatFn) -> complex:
    """Bilinear int f*g dx (no conjugation), both canonicalized to a common level."""
    if f.domain != g.domain:
        raise DomainError("inner product needs a common domain")
    fc, gc = f.canonicalize(), g.canonicalize()
    if fc.is_zero() or gc.is_zero():
        return 0j
    level = max(fc.max_level(), gc.max_level())
    p = f.ctx.p
    total = 0j
    # brute but exact: refine both to the common level
    fb = _refine_to_level(fc, level)
    gb = _refine_to_level(gc, level)
    gmap = {tuple(_coset_key(c, level, p) for c in b.center): b.coef for b in gb.atoms}
    vol = float(Fraction(f.ctx.q) ** (-level * fc.dim))
    for a in fb.atoms:
        key = tuple(_coset_key(c, level, p) for c in a.center)
        if key in gmap:
            total += a.coef * gmap[key] * vol
    return total


def integral(f: BruhatFn) -> complex:
    fc = f.canonicalize()
    vol = float(Fraction(f.ctx.q) ** (-fc.max_level() * fc.dim)) if fc.atoms else 0.0
    return sum((a.coef for a in fc.atoms), 0j) * vol


def _refine_to_level(f: BruhatFn, level: int) -> BruhatFn:
    if f.max_level() == level or f.is_zero():
        return f
    forced = BruhatFn(f.ctx, f.domain, f.atoms + (Atom(tuple([Fraction(0)] * f.dim), level, 0j),),
                      torsor_scale=f.torsor_scale)
    return forced.canonicalize()


# --- Mellin characters and Tate integrals ----------------------------------------


@dataclass(frozen=True)
class MellinCharacter:
    """Unramified-or-eta character component: conductor <= 1."""

    ext: QuadExt
    quadratic: str = "trivial"  # "trivial" | "eta"

    def __post_init__(self):
        if self.quadratic not in ("trivial", "eta"):
            raise UnsupportedAtomError("only trivial and eta components are in scope")
        if self.quadratic == "eta" and self.ext.kind == "split":
            # eta = 1 in the split case; normalize to the trivial tag
            object.__setattr__(self, "quadratic", "trivial")

    def sign_of_val(self, v: int) -> int:
        if self.quadratic == "trivial":
            return 1
        return -1 if v % 2 else 1

    def twist_eta(self) -> "MellinCharacter":
        if self.ext.kind == "split":
            return self
        return MellinCharacter(self.ext, "eta" if self.quadratic == "trivial" else "trivial")

    def inverse(self) -> "MellinCharacter":
        return self  # both components are real quadratic


def _laurent_to_rational(terms: dict[int, complex]) -> RationalFnT:
    """sum_k terms[k] t^k with possibly negative k, as one rational function."""
    if not terms:
        return RationalFnT.zero()
    kmin = min(min(terms), 0)
    coeffs = [0j] * (max(terms) - kmin + 1)
    for k, c in terms.items():
        coeffs[k - kmin] += c
    return RationalFnT(Poly(tuple(coeffs)) if any(coeffs) else Poly.of(0),
                       Poly.monomial(-kmin))


def tate_zeta(f: BruhatFn, chi: MellinCharacter) -> RationalFnT:
    """zeta(f, chi, s) = int f(x) chi(x) |x|^s d^x x as a rational function of t."""
    if f.domain != "F":
        raise DomainError("tate_zeta works on F")
    fc = f.canonicalize()
    ctx = f.ctx
    laurent: dict[int, complex] = {}
    tails = RationalFnT.zero()
    vol_shell = float(ctx.vol_Ox)
    for a in fc.atoms:
        c = a.center[0]
        vc = rational_valuation(c, ctx.p)
        if vc < a.level:
            # the atom sits inside the shell |x| = q^-vc
            sign = chi.sign_of_val(vc)
            mass = float(Fraction(ctx.q) ** (vc - a.level))  # d^x-volume of the atom
            laurent[vc] = laurent.get(vc, 0j) + a.coef * sign * mass
        else:
            # full ball p^level * o around zero: geometric sum over deep shells
            if a.level < 0:
                for k in range(a.level, 0):
                    sign = chi.sign_of_val(k)
                    laurent[k] = laurent.get(k, 0j) + a.coef * sign * vol_shell
                start = 0
            else:
                start = a.level
            ratio = -1.0 if chi.quadratic == "eta" else 1.0
            tails = tails + geometric_tail(ratio, start).scale(a.coef * vol_shell)
    return _laurent_to_rational(laurent) + tails


def mellin_component(f_window: BruhatFn, chi: MellinCharacter,
                     germ: tuple[complex, complex, int] | None = None,
                     germ_kind: str | None = None) -> RationalFnT:
    """f-check(chi)(t) = sum_k q^{-k/2} t^k * int_{val=k} f chi d^x.

    The window part is a Laurent polynomial; a zero-germ (a, b, L) adds its
    closed-form tail: split germ a + b*val(x), inert germ a + b*eta(x).
    """
    ctx = f_window.ctx
    qh = ctx.q ** 0.5
    laurent: dict[int, complex] = {}
    out = RationalFnT.zero()
    fc = f_window.canonicalize()
    for at in fc.atoms:
        c = at.center[0]
        vc = rational_valuation(c, ctx.p)
        if vc >= at.level:
            raise UnsupportedAtomError("window atom touches 0; put it in the germ")
        sign = chi.sign_of_val(vc)
        mass = float(Fraction(ctx.q) ** (vc - at.level)) * qh ** (-vc)
        laurent[vc] = laurent.get(vc, 0j) + at.coef * sign * mass
    if germ is not None:
        a, b, L = germ
        vol = float(ctx.vol_Ox)
        if germ_kind not in ("split", "inert"):
            raise KindError("germ_kind must be split or inert")
        for k in range(L, 0):
            # shells above |x| = 1 handled term by term
            sign = chi.sign_of_val(k)
            shell_val = (a + b * k) if germ_kind == "split" else (a + b * (-1) ** k)
            laurent[k] = laurent.get(k, 0j) + vol * sign * shell_val * qh ** (-k)
        L0 = max(L, 0)
        x_plus = 1.0 / qh   # ratio for sum (q^{-1/2} t)^k
        if germ_kind == "split":
            # int over shell k: (a + b k) * vol; chi trivial only (eta=1 split)
            out = out + geometric_tail(x_plus, L0).scale(a * vol)
            out = out + weighted_geometric_tail(x_plus, L0).scale(b * vol)
        else:
            s_par = 1.0 if chi.quadratic == "trivial" else -1.0
            # shell integral of (a + b*eta)*chi: (a + b(-1)^k) * s_par^k
            out = out + geometric_tail(x_plus * s_par, L0).scale(a * vol)
            out = out + geometric_tail(-x_plus * s_par, L0).scale(b * vol)
    return _laurent_to_rational(laurent) + out


def gamma_factor(chi: MellinCharacter) -> RationalFnT:
    """gamma(chi, s, psi) solving gamma * zeta(f, chi, s) = zeta(f^, chi^{-1}, 1-s)."""
    ctx = chi.ext.ctx
    test = BruhatFn.indicator_ball(ctx, "F", Fraction(0), 0)  # 1_o
    z = tate_zeta(test, chi)
    if z.is_zero():
        raise DomainError("test function has vanishing zeta; choose another")
    zhat = tate_zeta(fourier(test), chi.inverse())
    # substitute t -> q^{-(1-s)} = q^{-1}/t in zhat
    rhs = zhat.subs_recip_scaled(1.0 / ctx.q)
    return rhs / z


def gamma_star_eta(ext: QuadExt) -> tuple[complex, int]:
    """Leading Laurent term of gamma(eta, s, psi) at s = 0: (coefficient, order)."""
    chi = MellinCharacter(ext, "eta" if ext.kind == "inert" else "trivial")
    g = gamma_factor(chi)
    import math

    return g.leading_at(1.0, lnq=math.log(ext.ctx.q))
