"""Orchestration: relations, filtration outcomes, Jordan-Hoelder sets,
Galois representations and local constancy radii.

Smooth representations are written with twists chi = w^b, where w is the mod p
cyclotomic character and b is taken mod p-1.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import floor

from .apexpr import ApValue, evaluate
from .linalg import Linear, Quadratic, Unknown, Zero, membership_solve
from .padic import PadicError, PrimeContext, is_prime
from .relations import MODES, Projector, RelationModule, build_relations, fp_echelon
from .symm import FiltrationStep, standard_filtration, witnesses_as_induced


class InvalidInput(ValueError):
    pass


class ResourceLimit(RuntimeError):
    pass


class Undetermined(RuntimeError):
    def __init__(self, message: str, outcomes: list | None = None):
        super().__init__(message)
        self.outcomes = outcomes or []


class InconsistentTable(RuntimeError):
    pass


class DeterminantMismatch(RuntimeError):
    pass


def _is_pm1(p: int, lam: int) -> bool:
    return lam % p in (1, p - 1)


# ---- smooth factors -------------------------------------------------------------

@dataclass(frozen=True)
class PiFactor:
    """pi(r, lam, w^b); identifications are applied at construction."""

    p: int
    r: int
    lam: int
    b: int

    def __post_init__(self):
        p, r, lam = self.p, self.r, self.lam % self.p
        b = self.b % (p - 1)
        if not 0 <= r <= p - 1:
            raise ValueError(f"r={r} out of range")
        if lam == 0:
            r, b = min((r, b), (p - 1 - r, (b + r) % (p - 1)))
        elif r in (0, p - 1) and _is_pm1(p, lam):
            raise ValueError("pi(0 or p-1, +-1, chi) is reducible")
        elif r == p - 1:
            r = 0
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "b", b)

    def key(self):
        return (0, self.r, self.lam, self.b)

    def __str__(self) -> str:
        return f"pi({self.r},{self.lam},{_w(self.b)})"


@dataclass(frozen=True)
class Steinberg:
    """St tensor w^b unr(lam), lam = +-1."""

    p: int
    lam: int
    b: int

    def __post_init__(self):
        _norm_pm1(self)

    def key(self):
        return (1, 0, self.lam, self.b)

    def __str__(self) -> str:
        return f"St {_char(self.b, self.lam)}"


@dataclass(frozen=True)
class Character:
    """The character w^b unr(lam) of det, lam = +-1."""

    p: int
    lam: int
    b: int

    def __post_init__(self):
        _norm_pm1(self)

    def key(self):
        return (2, 0, self.lam, self.b)

    def __str__(self) -> str:
        return _char(self.b, self.lam)


@dataclass(frozen=True)
class QuadraticPair:
    """pi(p-2, l, w^b) + pi(p-2, 1/l, w^b) with l + 1/l = mu and l not in F_p."""

    p: int
    mu: int
    b: int

    def __post_init__(self):
        p = self.p
        mu = self.mu % p
        if _roots(p, mu):
            raise ValueError(f"x^2 - {mu}x + 1 splits over F_{p}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "b", self.b % (p - 1))

    def key(self):
        return (3, self.p - 2, self.mu, self.b)

    def __str__(self) -> str:
        return f"pi({self.p - 2},[{self.mu}],{_w(self.b)})"


SmoothRepFactor = PiFactor | Steinberg | Character | QuadraticPair


def _norm_pm1(f) -> None:
    p = f.p
    lam = f.lam % p
    if not _is_pm1(p, lam):
        raise ValueError(f"lambda={lam} is not +-1")
    object.__setattr__(f, "lam", lam)
    object.__setattr__(f, "b", f.b % (p - 1))


def _w(b: int) -> str:
    return "1" if b == 0 else ("w" if b == 1 else f"w^{b}")


def _char(b: int, lam: int) -> str:
    if lam == 1:
        return _w(b)
    return f"unr({lam})" if b == 0 else f"{_w(b)} unr({lam})"


@lru_cache(maxsize=None)
def _roots(p: int, mu: int) -> tuple[int, ...]:
    """Roots of x^2 - mu x + 1 in F_p, with multiplicity."""
    out = []
    for x in range(1, p):
        if (x * x - mu * x + 1) % p == 0:
            out.append(x)
    if len(out) == 1:
        out *= 2
    return tuple(out)


def quotient_factors(p: int, a: int, b: int, lam: int) -> list:
    """JH(I(sigma_a(b)) / (T - lam))."""
    if lam % p and a in (0, p - 1) and _is_pm1(p, lam):
        return [Steinberg(p, lam, b), Character(p, lam, b)]
    return [PiFactor(p, a, lam, b)]


def possible_factors(p: int, a: int, b: int) -> list:
    """Every factor of a finite length quotient of I(sigma_a(b))."""
    out = []
    for lam in range(p):
        out += quotient_factors(p, a, b, lam)
    if a == p - 2 or p == 2:
        out += [QuadraticPair(p, mu, b) for mu in range(p) if not _roots(p, mu)]
    return list(dict.fromkeys(out))


# ---- Galois side --------------------------------------------------------------

@dataclass(frozen=True)
class Induced:
    p: int
    m: int

    def __post_init__(self):
        M = self.p**2 - 1
        m = self.m % M
        object.__setattr__(self, "m", min(m, self.p * m % M))

    kind = "induced"

    @property
    def params(self) -> dict:
        return {"m": self.m}

    @property
    def display(self) -> str:
        return f"ind w2^{self.m}"


@dataclass(frozen=True)
class Reducible:
    """w^a unr(lam) + w^b unr(mu) with a != b mod p-1, ordered by exponent."""

    p: int
    a: int
    lam: int
    b: int
    mu: int

    kind = "reducible"

    @property
    def params(self) -> dict:
        return {"a": self.a, "lambda": self.lam, "b": self.b, "mu": self.mu}

    @property
    def display(self) -> str:
        return f"{_char(self.a, self.lam)} + {_char(self.b, self.mu)}"


@dataclass(frozen=True)
class Split:
    """I_{n,c}: w^n (unr(l) + unr(1/l)) with l + 1/l = c."""

    p: int
    n: int
    c: int

    kind = "split"

    @property
    def params(self) -> dict:
        return {"n": self.n, "c": self.c}

    @property
    def display(self) -> str:
        return f"I_{{{self.n},{self.c}}}"


GaloisRep = Induced | Reducible | Split


def reducible(p: int, a: int, lam: int, b: int) -> GaloisRep:
    """w^a unr(lam) + w^b unr(1/lam), in canonical form."""
    a, b, lam = a % (p - 1), b % (p - 1), lam % p
    inv = pow(lam, -1, p)
    if a == b:
        return Split(p, a, (lam + inv) % p)
    (a, lam), (b, inv) = sorted([(a, lam), (b, inv)])
    return Reducible(p, a, lam, b, inv)


def check_determinant(rep: GaloisRep, k: int) -> None:
    """Raise DeterminantMismatch unless det = w^(k-1)."""
    p = rep.p
    t = (k - 1) % (p - 1)
    if isinstance(rep, Induced):
        ok = (rep.m - t) % (p - 1) == 0
    elif isinstance(rep, Reducible):
        ok = (rep.a + rep.b - t) % (p - 1) == 0 and rep.lam * rep.mu % p == 1
    else:
        ok = (2 * rep.n - t) % (p - 1) == 0
    if not ok:
        raise DeterminantMismatch(f"{rep.display} has the wrong determinant for k={k}")


# ---- the JH table ---------------------------------------------------------------

@dataclass(frozen=True)
class JHSet:
    item: int
    factors: tuple  # sorted by key, with multiplicity
    galois: GaloisRep

    def counts(self) -> Counter:
        return Counter(self.factors)

    def __str__(self) -> str:
        return "{" + ", ".join(str(f) for f in self.factors) + "}"


def _jhset(item: int, factors: list, galois: GaloisRep) -> JHSet:
    return JHSet(item, tuple(sorted(factors, key=lambda f: f.key())), galois)


@lru_cache(maxsize=None)
def jh_table(p: int) -> tuple[JHSet, ...]:
    """Every set of the catalogue for twists w^b and coefficients in F_p."""
    out: dict[tuple, JHSet] = {}

    def put(s: JHSet):
        out.setdefault(s.factors, s)

    P = p - 1
    for b in range(P):
        for r in range(p):
            put(_jhset(1, [PiFactor(p, r, 0, b)], Induced(p, r + 1 + b * (p + 1))))
        for lam in range(1, p):
            inv = pow(lam, -1, p)
            for r in range(p):
                if r in (0, p - 3, p - 1) and _is_pm1(p, lam):
                    continue
                other = (p - 3 - r) % P
                put(_jhset(2, [PiFactor(p, r, lam, b), PiFactor(p, other, inv, b + r + 1)],
                           reducible(p, r + 1 + b, lam, b)))
        for mu in range(p):
            if not _roots(p, mu):
                put(_jhset(3, [QuadraticPair(p, mu, b)], Split(p, b, mu)))
        for lam in (1, p - 1):
            if p > 3:
                fs = [Steinberg(p, lam, b), Character(p, lam, b), PiFactor(p, p - 3, lam, b + 1)]
                put(_jhset(4, fs, reducible(p, b, lam, b + 1)))
            elif p == 3:
                fs = [Steinberg(p, lam, b), Character(p, lam, b),
                      Steinberg(p, lam, b + 1), Character(p, lam, b + 1)]
                put(_jhset(5, fs, reducible(p, b, lam, b + 1)))
    if p == 2:
        put(_jhset(6, [Steinberg(p, 1, 0)] * 2 + [Character(p, 1, 0)] * 2, Split(p, 0, 0)))
    return tuple(out.values())


@lru_cache(maxsize=None)
def factor_index(p: int) -> dict:
    """factor -> the table sets containing it."""
    idx: dict = {}
    for s in jh_table(p):
        for f in set(s.factors):
            idx.setdefault(f, []).append(s)
    return idx


def enclosing_set(p: int, f) -> JHSet:
    hits = factor_index(p).get(f, [])
    if len(hits) != 1:
        raise InconsistentTable(f"{f} lies in {len(hits)} catalogue sets")
    return hits[0]


# ---- outcomes -------------------------------------------------------------------

@dataclass(frozen=True)
class SkippedByVanishing:
    pass


@dataclass(frozen=True)
class StepOutcome:
    i: int
    a: int
    b: int
    outcome: object
    skipped: bool = False  # the vanishing criterion applies to this step

    @property
    def kind(self) -> str:
        return {Zero: "zero", Linear: "linear", Quadratic: "quadratic",
                Unknown: "unknown", SkippedByVanishing: "skipped"}[type(self.outcome)]

    @property
    def value(self):
        o = self.outcome
        if isinstance(o, Linear):
            return o.lam
        if isinstance(o, Quadratic):
            return o.mu
        return None

    def __str__(self) -> str:
        v = self.value
        return f"F_{self.i} on sigma_{self.a}({self.b}): {self.kind}" + ("" if v is None else f" {v}")


def vanishing_bound(p: int, r: int, v_ap: Fraction) -> int | None:
    """Steps above the returned index vanish; None when the guard fails."""
    fv = floor(v_ap)
    if r >= (fv + 1) * (p + 1):
        return 2 * fv + 1
    return None


def needs_quadratic(p: int, steps: list[FiltrationStep], bound: int | None) -> bool:
    return any(st.a == p - 2 for st in steps if bound is None or st.i <= bound)


def analyze_filtration(mod: RelationModule, steps: list[FiltrationStep], v_ap: Fraction,
                       debug: bool = False) -> list[StepOutcome]:
    """Per-step answers to the three membership questions.

    With ``debug`` the skipped steps and step 1 are computed as well.
    """
    p, r, fld = mod.p, mod.r, mod.field
    bound = vanishing_bound(p, r, v_ap)
    out = []
    keep: set = set()
    for st in steps:
        keep |= set(st.eta_basis)
        skipped = bound is not None and st.i > bound
        if not debug and skipped:
            out.append(StepOutcome(st.i, st.a, st.b, SkippedByVanishing(), True))
            continue
        if not debug and st.i == 1:
            out.append(StepOutcome(st.i, st.a, st.b, Zero()))
            continue
        proj = Projector(p, r, frozenset(keep))
        ech = fp_echelon(mod, proj)
        targets = []
        for t in witnesses_as_induced(p, r, st, fld):
            x = proj({k: fld.residue(c) for k, c in t.entries.items()})
            targets.append({k: c % p for k, c in x.items() if c % p})
        out.append(StepOutcome(st.i, st.a, st.b, membership_solve(targets, ech, p), skipped))
    return out


def candidate_factors(p: int, outcomes: list[StepOutcome]) -> tuple[Counter, set]:
    """(factors with multiplicity, factors available without bound)."""
    fixed: Counter = Counter()
    wild: set = set()
    for so in outcomes:
        if so.skipped:
            continue
        o = so.outcome
        if isinstance(o, Linear):
            fixed.update(quotient_factors(p, so.a, so.b, o.lam))
        elif isinstance(o, Quadratic):
            roots = _roots(p, o.mu)
            if roots:
                for lam in roots:
                    fixed.update(quotient_factors(p, so.a, so.b, lam))
            else:
                fixed[QuadraticPair(p, o.mu, so.b)] += 1
        elif isinstance(o, Unknown):
            wild.update(possible_factors(p, so.a, so.b))
    return fixed, wild


def assemble_jh(p: int, outcomes: list[StepOutcome]) -> JHSet:
    """The unique catalogue set inside the candidate factors, else Undetermined."""
    fixed, wild = candidate_factors(p, outcomes)
    for f in fixed:
        if isinstance(f, QuadraticPair) and not any(
                so.a == p - 2 for so in outcomes if isinstance(so.outcome, Quadratic)):
            raise InconsistentTable(f"{f} outside sigma_{p - 2}")
        enclosing_set(p, f)
    for f in wild:
        enclosing_set(p, f)
    inside = []
    for s in jh_table(p):
        if all(f in wild or fixed[f] >= n for f, n in s.counts().items()):
            inside.append(s)
    if len(inside) != 1:
        raise Undetermined(f"{len(inside)} catalogue sets fit the outcomes", outcomes)
    return inside[0]


def jh_to_galois(s: JHSet, k: int) -> GaloisRep:
    check_determinant(s.galois, k)
    return s.galois


# ---- local constancy ------------------------------------------------------------

@dataclass(frozen=True)
class ConstancyReport:
    delta: Fraction
    ap_radius: Fraction  # any a with v(a - a_p) > ap_radius gives the same reduction
    c: int
    weight_modulus: int | None
    reason: str | None


def _floor_log(c: int, p: int) -> int:
    t = 0
    while p ** (t + 1) <= c:
        t += 1
    return t


def constancy(delta: Fraction, v_ap: Fraction, k: int, p: int) -> ConstancyReport:
    delta, v_ap = Fraction(delta), Fraction(v_ap)
    c = floor(v_ap + delta) + 1
    if c * (p + 1) > k - 2:
        return ConstancyReport(delta, delta, c, None, f"c = {c} exceeds (k-2)/(p+1)")
    modulus = (p - 1) * p ** (1 + floor(delta) + _floor_log(c, p))
    return ConstancyReport(delta, delta, c, modulus, None)


# ---- driver -------------------------------------------------------------------

@dataclass
class Reduction:
    p: int
    k: int
    ap: str
    value: ApValue
    mode: str
    n_used: int
    d_used: int
    delta: Fraction
    outcomes: list[StepOutcome]
    jh: JHSet
    galois: GaloisRep
    constancy: ConstancyReport
    timings_ms: dict = field(default_factory=dict)


def denominator_cap(p: int, r: int, n: int) -> int:
    return (n + 1) * max((r - 1) // (p - 1), 0)


_PROBE = 40  # p-adic digits used to find v(a_p)


def validate(p: int, k: int, ap: str, experimental: bool = False, conjugate: bool = False) -> ApValue:
    if not isinstance(p, int) or not is_prime(p):
        raise InvalidInput(f"p={p} is not prime")
    if p == 2 and not experimental:
        raise InvalidInput("p = 2 is only available in experimental mode")
    if k < 2:
        raise InvalidInput(f"k={k} must be at least 2")
    try:
        val = evaluate(ap, PrimeContext(p), _PROBE, conjugate)
    except PadicError as exc:
        raise InvalidInput(str(exc)) from exc
    if val.element.is_zero():
        raise InvalidInput("a_p = 0: the reduction is known in closed form and not computed here")
    if val.v <= 0:
        raise InvalidInput(f"v(a_p) = {val.v} must be positive")
    return val


def compute_reduction(p: int, k: int, ap: str, n_max: int = 6, d_override: int | None = None,
                      mode: str = "subtree", debug: bool = False,
                      experimental: bool = False, conjugate: bool = False,
                      n_start: int | None = None) -> Reduction:
    """Reduction of V_{k,a_p} with (n, d) escalation.

    ``n_start`` replaces the automatic starting radius.
    """
    if mode not in MODES:
        raise InvalidInput(f"unknown mode {mode!r}")
    val = validate(p, k, ap, experimental, conjugate)
    r = k - 2
    v_ap = val.v
    steps = standard_filtration(p, r)
    bound = vanishing_bound(p, r, v_ap)
    n = n_start if n_start is not None else (2 if needs_quadratic(p, steps, bound) else 1)
    if n > n_max:
        raise ResourceLimit(f"n_max={n_max} is below the required radius {n}")
    timings: dict = {}
    last: list = []
    while n <= n_max:
        cap = denominator_cap(p, r, n)
        d = d_override if d_override is not None else min(2 * (n + 1), max(cap, 1))
        while True:
            t0 = time.perf_counter()
            cur = evaluate(ap, PrimeContext(p), d + 3, conjugate)
            fld = cur.field
            mod = build_relations(fld, r, cur.element.raw, n, fld.e * d, mode)
            timings[f"relations n={n} d={d}"] = round(1000 * (time.perf_counter() - t0))
            if not mod.saw_zero or d_override is not None:
                break
            if d >= cap:
                raise ResourceLimit(f"denominators exceed the bound {cap} at n={n}")
            d = min(d + 2, cap)
        t0 = time.perf_counter()
        outcomes = analyze_filtration(mod, steps, v_ap, debug)
        timings[f"filtration n={n}"] = round(1000 * (time.perf_counter() - t0))
        last = outcomes
        try:
            s = assemble_jh(p, outcomes)
        except Undetermined:
            n += 1
            continue
        rep = jh_to_galois(s, k)
        return Reduction(p, k, ap, cur, mode, n, d, mod.delta, outcomes, s, rep,
                         constancy(mod.delta, v_ap, k, p), timings)
    raise Undetermined(f"undetermined up to n_max={n_max}", last)
