"""Reference rows: loading, label parsing and comparison."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

from .engine import GaloisRep, Induced, Reduction, Split, StepOutcome, compute_reduction, reducible


@dataclass(frozen=True)
class CorpusRow:
    p: int
    k: int
    ap: str
    galois: str
    delta: Fraction
    n: int
    tag: str
    steps: str = ""

    @property
    def label(self) -> str:
        return f"p={self.p} k={self.k} ap={self.ap}"


def parse_row(line: str) -> CorpusRow:
    parts = [x.strip() for x in line.split(";")]
    if len(parts) not in (7, 8):
        raise ValueError(f"expected 7 or 8 fields: {line!r}")
    p, k, ap, gal, delta, n, tag = parts[:7]
    if tag not in ("fast", "slow"):
        raise ValueError(f"unknown tag {tag!r}")
    return CorpusRow(int(p), int(k), ap, gal, Fraction(delta), int(n), tag,
                     parts[7] if len(parts) == 8 else "")


def load_corpus(text: str | None = None) -> list[CorpusRow]:
    if text is None:
        text = resources.files("crysred").joinpath("data/corpus.txt").read_text()
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            rows.append(parse_row(line))
    return rows


def select(rows: list[CorpusRow], which: str) -> list[CorpusRow]:
    if which == "all":
        return list(rows)
    if which in ("fast", "slow"):
        return [r for r in rows if r.tag == which]
    raise ValueError(f"unknown filter {which!r}")


_TERM = re.compile(r"^(?:(1)|w(?:\^(\d+))?)?\s*(?:unr\((-?\d+)\))?$")


def parse_galois(p: int, text: str) -> GaloisRep:
    """'ind w2^m', 'I_{n,c}' or 'w^a unr(l) + w^b unr(m)'."""
    t = text.strip()
    m = re.fullmatch(r"ind\s*w2\^(\d+)", t)
    if m:
        return Induced(p, int(m.group(1)))
    m = re.fullmatch(r"I_\{(\d+),(-?\d+)\}", t)
    if m:
        return Split(p, int(m.group(1)) % (p - 1), int(m.group(2)) % p)
    terms = [x.strip() for x in t.split("+")]
    if len(terms) != 2:
        raise ValueError(f"cannot parse {text!r}")
    parsed = []
    for term in terms:
        m = _TERM.match(term)
        if not m or not term:
            raise ValueError(f"cannot parse term {term!r}")
        one, exp, lam = m.groups()
        a = 0 if one or (exp is None and not term.startswith("w")) else int(exp or 1)
        parsed.append((a, int(lam) % p if lam else 1))
    (a, lam), (b, mu) = parsed
    if lam * mu % p != 1:
        raise ValueError(f"unramified parts of {text!r} do not multiply to 1")
    return reducible(p, a, lam, b)


def parse_steps(text: str) -> dict[int, list[tuple[str, int | None]]]:
    """'F3=linear 4, F0=zero|linear 0' -> {3: [('linear', 4)], 0: [...]}."""
    out: dict = {}
    for part in filter(None, (x.strip() for x in text.split(","))):
        m = re.fullmatch(r"F(\d+)=(.+)", part)
        if not m:
            raise ValueError(f"cannot parse step {part!r}")
        alts = []
        for alt in m.group(2).split("|"):
            words = alt.split()
            alts.append((words[0], int(words[1]) if len(words) > 1 else None))
        out[int(m.group(1))] = alts
    return out


def step_mismatches(expected: str, outcomes: list[StepOutcome]) -> list[str]:
    exp = parse_steps(expected)
    bad = []
    for so in outcomes:
        alts = exp.get(so.i, [("zero", None), ("skipped", None)])
        if ("any", None) in alts:
            continue
        if (so.kind, so.value) not in alts:
            bad.append(f"F_{so.i}: got {so.kind} {so.value}, want {alts}")
    return bad


def compare(row: CorpusRow, res: Reduction, steps_from: Reduction | None = None) -> list[str]:
    """Human readable differences between a result and its row.

    Delta and step expectations describe the computation at the row's radius,
    so they are checked on ``steps_from`` (a run at n = row.n) when given.
    """
    bad = []
    want = parse_galois(row.p, row.galois)
    if res.galois != want:
        bad.append(f"galois {res.galois.display} != {want.display}")
    delta = (steps_from or res).delta
    if delta != row.delta:
        bad.append(f"delta {delta} != {row.delta}")
    if res.n_used > row.n:
        bad.append(f"n {res.n_used} > {row.n}")
    if row.steps:
        bad += step_mismatches(row.steps, (steps_from or res).outcomes)
    return bad


@dataclass
class RowResult:
    row: CorpusRow
    result: Reduction | None
    problems: list[str]
    conjugate_used: bool = False
    error: str | None = None
    at_table_n: Reduction | None = None  # rerun at n = row.n for delta and steps

    @property
    def ok(self) -> bool:
        return not self.problems and self.error is None


def run_row(row: CorpusRow, mode: str = "subtree", n_max: int = 6) -> RowResult:
    """Run a row; retry with the conjugate square roots on a mismatch."""
    first = None
    for conj in (False, True):
        try:
            res = compute_reduction(row.p, row.k, row.ap, n_max=n_max, mode=mode, conjugate=conj)
            fixed = None
            if res.n_used < row.n:
                fixed = compute_reduction(row.p, row.k, row.ap, n_max=row.n, mode=mode,
                                          conjugate=conj, n_start=row.n)
        except Exception as exc:  # reported per row
            out = RowResult(row, None, [], conj, f"{type(exc).__name__}: {exc}")
        else:
            out = RowResult(row, res, compare(row, res, fixed), conj, at_table_n=fixed)
        if out.ok:
            return out
        first = first or out
        if _no_sign_choice(row.ap):
            break
    return first


def _no_sign_choice(ap: str) -> bool:
    """True when the expression has no square root whose sign could matter."""
    return "sqrt" not in ap
