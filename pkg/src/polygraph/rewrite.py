"""The rewriting engine: redex search, strategies, normalization, the deglex
order, termination checks, and the word problem for certified-convergent
presentations.

Pumped rule families are instantiated lazily.  A pumped left-hand side longer
than the inspected word can never match, so instantiating up to
max(word length, pump_bound) makes normalization *exact* on the infinite
systems, not approximate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .presentation import (
    DEFAULT_FUEL,
    CompositionError,
    FuelExhausted,
    NotCertified,
    PresentationError,
    RewriteStep,
    TwoCellPath,
    ZigZag,
)

__all__ = [
    "DEFAULT_FUEL",
    "DEFAULT_PUMP_BOUND",
    "RewriteStep",
    "TwoCellPath",
    "ZigZag",
    "find_redexes",
    "apply_step",
    "leftmost_step",
    "rightmost_step",
    "normalize",
    "deglex_compare",
    "orient",
    "check_deglex_termination",
    "InterpretationCert",
    "parse_certificate",
    "check_interpretation_certificate",
    "termination_evidence",
    "certify_convergent",
    "word_eq",
]

DEFAULT_PUMP_BOUND = 8

LESS, EQUAL, GREATER = -1, 0, 1


# ---------------------------------------------------------------------------
# redexes and steps


def find_redexes(p, w, pump_bound=DEFAULT_PUMP_BOUND):
    """Every way a rule matches inside w, as forward rewriting steps.

    Sorted by position, then by rule declaration order (pumped families come
    after the plain rules, instances ordered by n).  Rules with an identity
    lhs never match.  Pumped instances are enumerated for n <= pump_bound,
    further capped by len(w) since longer instances cannot match.
    """
    instances = list(p.rules)
    for fam in p.pumped:
        top = min(pump_bound, len(w))
        instances.extend(fam.instance(n) for n in range(top + 1))
    out = []
    for rule in instances:
        if rule.lhs.is_identity:
            continue
        for pos in w.occurrences(rule.lhs):
            out.append(
                RewriteStep(w.slice(0, pos), rule, w.slice(pos + len(rule.lhs), len(w)))
            )
    out.sort(key=lambda s: (s.position, p.rule_key(s.rule)))
    return out


def apply_step(w, rule, position):
    """Rewrite w with one rule application at the given position."""
    if position not in w.occurrences(rule.lhs):
        raise CompositionError(f"{rule.lhs} does not occur in {w} at position {position}")
    step = RewriteStep(w.slice(0, position), rule, w.slice(position + len(rule.lhs), len(w)))
    return step.target_word


def leftmost_step(p, w, pump_bound=DEFAULT_PUMP_BOUND):
    """The leftmost-innermost redex: least position, first-declared rule."""
    redexes = find_redexes(p, w, pump_bound)
    return redexes[0] if redexes else None


def rightmost_step(p, w, pump_bound=DEFAULT_PUMP_BOUND):
    """The rightmost redex: greatest end position, tie broken by greatest
    start position, then by declaration order."""
    redexes = find_redexes(p, w, pump_bound)
    if not redexes:
        return None
    best = max((s.span[1], s.span[0]) for s in redexes)
    tied = [s for s in redexes if (s.span[1], s.span[0]) == best]
    return min(tied, key=lambda s: p.rule_key(s.rule))


_STRATEGIES = {"leftmost": leftmost_step, "rightmost": rightmost_step}


def normalize(p, w, strategy="leftmost", fuel=DEFAULT_FUEL, pump_bound=0):
    """Rewrite w to a normal form, returning (normal form, rewriting path).

    Deterministic given the strategy.  Pumped instances are enumerated up to
    max(pump_bound, current word length) at every step, which is exact.
    Raises FuelExhausted (with the partial path in .trace) after `fuel`
    steps — the signal for suspected non-termination.
    """
    try:
        pick = _STRATEGIES[strategy]
    except KeyError:
        raise ValueError(f"unknown strategy {strategy!r}") from None
    steps = []
    current = w
    while True:
        step = pick(p, current, max(pump_bound, len(current)))
        if step is None:
            return current, TwoCellPath(w, tuple(steps))
        if len(steps) >= fuel:
            raise FuelExhausted(
                f"normalization of '{w}' did not finish within {fuel} steps",
                trace=TwoCellPath(w, tuple(steps)),
            )
        steps.append(step)
        current = step.target_word


# ---------------------------------------------------------------------------
# the deglex order


def deglex_compare(order, u, v):
    """Degree-wise lexicographic comparison: length first, then letterwise.

    A strict total order on parallel words whenever `order` is a total order
    on the generators.
    """
    rank = _rank(order)
    if len(u) != len(v):
        return LESS if len(u) < len(v) else GREATER
    for a, b in zip(u.letters, v.letters):
        if a != b:
            return LESS if rank[a] < rank[b] else GREATER
    return EQUAL


def _rank(order):
    if order is None:
        raise PresentationError("no generator order declared (add an order: clause)")
    if isinstance(order, dict):
        return order
    return {name: i for i, name in enumerate(order)}


def orient(order, u, v):
    """Orient a pair of parallel words into a decreasing rule.

    Returns (lhs, rhs) with lhs > rhs under deglex, or None when u = v (the
    unorientable case — deglex is total on parallel words, so distinct words
    always orient).
    """
    c = deglex_compare(order, u, v)
    if c == EQUAL:
        return None
    return (u, v) if c == GREATER else (v, u)


def check_deglex_termination(p, order=None, pump_bound=DEFAULT_PUMP_BOUND):
    """Does every rule strictly decrease the deglex order?

    Plain rules are compared directly.  For a pumped family
    prefix·g^n·suffix => prefix'·g^(pn+q)·suffix' the length difference is
    affine in n, so length arithmetic settles all but finitely many
    instances; the letterwise comparison of length-tied instances stabilizes
    once n exceeds the fixed parts, so checking small n decides the family.

    Returns (ok, report) where report has one entry per rule/family.
    """
    order = order if order is not None else p.gen_order
    rank = _rank(order)  # raises if absent
    report = []
    ok = True

    for r in p.rules:
        good = deglex_compare(rank, r.lhs, r.rhs) == GREATER
        report.append(
            {"rule": r.name, "ok": good,
             "detail": "lhs > rhs" if good else f"{r.lhs} is not deglex-greater than {r.rhs}"}
        )
        ok = ok and good

    for fam in p.pumped:
        lhs_fixed = len(fam.lhs_prefix) + len(fam.lhs_suffix)
        rhs_fixed = len(fam.rhs_prefix) + len(fam.rhs_suffix) + fam.rhs_q
        if fam.rhs_p == 1:
            diff = lhs_fixed - rhs_fixed  # constant in n
            if diff > 0:
                good, detail = True, f"every instance shortens by {diff}"
            elif diff < 0:
                good, detail = False, f"every instance grows by {-diff}"
            else:
                checked = range(max(pump_bound, 3) + 1)
                bad = [n for n in checked
                       if deglex_compare(rank, fam.instance(n).lhs, fam.instance(n).rhs)
                       != GREATER]
                good = not bad
                detail = ("length-tied; letterwise decrease verified (stable in n)"
                          if good else f"instance n={bad[0]} does not decrease")
        else:
            # rhs length is constant; lhs grows, so only small n can fail
            tail = max(rhs_fixed - lhs_fixed, 0) + 1
            checked = range(max(tail, pump_bound, 3) + 1)
            bad = [n for n in checked
                   if deglex_compare(rank, fam.instance(n).lhs, fam.instance(n).rhs)
                   != GREATER]
            good = not bad
            detail = ("decreases for all n (length wins beyond checked range)"
                      if good else f"instance n={bad[0]} does not decrease")
        report.append({"rule": f"{fam.name}[n]", "ok": good, "detail": detail})
        ok = ok and good

    return ok, report


# ---------------------------------------------------------------------------
# interpretation certificates (termination beyond deglex)
#
# A certificate interprets each generator g by a monotone affine map
# g_*: n -> a*n + b on the naturals and a "derivation count"
# der(g): n -> sum of c * beta^n with beta in {1,2,3}.  Words compose by
#     (uv)_*(n) = v_*(u_*(n)),    der(uv)(n) = der(u)(n) + der(v)(u_*(n)),
# and the certificate claims u_*(n) >= v_*(n) and der(u)(n) > der(v)(n) for every
# rule u => v.  Checking samples n <= sample_bound falsifies bad certificates
# but proves nothing — the report says PASS(sampled), never "proved".


@dataclass(frozen=True)
class InterpretationCert:
    star: dict  # generator -> (a, b) meaning n -> a*n + b, a >= 0
    der: dict  # generator -> tuple of (coef, base) terms, base in {1, 2, 3}

    def star_word(self, w, n):
        for letter in w.letters:
            a, b = self.star[letter]
            n = a * n + b
        return n

    def der_word(self, w, n):
        total = 0
        for letter in w.letters:
            total += sum(c * base**n for c, base in self.der[letter])
            a, b = self.star[letter]
            n = a * n + b
        return total

    def covers(self, p):
        return all(g.name in self.star and g.name in self.der for g in p.generators)


def _parse_affine_star(text, line):
    text = text.replace(" ", "")
    m = re.fullmatch(r"(?:(\d+)\*?)?n(?:\+(\d+))?", text)
    if m:
        return (int(m.group(1)) if m.group(1) else 1, int(m.group(2)) if m.group(2) else 0)
    if re.fullmatch(r"\d+", text):
        return (0, int(text))
    raise PresentationError(f"cannot parse affine map {text!r}", line)


def _parse_der(text, line):
    text = text.replace(" ", "")
    terms = []
    for part in text.split("+"):
        m = re.fullmatch(r"(?:(\d+)\*?)?([123])\^n", part)
        if m:
            terms.append((int(m.group(1)) if m.group(1) else 1, int(m.group(2))))
        elif re.fullmatch(r"\d+", part):
            if int(part):
                terms.append((int(part), 1))
        else:
            raise PresentationError(f"cannot parse derivation expression {part!r}", line)
    return tuple(terms)


def parse_certificate(text):
    """Parse a certificate file: one `gen: star EXPR ; der EXPR` entry per
    line, '#' comments.  Star expressions are affine (`n`, `n+1`, `2*n+3`,
    `0`); derivation expressions are sums of `c*B^n` terms with B in 1,2,3,
    plus integer constants (`3^n`, `2*3^n + 1`, `0`)."""
    star, der = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"(\S+?)\s*:\s*star\s+([^;]+);\s*der\s+(.+)", line)
        if not m:
            raise PresentationError(f"cannot parse certificate entry {line!r}", lineno)
        name, star_txt, der_txt = m.group(1), m.group(2).strip(), m.group(3).strip()
        if name in star:
            raise PresentationError(f"duplicate certificate entry for {name!r}", lineno)
        a, b = _parse_affine_star(star_txt, lineno)
        if a < 0:
            raise PresentationError(f"star map for {name!r} is not monotone", lineno)
        star[name] = (a, b)
        der[name] = _parse_der(der_txt, lineno)
    return InterpretationCert(star, der)


def check_interpretation_certificate(p, cert, sample_bound=16):
    """Falsification check of a termination certificate by sampling.

    Every rule (pumped instances included, pump index up to sample_bound) is
    tested at n = 0..sample_bound for the weak star inequality and the
    strict derivation inequality.  Returns a report dict; status is
    "PASS(sampled)" or "FAIL" with the first witness.
    """
    missing = [g.name for g in p.generators if g.name not in cert.star or g.name not in cert.der]
    if missing:
        raise PresentationError(f"certificate does not cover generators: {', '.join(missing)}")
    failures = []
    rules = list(p.rules) + [
        fam.instance(k) for fam in p.pumped for k in range(sample_bound + 1)
    ]
    checked = 0
    for rule in rules:
        for n in range(sample_bound + 1):
            checked += 1
            su, sv = cert.star_word(rule.lhs, n), cert.star_word(rule.rhs, n)
            du, dv = cert.der_word(rule.lhs, n), cert.der_word(rule.rhs, n)
            if not (su >= sv and du > dv):
                failures.append(
                    {"rule": rule.name, "n": n,
                     "star": (su, sv), "der": (du, dv),
                     "detail": f"need star {su} >= {sv} and der {du} > {dv}"}
                )
                break  # first witness per rule is enough
    return {
        "status": "FAIL" if failures else "PASS(sampled)",
        "passed": not failures,
        "sample_bound": sample_bound,
        "rules_checked": len(rules),
        "samples": checked,
        "failures": failures,
    }


# ---------------------------------------------------------------------------
# the word problem


def termination_evidence(p, cert=None, ack_sampled=False, pump_bound=DEFAULT_PUMP_BOUND):
    """Demand termination evidence; return a description of it.

    Accepted: a declared generator order passing the deglex check, or an
    interpretation certificate passing its sampled check *with the caller
    explicitly acknowledging* that sampling is falsification, not proof.
    Raises NotCertified otherwise.
    """
    if p.gen_order is not None and check_deglex_termination(p, pump_bound=pump_bound)[0]:
        return "deglex"
    if cert is not None:
        result = check_interpretation_certificate(p, cert, sample_bound=max(16, pump_bound))
        if not result["passed"]:
            first = result["failures"][0]
            raise NotCertified(
                f"interpretation certificate fails: {first['detail']} "
                f"(rule {first['rule']}, n={first['n']})"
            )
        if not ack_sampled:
            raise NotCertified(
                "certificate passed sampled checks only; pass ack_sampled=True "
                "(CLI: supplying --cert acknowledges this) to proceed"
            )
        return "interpretation (sampled)"
    raise NotCertified(
        "no termination evidence: declare a generator order passing the deglex "
        "check or supply an interpretation certificate"
    )


def certify_convergent(p, fuel=DEFAULT_FUEL, pump_bound=DEFAULT_PUMP_BOUND,
                       cert=None, ack_sampled=False):
    """Establish the evidence needed before trusting normal forms:
    termination (see termination_evidence) plus confluence of every critical
    branching.  Raises NotCertified when the evidence is missing or
    negative; returns a report otherwise.
    """
    from .branchings import decide_confluence  # cycle: branchings builds on rewrite

    termination = termination_evidence(p, cert, ack_sampled, pump_bound)
    confluent, conf_report = decide_confluence(p, fuel=fuel, pump_bound=pump_bound,
                                               assume_terminating=True)
    if not confluent:
        bad = next(e for e in conf_report["branchings"] if e["status"] == "NotConfluent")
        raise NotCertified(
            f"not confluent: branching on '{bad['source']}' has distinct normal forms "
            f"'{bad['nf1']}' and '{bad['nf2']}'"
        )
    return {"termination": termination, "confluence": conf_report}


def word_eq(p, u, v, fuel=DEFAULT_FUEL, pump_bound=DEFAULT_PUMP_BOUND,
            cert=None, ack_sampled=False):
    """Decide u = v in the presented monoid/category via normal forms.

    Sound only for convergent systems, so the certification gate runs first
    (see certify_convergent); NotCertified is raised rather than returning a
    possibly-wrong answer.
    """
    if u.source != v.source or u.target != v.target:
        raise CompositionError(f"'{u}' and '{v}' are not parallel")
    certify_convergent(p, fuel=fuel, pump_bound=pump_bound, cert=cert,
                       ack_sampled=ack_sampled)
    nf_u, _ = normalize(p, u, "leftmost", fuel, pump_bound)
    nf_v, _ = normalize(p, v, "leftmost", fuel, pump_bound)
    return nf_u == nf_v
