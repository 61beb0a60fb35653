"""Knuth–Bendix completion under a total deglex order, and the
Métivier–Squier reduction of convergent presentations to reduced ones.

Completion repeatedly resolves critical branchings: both legs are normalized
with the leftmost strategy, and when the normal forms differ the pair is
oriented by deglex into a new rule.  Under a total deglex order on parallel
words, distinct normal forms always orient, so completion never fails — it
either finishes or runs forever, which the rule cap and fuel turn into an
honest FuelExhausted result carrying the partial system.

No inter-reduction happens inline; chain metivier_squier_reduce afterwards.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace

from .presentation import (
    DEFAULT_FUEL,
    FuelExhausted,
    PresentationError,
    RewriteStep,
    Rule,
    ZigZag,
    identity_word,
)
from .rewrite import (
    DEFAULT_PUMP_BOUND,
    check_deglex_termination,
    find_redexes,
    normalize,
    orient,
    termination_evidence,
)
from .branchings import decide_confluence, enumerate_critical_branchings

DEFAULT_MAX_RULES = 256


@dataclass(frozen=True)
class CompletionResult:
    final: Polygraph
    added_rules: tuple[Rule, ...]
    trace: tuple[dict, ...]
    status: str  # "Completed" | "FuelExhausted"


class _Budget:
    """A shared fuel pool across all normalizations of one run."""

    def __init__(self, fuel):
        self.left = fuel

    def normalize(self, p, w, pump_bound=0):
        nf, path = normalize(p, w, "leftmost", self.left, pump_bound)
        self.left -= len(path)
        return nf, path


def knuth_bendix(p, order=None, max_rules=DEFAULT_MAX_RULES, fuel=DEFAULT_FUEL):
    """Complete p into a convergent system under a total deglex order.

    The branching queue is FIFO: the initial critical branchings in their
    enumeration order, then, after each added rule, the new branchings that
    involve it.  ``max_rules`` caps the *total* number of rules.  The trace
    records one entry per processed branching: the joint normal form pair
    and either "joined" or the added rule.
    """
    if p.pumped:
        raise PresentationError("completion over pumped rule families is unsupported")
    order = order if order is not None else p.gen_order
    ok, report = check_deglex_termination(p, order)
    if not ok:
        bad = [e["rule"] for e in report if not e["ok"]]
        raise PresentationError(
            f"rules do not decrease under the given deglex order: {', '.join(bad)}"
        )
    if p.gen_order != order:
        p = replace(p, gen_order=tuple(order))

    budget = _Budget(fuel)
    queue = deque(enumerate_critical_branchings(p, 0))
    added = []
    trace = []
    counter = 1

    def fresh_name():
        nonlocal counter
        while f"kb{counter}" in p.rule_index:
            counter += 1
        name = f"kb{counter}"
        counter += 1
        return name

    while queue:
        b = queue.popleft()
        try:
            nf1, _ = budget.normalize(p, b.step1.target_word)
            nf2, _ = budget.normalize(p, b.step2.target_word)
        except FuelExhausted:
            trace.append({"action": "stopped: fuel exhausted", "source": str(b.source_word)})
            return CompletionResult(p, tuple(added), tuple(trace), "FuelExhausted")
        entry = {
            "source": str(b.source_word),
            "rules": [b.step1.rule.name, b.step2.rule.name],
            "nf1": str(nf1),
            "nf2": str(nf2),
        }
        if nf1 == nf2:
            entry["action"] = "joined"
            trace.append(entry)
            continue
        oriented = orient(order, nf1, nf2)
        assert oriented is not None, "distinct parallel words must orient under total deglex"
        lhs, rhs = oriented
        if len(p.rules) >= max_rules:
            entry["action"] = f"stopped: rule cap {max_rules} reached before orienting"
            trace.append(entry)
            return CompletionResult(p, tuple(added), tuple(trace), "FuelExhausted")
        rule = Rule(fresh_name(), lhs, rhs)
        entry["action"] = f"added {rule}"
        trace.append(entry)
        added.append(rule)
        p = replace(p, rules=p.rules + (rule,))
        for c in enumerate_critical_branchings(p, 0):
            if c.step1.rule == rule or c.step2.rule == rule:
                queue.append(c)

    return CompletionResult(p, tuple(added), tuple(trace), "Completed")


# ---------------------------------------------------------------------------
# reduced presentations


def is_reduced(p, pump_bound=DEFAULT_PUMP_BOUND):
    """Is every lhs irreducible by the *other* rules and every rhs
    irreducible by all rules?  Returns (ok, violations)."""
    violations = []
    instances = p.all_rule_instances(pump_bound)
    for rule in instances:
        for step in find_redexes(p, rule.lhs, pump_bound):
            if step.rule == rule:
                continue
            violations.append(
                f"rule {rule.name}: lhs {rule.lhs} reducible by {step.rule.name} "
                f"at {step.position}"
            )
            break
        for step in find_redexes(p, rule.rhs, pump_bound):
            violations.append(
                f"rule {rule.name}: rhs {rule.rhs} reducible by {step.rule.name} "
                f"at {step.position}"
            )
            break
    return not violations, violations


@dataclass(frozen=True)
class ReductionResult:
    final: Polygraph
    trace: tuple[dict, ...]


def metivier_squier_reduce(p, fuel=DEFAULT_FUEL, cert=None, ack_sampled=False):
    """Reduce a convergent presentation to a Tietze-equivalent reduced one.

    Three passes: (1) replace every rhs by its normal form — sound because
    matching depends only on the left-hand sides, which this pass never
    touches; (2) drop duplicates of rules with an identical boundary,
    keeping the first declared; (3) drop every rule whose lhs properly
    contains the lhs of another surviving rule.  Containment is transitive,
    so survival in pass 3 does not depend on processing order.

    Each removal/replacement is recorded in the trace together with a
    rewriting witness (checked here) showing the discarded boundary is still
    derivable — the soundness content of the corresponding Tietze moves.
    """
    if p.pumped:
        raise PresentationError("reduction over pumped rule families is unsupported")
    termination_evidence(p, cert, ack_sampled, 0)
    confluent, _ = decide_confluence(p, fuel=fuel, pump_bound=0, assume_terminating=True)
    if not confluent:
        raise PresentationError("reduction requires a confluent input system")

    budget = _Budget(fuel)
    trace = []

    # pass 1: normalize right-hand sides (to fixpoint; the second sweep only
    # verifies nothing changes, see the docstring)
    rules = list(p.rules)
    changed = True
    while changed:
        changed = False
        for i, rule in enumerate(rules):
            current = replace(p, rules=tuple(rules))
            nf, path = budget.normalize(current, rule.rhs)
            if nf == rule.rhs:
                continue
            witness = ZigZag.of(*(
                (rule_step(rule),) + path.steps
            ))
            trace.append({
                "pass": 1, "rule": rule.name,
                "old": str(rule.rhs), "new": str(nf),
                "witness": str(witness),
            })
            rules[i] = Rule(rule.name, rule.lhs, nf, origin=rule.origin)
            changed = True
    p = replace(p, rules=tuple(rules))

    # pass 2: duplicate boundaries — keep the first declared
    seen = {}
    kept = []
    for rule in p.rules:
        key = (rule.lhs.letters, rule.rhs.letters)
        if key in seen:
            keeper = seen[key]
            witness = ZigZag.of(rule_step(keeper))
            trace.append({
                "pass": 2, "removed": rule.name, "kept": keeper.name,
                "witness": str(witness),
            })
        else:
            seen[key] = rule
            kept.append(rule)
    p = replace(p, rules=tuple(kept))

    # pass 3: left-hand sides containing another surviving lhs
    def properly_contains(big, small):
        return len(small) < len(big) and big.occurrences(small)

    survivors = [
        r for r in p.rules
        if not any(properly_contains(r.lhs, other.lhs) for other in p.rules if other != r)
    ]
    final = replace(p, rules=tuple(survivors))
    for rule in p.rules:
        if rule in survivors:
            continue
        inner = find_redexes(final, rule.lhs, 0)[0]
        nf, path = budget.normalize(final, inner.target_word)
        witness = ZigZag.of(*((inner,) + path.steps))
        if witness.target != rule.rhs:
            raise AssertionError(
                f"pass 3 witness for {rule.name} ends at {witness.target}, "
                f"expected {rule.rhs}; input was not convergent"
            )
        trace.append({
            "pass": 3, "removed": rule.name,
            "contains": inner.rule.name, "witness": str(witness),
        })

    ok, violations = is_reduced(final, 0)
    assert ok, f"reduction left violations: {violations}"
    return ReductionResult(final, tuple(trace))


def rule_step(rule, forward=True):
    """The whisker-free rewriting step of a rule at its own lhs."""
    return RewriteStep(
        identity_word(rule.lhs.source), rule, identity_word(rule.lhs.target), forward
    )
