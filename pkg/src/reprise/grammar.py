"""Type-driven probabilistic grammar over combinator terms.

Generation at a goal type proceeds by choosing between a terminal
production (a base term or a primitive whose signature equals the goal)
and a recursive expansion:

* at a base goal, the expansion applies a sampled head to K argument
  subtrees through a spine of plain applications: the number of
  intermediate types K is truncated-geometric, the intermediate types are
  uniform over {n, c, m, (n->n)}, and the head is generated at the goal
  (t_i1 -> ... -> t_iK -> base);
* at an arrow goal with k routed arguments, the expansion samples a
  router string (uniform over the admissible strings of length k), one
  base intermediate type, and the two subtrees at their induced goals.

Primitives and routers are equiprobable conditioned on the goal type.
Choices that cannot complete within the depth cap are pruned and the
remaining choices renormalized, so the prior is proper and the scorer
reproduces the sampling distribution exactly. The expansion depth of a
program is the number of nested expansions; programs needing more than
max_depth expansions have probability zero.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_left
from dataclasses import dataclass
from itertools import product

from .terms import (
    BASE_TYPES,
    COUNT_ALPHABET,
    DEFAULT_PRIMITIVES,
    TIME_ALPHABET,
    App,
    BaseTerm,
    Hole,
    Primitive,
    Program,
    Term,
    TypeTag,
    check_type,
    contains_hole,
    print_term,
)
from .corpus import NOTE_ALPHABET

LOG2 = math.log(2)

# Intermediate types offered to spine expansions; the single arrow entry is
# what makes higher-order heads (iter) reachable.
SPINE_INTERMEDIATES = BASE_TYPES + (TypeTag("n", (TypeTag("n"),)),)
ROUTER_INTERMEDIATES = BASE_TYPES


class UnreachableTypeError(ValueError):
    pass


@dataclass(frozen=True)
class TraceNode:
    path: tuple
    goal: TypeTag
    depth: int
    local_logp: float
    is_leaf: bool


def _logaddexp(a: float, b: float) -> float:
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


class Grammar:
    """Immutable sampler/scorer pair over typed combinator terms."""

    def __init__(
        self,
        primitives: tuple[Primitive, ...] = DEFAULT_PRIMITIVES,
        note_alphabet: tuple = NOTE_ALPHABET,
        count_alphabet: tuple = COUNT_ALPHABET,
        time_alphabet: tuple = TIME_ALPHABET,
        p_terminal: float = 0.7,
        k_decay: float = 0.5,
        max_k: int = 3,
        max_depth: int = 8,
    ):
        if not 0 < p_terminal < 1:
            raise ValueError("p_terminal must lie in (0, 1)")
        if max_depth < 1 or max_k < 1:
            raise ValueError("max_depth and max_k must be >= 1")
        self.primitives = tuple(sorted(primitives, key=lambda p: p.name))
        self.alphabets = {
            "n": tuple(note_alphabet),
            "c": tuple(count_alphabet),
            "m": tuple(time_alphabet),
        }
        self.p_terminal = p_terminal
        self.k_decay = k_decay
        self.max_k = max_k
        self.max_depth = max_depth
        self._terminal_cache: dict[TypeTag, tuple[Term, ...]] = {}
        self._md: dict[TypeTag, float] = {}
        self._option_cache: dict = {}
        self._spine_cache: dict = {}
        self._router_cache: dict = {}
        self._score_cache: dict = {}
        self._partial_cache: dict = {}

    # -- choice sets -------------------------------------------------------

    def _terminals(self, t: TypeTag) -> tuple[Term, ...]:
        cached = self._terminal_cache.get(t)
        if cached is None:
            out: list[Term] = []
            if t.is_base:
                out.extend(BaseTerm(t.result, v) for v in sorted(self.alphabets[t.result]))
            out.extend(p for p in self.primitives if p.signature == t)
            cached = tuple(out)
            self._terminal_cache[t] = cached
        return cached

    def _option_children(self, t: TypeTag):
        """All recursive expansions at t, ignoring depth: list of child-goal tuples."""
        cached = self._option_cache.get(t)
        if cached is None:
            out = []
            if t.is_base:
                for k in range(1, self.max_k + 1):
                    for tup in product(SPINE_INTERMEDIATES, repeat=k):
                        head = TypeTag(t.result, tup)
                        out.append((head,) + tup)
            elif t.arity <= 2:
                for r in ("".join(chars) for chars in product("BCS", repeat=t.arity)):
                    la = tuple(t.args[i] for i, ch in enumerate(r) if ch in "CS")
                    ra = tuple(t.args[i] for i, ch in enumerate(r) if ch in "BS")
                    for ti in ROUTER_INTERMEDIATES:
                        f_goal = TypeTag(t.result, la + (ti,))
                        g_goal = TypeTag(ti.result, ra)
                        out.append((f_goal, g_goal))
            cached = tuple(out)
            self._option_cache[t] = cached
        return cached

    def min_height(self, t: TypeTag) -> float:
        """Minimal number of nested expansions needed to finish a tree at t."""
        if t not in self._md:
            seen = set()
            stack = [t]
            while stack:
                g = stack.pop()
                if g in seen or g in self._md:
                    continue
                seen.add(g)
                for children in self._option_children(g):
                    stack.extend(children)
            est = {g: (1.0 if self._terminals(g) else math.inf) for g in seen}

            def lookup(g):
                return est.get(g, self._md.get(g, math.inf))

            changed = True
            while changed:
                changed = False
                for g in seen:
                    for children in self._option_children(g):
                        h = 1 + max(lookup(c) for c in children)
                        if h < est[g]:
                            est[g] = h
                            changed = True
            self._md.update(est)
        return self._md[t]

    def _spine_choices(self, t: TypeTag, depth: int):
        """Admissible (K -> sorted tuples) plus K weights at a base goal."""
        key = (t, depth)
        cached = self._spine_cache.get(key)
        if cached is None:
            budget = self.max_depth - depth
            by_k = {}
            for k in range(1, self.max_k + 1):
                tuples = []
                for tup in product(SPINE_INTERMEDIATES, repeat=k):
                    head = TypeTag(t.result, tup)
                    if self.min_height(head) <= budget and all(
                        self.min_height(a) <= budget for a in tup
                    ):
                        tuples.append(tup)
                if tuples:
                    tuples.sort(key=lambda tup: tuple(a.text() for a in tup))
                    by_k[k] = tuple(tuples)
            weights = {k: self.k_decay**k for k in by_k}
            total = sum(weights.values())
            probs = {k: w / total for k, w in weights.items()} if total else {}
            cached = (by_k, probs)
            self._spine_cache[key] = cached
        return cached

    def _router_choices(self, t: TypeTag, depth: int):
        """Admissible router -> sorted intermediate types at an arrow goal."""
        key = (t, depth)
        cached = self._router_cache.get(key)
        if cached is None:
            budget = self.max_depth - depth
            by_router = {}
            if 1 <= t.arity <= 2:
                for chars in product("BCS", repeat=t.arity):
                    r = "".join(chars)
                    la = tuple(t.args[i] for i, ch in enumerate(r) if ch in "CS")
                    ra = tuple(t.args[i] for i, ch in enumerate(r) if ch in "BS")
                    tis = []
                    for ti in ROUTER_INTERMEDIATES:
                        f_goal = TypeTag(t.result, la + (ti,))
                        g_goal = TypeTag(ti.result, ra)
                        if (
                            self.min_height(f_goal) <= budget
                            and self.min_height(g_goal) <= budget
                        ):
                            tis.append(ti)
                    if tis:
                        by_router[r] = tuple(sorted(tis, key=lambda a: a.text()))
            cached = dict(sorted(by_router.items()))
            self._router_cache[key] = cached
        return cached

    def _branch_logps(self, t: TypeTag, depth: int) -> tuple[float, float]:
        """(log P(terminal), log P(recursive)) at this goal and depth."""
        has_terminal = bool(self._terminals(t))
        if t.is_base:
            has_recursive = bool(self._spine_choices(t, depth)[0])
        else:
            has_recursive = bool(self._router_choices(t, depth))
        if has_terminal and has_recursive:
            return math.log(self.p_terminal), math.log1p(-self.p_terminal)
        if has_terminal:
            return 0.0, -math.inf
        if has_recursive:
            return -math.inf, 0.0
        return -math.inf, -math.inf

    # -- reuse hook (overridden by the adapted grammar) ---------------------
    #
    # The cache competes with *construction*: when the recursive branch is
    # taken, a cached composite is returned with probability (1 - lambda1)
    # and a fresh expansion happens otherwise. Terminal emission is never
    # taxed, so note-by-note spelling costs the same as under the plain
    # grammar no matter how large the cache grows.

    def _reuse(self, t: TypeTag):
        """Return (lambda1, draw_table, score_table) or None when no cache applies."""
        return None

    # -- sampling -----------------------------------------------------------

    def sample_program(self, t: TypeTag, seed) -> Program:
        rng = seed if isinstance(seed, random.Random) else random.Random(seed)
        if self.min_height(t) > self.max_depth:
            raise UnreachableTypeError(f"type {t.text()} is not reachable")
        return Program(self.sample_term(t, rng), t)

    def sample_term(self, t: TypeTag, rng: random.Random, depth: int = 1) -> Term:
        log_t, log_r = self._branch_logps(t, depth)
        if log_t == -math.inf and log_r == -math.inf:
            raise UnreachableTypeError(
                f"type {t.text()} has no expansion at depth {depth}"
            )
        go_terminal = log_r == -math.inf or (
            log_t != -math.inf and rng.random() < math.exp(log_t)
        )
        if go_terminal:
            terms = self._terminals(t)
            return terms[rng.randrange(len(terms))]
        reuse = self._reuse(t)
        if reuse is not None:
            lam1, (values, cum), _ = reuse
            if rng.random() >= lam1:
                u = rng.random() * cum[-1]
                return values[bisect_left(cum, u) if u > 0 else 0]
        if t.is_base:
            by_k, k_probs = self._spine_choices(t, depth)
            u = rng.random()
            acc = 0.0
            ks = sorted(by_k)
            k = ks[-1]
            for cand in ks:
                acc += k_probs[cand]
                if u < acc:
                    k = cand
                    break
            tuples = by_k[k]
            tup = tuples[rng.randrange(len(tuples))]
            head_goal = TypeTag(t.result, tup)
            node = self.sample_term(head_goal, rng, depth + 1)
            for ti in tup:
                node = App("", node, self.sample_term(ti, rng, depth + 1))
            return node
        by_router = self._router_choices(t, depth)
        routers = list(by_router)
        r = routers[rng.randrange(len(routers))]
        tis = by_router[r]
        ti = tis[rng.randrange(len(tis))]
        la = tuple(t.args[i] for i, ch in enumerate(r) if ch in "CS")
        ra = tuple(t.args[i] for i, ch in enumerate(r) if ch in "BS")
        f = self.sample_term(TypeTag(t.result, la + (ti,)), rng, depth + 1)
        g = self.sample_term(TypeTag(ti.result, ra), rng, depth + 1)
        return App(r, f, g)

    def sampler(self):
        """Type-conditioned sampler callable, e.g. for hole refilling."""
        return lambda t, rng: self.sample_term(t, rng)

    # -- scoring ------------------------------------------------------------

    def log_prior(self, program_or_term, t: TypeTag | None = None) -> float:
        """Natural log-probability of generating the term at goal t (-inf if impossible)."""
        term = (
            program_or_term.root if isinstance(program_or_term, Program) else program_or_term
        )
        if t is None:
            t = (
                program_or_term.inferred_type
                if isinstance(program_or_term, Program)
                else check_type(term)
            )
        return self._score(term, t, 1)

    def _score(self, term: Term, t: TypeTag, depth: int) -> float:
        key = (term, t, depth)
        cached = self._score_cache.get(key)
        if cached is None:
            cached = self._score_uncached(term, t, depth)
            self._score_cache[key] = cached
        return cached

    def _score_uncached(self, term: Term, t: TypeTag, depth: int) -> float:
        logp = self._construct_score(term, t, depth)
        reuse = self._reuse(t)
        if reuse is None or not isinstance(term, App):
            return logp
        lam1, _, score_table = reuse
        logp += math.log(lam1) if lam1 > 0 else -math.inf
        if not contains_hole(term):
            lam2 = score_table.get(term)
            if lam2 is not None and lam1 < 1:
                _, log_r = self._branch_logps(t, depth)
                if log_r != -math.inf:
                    logp = _logaddexp(logp, log_r + math.log1p(-lam1) + math.log(lam2))
        return logp

    def _construct_score(self, term: Term, t: TypeTag, depth: int) -> float:
        if depth > self.max_depth:
            return -math.inf
        if isinstance(term, Hole):
            return -math.inf
        if isinstance(term, (BaseTerm, Primitive)):
            terms = self._terminals(t)
            if term not in terms:
                return -math.inf
            log_t, _ = self._branch_logps(t, depth)
            return log_t - math.log(len(terms))
        if not isinstance(term, App):
            return -math.inf
        if t.is_base:
            if term.router != "":
                return -math.inf
            # Collect the maximal plain-application spine below the root.
            args_rev = []
            node = term
            while isinstance(node, App) and node.router == "":
                args_rev.append(node.right)
                node = node.left
            full = len(args_rev)
            _, log_r = self._branch_logps(t, depth)
            if log_r == -math.inf:
                return -math.inf
            by_k, k_probs = self._spine_choices(t, depth)
            total = -math.inf
            for k in by_k:
                if k > full:
                    continue
                used = args_rev[:k][::-1]  # g_1 .. g_k in application order
                try:
                    tup = tuple(check_type(g) for g in used)
                except Exception:
                    continue
                if tup not in by_k[k]:
                    continue
                head = term
                for _ in range(k):
                    head = head.left
                head_goal = TypeTag(t.result, tup)
                lp = log_r + math.log(k_probs[k]) - math.log(len(by_k[k]))
                lp += self._score(head, head_goal, depth + 1)
                for g, ti in zip(used, tup):
                    if lp == -math.inf:
                        break
                    lp += self._score(g, ti, depth + 1)
                total = _logaddexp(total, lp)
            return total
        # Arrow goal: router expansion.
        r = term.router
        if len(r) != t.arity:
            return -math.inf
        by_router = self._router_choices(t, depth)
        tis = by_router.get(r)
        if not tis:
            return -math.inf
        ra = tuple(t.args[i] for i, ch in enumerate(r) if ch in "BS")
        la = tuple(t.args[i] for i, ch in enumerate(r) if ch in "CS")
        try:
            tg = check_type(term.right)
        except Exception:
            return -math.inf
        if tg.args[: len(ra)] != ra:
            return -math.inf
        ti = tg.drop_args(len(ra))
        if ti not in tis:
            return -math.inf
        _, log_r_branch = self._branch_logps(t, depth)
        lp = log_r_branch - math.log(len(by_router)) - math.log(len(tis))
        lp += self._score(term.left, TypeTag(t.result, la + (ti,)), depth + 1)
        if lp != -math.inf:
            lp += self._score(term.right, TypeTag(ti.result, ra), depth + 1)
        return lp

    # -- partial terms (holes transmit nothing) ------------------------------

    def partial_log_prior(self, term: Term, t: TypeTag, depth: int = 1) -> float:
        key = (term, t, depth)
        cached = self._partial_cache.get(key)
        if cached is None:
            if isinstance(term, Hole):
                cached = 0.0 if term.expected == t else -math.inf
            elif not contains_hole(term):
                cached = self._score(term, t, depth)
            else:
                cached = self._partial_app_score(term, t, depth)
            self._partial_cache[key] = cached
        return cached

    def _partial_app_score(self, term: Term, t: TypeTag, depth: int) -> float:
        # Holed terms are always App nodes below the root check in partial_log_prior.
        if depth > self.max_depth or not isinstance(term, App):
            return -math.inf
        reuse = self._reuse(t)
        extra = 0.0
        if reuse is not None:
            lam1 = reuse[0]
            extra = math.log(lam1) if lam1 > 0 else -math.inf
        if t.is_base:
            if term.router != "":
                return -math.inf
            args_rev = []
            node = term
            while isinstance(node, App) and node.router == "":
                args_rev.append(node.right)
                node = node.left
            full = len(args_rev)
            _, log_r = self._branch_logps(t, depth)
            if log_r == -math.inf:
                return -math.inf
            by_k, k_probs = self._spine_choices(t, depth)
            total = -math.inf
            for k in by_k:
                if k > full:
                    continue
                used = args_rev[:k][::-1]
                tup = self._partial_arg_types(used)
                if tup is None or tup not in by_k[k]:
                    continue
                head = term
                for _ in range(k):
                    head = head.left
                lp = log_r + math.log(k_probs[k]) - math.log(len(by_k[k]))
                lp += self.partial_log_prior(head, TypeTag(t.result, tup), depth + 1)
                for g, ti in zip(used, tup):
                    if lp == -math.inf:
                        break
                    lp += self.partial_log_prior(g, ti, depth + 1)
                total = _logaddexp(total, lp)
            return extra + total
        r = term.router
        if len(r) != t.arity:
            return -math.inf
        by_router = self._router_choices(t, depth)
        tis = by_router.get(r)
        if not tis:
            return -math.inf
        ra = tuple(t.args[i] for i, ch in enumerate(r) if ch in "BS")
        la = tuple(t.args[i] for i, ch in enumerate(r) if ch in "CS")
        tg_full = self._partial_arg_types([term.right])
        if tg_full is None:
            return -math.inf
        tg = tg_full[0]
        if tg.args[: len(ra)] != ra:
            return -math.inf
        ti = tg.drop_args(len(ra))
        if ti not in tis:
            return -math.inf
        _, log_r_branch = self._branch_logps(t, depth)
        lp = log_r_branch - math.log(len(by_router)) - math.log(len(tis))
        lp += self.partial_log_prior(term.left, TypeTag(t.result, la + (ti,)), depth + 1)
        if lp != -math.inf:
            lp += self.partial_log_prior(term.right, TypeTag(ti.result, ra), depth + 1)
        return extra + lp

    @staticmethod
    def _partial_arg_types(terms):
        out = []
        for g in terms:
            try:
                out.append(check_type(g))
            except Exception:
                return None
        return tuple(out)

    def partial_description_length(self, term: Term, t: TypeTag) -> float:
        """Bits of the hole-free remainder of a partially deleted term."""
        logp = self.partial_log_prior(term, t, 1)
        return math.inf if logp == -math.inf else -logp / LOG2

    # -- trace decomposition --------------------------------------------------

    def trace(self, term: Term, t: TypeTag) -> list[TraceNode]:
        """Per-node local log-probabilities along the construction reading.

        Locals sum to the construct-path log-prior; spine-internal nodes
        carry zero. Subtrees that do not decompose (only possible for terms
        this grammar did not construct) appear as atomic leaves.
        """
        nodes: list[TraceNode] = []
        self._trace_walk(term, t, 1, (), nodes)
        return nodes

    def _trace_walk(self, term, t, depth, path, nodes):
        if isinstance(term, Hole):
            return
        if isinstance(term, (BaseTerm, Primitive)):
            nodes.append(TraceNode(path, t, depth, self._score(term, t, depth), True))
            return
        if t.is_base and isinstance(term, App) and term.router == "":
            args_rev = []
            node = term
            while isinstance(node, App) and node.router == "":
                args_rev.append(node.right)
                node = node.left
            full = len(args_rev)
            k = min(full, self.max_k)
            used = args_rev[:k][::-1]
            tup = self._partial_arg_types(used)
            by_k, k_probs = self._spine_choices(t, depth)
            _, log_r = self._branch_logps(t, depth)
            if tup is None or k not in by_k or tup not in by_k[k] or log_r == -math.inf:
                nodes.append(TraceNode(path, t, depth, self._score(term, t, depth), True))
                return
            local = log_r + math.log(k_probs[k]) - math.log(len(by_k[k]))
            reuse = self._reuse(t)
            if reuse is not None:
                local += math.log(reuse[0]) if reuse[0] > 0 else -math.inf
            nodes.append(TraceNode(path, t, depth, local, False))
            head = term
            for i in range(1, k):  # inner spine nodes: no local choices
                head = head.left
                nodes.append(TraceNode(path + (0,) * i, t, depth, 0.0, False))
            head = head.left
            self._trace_walk(head, TypeTag(t.result, tup), depth + 1, path + (0,) * k, nodes)
            # g_j sits at path + (0,)*(k-j) + (1,)
            for j, (g, ti) in enumerate(zip(used, tup), start=1):
                self._trace_walk(g, ti, depth + 1, path + (0,) * (k - j) + (1,), nodes)
            return
        if isinstance(term, App) and not t.is_base and len(term.router) == t.arity:
            r = term.router
            by_router = self._router_choices(t, depth)
            tis = by_router.get(r)
            ra = tuple(t.args[i] for i, ch in enumerate(r) if ch in "BS")
            la = tuple(t.args[i] for i, ch in enumerate(r) if ch in "CS")
            tg = self._partial_arg_types([term.right])
            _, log_r_branch = self._branch_logps(t, depth)
            ok = (
                tis
                and tg is not None
                and tg[0].args[: len(ra)] == ra
                and tg[0].drop_args(len(ra)) in tis
                and log_r_branch != -math.inf
            )
            if not ok:
                nodes.append(TraceNode(path, t, depth, self._score(term, t, depth), True))
                return
            ti = tg[0].drop_args(len(ra))
            local = log_r_branch - math.log(len(by_router)) - math.log(len(tis))
            reuse = self._reuse(t)
            if reuse is not None:
                local += math.log(reuse[0]) if reuse[0] > 0 else -math.inf
            nodes.append(TraceNode(path, t, depth, local, False))
            self._trace_walk(
                term.left, TypeTag(t.result, la + (ti,)), depth + 1, path + (0,), nodes
            )
            self._trace_walk(term.right, TypeTag(ti.result, ra), depth + 1, path + (1,), nodes)
            return
        nodes.append(TraceNode(path, t, depth, self._score(term, t, depth), True))

    # -- exhaustive enumeration (test oracle) ---------------------------------

    def enumerate_programs(self, t: TypeTag, max_depth: int):
        """All constructible programs of type t within `max_depth` expansions.

        Returns a list of (term, natural log-prior) pairs, scored exactly as
        log_prior does. Guarded to small depths; meant as a brute-force oracle.
        """
        if max_depth > 4:
            raise ValueError("enumeration guard: max_depth must be <= 4")
        out = self._enumerate(t, 1, max_depth)
        return sorted(out, key=lambda pair: print_term(pair[0]))

    def _enumerate(self, t: TypeTag, depth: int, enum_depth: int):
        if depth > enum_depth:
            return []
        result = []
        log_t, log_r = self._branch_logps(t, depth)
        if log_t != -math.inf:
            terms = self._terminals(t)
            lp = log_t - math.log(len(terms))
            result.extend((term, lp) for term in terms)
        if log_r == -math.inf:
            return result
        if t.is_base:
            by_k, k_probs = self._spine_choices(t, depth)
            for k, tuples in by_k.items():
                for tup in tuples:
                    lp0 = log_r + math.log(k_probs[k]) - math.log(len(tuples))
                    head_goal = TypeTag(t.result, tup)
                    heads = self._enumerate(head_goal, depth + 1, enum_depth)
                    arg_lists = [self._enumerate(ti, depth + 1, enum_depth) for ti in tup]
                    if not heads or any(not a for a in arg_lists):
                        continue
                    for head, lp_h in heads:
                        for combo in product(*arg_lists):
                            node = head
                            lp = lp0 + lp_h
                            for g, lp_g in combo:
                                node = App("", node, g)
                                lp += lp_g
                            result.append((node, lp))
        else:
            by_router = self._router_choices(t, depth)
            for r, tis in by_router.items():
                la_idx = [i for i, ch in enumerate(r) if ch in "CS"]
                ra_idx = [i for i, ch in enumerate(r) if ch in "BS"]
                la = tuple(t.args[i] for i in la_idx)
                ra = tuple(t.args[i] for i in ra_idx)
                for ti in tis:
                    lp0 = log_r - math.log(len(by_router)) - math.log(len(tis))
                    fs = self._enumerate(TypeTag(t.result, la + (ti,)), depth + 1, enum_depth)
                    gs = self._enumerate(TypeTag(ti.result, ra), depth + 1, enum_depth)
                    for f, lp_f in fs:
                        for g, lp_g in gs:
                            result.append((App(r, f, g), lp0 + lp_f + lp_g))
        return result

    def completion_mass(self, t: TypeTag, enum_depth: int, depth: int = 1) -> float:
        """Probability that a sample at t finishes within enum_depth expansions.

        1 minus this is the continuation mass of programs deeper than the
        enumeration horizon.
        """
        if depth > enum_depth:
            return 0.0
        log_t, log_r = self._branch_logps(t, depth)
        mass = math.exp(log_t) if log_t != -math.inf else 0.0
        if log_r == -math.inf:
            return mass
        p_rec = math.exp(log_r)
        if t.is_base:
            by_k, k_probs = self._spine_choices(t, depth)
            for k, tuples in by_k.items():
                for tup in tuples:
                    m = self.completion_mass(TypeTag(t.result, tup), enum_depth, depth + 1)
                    for ti in tup:
                        m *= self.completion_mass(ti, enum_depth, depth + 1)
                    mass += p_rec * k_probs[k] / len(tuples) * m
        else:
            by_router = self._router_choices(t, depth)
            for r, tis in by_router.items():
                la = tuple(t.args[i] for i, ch in enumerate(r) if ch in "CS")
                ra = tuple(t.args[i] for i, ch in enumerate(r) if ch in "BS")
                for ti in tis:
                    m = self.completion_mass(
                        TypeTag(t.result, la + (ti,)), enum_depth, depth + 1
                    ) * self.completion_mass(TypeTag(ti.result, ra), enum_depth, depth + 1)
                    mass += p_rec / len(by_router) / len(tis) * m
        return mass
