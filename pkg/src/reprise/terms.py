"""Typed combinator terms: routing applications over melodic primitives.

A term is a binary application tree over primitives and base terms. An
application node carries a router string over {B, C, S} describing how the
node's routed arguments flow into the subtrees: for [r, f, g] applied to
x1..xk (k = len(r)), each C/S char sends the argument to f, each B/S char
to g, and the node's value is F(G) where F and G are the subtree values
applied to their routed arguments in order. An empty router is plain
application f(g). Reduction of the single-char cases gives the classic
combinators: [B,f,g] x = f(g x), [C,f,g] x = (f x) g, [S,f,g] x = (f x)(g x).

Base terms are singleton note sequences (pitch class or pause), counts
1-16, and time indices 1-16; the three carriers are distinct types even
though all are integers.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

from .corpus import NOTE_ALPHABET, PAUSE

MAX_ROUTER_LEN = 2
COUNT_ALPHABET = tuple(range(1, 17))
TIME_ALPHABET = tuple(range(1, 17))

DEFAULT_STEP_LIMIT = 10_000
DEFAULT_MAX_SEQ = 4096


class TypeCheckError(ValueError):
    pass


class EvaluationError(RuntimeError):
    pass


class EvaluationLimit(EvaluationError):
    """Reduction exceeded the step or output-length limit."""


# ---------------------------------------------------------------------------
# Types

@dataclass(frozen=True)
class TypeTag:
    """A curried arrow chain args[0] -> ... -> args[-1] -> result.

    Base types are the empty chain with result "n" (note sequence),
    "c" (count) or "m" (time index).
    """

    result: str
    args: tuple["TypeTag", ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def is_base(self) -> bool:
        return not self.args

    def drop_args(self, k: int) -> "TypeTag":
        return TypeTag(self.result, self.args[k:])

    def text(self) -> str:
        if self.is_base:
            return self.result
        parts = [a.text() for a in self.args] + [self.result]
        return "(" + "->".join(parts) + ")"

    def __repr__(self):
        return f"TypeTag({self.text()!r})"


T_NOTE = TypeTag("n")
T_COUNT = TypeTag("c")
T_TIME = TypeTag("m")
BASE_TYPES = (T_NOTE, T_COUNT, T_TIME)


def arrow(*chain: TypeTag) -> TypeTag:
    """Build args -> result from a left-to-right chain of types."""
    if len(chain) < 2:
        raise ValueError("arrow needs at least two types")
    last = chain[-1]
    return TypeTag(last.result, tuple(chain[:-1]) + last.args)


def parse_type(text: str) -> TypeTag:
    text = text.strip()
    if text in ("n", "c", "m"):
        return TypeTag(text)
    if not (text.startswith("(") and text.endswith(")")):
        raise TypeCheckError(f"bad type text {text!r}")
    inner = text[1:-1]
    parts = []
    depth = 0
    start = 0
    i = 0
    while i < len(inner):
        ch = inner[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0 and inner.startswith("->", i):
            parts.append(inner[start:i])
            start = i + 2
            i += 2
            continue
        i += 1
    parts.append(inner[start:])
    if len(parts) < 2:
        raise TypeCheckError(f"bad type text {text!r}")
    return arrow(*(parse_type(p) for p in parts))


# ---------------------------------------------------------------------------
# Terms

@dataclass(frozen=True)
class BaseTerm:
    kind: str  # "n" | "c" | "m"
    value: int


@dataclass(frozen=True)
class Primitive:
    name: str
    signature: TypeTag


@dataclass(frozen=True)
class Hole:
    expected: TypeTag


@dataclass(frozen=True)
class App:
    router: str
    left: "Term"
    right: "Term"


Term = BaseTerm | Primitive | Hole | App


@dataclass(frozen=True)
class Program:
    root: Term
    inferred_type: TypeTag


def note(value: int) -> BaseTerm:
    return BaseTerm("n", value)


def count(value: int) -> BaseTerm:
    return BaseTerm("c", value)


def time_index(value: int) -> BaseTerm:
    return BaseTerm("m", value)


_BASE_ALPHABETS = {"n": NOTE_ALPHABET, "c": COUNT_ALPHABET, "m": TIME_ALPHABET}


def check_type(term: Term) -> TypeTag:
    """Infer the unique type of a term, bottom-up.

    Holes are accepted and typed as their expected type; router strings
    longer than MAX_ROUTER_LEN are rejected.
    """
    if isinstance(term, BaseTerm):
        if term.kind not in _BASE_ALPHABETS:
            raise TypeCheckError(f"unknown base kind {term.kind!r}")
        if term.value not in _BASE_ALPHABETS[term.kind]:
            raise TypeCheckError(f"base value {term.value} outside the {term.kind} alphabet")
        return TypeTag(term.kind)
    if isinstance(term, Primitive):
        return term.signature
    if isinstance(term, Hole):
        return term.expected
    if isinstance(term, App):
        tf = check_type(term.left)
        tg = check_type(term.right)
        r = term.router
        if r == "":
            if tf.arity == 0:
                raise TypeCheckError("applying a non-function")
            if tf.args[0] != tg:
                raise TypeCheckError(
                    f"argument type {tg.text()} does not match {tf.args[0].text()}"
                )
            return tf.drop_args(1)
        if len(r) > MAX_ROUTER_LEN or any(ch not in "BCS" for ch in r):
            raise TypeCheckError(f"bad router {r!r}")
        left_idx = [i for i, ch in enumerate(r) if ch in "CS"]
        right_idx = [i for i, ch in enumerate(r) if ch in "BS"]
        if tf.arity < len(left_idx) + 1:
            raise TypeCheckError("left subtree cannot absorb the routed arguments")
        if tg.arity < len(right_idx):
            raise TypeCheckError("right subtree cannot absorb the routed arguments")
        arg_types: dict[int, TypeTag] = {}
        for j, i in enumerate(left_idx):
            arg_types[i] = tf.args[j]
        t_mid = tf.args[len(left_idx)]
        for j, i in enumerate(right_idx):
            if i in arg_types:
                if arg_types[i] != tg.args[j]:
                    raise TypeCheckError("S-routed argument typed differently by subtrees")
            else:
                arg_types[i] = tg.args[j]
        if tg.drop_args(len(right_idx)) != t_mid:
            raise TypeCheckError(
                f"right subtree yields {tg.drop_args(len(right_idx)).text()}, "
                f"left expects {t_mid.text()}"
            )
        result = tf.drop_args(len(left_idx) + 1)
        routed = tuple(arg_types[i] for i in range(len(r)))
        return TypeTag(result.result, routed + result.args)
    raise TypeCheckError(f"not a term: {term!r}")


def program(root: Term) -> Program:
    return Program(root, check_type(root))


# ---------------------------------------------------------------------------
# Evaluation

@dataclass
class _Closure:
    fn: object  # callable(args: tuple, ev: _Evaluator)
    arity: int
    held: tuple = ()


class _Evaluator:
    def __init__(self, step_limit: int, max_seq: int):
        self.steps = step_limit
        self.max_seq = max_seq

    def charge(self, n: int = 1):
        self.steps -= n
        if self.steps < 0:
            raise EvaluationLimit("reduction step limit exceeded")

    def check_seq(self, xs: tuple) -> tuple:
        if len(xs) > self.max_seq:
            raise EvaluationLimit("output sequence length limit exceeded")
        return xs

    def apply(self, fval, arg):
        self.charge()
        if not isinstance(fval, _Closure):
            raise EvaluationError("applying a non-function value")
        held = fval.held + (arg,)
        if len(held) == fval.arity:
            return fval.fn(held, self)
        return _Closure(fval.fn, fval.arity, held)


def _impl_up(args, ev):
    (xs,) = args
    return tuple(x if x == PAUSE else (x + 1) % 12 for x in xs)


def _impl_down(args, ev):
    (xs,) = args
    return tuple(x if x == PAUSE else (x - 1) % 12 for x in xs)


def _impl_rep(args, ev):
    xs, c = args
    return ev.check_seq(xs * c)


def _impl_get(args, ev):
    xs, m = args
    return xs[:m]


def _impl_concat(args, ev):
    xs, ys = args
    return ev.check_seq(xs + ys)


def _impl_iter(args, ev):
    f, xs, c = args
    out = ()
    cur = xs
    for _ in range(c):
        out = ev.check_seq(out + cur)
        cur = ev.apply(f, cur)
    return out


_PRIMITIVE_TABLE = {
    "up": (arrow(T_NOTE, T_NOTE), _impl_up, 1),
    "down": (arrow(T_NOTE, T_NOTE), _impl_down, 1),
    "rep": (arrow(T_NOTE, T_COUNT, T_NOTE), _impl_rep, 2),
    "get": (arrow(T_NOTE, T_TIME, T_NOTE), _impl_get, 2),
    "concat": (arrow(T_NOTE, T_NOTE, T_NOTE), _impl_concat, 2),
    "iter": (arrow(arrow(T_NOTE, T_NOTE), T_NOTE, T_COUNT, T_NOTE), _impl_iter, 3),
}

DEFAULT_PRIMITIVES = tuple(
    Primitive(name, sig) for name, (sig, _, _) in sorted(_PRIMITIVE_TABLE.items())
)


def prim(name: str) -> Primitive:
    sig, _, _ = _PRIMITIVE_TABLE[name]
    return Primitive(name, sig)


def _eval(term: Term, ev: _Evaluator):
    if isinstance(term, BaseTerm):
        if term.kind == "n":
            return (term.value,)
        return term.value
    if isinstance(term, Primitive):
        try:
            _, impl, arity = _PRIMITIVE_TABLE[term.name]
        except KeyError:
            raise EvaluationError(f"unknown primitive {term.name!r}") from None
        return _Closure(impl, arity)
    if isinstance(term, Hole):
        raise EvaluationError("cannot evaluate a term containing holes")
    if isinstance(term, App):
        fval = _eval(term.left, ev)
        gval = _eval(term.right, ev)
        r = term.router
        if r == "":
            return ev.apply(fval, gval)

        def routed(held, ev, fval=fval, gval=gval, r=r):
            F, G = fval, gval
            for ch, x in zip(r, held):
                if ch in "CS":
                    F = ev.apply(F, x)
                if ch in "BS":
                    G = ev.apply(G, x)
            return ev.apply(F, G)

        return _Closure(routed, len(r))
    raise EvaluationError(f"not a term: {term!r}")


def evaluate(
    program_or_term,
    args: tuple = (),
    step_limit: int = DEFAULT_STEP_LIMIT,
    max_seq: int = DEFAULT_MAX_SEQ,
) -> tuple[int, ...]:
    """Reduce a program (plus arguments matching its arrow chain) to a note sequence."""
    root = program_or_term.root if isinstance(program_or_term, Program) else program_or_term
    ev = _Evaluator(step_limit, max_seq)
    value = _eval(root, ev)
    for a in args:
        value = ev.apply(value, a)
    if isinstance(value, _Closure):
        raise EvaluationError("program still expects arguments")
    if not isinstance(value, tuple):
        raise EvaluationError("program does not yield a note sequence")
    return value


# ---------------------------------------------------------------------------
# Canonical text form

def print_term(term: Term) -> str:
    if isinstance(term, BaseTerm):
        v = "p" if (term.kind == "n" and term.value == PAUSE) else str(term.value)
        return f"{term.kind}{v}"
    if isinstance(term, Primitive):
        return term.name
    if isinstance(term, Hole):
        return "?" + term.expected.text()
    if isinstance(term, App):
        inner = f"{print_term(term.left)}, {print_term(term.right)}"
        return f"[{term.router}, {inner}]" if term.router else f"[{inner}]"
    raise ValueError(f"not a term: {term!r}")


_ROUTER_RE = re.compile(r"^[BCS]{1,2}$")
_BASE_RE = re.compile(r"^([ncm])(p|\d+)$")


def _tokenize(text: str):
    for tok in re.findall(r"\[|\]|,|[^\s\[\],]+", text):
        yield tok


def parse_term(text: str) -> Term:
    tokens = list(_tokenize(text))
    pos = 0

    def fail(msg):
        raise ValueError(f"bad program text at token {pos}: {msg}")

    def parse_one():
        nonlocal pos
        if pos >= len(tokens):
            fail("unexpected end")
        tok = tokens[pos]
        pos += 1
        if tok == "[":
            first = tokens[pos] if pos < len(tokens) else ""
            router = ""
            if _ROUTER_RE.match(first):
                router = first
                pos += 1
                expect(",")
            left = parse_one()
            expect(",")
            right = parse_one()
            expect("]")
            return App(router, left, right)
        if tok in ("]", ","):
            fail(f"unexpected {tok!r}")
        if tok.startswith("?"):
            return Hole(parse_type(tok[1:]))
        m = _BASE_RE.match(tok)
        if m:
            kind, v = m.groups()
            return BaseTerm(kind, PAUSE if v == "p" else int(v))
        if tok in _PRIMITIVE_TABLE:
            return prim(tok)
        fail(f"unknown token {tok!r}")

    def expect(sym):
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != sym:
            fail(f"expected {sym!r}")
        pos += 1

    term = parse_one()
    if pos != len(tokens):
        fail("trailing input")
    return term


# ---------------------------------------------------------------------------
# Structure utilities

def iter_nodes(term: Term, path: tuple = ()):
    """Yield (path, node) in preorder; path is a tuple of 0/1 child indices."""
    yield path, term
    if isinstance(term, App):
        yield from iter_nodes(term.left, path + (0,))
        yield from iter_nodes(term.right, path + (1,))


def contains_hole(term: Term) -> bool:
    return any(isinstance(n, Hole) for _, n in iter_nodes(term))


def subprograms(program_or_term) -> Counter:
    """Multiset of all hole-free subtrees (including the root when complete)."""
    root = program_or_term.root if isinstance(program_or_term, Program) else program_or_term
    out: Counter = Counter()
    for _, node in iter_nodes(root):
        if not contains_hole(node):
            out[node] += 1
    return out


def replace_at(term: Term, path: tuple, new: Term) -> Term:
    if not path:
        return new
    if not isinstance(term, App):
        raise ValueError("path descends below a leaf")
    if path[0] == 0:
        return App(term.router, replace_at(term.left, path[1:], new), term.right)
    return App(term.router, term.left, replace_at(term.right, path[1:], new))


def description_length(program_or_term, prior, t: TypeTag | None = None) -> float:
    """Description length in bits: -log2 of the prior probability.

    `prior` is either a callable (term, type) -> natural log-probability or
    an object exposing log_prior(term, type).
    """
    root = program_or_term.root if isinstance(program_or_term, Program) else program_or_term
    if t is None:
        t = (
            program_or_term.inferred_type
            if isinstance(program_or_term, Program)
            else check_type(root)
        )
    fn = prior.log_prior if hasattr(prior, "log_prior") else prior
    logp = fn(root, t)
    if logp == -math.inf:
        raise ValueError("program is not generable by the grammar")
    return -logp / math.log(2)


def delete_terms(program_or_term, max_bits: float, scorer, t: TypeTag | None = None) -> Term:
    """Replace leaves by typed holes until the hole-free remainder fits max_bits.

    Leaves go in order of decreasing local prior probability (cheapest
    information first; ties broken by preorder position). If even the bare
    skeleton exceeds the budget the whole program collapses to one hole.
    `scorer` must provide trace(term, type) and partial_description_length.
    """
    if max_bits <= 0:
        raise ValueError("max_bits must be positive")
    root = program_or_term.root if isinstance(program_or_term, Program) else program_or_term
    if t is None:
        t = (
            program_or_term.inferred_type
            if isinstance(program_or_term, Program)
            else check_type(root)
        )
    current = root
    if scorer.partial_description_length(current, t) <= max_bits:
        return current
    leaves = [n for n in scorer.trace(root, t) if n.is_leaf]
    leaves.sort(key=lambda n: (-n.local_logp, n.path))
    for leaf in leaves:
        current = replace_at(current, leaf.path, Hole(leaf.goal))
        if scorer.partial_description_length(current, t) <= max_bits:
            return current
    return Hole(t)


def fill_holes(term: Term, sampler, rng) -> Term:
    """Replace every hole by an independent draw from sampler(type, rng)."""
    if isinstance(term, Hole):
        return sampler(term.expected, rng)
    if isinstance(term, App):
        return App(
            term.router,
            fill_holes(term.left, sampler, rng),
            fill_holes(term.right, sampler, rng),
        )
    return term


def reconstruct(partial: Term, sampler, rng, args: tuple = (), max_retries: int = 20):
    """Fill holes from the sampler and evaluate; retry on runaway reductions."""
    last_err = None
    for _ in range(max_retries):
        filled = fill_holes(partial, sampler, rng)
        try:
            return evaluate(filled, args)
        except EvaluationLimit as e:
            last_err = e
    raise EvaluationError(f"reconstruction failed after {max_retries} retries") from last_err
