"""Pitman-Yor caching of reusable subprograms on top of the base grammar.

A library keeps one cache per type: a multiset of previously used
programs. During generation, a goal of type t first decides between
constructing a fresh program (probability lambda1) and returning a cached
one (drawn proportionally to lambda2); the split sharpens toward reuse as
the cache grows:

    lambda1 = (alpha + N_t * d) / (alpha + |C_t|)
    lambda2(pi) = (M_pi - d) / (|C_t| - N_t * d)

with N_t distinct entries, M_pi the count of pi, alpha > 0 and discount
0 < d < 1. Libraries are immutable snapshots; updates return new values.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from itertools import accumulate

from .grammar import Grammar
from .terms import (
    App,
    Program,
    Term,
    TypeTag,
    check_type,
    contains_hole,
    iter_nodes,
    parse_term,
    parse_type,
    print_term,
)


@dataclass(frozen=True)
class PitmanYorParams:
    # The concentration default suits desk-scale caches (tens to hundreds of
    # distinct programs): it keeps enough construction mass inside the
    # recursive branch that new structure is still discovered after the
    # cache fills up, while reuse dominates where the cache matches.
    alpha: float = 30.0
    discount: float = 0.5

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if not 0 < self.discount < 1:
            raise ValueError("discount must lie in (0, 1)")


def py_probabilities(cache: Counter, params: PitmanYorParams):
    """(lambda1, {program: lambda2}) for one cache; empty cache gives lambda1=1."""
    total = sum(cache.values())
    if total == 0:
        return 1.0, {}
    n_distinct = len(cache)
    lam1 = (params.alpha + n_distinct * params.discount) / (params.alpha + total)
    denom = total - n_distinct * params.discount
    lam2 = {term: (m - params.discount) / denom for term, m in cache.items()}
    return lam1, lam2


class Library:
    """Per-type caches of subprograms with use counts."""

    def __init__(self, caches: dict[TypeTag, Counter] | None = None):
        self._caches: dict[TypeTag, Counter] = {}
        if caches:
            for t, counter in caches.items():
                if counter:
                    self._caches[t] = Counter(counter)

    def cache(self, t: TypeTag) -> Counter:
        return self._caches.get(t, Counter())

    @property
    def types(self) -> tuple[TypeTag, ...]:
        return tuple(sorted(self._caches, key=lambda t: t.text()))

    def total_count(self) -> int:
        return sum(sum(c.values()) for c in self._caches.values())

    def distinct_count(self) -> int:
        return sum(len(c) for c in self._caches.values())

    def __eq__(self, other):
        return isinstance(other, Library) and self._caches == other._caches

    def __repr__(self):
        body = ", ".join(
            f"{t.text()}: {len(c)}/{sum(c.values())}" for t, c in sorted(
                self._caches.items(), key=lambda kv: kv[0].text()
            )
        )
        return f"Library({body})"

    def update(self, used) -> "Library":
        """New library with the composite hole-free subtrees of each used
        term cached (roots included).

        Only application-rooted subtrees enter the cache: base terms and
        bare primitives are already terminal productions of the grammar,
        and caching them would merely dilute the reuse mass. `used` is an
        iterable (multiset) of Terms or Programs; the input library is
        left untouched.
        """
        caches = {t: Counter(c) for t, c in self._caches.items()}
        for item in used:
            root = item.root if isinstance(item, Program) else item
            for _, node in iter_nodes(root):
                if not isinstance(node, App) or contains_hole(node):
                    continue
                t = check_type(node)
                caches.setdefault(t, Counter())[node] += 1
        return Library(caches)

    def to_json(self) -> str:
        doc = {
            t.text(): [
                [print_term(term), m]
                for term, m in sorted(c.items(), key=lambda kv: print_term(kv[0]))
            ]
            for t, c in sorted(self._caches.items(), key=lambda kv: kv[0].text())
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "Library":
        doc = json.loads(text)
        caches: dict[TypeTag, Counter] = {}
        for type_text, entries in doc.items():
            t = parse_type(type_text)
            counter = Counter()
            for term_text, m in entries:
                term = parse_term(term_text)
                if check_type(term) != t:
                    raise ValueError(f"cached program {term_text!r} is not of type {type_text}")
                counter[term] = int(m)
            caches[t] = counter
        return cls(caches)


def shared_subprogram_ratio(encodings) -> float:
    """Fraction of distinct subprograms unique to one melody's encoding.

    `encodings` maps melody id -> multiset (Counter or iterable) of
    subprogram Terms. Returns the uniqueness ratio; sharing is 1 - ratio.
    """
    if len(encodings) < 2:
        raise ValueError("need encodings for at least 2 melodies")
    melody_count: Counter = Counter()
    for subs in encodings.values():
        for term in set(subs):
            melody_count[term] += 1
    if not melody_count:
        return 1.0
    unique = sum(1 for n in melody_count.values() if n == 1)
    return unique / len(melody_count)


class AdaptedGrammar(Grammar):
    """Grammar whose every goal consults a Pitman-Yor cache before constructing.

    With an empty library this reduces bit-for-bit to the base grammar:
    no extra random draws are made and scores coincide.
    """

    def __init__(self, base: Grammar, library: Library, py: PitmanYorParams = PitmanYorParams()):
        super().__init__(
            primitives=base.primitives,
            note_alphabet=base.alphabets["n"],
            count_alphabet=base.alphabets["c"],
            time_alphabet=base.alphabets["m"],
            p_terminal=base.p_terminal,
            k_decay=base.k_decay,
            max_k=base.max_k,
            max_depth=base.max_depth,
        )
        self.base = base
        self.library = library
        self.py = py
        self._reuse_cache: dict[TypeTag, tuple | None] = {}

    def _reuse(self, t: TypeTag):
        cached = self._reuse_cache.get(t, "?")
        if cached == "?":
            counter = self.library.cache(t)
            if not counter:
                cached = None
            else:
                lam1, lam2 = py_probabilities(counter, self.py)
                values = sorted(counter, key=print_term)
                weights = [counter[v] - self.py.discount for v in values]
                cum = list(accumulate(weights))
                cached = (lam1, (values, cum), lam2)
            self._reuse_cache[t] = cached
        return cached

    def with_library(self, library: Library) -> "AdaptedGrammar":
        return AdaptedGrammar(self.base, library, self.py)
