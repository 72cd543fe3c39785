"""Resource-bounded melody encoder/decoder.

Encoding walks a melody left to right. At each position it samples
candidate programs of the note-sequence type from the model (plain or
library-adapted grammar), scores each by log prior plus log likelihood
against the prefix it would cover, and keeps the best; the candidate's
output length decides how many notes the segment consumes. The proposal
pool is shared across the whole melody. If the resulting description
exceeds the bit budget, leaves are deleted globally (highest local prior
probability first) and re-sampled from the prior at decode time.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass

from .corpus import NOTE_ALPHABET, Melody, hamming_distortion
from .seeds import derive_seed
from .terms import (
    BaseTerm,
    EvaluationError,
    Hole,
    T_NOTE,
    Term,
    contains_hole,
    evaluate,
    parse_term,
    print_term,
    reconstruct,
    replace_at,
)

LOG2 = math.log(2)


@dataclass(frozen=True)
class Budget:
    max_bits: float  # description-length cap per melody
    max_proposals: int  # proposal count per melody

    def __post_init__(self):
        if self.max_bits <= 0:
            raise ValueError("max_bits must be > 0")
        if self.max_proposals < 1:
            raise ValueError("max_proposals must be >= 1")


@dataclass(frozen=True)
class NoiseModel:
    epsilon: float = 0.05

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")


@dataclass(frozen=True)
class Segment:
    term: Term
    consumed: int


@dataclass(frozen=True)
class Encoding:
    segments: tuple[Segment, ...]
    rate_bits: float
    source_id: str

    @property
    def is_exact(self) -> bool:
        return not any(contains_hole(s.term) for s in self.segments)

    def to_json(self) -> str:
        doc = {
            "melody_id": self.source_id,
            "rate_bits": self.rate_bits,
            "segments": [
                {"program": print_term(s.term), "consumed": s.consumed}
                for s in self.segments
            ],
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "Encoding":
        doc = json.loads(text)
        segs = tuple(
            Segment(parse_term(s["program"]), int(s["consumed"]))
            for s in doc["segments"]
        )
        return cls(segs, float(doc["rate_bits"]), doc["melody_id"])


def log_likelihood(observed, produced, noise: NoiseModel) -> float:
    """Per-note corruption likelihood of `observed` given program output.

    Matching positions contribute log(1 - eps), mismatches log(eps/11);
    observed positions beyond a short output count as mismatches.
    """
    if not produced:
        raise ValueError("produced sequence must be non-empty")
    eps = noise.epsilon
    overlap = min(len(observed), len(produced))
    matches = sum(1 for a, b in zip(observed, produced) if a == b)
    mismatches = overlap - matches + max(0, len(observed) - len(produced))
    return matches * math.log1p(-eps) + mismatches * math.log(eps / 11.0)


def _bits(model, term: Term) -> float:
    lp = model.log_prior(term, T_NOTE)
    if lp == -math.inf:
        raise ValueError(f"model cannot generate {print_term(term)}")
    return -lp / LOG2


def encode_segment(
    remaining,
    model,
    proposals: int,
    noise: NoiseModel,
    rng: random.Random,
    baseline_literal: bool = True,
):
    """Best of `proposals` prior draws against a prefix of `remaining`.

    Returns (term, consumed, proposals_used). Candidates are ranked by
    per-note log likelihood over the prefix they cover (match quality),
    with ties broken toward longer consumed prefixes and then fewer bits:
    the budgets cap description length and search separately, so among the
    affordable candidates the encoder's job is to minimize distortion.
    With baseline_literal, the always-available fallback, a literal of the
    next note, competes as a baseline candidate, so a structured program
    only wins a span it explains at least as well as note-by-note
    spelling; without it (one-shot regime) only sampled proposals compete
    and the literal is used just when every draw fails.
    """
    if not remaining:
        raise ValueError("remaining must be non-empty")
    if proposals < 1:
        raise ValueError("proposals must be >= 1")

    def scored(term, out):
        consumed = min(len(out), len(remaining))
        lp = model.log_prior(term, T_NOTE)
        per_note = log_likelihood(remaining[:consumed], out, noise) / consumed
        return (per_note, consumed, lp), term, consumed

    best = None
    if baseline_literal:
        best = scored(BaseTerm("n", remaining[0]), (remaining[0],))
    used = 0
    for _ in range(proposals):
        used += 1
        term = model.sample_term(T_NOTE, rng)
        try:
            out = evaluate(term)
        except EvaluationError:
            continue
        if not out:
            continue
        candidate = scored(term, out)
        if best is None or candidate[0] > best[0]:
            best = candidate
    if best is None:
        return BaseTerm("n", remaining[0]), 1, used
    return best[1], best[2], used


def _allocate(pool: int, remaining_len: int) -> int:
    """Proposals granted to the next segment: an even share of the pool
    over the expected number of remaining segments, with a floor of 1."""
    if pool <= 0:
        return 0
    expected_segments = max(1, remaining_len // 4)
    return min(pool, max(1, pool // expected_segments))


def encode_melody(
    melody: Melody,
    model,
    budget: Budget,
    noise: NoiseModel = NoiseModel(),
    seed: int = 0,
    baseline_literal: bool = True,
    per_segment_proposals: bool = False,
) -> Encoding:
    """Segment and encode one melody within the bit and proposal budgets.

    By default max_proposals is a shared pool for the whole melody; with
    per_segment_proposals every segment gets the full allowance (the
    one-shot measurement regime).
    """
    rng = random.Random(seed)
    notes = melody.notes
    pos = 0
    terms: list[Term] = []
    consumed_lens: list[int] = []
    pool = budget.max_proposals
    while pos < len(notes):
        remaining = notes[pos:]
        if per_segment_proposals:
            alloc = budget.max_proposals
        else:
            alloc = _allocate(pool, len(remaining))
        if alloc == 0:
            term, consumed = BaseTerm("n", remaining[0]), 1
        else:
            term, consumed, used = encode_segment(
                remaining, model, alloc, noise, rng, baseline_literal
            )
            if not per_segment_proposals:
                pool -= used
        terms.append(term)
        consumed_lens.append(consumed)
        pos += consumed
    bits = [_bits(model, t) for t in terms]
    if sum(bits) > budget.max_bits:
        terms, bits = _delete_globally(terms, bits, model, budget.max_bits)
    segments = tuple(Segment(t, c) for t, c in zip(terms, consumed_lens))
    return Encoding(segments, sum(bits), melody.id)


def _delete_globally(terms, bits, model, max_bits):
    """Hole out leaves across all segments, cheapest information first.

    A deletion that would raise the total (holing a leaf inside a cached
    program forfeits its cheap reuse mass) is skipped; if the pass ends
    over budget, whole segments collapse to holes, widest first.
    """
    terms = list(terms)
    bits = list(bits)
    leaves = []
    for i, term in enumerate(terms):
        for node in model.trace(term, T_NOTE):
            if node.is_leaf:
                leaves.append((-node.local_logp, i, node.path, node.goal))
    leaves.sort()
    for _, i, path, goal in leaves:
        if sum(bits) <= max_bits:
            return terms, bits
        candidate = replace_at(terms[i], path, Hole(goal))
        new_bits = model.partial_description_length(candidate, T_NOTE)
        if new_bits >= bits[i]:
            continue
        terms[i] = candidate
        bits[i] = new_bits
    # Bare skeletons may still be too wide: collapse whole segments.
    order = sorted(range(len(terms)), key=lambda i: -bits[i])
    for i in order:
        if sum(bits) <= max_bits:
            break
        terms[i] = Hole(T_NOTE)
        bits[i] = 0.0
    return terms, bits


def decode(encoding: Encoding, sampler, seed: int = 0) -> tuple:
    """Reconstruct a note sequence; holes are refilled from the sampler.

    Each segment's output is truncated to its consumed length and padded
    with uniform notes when the refilled program came out short.
    """
    rng = random.Random(seed)
    out: list[int] = []
    for seg in encoding.segments:
        if contains_hole(seg.term):
            produced = reconstruct(seg.term, sampler, rng)
        else:
            produced = evaluate(seg.term)
        produced = produced[: seg.consumed]
        while len(produced) < seg.consumed:
            produced += (NOTE_ALPHABET[rng.randrange(len(NOTE_ALPHABET))],)
        out.extend(produced)
    return tuple(out)


def evaluate_encoding(
    melody: Melody,
    encoding: Encoding,
    sampler,
    n_decode_samples: int = 100,
    seed: int = 0,
) -> tuple[float, float]:
    """(rate_bits, expected Hamming distortion) for one encoding.

    Exact single decode when the encoding has no holes; otherwise a
    Monte-Carlo mean over n_decode_samples independent decodes.
    """
    if encoding.is_exact:
        return encoding.rate_bits, float(
            hamming_distortion(melody.notes, decode(encoding, sampler, seed))
        )
    total = 0.0
    for i in range(n_decode_samples):
        rebuilt = decode(encoding, sampler, derive_seed(seed, "decode", i))
        total += hamming_distortion(melody.notes, rebuilt)
    return encoding.rate_bits, total / n_decode_samples
