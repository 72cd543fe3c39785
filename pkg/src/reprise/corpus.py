"""Melody corpora: parsing, preprocessing, splitting, synthesis, distortion.

A note symbol is a pitch class 0-11 or the pause sentinel `PAUSE` (-1),
written `p` in text and JSON. Corpora are immutable value objects; every
randomized operation takes an explicit seed.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

PAUSE = -1
NOTE_ALPHABET = tuple(range(12)) + (PAUSE,)

MAX_MIDI_PITCH = 127


class CorpusError(ValueError):
    """Malformed corpus text or JSON; carries line/column when known."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{where}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Melody:
    id: str
    notes: tuple[int, ...]

    def __len__(self):
        return len(self.notes)


@dataclass(frozen=True)
class Corpus:
    melodies: tuple[Melody, ...]
    provenance: str = "parsed"  # "parsed" | "synthetic"
    seed: int | None = None

    def __post_init__(self):
        ids = [m.id for m in self.melodies]
        if len(set(ids)) != len(ids):
            dup = next(i for i in ids if ids.count(i) > 1)
            raise CorpusError(f"duplicate melody id {dup!r}")

    def __len__(self):
        return len(self.melodies)

    def __iter__(self):
        return iter(self.melodies)

    def by_id(self, melody_id: str) -> Melody:
        for m in self.melodies:
            if m.id == melody_id:
                return m
        raise KeyError(melody_id)


def _parse_token(tok: str, line_no: int, col: int, raw: bool) -> int:
    if tok == "p":
        return PAUSE
    try:
        value = int(tok)
    except ValueError:
        raise CorpusError(f"malformed token {tok!r}", line_no, col) from None
    hi = MAX_MIDI_PITCH if raw else 11
    if not 0 <= value <= hi:
        raise CorpusError(f"pitch {value} out of range 0..{hi}", line_no, col)
    return value


def parse_corpus(text: str, raw: bool = False) -> Corpus:
    """Parse the one-melody-per-line text format `<id>: <tok>,<tok>,...`.

    Tokens are pitch classes 0-11 or `p`; with raw=True any MIDI-like
    pitch 0-127 is accepted (for corpora that still need `preprocess`).
    Lines starting with `#` and blank lines are skipped.
    """
    melodies = []
    seen = set()
    any_line = False
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        any_line = True
        if ":" not in stripped:
            raise CorpusError("expected '<id>: <notes>'", line_no)
        head, _, body = stripped.partition(":")
        melody_id = head.strip()
        if not melody_id:
            raise CorpusError("empty melody id", line_no)
        if melody_id in seen:
            raise CorpusError(f"duplicate id {melody_id!r}", line_no)
        seen.add(melody_id)
        notes = []
        offset = len(head) + 2  # 1-based column of the first body char
        for tok in body.split(","):
            col = offset + len(tok) - len(tok.lstrip())
            stripped_tok = tok.strip()
            if not stripped_tok:
                raise CorpusError("empty token", line_no, col)
            notes.append(_parse_token(stripped_tok, line_no, col, raw))
            offset += len(tok) + 1
        melodies.append(Melody(melody_id, tuple(notes)))
    if not any_line:
        raise CorpusError("empty corpus file")
    return Corpus(tuple(melodies), provenance="parsed")


def dump_corpus(corpus: Corpus) -> str:
    """Emit the canonical text format."""
    lines = []
    for m in corpus.melodies:
        toks = ",".join("p" if n == PAUSE else str(n) for n in m.notes)
        lines.append(f"{m.id}: {toks}")
    return "\n".join(lines) + "\n"


def corpus_from_json(text: str) -> Corpus:
    """Parse the structured JSON form {"melodies": [{"id", "notes"}]}."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise CorpusError(f"invalid JSON: {e}") from None
    if not isinstance(doc, dict) or "melodies" not in doc:
        raise CorpusError("missing top-level 'melodies' list")
    melodies = []
    for i, entry in enumerate(doc["melodies"]):
        mid = entry.get("id")
        if not isinstance(mid, str):
            raise CorpusError(f"melody #{i}: missing string id")
        notes = []
        for n in entry.get("notes", []):
            if n == "p":
                notes.append(PAUSE)
            elif isinstance(n, int) and 0 <= n <= MAX_MIDI_PITCH:
                notes.append(n)
            else:
                raise CorpusError(f"melody {mid!r}: bad note {n!r}")
        melodies.append(Melody(mid, tuple(notes)))
    prov = doc.get("provenance", "parsed")
    return Corpus(tuple(melodies), provenance=prov, seed=doc.get("seed"))


def corpus_to_json(corpus: Corpus) -> str:
    doc = {
        "melodies": [
            {"id": m.id, "notes": ["p" if n == PAUSE else n for n in m.notes]}
            for m in corpus.melodies
        ],
        "provenance": corpus.provenance,
    }
    if corpus.seed is not None:
        doc["seed"] = corpus.seed
    return json.dumps(doc, indent=1)


def preprocess(raw: Corpus, min_len: int = 10) -> Corpus:
    """Reduce pitches to a single octave (mod 12) and drop short melodies.

    Pauses are preserved; filtering is silent (compare lengths with the
    input to report counts).
    """
    kept = []
    for m in raw.melodies:
        if len(m.notes) < min_len:
            continue
        notes = tuple(n if n == PAUSE else n % 12 for n in m.notes)
        kept.append(Melody(m.id, notes))
    return Corpus(tuple(kept), provenance=raw.provenance, seed=raw.seed)


def split(corpus: Corpus, n_train: int, n_eval: int, seed: int) -> tuple[Corpus, Corpus]:
    """Disjoint uniform random subsets of sizes (n_train, n_eval)."""
    if n_train + n_eval > len(corpus):
        raise ValueError(
            f"cannot draw {n_train}+{n_eval} melodies from corpus of {len(corpus)}"
        )
    rng = random.Random(seed)
    order = list(range(len(corpus.melodies)))
    rng.shuffle(order)
    pick = lambda idxs: tuple(corpus.melodies[i] for i in sorted(idxs))
    train = pick(order[:n_train])
    evalc = pick(order[n_train : n_train + n_eval])
    return (
        Corpus(train, provenance=corpus.provenance, seed=seed),
        Corpus(evalc, provenance=corpus.provenance, seed=seed),
    )


# Motif transforms used by the synthetic generator. Each takes a motif and
# an rng and returns a note tuple; pauses stay fixed under pitch shifts.
def _transpose(motif, rng):
    k = rng.choice((5, 7))  # fourth/fifth keeps cross-melody spans recurring
    return tuple(n if n == PAUSE else (n + k) % 12 for n in motif)


def _repeat(motif, rng):
    return motif * rng.randrange(2, 4)


def _run(motif, rng):
    start = next((n for n in motif if n != PAUSE), 0)
    length = rng.randrange(4, 10)
    step = rng.choice((1, -1))
    return tuple((start + step * i) % 12 for i in range(length))


def _hold(motif, rng):
    start = next((n for n in motif if n != PAUSE), 0)
    return (start,) * rng.randrange(4, 10)


_TRANSFORMS = (lambda m, r: m, _transpose, _repeat, _run, _hold)


def synth_corpus(n: int, mean_len: int, motif_bank_size: int, seed: int) -> Corpus:
    """Generate n melodies by splicing transformed motifs from a fixed bank.

    Motifs recur across melodies (shared structure), runs and repeats make
    individual melodies compressible. Mean length lands within 10% of
    mean_len for n >= 100.
    """
    if n < 1 or mean_len < 10:
        raise ValueError("need n >= 1 and mean_len >= 10")
    rng = random.Random(seed)
    bank = []
    for _ in range(motif_bank_size):
        length = rng.randrange(3, 7)
        if rng.random() < 0.25:
            start = rng.randrange(12)
            step = rng.choice((1, -1))
            motif = tuple((start + step * i) % 12 for i in range(length))
        elif rng.random() < 0.25:
            motif = (rng.randrange(12),) * length
        else:
            motif = tuple(
                PAUSE if rng.random() < 0.05 else rng.randrange(12) for _ in range(length)
            )
        bank.append(motif)
    melodies = []
    for i in range(n):
        target = max(10, round(rng.gauss(mean_len, mean_len * 0.05)))
        notes = []
        while len(notes) < target:
            motif = bank[rng.randrange(len(bank))]
            transform = _TRANSFORMS[rng.randrange(len(_TRANSFORMS))]
            notes.extend(transform(motif, rng))
        melodies.append(Melody(f"syn{i:05d}", tuple(notes[:target])))
    return Corpus(tuple(melodies), provenance="synthetic", seed=seed)


def hamming_distortion(x, x_hat) -> int:
    """Positions that differ, counting every unmatched tail position as one."""
    overlap = min(len(x), len(x_hat))
    mismatches = sum(1 for a, b in zip(x, x_hat) if a != b)
    return mismatches + abs(len(x) - len(x_hat))
