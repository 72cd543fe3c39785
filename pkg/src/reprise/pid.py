"""Partial information decomposition over program-melody match variables.

Programs become binary random variables through window matching: sliding a
program's output over a melody emits 1 wherever the match fraction clears
a threshold. For two such sources and a melody-valued target, the mutual
information splits into redundant, unique, and synergistic parts using the
minimum specific information over sources as the redundancy measure. The
library synergy score averages the synergy over sampled pairs of cached
programs and drives the greedy curriculum builder.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .codec import Budget, NoiseModel, encode_melody
from .corpus import Corpus, Melody
from .grammar import Grammar
from .library import AdaptedGrammar, Library, PitmanYorParams
from .seeds import derive_seed
from .terms import EvaluationError, Program, T_NOTE, Term, evaluate, print_term

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class PIDResult:
    mutual: float  # I(Z1,Z2; X), bits
    redundancy: float
    unique1: float
    unique2: float
    synergy: float


@dataclass(frozen=True)
class SynergyScore:
    value: float
    n_pairs: int
    degenerate: bool = False


class JointTable:
    """Joint distribution over (Z1, Z2, X): shape (2, 2, n_targets)."""

    def __init__(self, probs):
        arr = np.asarray(probs, dtype=float)
        if arr.ndim != 3 or arr.shape[:2] != (2, 2):
            raise ValueError("joint table must have shape (2, 2, n_targets)")
        if (arr < -NORMALIZATION_TOL).any():
            raise ValueError("negative probability entry")
        total = float(arr.sum())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"table sums to {total}, not 1")
        self.probs = np.clip(arr, 0.0, None)

    @property
    def n_targets(self) -> int:
        return self.probs.shape[2]


def _xlogy(x, y):
    out = np.zeros_like(x)
    mask = x > 0
    out[mask] = x[mask] * np.log2(y[mask])
    return out


def mutual_information(joint: JointTable, sources=(0, 1)) -> float:
    """I(Z_sources; X) in bits; sources picks one or both of the Z axes."""
    p = joint.probs
    sources = tuple(sorted(sources))
    if sources == (0, 1):
        pzx = p.reshape(4, -1)
    elif sources == (0,):
        pzx = p.sum(axis=1)
    elif sources == (1,):
        pzx = p.sum(axis=0)
    else:
        raise ValueError("sources must be a subset of (0, 1)")
    pz = pzx.sum(axis=1, keepdims=True)
    px = pzx.sum(axis=0, keepdims=True)
    denom = pz * px
    ratio = np.ones_like(pzx)
    mask = pzx > 0
    ratio[mask] = pzx[mask] / denom[mask]
    return float(_xlogy(pzx, ratio).sum())


def _specific_information(pzx) -> np.ndarray:
    """I_spec(X=x; Z) for each x; pzx has shape (n_z, n_x)."""
    px = pzx.sum(axis=0)
    pz = pzx.sum(axis=1, keepdims=True)
    out = np.zeros(pzx.shape[1])
    for xi in range(pzx.shape[1]):
        if px[xi] <= 0:
            continue
        cond = pzx[:, xi] / px[xi]  # p(z | x)
        acc = 0.0
        for zi in range(pzx.shape[0]):
            if cond[zi] > 0 and pz[zi, 0] > 0:
                acc += cond[zi] * math.log2(cond[zi] / pz[zi, 0])
        out[xi] = acc
    return out


def pid_decompose(joint: JointTable) -> PIDResult:
    """Two-source decomposition with min-specific-information redundancy."""
    p = joint.probs
    px = p.sum(axis=(0, 1))
    spec1 = _specific_information(p.sum(axis=1))
    spec2 = _specific_information(p.sum(axis=0))
    redundancy = float((px * np.minimum(spec1, spec2)).sum())
    i1 = mutual_information(joint, (0,))
    i2 = mutual_information(joint, (1,))
    i12 = mutual_information(joint, (0, 1))
    unique1 = i1 - redundancy
    unique2 = i2 - redundancy
    synergy = i12 - redundancy - unique1 - unique2
    return PIDResult(i12, redundancy, unique1, unique2, synergy)


def program_feature(
    program_or_term,
    melody: Melody,
    window_stride: int = 1,
    threshold: float = 0.8,
) -> list[int]:
    """Binary window-match samples of one program's output against a melody.

    Output longer than the melody collapses to a single best-alignment
    sample; otherwise each stride position yields one sample.
    """
    term = program_or_term.root if isinstance(program_or_term, Program) else program_or_term
    out = evaluate(term)
    notes = melody.notes
    w, t = len(out), len(notes)
    if w > t:
        best = 0.0
        for shift in range(w - t + 1):
            matches = sum(1 for a, b in zip(notes, out[shift : shift + t]) if a == b)
            best = max(best, matches / t)
        return [1 if best >= threshold else 0]
    samples = []
    for start in range(0, t - w + 1, window_stride):
        window = notes[start : start + w]
        matches = sum(1 for a, b in zip(window, out) if a == b)
        samples.append(1 if matches / w >= threshold else 0)
    return samples


def pair_joint(
    term1: Term,
    term2: Term,
    melodies,
    window_stride: int = 1,
    threshold: float = 0.8,
    feature_cache: dict | None = None,
) -> JointTable:
    """Empirical joint (Z1, Z2, X) with X uniform over the melody list."""
    melodies = list(melodies)
    probs = np.zeros((2, 2, len(melodies)))
    for xi, melody in enumerate(melodies):
        fs = []
        for term in (term1, term2):
            key = (term, melody.id)
            if feature_cache is not None and key in feature_cache:
                f = feature_cache[key]
            else:
                f = program_feature(term, melody, window_stride, threshold)
                if feature_cache is not None:
                    feature_cache[key] = f
            fs.append(f)
        n = min(len(fs[0]), len(fs[1]))
        for z1, z2 in zip(fs[0][:n], fs[1][:n]):
            probs[z1, z2, xi] += 1.0
        probs[:, :, xi] /= n * len(melodies)
    return JointTable(probs)


def library_synergy(
    library: Library,
    melodies: Corpus,
    n_program_pairs: int,
    seed: int,
    window_stride: int = 1,
    threshold: float = 0.8,
    feature_cache: dict | None = None,
) -> SynergyScore:
    """Mean pairwise synergy over sampled distinct note-type cache entries."""
    if len(melodies) < 2:
        raise ValueError("need at least 2 melodies")
    pool = []
    for term in sorted(library.cache(T_NOTE), key=print_term):
        try:
            evaluate(term)
        except EvaluationError:
            continue
        pool.append(term)
    if len(pool) < 2:
        return SynergyScore(0.0, 0, degenerate=True)
    rng = random.Random(seed)
    cache = feature_cache if feature_cache is not None else {}
    total = 0.0
    pairs = 0
    for _ in range(n_program_pairs):
        i = rng.randrange(len(pool))
        j = rng.randrange(len(pool) - 1)
        if j >= i:
            j += 1
        joint = pair_joint(pool[i], pool[j], melodies, window_stride, threshold, cache)
        total += pid_decompose(joint).synergy
        pairs += 1
    return SynergyScore(total / pairs, pairs)


def build_synergistic_curriculum(
    candidates: Corpus,
    budgets: Budget,
    seed: int,
    grammar: Grammar | None = None,
    py: PitmanYorParams = PitmanYorParams(),
    noise: NoiseModel = NoiseModel(),
    n_program_pairs: int = 64,
    window_stride: int = 1,
    threshold: float = 0.8,
) -> tuple[tuple[str, ...], list[float]]:
    """Greedy ordering: each step picks the melody whose simulated training
    update yields the most synergistic library against all candidates.

    Returns (ordering, per-step synergy scores); ties go to the smaller id.
    """
    if len(candidates) < 2:
        raise ValueError("need at least 2 candidate melodies")
    grammar = grammar or Grammar()
    remaining = sorted(candidates.melodies, key=lambda m: m.id)
    library = Library()
    ordering: list[str] = []
    scores: list[float] = []
    feature_cache: dict = {}
    step = 0
    while remaining:
        best = None
        score_seed = derive_seed(seed, "synergy-score", step)
        for melody in remaining:
            model = AdaptedGrammar(grammar, library, py)
            enc = encode_melody(
                melody, model, budgets, noise, derive_seed(seed, "synergy-enc", step, melody.id)
            )
            updated = library.update([seg.term for seg in enc.segments])
            score = library_synergy(
                updated,
                candidates,
                n_program_pairs,
                score_seed,
                window_stride,
                threshold,
                feature_cache,
            ).value
            if best is None or score > best[0]:
                best = (score, melody, updated)
        score, melody, library = best
        ordering.append(melody.id)
        scores.append(score)
        remaining = [m for m in remaining if m.id != melody.id]
        step += 1
    return tuple(ordering), scores
