"""Desk-scale experiment harness: rate-distortion sweeps, one-shot
generalization, subprogram sharing, curriculum sensitivity, and the
random-library baseline.

Distortion is reported normalized by melody length. Every cell derives
its random stream from the root seed plus its grid coordinates, so runs
reproduce bit-for-bit regardless of worker count.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .codec import Budget, NoiseModel, encode_melody, evaluate_encoding
from .corpus import Corpus, Melody
from .grammar import Grammar
from .library import AdaptedGrammar, Library, PitmanYorParams, shared_subprogram_ratio
from .seeds import derive_seed
from .stats import mean, paired_t, pearson_r, stderr
from .terms import subprograms

DEFAULT_TRAIN_BUDGET = Budget(600.0, 32)
DEFAULT_EVAL_PROPOSALS = 16


@dataclass(frozen=True)
class RDPoint:
    model: str  # "pcfg" | "ag"
    r_l: float
    r_s: int
    n_train: int
    seed: int
    mean_distortion: float
    stderr: float
    n: int


@dataclass(frozen=True)
class CurriculumResult:
    ordering: tuple[str, ...]
    run_seed: int
    library: Library
    gen_error: float


def _parallel_map(fn, items, jobs: int):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=1))


def train_adapted(
    grammar: Grammar,
    melodies,
    budget: Budget,
    noise: NoiseModel,
    py: PitmanYorParams,
    run_seed: int,
    collect_encodings: bool = False,
):
    """Sequentially encode melodies, caching used subprograms after each.

    Returns the final library, or (library, encodings) when collecting.
    Each distinct program is seated once per melody that uses it (its count
    tracks how many tasks relied on it), holes from term deletion are
    skipped by the cache update, and presentation order matters, which is
    the whole point of the curriculum work.
    """
    library = Library()
    model = AdaptedGrammar(grammar, library, py)
    encodings = []
    for i, melody in enumerate(melodies):
        enc = encode_melody(
            melody, model, budget, noise, derive_seed(run_seed, "train", i, melody.id)
        )
        library = library.update(set(seg.term for seg in enc.segments))
        model = model.with_library(library)
        if collect_encodings:
            encodings.append(enc)
    return (library, encodings) if collect_encodings else library


def generalization_error(
    model,
    eval_corpus: Corpus,
    r_s: int,
    noise: NoiseModel,
    seed: int,
    r_l: float = math.inf,
    n_decode_samples: int = 50,
) -> list[float]:
    """Per-melody normalized distortion in the one-shot regime.

    Only sampled proposals compete (no baseline literal) and every segment
    gets the full r_s allowance, so the error reflects how well the frozen
    model's own prior explains new melodies.
    """
    errors = []
    for melody in eval_corpus:
        enc = encode_melody(
            melody,
            model,
            Budget(r_l, r_s),
            noise,
            derive_seed(seed, "enc", melody.id),
            baseline_literal=False,
            per_segment_proposals=True,
        )
        _, dist = evaluate_encoding(
            melody, enc, model.sampler(), n_decode_samples, derive_seed(seed, "dec", melody.id)
        )
        errors.append(dist / len(melody))
    return errors


def _rd_job(args):
    (
        grammar,
        py,
        noise,
        model_kind,
        train_melodies,
        eval_melodies,
        r_l_grid,
        r_s_grid,
        n_train,
        seed_index,
        root_seed,
        train_budget,
        n_decode_samples,
    ) = args
    if model_kind == "ag":
        library = train_adapted(
            grammar,
            train_melodies[:n_train],
            train_budget,
            noise,
            py,
            derive_seed(root_seed, "rd-train", n_train, seed_index),
        )
        model = AdaptedGrammar(grammar, library, py)
    else:
        model = grammar  # a plain grammar ignores the training data
    points = []
    for r_l in r_l_grid:
        for r_s in r_s_grid:
            dists = []
            for melody in eval_melodies:
                cell_seed = derive_seed(
                    root_seed, "rd", model_kind, n_train, seed_index, r_l, r_s, melody.id
                )
                enc = encode_melody(melody, model, Budget(r_l, r_s), noise, cell_seed)
                _, dist = evaluate_encoding(
                    melody,
                    enc,
                    model.sampler(),
                    n_decode_samples,
                    derive_seed(cell_seed, "dec"),
                )
                dists.append(dist / len(melody))
            points.append(
                RDPoint(
                    model_kind,
                    float(r_l),
                    int(r_s),
                    int(n_train),
                    seed_index,
                    mean(dists),
                    stderr(dists),
                    len(dists),
                )
            )
    return points


def rd_sweep(
    train_corpus: Corpus,
    eval_corpus: Corpus,
    model_kind: str,
    r_l_grid,
    r_s_grid,
    n_train_grid,
    n_seeds: int,
    root_seed: int,
    grammar: Grammar | None = None,
    py: PitmanYorParams = PitmanYorParams(),
    noise: NoiseModel = NoiseModel(),
    train_budget: Budget = DEFAULT_TRAIN_BUDGET,
    n_decode_samples: int = 50,
    jobs: int = 1,
) -> list[RDPoint]:
    """One RDPoint per (r_l, r_s, n_train, seed) cell, measured on eval melodies."""
    if model_kind not in ("pcfg", "ag"):
        raise ValueError("model_kind must be 'pcfg' or 'ag'")
    if not (r_l_grid and r_s_grid and n_train_grid):
        raise ValueError("grids must be non-empty")
    grammar = grammar or Grammar()
    tasks = [
        (
            grammar,
            py,
            noise,
            model_kind,
            tuple(train_corpus.melodies),
            tuple(eval_corpus.melodies),
            tuple(r_l_grid),
            tuple(r_s_grid),
            n_train,
            seed_index,
            root_seed,
            train_budget,
            n_decode_samples,
        )
        for n_train in n_train_grid
        for seed_index in range(n_seeds)
    ]
    points = []
    for batch in _parallel_map(_rd_job, tasks, jobs):
        points.extend(batch)
    return points


def rd_points_to_csv(points) -> str:
    lines = ["model,r_l,r_s,n_train,seed,mean_distortion,stderr,n"]
    for p in points:
        lines.append(
            f"{p.model},{p.r_l:g},{p.r_s},{p.n_train},{p.seed},"
            f"{p.mean_distortion:.10g},{p.stderr:.10g},{p.n}"
        )
    return "\n".join(lines) + "\n"


def one_shot_generalization(
    model,
    eval_corpus: Corpus,
    r_s: int,
    seed: int,
    noise: NoiseModel = NoiseModel(),
) -> tuple[float, float]:
    """Mean (and stderr of) normalized distortion with an unlimited bit budget."""
    errors = generalization_error(model, eval_corpus, r_s, noise, seed)
    return mean(errors), stderr(errors)


def _uniqueness_job(args):
    (grammar, py, noise, model_kind, melodies, r_s, n_train, train_bits, root_seed) = args
    budget = Budget(train_bits, r_s)
    subset = melodies[:n_train]
    per_melody = {}
    if model_kind == "ag":
        _, encodings = train_adapted(
            grammar,
            subset,
            budget,
            noise,
            py,
            derive_seed(root_seed, "uniq", r_s, n_train),
            collect_encodings=True,
        )
    else:
        encodings = [
            encode_melody(
                melody,
                grammar,
                budget,
                noise,
                derive_seed(root_seed, "uniq", r_s, n_train, melody.id),
            )
            for melody in subset
        ]
    for melody, enc in zip(subset, encodings):
        subs = Counter()
        for seg in enc.segments:
            subs.update(subprograms(seg.term))
        per_melody[melody.id] = subs
    uniqueness = shared_subprogram_ratio(per_melody)
    return {
        "model": model_kind,
        "r_s": int(r_s),
        "n_train": int(n_train),
        "uniqueness": uniqueness,
        "shared": 1.0 - uniqueness,
    }


def uniqueness_sweep(
    model_kind: str,
    train_corpus: Corpus,
    r_s_grid,
    n_train_grid,
    root_seed: int,
    grammar: Grammar | None = None,
    py: PitmanYorParams = PitmanYorParams(),
    noise: NoiseModel = NoiseModel(),
    train_bits: float = DEFAULT_TRAIN_BUDGET.max_bits,
    jobs: int = 1,
) -> list[dict]:
    """Uniqueness/sharing of subprograms across training encodings per grid cell."""
    if len(train_corpus) < 2:
        raise ValueError("need at least 2 melodies")
    grammar = grammar or Grammar()
    tasks = [
        (
            grammar,
            py,
            noise,
            model_kind,
            tuple(train_corpus.melodies),
            r_s,
            n_train,
            train_bits,
            root_seed,
        )
        for r_s in r_s_grid
        for n_train in n_train_grid
    ]
    return _parallel_map(_uniqueness_job, tasks, jobs)


def run_curriculum(
    train_subset: Corpus,
    ordering,
    eval_corpus: Corpus,
    budgets: Budget,
    run_seed: int,
    grammar: Grammar | None = None,
    py: PitmanYorParams = PitmanYorParams(),
    noise: NoiseModel = NoiseModel(),
    eval_r_s: int = DEFAULT_EVAL_PROPOSALS,
    eval_seed: int | None = None,
) -> CurriculumResult:
    """Train along one melody ordering and measure held-out generalization.

    When eval_seed is given, the evaluation random stream is fixed
    independently of the run seed, so different runs face the identical
    test harness and differ only through their trained libraries.
    """
    ordering = tuple(ordering)
    ids = sorted(m.id for m in train_subset)
    if sorted(ordering) != ids:
        raise ValueError("ordering must be a permutation of the subset's melody ids")
    grammar = grammar or Grammar()
    melodies = [train_subset.by_id(mid) for mid in ordering]
    library = train_adapted(grammar, melodies, budgets, noise, py, run_seed)
    model = AdaptedGrammar(grammar, library, py)
    if eval_seed is None:
        eval_seed = derive_seed(run_seed, "curriculum-eval")
    errors = generalization_error(model, eval_corpus, eval_r_s, noise, eval_seed)
    return CurriculumResult(ordering, run_seed, library, mean(errors))


def _matched_job(args):
    (grammar, py, noise, subset, eval_melodies, budgets, eval_r_s, root_seed, j) = args
    ids = [m.id for m in subset.melodies]
    rng = random.Random(derive_seed(root_seed, "curr-order", j))
    ordering = ids[:]
    rng.shuffle(ordering)
    errors = []
    for rep in (0, 1):
        result = run_curriculum(
            subset,
            ordering,
            eval_melodies,
            budgets,
            derive_seed(root_seed, "curr-run", j, rep),
            grammar,
            py,
            noise,
            eval_r_s,
            eval_seed=derive_seed(root_seed, "curr-eval-stream"),
        )
        errors.append(result.gen_error)
    return tuple(ordering), errors[0], errors[1]


def matched_run_analysis(
    train_subset: Corpus,
    n_curricula: int,
    eval_corpus: Corpus,
    budgets: Budget,
    root_seed: int,
    grammar: Grammar | None = None,
    py: PitmanYorParams = PitmanYorParams(),
    noise: NoiseModel = NoiseModel(),
    eval_r_s: int = DEFAULT_EVAL_PROPOSALS,
    jobs: int = 1,
) -> dict:
    """Correlation of generalization across matched reruns of the same
    curriculum versus mismatched pairings (fixed shift-by-one derangement)."""
    if n_curricula < 3:
        raise ValueError("need at least 3 curricula")
    grammar = grammar or Grammar()
    tasks = [
        (grammar, py, noise, train_subset, eval_corpus, budgets, eval_r_s, root_seed, j)
        for j in range(n_curricula)
    ]
    rows = _parallel_map(_matched_job, tasks, jobs)
    e1 = [r[1] for r in rows]
    e2 = [r[2] for r in rows]
    shifted = e2[1:] + e2[:1]
    r_matched, p_matched = pearson_r(e1, e2)
    r_random, p_random = pearson_r(e1, shifted)
    matched_gap = [abs(a - b) for a, b in zip(e1, e2)]
    random_gap = [abs(a - b) for a, b in zip(e1, shifted)]
    t_stat, p_t = paired_t(matched_gap, random_gap)
    return {
        "n_curricula": n_curricula,
        "errors_run1": e1,
        "errors_run2": e2,
        "orderings": [r[0] for r in rows],
        "r_matched": r_matched,
        "p_matched": p_matched,
        "r_random": r_random,
        "p_random": p_random,
        "t_gap": t_stat,
        "p_gap": p_t,
    }


def random_library(grammar: Grammar, reference: Library, seed: int) -> Library:
    """Library of prior-sampled programs whose total cache size matches
    the reference (subtrees cached exactly like training updates do)."""
    from .terms import T_NOTE

    rng = random.Random(seed)
    lib = Library()
    target = reference.total_count()
    guard = 0
    while lib.total_count() < target and guard < 100_000:
        lib = lib.update([grammar.sample_term(T_NOTE, rng)])
        guard += 1
    return lib


def _baseline_job(args):
    (grammar, py, noise, subset, eval_melodies, budgets, eval_r_s, root_seed, j) = args
    ids = [m.id for m in subset.melodies]
    rng = random.Random(derive_seed(root_seed, "base-order", j))
    ordering = ids[:]
    rng.shuffle(ordering)
    learned = run_curriculum(
        subset,
        ordering,
        eval_melodies,
        budgets,
        derive_seed(root_seed, "base-run", j),
        grammar,
        py,
        noise,
        eval_r_s,
        eval_seed=derive_seed(root_seed, "base-eval-stream"),
    )
    rand_lib = random_library(grammar, learned.library, derive_seed(root_seed, "base-lib", j))
    rand_model = AdaptedGrammar(grammar, rand_lib, py)
    rand_errors = generalization_error(
        rand_model, eval_melodies, eval_r_s, noise, derive_seed(root_seed, "base-eval-stream")
    )
    return learned.gen_error, mean(rand_errors)


def random_library_baseline(
    train_subset: Corpus,
    eval_corpus: Corpus,
    n_trials: int,
    budgets: Budget,
    root_seed: int,
    grammar: Grammar | None = None,
    py: PitmanYorParams = PitmanYorParams(),
    noise: NoiseModel = NoiseModel(),
    eval_r_s: int = DEFAULT_EVAL_PROPOSALS,
    jobs: int = 1,
) -> dict:
    """Generalization of curriculum-learned libraries vs size-matched random ones."""
    if n_trials < 2:
        raise ValueError("need at least 2 trials")
    grammar = grammar or Grammar()
    tasks = [
        (grammar, py, noise, train_subset, eval_corpus, budgets, eval_r_s, root_seed, j)
        for j in range(n_trials)
    ]
    rows = _parallel_map(_baseline_job, tasks, jobs)
    learned = [r[0] for r in rows]
    randoms = [r[1] for r in rows]
    t_stat, p_two = paired_t(learned, randoms)
    n = len(learned)
    var_learned = sum((x - mean(learned)) ** 2 for x in learned) / (n - 1)
    var_random = sum((x - mean(randoms)) ** 2 for x in randoms) / (n - 1)
    return {
        "learned_errors": learned,
        "random_errors": randoms,
        "mean_learned": mean(learned),
        "mean_random": mean(randoms),
        "var_learned": var_learned,
        "var_random": var_random,
        "t": t_stat,
        # one-sided: learned better than random
        "p_one_sided": p_two / 2 if t_stat < 0 else 1 - p_two / 2,
    }
