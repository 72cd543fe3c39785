"""Command-line interface: corpus preparation, sweeps, training, curricula.

Every command is fully determined by its flags (or config file) plus one
root seed; internal streams are derived by stable hashing, so reruns and
different --jobs settings produce byte-identical primary outputs.
Exit codes: 0 success, 1 runtime failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

from . import __version__
from .codec import Budget, NoiseModel, encode_melody, decode, evaluate_encoding
from .config import (
    ConfigError,
    NOISE_SCHEMA,
    PY_SCHEMA,
    RunSetup,
    grammar_to_values,
    load_setup,
)
from .corpus import (
    Corpus,
    CorpusError,
    corpus_from_json,
    corpus_to_json,
    parse_corpus,
    preprocess,
    split,
    synth_corpus,
)
from .experiments import (
    matched_run_analysis,
    one_shot_generalization,
    rd_points_to_csv,
    rd_sweep,
    run_curriculum,
    train_adapted,
    uniqueness_sweep,
)
from .grammar import Grammar
from .library import AdaptedGrammar, Library, PitmanYorParams
from .pid import build_synergistic_curriculum
from .seeds import derive_seed
from .stats import paired_t

PAPER_SCALE = {"train_melodies": 1000, "eval_melodies": 500, "curricula": 1000}

COMMAND_SCHEMAS = {
    "prepare": {
        "input": "str",
        "synth_n": "int",
        "synth_mean_len": "int",
        "synth_motifs": "int",
        "min_len": "int",
        "output": "str",
    },
    "rd-sweep": {
        "corpus": "str",
        "model": "str",
        "r_l": "floats",
        "r_s": "ints",
        "n_train": "ints",
        "n_seeds": "int",
        "n_eval": "int",
        "train_bits": "float",
        "train_proposals": "int",
        "decode_samples": "int",
    },
    "train": {
        "corpus": "str",
        "n_train": "int",
        "train_bits": "float",
        "train_proposals": "int",
        "output": "str",
    },
    "generalize": {
        "corpus": "str",
        "library": "str",
        "model": "str",
        "r_s": "ints",
        "n_eval": "int",
    },
    "uniqueness": {
        "corpus": "str",
        "model": "str",
        "r_s": "ints",
        "n_train": "ints",
        "train_bits": "float",
    },
    "curriculum": {
        "corpus": "str",
        "melodies": "int",
        "n_curricula": "int",
        "n_eval": "int",
        "train_bits": "float",
        "train_proposals": "int",
        "eval_r_s": "int",
        "ordering": "str",
        "n_random": "int",
    },
    "synergy": {
        "corpus": "str",
        "melodies": "int",
        "train_bits": "float",
        "train_proposals": "int",
        "n_pairs": "int",
    },
    "decode-demo": {
        "corpus": "str",
        "melody_id": "str",
        "library": "str",
        "r_l": "float",
        "r_s": "int",
    },
}


class UsageError(ValueError):
    pass


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _load_corpus(path_str: str) -> Corpus:
    path = Path(path_str)
    if not path.exists():
        raise UsageError(f"no such file: {path}")
    text = path.read_text()
    if path.suffix == ".json":
        return corpus_from_json(text)
    return parse_corpus(text, raw=True)


def _setup(args) -> RunSetup:
    schema = COMMAND_SCHEMAS[args.command]
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise UsageError(f"no such config file: {path}")
        return load_setup(path.read_text(), args.command, schema)
    return RunSetup(Grammar(), PitmanYorParams(), NoiseModel(), {})


def _get(args, setup: RunSetup, key: str, default):
    value = getattr(args, key.replace("-", "_"), None)
    if value is not None:
        return value
    if key in setup.command_values:
        return setup.command_values[key]
    return default


def _metadata(args, setup: RunSetup, extras: dict, input_paths) -> str:
    doc = {
        "version": __version__,
        "command": args.command,
        "seed": args.seed,
        "grammar": grammar_to_values(setup.grammar),
        "py": {"alpha": setup.py.alpha, "discount": setup.py.discount},
        "noise": {"epsilon": setup.noise.epsilon},
        "paper_scale": PAPER_SCALE,
        "inputs": {str(p): _sha256_file(Path(p)) for p in input_paths},
    }
    doc.update(extras)
    return json.dumps(doc, indent=1, sort_keys=True)


# ---------------------------------------------------------------------------
# Commands

def cmd_prepare(args) -> int:
    setup = _setup(args)
    input_path = _get(args, setup, "input", None)
    min_len = _get(args, setup, "min_len", 10)
    output = _get(args, setup, "output", None)
    if output is None:
        raise UsageError("prepare requires --output")
    if input_path:
        raw = _load_corpus(input_path)
    else:
        n = _get(args, setup, "synth_n", None)
        if n is None:
            raise UsageError("prepare needs --input or --synth-n")
        raw = synth_corpus(
            n,
            _get(args, setup, "synth_mean_len", 50),
            _get(args, setup, "synth_motifs", 20),
            args.seed,
        )
    prepared = preprocess(raw, min_len)
    _write_text(Path(output), corpus_to_json(prepared))
    lengths = [len(m) for m in prepared]
    summary = {
        "n_input": len(raw),
        "n_kept": len(prepared),
        "n_dropped": len(raw) - len(prepared),
        "mean_length": (sum(lengths) / len(lengths)) if lengths else 0.0,
        "output": str(output),
    }
    print(json.dumps(summary, sort_keys=True))
    return 0


def _rd_validate(corpus, model, r_l, r_s, n_train, n_eval):
    problems = []
    if model not in ("pcfg", "ag"):
        problems.append(f"model must be pcfg or ag, got {model!r}")
    if not r_l:
        problems.append("empty r_l grid")
    if any(x <= 0 for x in r_l):
        problems.append("r_l values must be > 0")
    if not r_s:
        problems.append("empty r_s grid")
    if any(x < 1 for x in r_s):
        problems.append("r_s values must be >= 1")
    if not n_train:
        problems.append("empty n_train grid")
    if n_eval < 1:
        problems.append("n_eval must be >= 1")
    if n_train and max(n_train) + n_eval > len(corpus):
        problems.append(
            f"need {max(n_train)} train + {n_eval} eval melodies, corpus has {len(corpus)}"
        )
    if problems:
        raise UsageError("; ".join(problems))


def cmd_rd_sweep(args) -> int:
    setup = _setup(args)
    corpus_path = _get(args, setup, "corpus", None)
    if corpus_path is None:
        raise UsageError("rd-sweep requires --corpus")
    corpus = _load_corpus(corpus_path)
    model = _get(args, setup, "model", "pcfg")
    r_l = _get(args, setup, "r_l", [8.0, 16.0, 32.0, 64.0, 128.0])
    r_s = _get(args, setup, "r_s", [8, 32, 128])
    n_train = _get(args, setup, "n_train", [10, 100])
    n_seeds = _get(args, setup, "n_seeds", 10)
    n_eval = _get(args, setup, "n_eval", 30)
    _rd_validate(corpus, model, r_l, r_s, n_train, n_eval)
    train_budget = Budget(
        _get(args, setup, "train_bits", 600.0), _get(args, setup, "train_proposals", 32)
    )
    train_corpus, eval_corpus = split(
        corpus, len(corpus) - n_eval, n_eval, derive_seed(args.seed, "rd-split")
    )
    points = rd_sweep(
        train_corpus,
        eval_corpus,
        model,
        r_l,
        r_s,
        n_train,
        n_seeds,
        args.seed,
        setup.grammar,
        setup.py,
        setup.noise,
        train_budget,
        _get(args, setup, "decode_samples", 50),
        jobs=args.jobs,
    )
    out_dir = Path(args.out_dir)
    _write_text(out_dir / "rd_sweep.csv", rd_points_to_csv(points))
    meta = _metadata(
        args,
        setup,
        {
            "config": {
                "model": model,
                "r_l": list(r_l),
                "r_s": list(r_s),
                "n_train": list(n_train),
                "n_seeds": n_seeds,
                "n_eval": n_eval,
                "train_bits": train_budget.max_bits,
                "train_proposals": train_budget.max_proposals,
            }
        },
        [corpus_path],
    )
    _write_text(out_dir / "rd_sweep_meta.json", meta)
    print(f"wrote {out_dir / 'rd_sweep.csv'} ({len(points)} rows)")
    return 0


def cmd_train(args) -> int:
    setup = _setup(args)
    corpus_path = _get(args, setup, "corpus", None)
    output = _get(args, setup, "output", None)
    if corpus_path is None or output is None:
        raise UsageError("train requires --corpus and --output")
    corpus = _load_corpus(corpus_path)
    n_train = _get(args, setup, "n_train", len(corpus))
    if n_train > len(corpus):
        raise UsageError(f"n_train {n_train} exceeds corpus size {len(corpus)}")
    budget = Budget(
        _get(args, setup, "train_bits", 600.0), _get(args, setup, "train_proposals", 32)
    )
    library = train_adapted(
        setup.grammar,
        corpus.melodies[:n_train],
        budget,
        setup.noise,
        setup.py,
        derive_seed(args.seed, "train"),
    )
    _write_text(Path(output), library.to_json())
    print(
        json.dumps(
            {
                "n_train": n_train,
                "distinct": library.distinct_count(),
                "total": library.total_count(),
                "types": len(library.types),
                "output": str(output),
            },
            sort_keys=True,
        )
    )
    return 0


def _load_library(path_str: str) -> Library:
    path = Path(path_str)
    if not path.exists():
        raise UsageError(f"no such library file: {path}")
    try:
        return Library.from_json(path.read_text())
    except (ValueError, KeyError) as e:
        raise UsageError(f"corrupt library file {path}: {e}") from None


def cmd_generalize(args) -> int:
    setup = _setup(args)
    corpus_path = _get(args, setup, "corpus", None)
    if corpus_path is None:
        raise UsageError("generalize requires --corpus")
    corpus = _load_corpus(corpus_path)
    model_kind = _get(args, setup, "model", "ag")
    library_path = _get(args, setup, "library", None)
    if model_kind == "ag":
        if library_path is None:
            raise UsageError("generalize --model ag requires a persisted --library")
        model = AdaptedGrammar(setup.grammar, _load_library(library_path), setup.py)
    else:
        model = setup.grammar
    n_eval = _get(args, setup, "n_eval", len(corpus))
    eval_corpus = Corpus(corpus.melodies[:n_eval], corpus.provenance, corpus.seed)
    r_s_grid = _get(args, setup, "r_s", [8, 64])
    lines = ["model,r_s,mean_distortion,stderr,n"]
    for r_s in r_s_grid:
        mu, se = one_shot_generalization(
            model,
            eval_corpus,
            r_s,
            derive_seed(args.seed, "generalize", r_s),
            setup.noise,
        )
        lines.append(f"{model_kind},{r_s},{mu:.10g},{se:.10g},{len(eval_corpus)}")
    out_dir = Path(args.out_dir)
    _write_text(out_dir / "generalization.csv", "\n".join(lines) + "\n")
    inputs = [corpus_path] + ([library_path] if model_kind == "ag" else [])
    meta = _metadata(
        args,
        setup,
        {"config": {"model": model_kind, "r_s": list(r_s_grid), "n_eval": n_eval}},
        inputs,
    )
    _write_text(out_dir / "generalization_meta.json", meta)
    print(f"wrote {out_dir / 'generalization.csv'}")
    return 0


def cmd_uniqueness(args) -> int:
    setup = _setup(args)
    corpus_path = _get(args, setup, "corpus", None)
    if corpus_path is None:
        raise UsageError("uniqueness requires --corpus")
    corpus = _load_corpus(corpus_path)
    model = _get(args, setup, "model", "both")
    kinds = ("pcfg", "ag") if model == "both" else (model,)
    if any(k not in ("pcfg", "ag") for k in kinds):
        raise UsageError(f"model must be pcfg, ag or both, got {model!r}")
    r_s = _get(args, setup, "r_s", [8, 32, 128])
    n_train = _get(args, setup, "n_train", [10, 30, 100])
    if max(n_train) > len(corpus):
        raise UsageError(f"n_train {max(n_train)} exceeds corpus size {len(corpus)}")
    train_bits = _get(args, setup, "train_bits", 600.0)
    rows = []
    for kind in kinds:
        rows.extend(
            uniqueness_sweep(
                kind,
                corpus,
                r_s,
                n_train,
                args.seed,
                setup.grammar,
                setup.py,
                setup.noise,
                train_bits,
                jobs=args.jobs,
            )
        )
    lines = ["model,r_s,n_train,uniqueness,shared"]
    for row in rows:
        lines.append(
            f"{row['model']},{row['r_s']},{row['n_train']},"
            f"{row['uniqueness']:.10g},{row['shared']:.10g}"
        )
    out_dir = Path(args.out_dir)
    _write_text(out_dir / "uniqueness.csv", "\n".join(lines) + "\n")
    meta = _metadata(
        args,
        setup,
        {"config": {"model": model, "r_s": list(r_s), "n_train": list(n_train)}},
        [corpus_path],
    )
    _write_text(out_dir / "uniqueness_meta.json", meta)
    print(f"wrote {out_dir / 'uniqueness.csv'}")
    return 0


def _load_ordering(path_str: str) -> list[str]:
    path = Path(path_str)
    if not path.exists():
        raise UsageError(f"no such ordering file: {path}")
    ordering = []
    for line in path.read_text().splitlines()[1:]:
        if line.strip():
            ordering.append(line.split(",")[1])
    return ordering


def cmd_curriculum(args) -> int:
    setup = _setup(args)
    corpus_path = _get(args, setup, "corpus", None)
    if corpus_path is None:
        raise UsageError("curriculum requires --corpus")
    corpus = _load_corpus(corpus_path)
    n_melodies = _get(args, setup, "melodies", 20)
    n_eval = _get(args, setup, "n_eval", 10)
    if n_melodies + n_eval > len(corpus):
        raise UsageError(
            f"need {n_melodies} train + {n_eval} eval melodies, corpus has {len(corpus)}"
        )
    subset, eval_corpus = split(
        corpus, n_melodies, n_eval, derive_seed(args.seed, "curr-split")
    )
    budget = Budget(
        _get(args, setup, "train_bits", 400.0), _get(args, setup, "train_proposals", 16)
    )
    eval_r_s = _get(args, setup, "eval_r_s", 16)
    out_dir = Path(args.out_dir)
    ordering_path = _get(args, setup, "ordering", None)
    if ordering_path:
        ordering = _load_ordering(ordering_path)
        if sorted(ordering) != sorted(m.id for m in subset):
            raise UsageError("ordering file does not permute the selected melodies")
        n_random = _get(args, setup, "n_random", 100)
        import random as _random

        ids = [m.id for m in subset.melodies]
        rows = []
        for j in range(n_random):
            rng = _random.Random(derive_seed(args.seed, "cmp-order", j))
            shuffled = ids[:]
            rng.shuffle(shuffled)
            run_seed_r = derive_seed(args.seed, "cmp-run-random", j)
            run_seed_s = derive_seed(args.seed, "cmp-run-synergy", j)
            err_r = run_curriculum(
                subset, shuffled, eval_corpus, budget, run_seed_r,
                setup.grammar, setup.py, setup.noise, eval_r_s,
            ).gen_error
            err_s = run_curriculum(
                subset, ordering, eval_corpus, budget, run_seed_s,
                setup.grammar, setup.py, setup.noise, eval_r_s,
            ).gen_error
            rows.append((j, err_r, err_s))
        lines = ["trial,err_random,err_synergy"]
        for j, err_r, err_s in rows:
            lines.append(f"{j},{err_r:.10g},{err_s:.10g}")
        _write_text(out_dir / "synergy_compare.csv", "\n".join(lines) + "\n")
        t_stat, p_two = paired_t([r[1] for r in rows], [r[2] for r in rows])
        stats = {
            "n": n_random,
            "mean_random": sum(r[1] for r in rows) / n_random,
            "mean_synergy": sum(r[2] for r in rows) / n_random,
            "t": t_stat,
            "p_one_sided_synergy_better": p_two / 2 if t_stat > 0 else 1 - p_two / 2,
        }
        _write_text(out_dir / "synergy_compare_stats.json", json.dumps(stats, indent=1, sort_keys=True))
        print(f"wrote {out_dir / 'synergy_compare.csv'}")
    else:
        n_curricula = _get(args, setup, "n_curricula", 200)
        result = matched_run_analysis(
            subset,
            n_curricula,
            eval_corpus,
            budget,
            args.seed,
            setup.grammar,
            setup.py,
            setup.noise,
            eval_r_s,
            jobs=args.jobs,
        )
        lines = ["curriculum,err_run1,err_run2,ordering"]
        for j, (e1, e2, ordering) in enumerate(
            zip(result["errors_run1"], result["errors_run2"], result["orderings"])
        ):
            lines.append(f"{j},{e1:.10g},{e2:.10g},{';'.join(ordering)}")
        _write_text(out_dir / "curriculum.csv", "\n".join(lines) + "\n")
        stats = {
            k: result[k]
            for k in ("n_curricula", "r_matched", "p_matched", "r_random", "p_random", "t_gap", "p_gap")
        }
        _write_text(out_dir / "curriculum_stats.json", json.dumps(stats, indent=1, sort_keys=True))
        print(f"wrote {out_dir / 'curriculum.csv'}")
    meta = _metadata(
        args,
        setup,
        {
            "config": {
                "melodies": n_melodies,
                "n_eval": n_eval,
                "train_bits": budget.max_bits,
                "train_proposals": budget.max_proposals,
                "eval_r_s": eval_r_s,
                "ordering": ordering_path,
            }
        },
        [corpus_path],
    )
    _write_text(out_dir / "curriculum_meta.json", meta)
    return 0


def cmd_synergy(args) -> int:
    setup = _setup(args)
    corpus_path = _get(args, setup, "corpus", None)
    if corpus_path is None:
        raise UsageError("synergy requires --corpus")
    corpus = _load_corpus(corpus_path)
    n_melodies = _get(args, setup, "melodies", 20)
    if n_melodies > len(corpus):
        raise UsageError(f"--melodies {n_melodies} exceeds corpus size {len(corpus)}")
    subset, _ = split(corpus, n_melodies, 0, derive_seed(args.seed, "curr-split"))
    budget = Budget(
        _get(args, setup, "train_bits", 400.0), _get(args, setup, "train_proposals", 16)
    )
    ordering, scores = build_synergistic_curriculum(
        subset,
        budget,
        args.seed,
        setup.grammar,
        setup.py,
        setup.noise,
        n_program_pairs=_get(args, setup, "n_pairs", 64),
    )
    lines = ["step,melody_id,synergy_bits"]
    for step, (mid, score) in enumerate(zip(ordering, scores)):
        lines.append(f"{step},{mid},{score:.10g}")
    out_dir = Path(args.out_dir)
    _write_text(out_dir / "synergy_curriculum.csv", "\n".join(lines) + "\n")
    meta = _metadata(
        args,
        setup,
        {"config": {"melodies": n_melodies, "train_bits": budget.max_bits,
                    "train_proposals": budget.max_proposals}},
        [corpus_path],
    )
    _write_text(out_dir / "synergy_meta.json", meta)
    print(f"wrote {out_dir / 'synergy_curriculum.csv'}")
    return 0


def cmd_decode_demo(args) -> int:
    setup = _setup(args)
    corpus_path = _get(args, setup, "corpus", None)
    if corpus_path is None:
        raise UsageError("decode-demo requires --corpus")
    corpus = _load_corpus(corpus_path)
    melody_id = _get(args, setup, "melody_id", corpus.melodies[0].id)
    try:
        melody = corpus.by_id(melody_id)
    except KeyError:
        raise UsageError(f"no melody {melody_id!r} in corpus") from None
    library_path = _get(args, setup, "library", None)
    if library_path:
        model = AdaptedGrammar(setup.grammar, _load_library(library_path), setup.py)
    else:
        model = setup.grammar
    budget = Budget(_get(args, setup, "r_l", 64.0), _get(args, setup, "r_s", 64))
    enc = encode_melody(melody, model, budget, setup.noise, derive_seed(args.seed, "demo"))
    rebuilt = decode(enc, model.sampler(), derive_seed(args.seed, "demo-dec"))
    _, dist = evaluate_encoding(
        melody, enc, model.sampler(), 100, derive_seed(args.seed, "demo-dec")
    )
    doc = json.loads(enc.to_json())
    doc["original"] = list(melody.notes)
    doc["decoded"] = list(rebuilt)
    doc["expected_distortion"] = dist
    doc["normalized_distortion"] = dist / len(melody)
    print(json.dumps(doc, indent=1))
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reprise",
        description="Compress melodies into typed combinator programs and "
        "reproduce the compression, generalization and curriculum experiments.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="root seed")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        p.add_argument("--config", help="strict key/value config file")
        p.add_argument("--out-dir", default="out", help="output directory")

    p = sub.add_parser("prepare", help="parse/synthesize and preprocess a corpus")
    common(p)
    p.add_argument("--input", help="corpus file (text or JSON)")
    p.add_argument("--synth-n", type=int, help="synthesize this many melodies")
    p.add_argument("--synth-mean-len", type=int)
    p.add_argument("--synth-motifs", type=int)
    p.add_argument("--min-len", type=int)
    p.add_argument("--output", help="where to write the prepared corpus JSON")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("rd-sweep", help="rate-distortion sweep over budget grids")
    common(p)
    p.add_argument("--corpus")
    p.add_argument("--model", choices=("pcfg", "ag"))
    p.add_argument("--r-l", type=lambda s: [float(x) for x in s.split(",")])
    p.add_argument("--r-s", type=lambda s: [int(x) for x in s.split(",")])
    p.add_argument("--n-train", type=lambda s: [int(x) for x in s.split(",")])
    p.add_argument("--n-seeds", type=int)
    p.add_argument("--n-eval", type=int)
    p.add_argument("--train-bits", type=float)
    p.add_argument("--train-proposals", type=int)
    p.add_argument("--decode-samples", type=int)
    p.set_defaults(func=cmd_rd_sweep)

    p = sub.add_parser("train", help="train a library and persist it")
    common(p)
    p.add_argument("--corpus")
    p.add_argument("--n-train", type=int)
    p.add_argument("--train-bits", type=float)
    p.add_argument("--train-proposals", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generalize", help="one-shot generalization of a frozen model")
    common(p)
    p.add_argument("--corpus")
    p.add_argument("--library")
    p.add_argument("--model", choices=("pcfg", "ag"))
    p.add_argument("--r-s", type=lambda s: [int(x) for x in s.split(",")])
    p.add_argument("--n-eval", type=int)
    p.set_defaults(func=cmd_generalize)

    p = sub.add_parser("uniqueness", help="subprogram uniqueness/sharing sweep")
    common(p)
    p.add_argument("--corpus")
    p.add_argument("--model", choices=("pcfg", "ag", "both"))
    p.add_argument("--r-s", type=lambda s: [int(x) for x in s.split(",")])
    p.add_argument("--n-train", type=lambda s: [int(x) for x in s.split(",")])
    p.add_argument("--train-bits", type=float)
    p.set_defaults(func=cmd_uniqueness)

    p = sub.add_parser("curriculum", help="curriculum sensitivity / ordering comparison")
    common(p)
    p.add_argument("--corpus")
    p.add_argument("--melodies", type=int)
    p.add_argument("--n-curricula", type=int)
    p.add_argument("--n-eval", type=int)
    p.add_argument("--train-bits", type=float)
    p.add_argument("--train-proposals", type=int)
    p.add_argument("--eval-r-s", type=int)
    p.add_argument("--ordering", help="ordering CSV from the synergy command")
    p.add_argument("--n-random", type=int)
    p.set_defaults(func=cmd_curriculum)

    p = sub.add_parser("synergy", help="build a greedy synergy-maximizing curriculum")
    common(p)
    p.add_argument("--corpus")
    p.add_argument("--melodies", type=int)
    p.add_argument("--train-bits", type=float)
    p.add_argument("--train-proposals", type=int)
    p.add_argument("--n-pairs", type=int)
    p.set_defaults(func=cmd_synergy)

    p = sub.add_parser("decode-demo", help="encode/decode one melody and print the result")
    common(p)
    p.add_argument("--corpus")
    p.add_argument("--melody-id")
    p.add_argument("--library")
    p.add_argument("--r-l", type=float)
    p.add_argument("--r-s", type=int)
    p.set_defaults(func=cmd_decode_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError, CorpusError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # runtime failure
        print(f"runtime error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
