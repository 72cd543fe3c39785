import random

import pytest

from reprise.corpus import (
    PAUSE,
    Corpus,
    CorpusError,
    Melody,
    corpus_from_json,
    corpus_to_json,
    dump_corpus,
    hamming_distortion,
    parse_corpus,
    preprocess,
    split,
    synth_corpus,
)


def test_parse_basic():
    corpus = parse_corpus("m1: 0,2,4,p,0,2,4,5,7,9\n")
    assert len(corpus) == 1
    melody = corpus.melodies[0]
    assert melody.id == "m1"
    assert len(melody) == 10
    assert melody.notes[3] == PAUSE


def test_parse_pitch_out_of_range():
    with pytest.raises(CorpusError, match="out of range"):
        parse_corpus("m1: 0,13")
    # raw MIDI mode admits it
    assert parse_corpus("m1: 0,13", raw=True).melodies[0].notes == (0, 13)


def test_parse_duplicate_id():
    with pytest.raises(CorpusError, match="duplicate"):
        parse_corpus("m1: 0,2\nm1: 4,5")


def test_parse_empty_and_malformed():
    with pytest.raises(CorpusError, match="empty corpus"):
        parse_corpus("# only a comment\n")
    with pytest.raises(CorpusError, match="malformed token"):
        parse_corpus("m1: 0,x,2")
    err = None
    try:
        parse_corpus("m1: 0,x,2")
    except CorpusError as e:
        err = e
    assert err.line == 1 and err.column is not None


def test_parse_dump_roundtrip():
    text = "m1: 0,2,4,p,11\nm2: 5,5,5\n"
    corpus = parse_corpus(text)
    assert dump_corpus(corpus) == text


def test_json_roundtrip():
    corpus = parse_corpus("a: 0,p,11\nb: 3,4\n")
    again = corpus_from_json(corpus_to_json(corpus))
    assert again.melodies == corpus.melodies


def test_preprocess_octave_and_length():
    raw = Corpus(
        (
            Melody("mid", (60,) * 9 + (14,)),  # 10 notes, multi-octave
            Melody("short", (1,) * 9),  # dropped
        )
    )
    out = preprocess(raw)
    assert [m.id for m in out] == ["mid"]
    assert out.melodies[0].notes == (0,) * 9 + (2,)


def test_preprocess_keeps_pauses_and_is_idempotent():
    raw = Corpus((Melody("m", (60, PAUSE) * 5),))
    once = preprocess(raw)
    assert once.melodies[0].notes == (0, PAUSE) * 5
    assert preprocess(once).melodies == once.melodies


def test_split_sizes_and_determinism():
    corpus = synth_corpus(100, 12, 5, seed=0)
    train, evalc = split(corpus, 60, 30, seed=1)
    assert len(train) == 60 and len(evalc) == 30
    train_ids = {m.id for m in train}
    eval_ids = {m.id for m in evalc}
    assert not train_ids & eval_ids
    train2, eval2 = split(corpus, 60, 30, seed=1)
    assert train2.melodies == train.melodies and eval2.melodies == evalc.melodies
    with pytest.raises(ValueError):
        split(corpus, 80, 30, seed=1)


def test_synth_corpus_mean_length():
    corpus = synth_corpus(500, 50, 20, seed=7)
    assert len(corpus) == 500
    mean_len = sum(len(m) for m in corpus) / len(corpus)
    assert 45 <= mean_len <= 55
    assert all(len(m) >= 10 for m in corpus)


def test_synth_corpus_determinism_and_bounds():
    single = synth_corpus(1, 10, 1, seed=5)
    assert len(single.melodies[0]) >= 10
    a = synth_corpus(40, 20, 6, seed=9)
    b = synth_corpus(40, 20, 6, seed=9)
    assert a.melodies == b.melodies


def test_hamming_examples():
    assert hamming_distortion((0, 2, 4), (0, 2, 4)) == 0
    assert hamming_distortion((0, 2, 4), (0, 2, 5)) == 1
    assert hamming_distortion((0, 2, 4), (0, 2)) == 1
    assert hamming_distortion((), (1, 2)) == 2


def test_hamming_metric_properties():
    rng = random.Random(0)
    for _ in range(300):
        n = rng.randrange(1, 12)
        seqs = [tuple(rng.randrange(12) for _ in range(n)) for _ in range(3)]
        x, y, z = seqs
        assert hamming_distortion(x, y) >= 0
        assert (hamming_distortion(x, y) == 0) == (x == y)
        assert hamming_distortion(x, y) == hamming_distortion(y, x)
        assert hamming_distortion(x, z) <= hamming_distortion(x, y) + hamming_distortion(y, z)
