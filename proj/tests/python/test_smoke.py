"""Smoke tests for the python module: one pass over each operation family."""

import math

import pytest

import xlqa


def make_corpus(pairs):
    c = xlqa.ParallelCorpus()
    c.source_lang = "aa"
    c.target_lang = "bb"
    c.pairs = [(xlqa.make_sentence("aa", s), xlqa.make_sentence("bb", t)) for s, t in pairs]
    return c


def test_tokenize_offsets_slice_the_text():
    text = "Where did Joan Clarke work?"
    toks = xlqa.tokenize(text)
    assert [t.surface for t in toks] == ["Where", "did", "Joan", "Clarke", "work", "?"]
    raw = text.encode("utf-8")
    for t in toks:
        assert raw[t.byte_start : t.byte_end].decode("utf-8") == t.surface


def test_errors_surface_as_python_exceptions():
    with pytest.raises(xlqa.InputError):
        xlqa.load_parallel("/nonexistent/a", "/nonexistent/b", "aa", "bb")
    with pytest.raises(xlqa.InputError):
        xlqa.span_f1((9, 3), (0, 1))


def test_bpe_vocab_round_trip():
    vocab = xlqa.build_vocab([make_corpus([("aa aa", "aa aa")])], 1)
    assert vocab.merges() == [("a", "a")]
    ids = vocab.encode_word("aab")
    assert [vocab.token_of(i) for i in ids] == ["aa", "b"]


def test_ibm1_learns_the_toy_lexicon():
    corpus = make_corpus([("a b", "x y"), ("a c", "x z"), ("b c", "y z")])
    table, trace = xlqa.train_ibm1(corpus, 10, use_null=False)
    row = dict(table.row("a"))
    assert max(row, key=row.get) == "x"
    assert all(b >= a - 1e-9 for a, b in zip(trace, trace[1:]))
    links = xlqa.extract_alignments(table, xlqa.make_sentence("aa", "a b"),
                                    xlqa.make_sentence("bb", "x y"))
    assert links.links() == [(0, 0), (1, 1)]


def test_encoder_shapes_and_determinism():
    config = xlqa.EncoderConfig()
    config.vocab_size = 300
    config.hidden_dim = 8
    config.num_layers = 1
    config.num_heads = 2
    config.ffn_dim = 16
    config.max_seq_len = 16
    config.seed = 3
    params = xlqa.init_params(config)
    out = xlqa.encode(params, [1, 2, 3])
    assert out.shape == (3, 8)
    again = xlqa.encode(params, [1, 2, 3])
    assert (out == again).all()
    pooled = xlqa.word_pool(out, [(0, 2), (2, 3)])
    assert pooled.shape == (2, 8)


def test_gradcheck_meets_the_bound():
    err, coords, _worst = xlqa.gradcheck(seed=12, max_coords_per_tensor=40)
    assert coords > 50
    assert err < 1e-4


def test_span_f1_and_passage_metrics():
    assert xlqa.span_f1((0, 10), (5, 15)) == pytest.approx(0.5)
    assert xlqa.span_f1((0, 10), (0, 10)) == 1.0

    golds = []
    preds = []
    for i, (g, p) in enumerate([(0, 0), (1, 0), (0, None)]):
        ex = xlqa.QAExample()
        ex.id = f"e{i}"
        ex.question_lang = "aa"
        ex.context_lang = "aa"
        ex.question = "q"
        ex.context = "0123456789"
        ex.passages = [(0, 5), (5, 10)]
        ex.gold_passage = g
        golds.append(ex)
        pr = xlqa.QAPrediction()
        pr.id = ex.id
        pr.passage_pred = p
        preds.append(pr)
    prf = xlqa.passage_f1(preds, golds)
    assert prf.precision == pytest.approx(0.5)
    assert prf.recall == pytest.approx(1.0 / 3.0)
    assert prf.f1 == pytest.approx(0.4)


def test_bootstrap_is_deterministic():
    golds, exact, wrong = [], [], []
    for i in range(12):
        ex = xlqa.QAExample()
        ex.id = f"e{i}"
        ex.question_lang = "aa"
        ex.context_lang = "aa"
        ex.question = "q"
        ex.context = "x" * 40
        ex.passages = [(0, 20), (20, 40)]
        ex.gold_passage = 0
        m = xlqa.MinimalAnswer()
        m.kind = xlqa.AnswerKind.SPAN
        m.span_start, m.span_end = 0, 10
        ex.gold_minimal = m
        golds.append(ex)
        a = xlqa.QAPrediction()
        a.id = ex.id
        a.passage_pred = 0
        a.minimal_pred = m
        exact.append(a)
        b = xlqa.QAPrediction()
        b.id = ex.id
        b.passage_pred = 1
        nm = xlqa.MinimalAnswer()
        nm.kind = xlqa.AnswerKind.SPAN
        nm.span_start, nm.span_end = 25, 30
        b.minimal_pred = nm
        wrong.append(b)
    self_cmp = xlqa.bootstrap_significance(exact, exact, golds, xlqa.Metric.MINIMAL, 200, 7)
    assert self_cmp.p_value == 1.0
    r1 = xlqa.bootstrap_significance(exact, wrong, golds, xlqa.Metric.MINIMAL, 200, 7)
    r2 = xlqa.bootstrap_significance(exact, wrong, golds, xlqa.Metric.MINIMAL, 200, 7)
    assert r1.p_value == 0.0
    assert (r1.p_value, r1.win_fraction) == (r2.p_value, r2.win_fraction)


def test_augment_keeps_contexts_and_counts():
    ex = xlqa.QAExample()
    ex.id = "q1"
    ex.question_lang = "aa"
    ex.context_lang = "aa"
    ex.question = "kedi veka punolo?"
    ex.context = "veka sotu\nmas tilo"
    ex.passages = [(0, 9), (10, 18)]
    ex.gold_passage = 0
    out, warnings = xlqa.augment_crosslingual([ex], [xlqa.Translation("q1", "bb", "Q-bb")])
    assert len(out) == 2
    assert not warnings
    assert out[1].id == "q1#aug-bb"
    assert out[1].question_lang == "bb"
    assert out[1].context == ex.context


def test_end_to_end_tiny_qa_flow():
    corpus = make_corpus([("veka sotu", "rbnf vahp"), ("mas tilo", "gfv zosa")])
    vocab = xlqa.build_vocab([corpus], 30)
    config = xlqa.EncoderConfig()
    config.vocab_size = vocab.size()
    config.hidden_dim = 8
    config.num_layers = 1
    config.num_heads = 2
    config.ffn_dim = 16
    config.max_seq_len = 32
    config.seed = 5
    model = xlqa.init_qa_model(xlqa.init_params(config), 6)

    ex = xlqa.QAExample()
    ex.id = "t0"
    ex.question_lang = "aa"
    ex.context_lang = "aa"
    ex.question = "veka?"
    ex.context = "veka sotu\nmas tilo"
    ex.passages = [(0, 9), (10, 18)]
    ex.gold_passage = 0
    m = xlqa.MinimalAnswer()
    m.kind = xlqa.AnswerKind.SPAN
    m.span_start, m.span_end = 0, 4
    ex.gold_minimal = m

    tune = xlqa.QATuneConfig()
    tune.learning_rate = 0.01
    tune.epochs = 3
    tune.batch_size = 1
    tune.seed = 2
    result = xlqa.task_tune(model, vocab, [ex], tune)
    assert len(result.loss_trace) == 3
    assert result.loss_trace[-1] <= result.loss_trace[0]
    preds = xlqa.predict(result.model, vocab, [ex])
    assert len(preds) == 1
    assert preds[0].id == "t0"
    report = xlqa.build_report(preds, [ex])
    text = xlqa.render_report(report, xlqa.ReportFormat.TSV)
    assert "question_lang" in text
    assert math.isfinite(report.rows[0].avg_minimal_f1)
