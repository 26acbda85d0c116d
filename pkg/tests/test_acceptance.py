"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines
as they complete. Tolerances are pinned here, not configurable.
"""
import itertools
import math
import time
from pathlib import Path

import numpy as np

from helpers import EPS, finite_difference

from versecraft.cli import EXIT_OK, main
from versecraft.corpus import (
    PAD_ID,
    Form,
    TrainingPair,
    Vocab,
    build_training_pairs,
    build_vocab,
    pad_batch,
    read_pair_file,
    write_pair_file,
)
from versecraft.embedding import (
    EmbeddingMatrix,
    cosine,
    load_embeddings,
    save_embeddings,
)
from versecraft.emotion import EmotionExample, EmotionModel, classify, split_dataset
from versecraft.emotion import example_loss_and_grads as emotion_loss_grads
from versecraft.emotion import _forward as emotion_forward
from versecraft.evaluation import perplexity
from versecraft.generator import GenerationPlan, generate_poem
from versecraft.keywords import CoocGraph, fit_tfidf, textrank_scores, tfidf
from versecraft.neural import (
    AdamState,
    LstmCell,
    Mode,
    Seq2SeqModel,
    bilstm_backward,
    bilstm_encode,
    bilstm_forward,
    decode_greedy,
    decode_train,
    encode,
    loss_and_grads,
    lstm_step,
    lstm_step_backward,
    lstm_step_forward,
    sequence_loss,
    sequence_loss_grad,
)
from versecraft.neural.checkpoint import load_checkpoint, save_checkpoint

DATA = Path(__file__).parent / "data"
RTOL = 1e-4
ATOL = 1e-7


def report(criterion: int, label: str, failures: list[str]) -> None:
    status = "PASS" if not failures else "FAIL"
    print(f"ACCEPTANCE {criterion} [{label}]: {status}")
    assert not failures, f"criterion {criterion}: " + "; ".join(failures)


def grads_agree(f, analytic: dict, arrays: dict, failures: list, tag: str) -> None:
    for name, arr in arrays.items():
        numeric = finite_difference(f, arr, eps=EPS)
        a = analytic[name]
        bad = np.abs(a - numeric) > RTOL * np.maximum(np.abs(a), np.abs(numeric)) + ATOL
        if bad.any():
            failures.append(f"{tag}/{name}: {int(bad.sum())} coords off")


# ---------------------------------------------------------------------------
# 1. Gradient suite
# ---------------------------------------------------------------------------


def test_criterion_1_gradient_suite():
    start = time.monotonic()
    failures: list[str] = []
    for seed in (0, 1, 2):
        rng = np.random.default_rng(seed)

        # LSTM step
        cell = LstmCell.create(3, 4, np.random.default_rng(seed))
        x, h0, c0 = rng.normal(size=3), rng.normal(size=4), rng.normal(size=4)
        probe = rng.normal(size=4)
        _, _, cache = lstm_step_forward(cell, x, h0, c0)
        dw, db = np.zeros_like(cell.w), np.zeros_like(cell.b)
        dx, dh, dc = lstm_step_backward(cell, cache, probe.copy(), np.zeros(4), dw, db)
        grads_agree(
            lambda: float(probe @ lstm_step(cell, x, h0, c0)[0]),
            {"w": dw, "b": db, "x": dx, "h": dh, "c": dc},
            {"w": cell.w, "b": cell.b, "x": x, "h": h0, "c": c0},
            failures, f"lstm[{seed}]",
        )

        # BiLSTM over a length-3 input
        fw = LstmCell.create(2, 3, np.random.default_rng(seed + 10))
        bw = LstmCell.create(2, 3, np.random.default_rng(seed + 20))
        xs = rng.normal(size=(3, 2))
        probe2 = rng.normal(size=(3, 6))
        _, bcache = bilstm_forward(fw, bw, xs, 3)
        dfw_w, dfw_b = np.zeros_like(fw.w), np.zeros_like(fw.b)
        dbw_w, dbw_b = np.zeros_like(bw.w), np.zeros_like(bw.b)
        dxs = bilstm_backward(fw, bw, bcache, probe2.copy(),
                              dfw_w, dfw_b, dbw_w, dbw_b)
        grads_agree(
            lambda: float((bilstm_encode(fw, bw, xs, 3) * probe2).sum()),
            {"fw_w": dfw_w, "fw_b": dfw_b, "bw_w": dbw_w, "bw_b": dbw_b, "xs": dxs},
            {"fw_w": fw.w, "fw_b": fw.b, "bw_w": bw.w, "bw_b": bw.b, "xs": xs},
            failures, f"bilstm[{seed}]",
        )

        # attention scoring
        from versecraft.neural.seq2seq import _attend_backward, _attend_forward

        model = Seq2SeqModel.create(Vocab(list("abcdefgh")), embed_dim=5,
                                    hidden=4, seed=seed, dtype=np.float64)
        ws, v, wh_m = (model.params["attn_ws"], model.params["attn_v"],
                       model.params["attn_wh"])
        states = rng.normal(size=(3, 8))
        query = rng.normal(size=4)
        probe3 = rng.normal(size=8)

        def att_loss() -> float:
            wh = states @ wh_m.T
            ctx, _, _ = _attend_forward(ws, v, query, states, wh)
            return float(probe3 @ ctx)

        wh = states @ wh_m.T
        _, _, acache = _attend_forward(ws, v, query, states, wh)
        d_states, d_wh = np.zeros_like(states), np.zeros_like(wh)
        g_ws, g_v = np.zeros_like(ws), np.zeros_like(v)
        dq = _attend_backward(ws, v, states, acache, probe3.copy(),
                              d_states, d_wh, g_ws, g_v)
        grads_agree(
            att_loss,
            {"ws": g_ws, "v": g_v, "wh": d_wh.T @ states,
             "q": dq, "states": d_states + d_wh @ wh_m},
            {"ws": ws, "v": v, "wh": wh_m, "q": query, "states": states},
            failures, f"attend[{seed}]",
        )

        # sequence loss wrt logits
        logits = rng.normal(size=(2, 3, 5))
        targets = rng.integers(0, 5, size=(2, 3))
        mask = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 1.0]])
        analytic = sequence_loss_grad(logits, targets, mask)
        numeric = finite_difference(
            lambda: sequence_loss(logits, targets, mask), logits
        )
        if (np.abs(analytic - numeric)
                > RTOL * np.maximum(np.abs(analytic), np.abs(numeric)) + ATOL).any():
            failures.append(f"sequence_loss[{seed}]")

        # full seq2seq composite, both decoder modes
        mode = Mode.ATTENTION if seed != 2 else Mode.FIXED_C
        comp = Seq2SeqModel.create(Vocab(list("abcdefgh")), embed_dim=5,
                                   hidden=4, mode=mode, seed=seed,
                                   dtype=np.float64)
        batch = pad_batch(
            [TrainingPair(("a",), (), ("b", "c", "d")),
             TrainingPair(("e", "f"), ("b", "c"), ("g", "h"))],
            comp.vocab,
        )

        def comp_loss() -> float:
            enc = encode(comp, batch.keyword_ids, batch.context_ids,
                         batch.keyword_lengths, batch.context_lengths)
            logits, _ = decode_train(comp, enc, batch.decoder_in_ids)
            return sequence_loss(logits, batch.decoder_target_ids, batch.loss_mask)

        _, grads = loss_and_grads(comp, batch)
        grads_agree(comp_loss, grads, comp.params, failures, f"seq2seq[{seed}/{mode.value}]")

        # full emotion classifier
        emodel = EmotionModel.create(Vocab(list("abcdef")), fit_len=4,
                                     hidden=3, embed_dim=4, seed=seed)
        egrads = emodel.zero_grads()
        batches = [(np.array([4, 5, 6]), 2), (np.array([7, 8]), 5)]
        for ids, label in batches:
            emotion_loss_grads(emodel, ids, label, egrads)

        def emo_loss() -> float:
            total = 0.0
            for ids, label in batches:
                probs, _ = emotion_forward(emodel, ids)
                total += -math.log(float(probs[label]))
            return total

        grads_agree(emo_loss, egrads, emodel.params, failures, f"emotion[{seed}]")

    elapsed = time.monotonic() - start
    if elapsed >= 120:
        failures.append(f"runtime {elapsed:.1f}s >= 120s")
    report(1, "gradient suite", failures)


# ---------------------------------------------------------------------------
# 2. Keyword oracles
# ---------------------------------------------------------------------------


def power_iteration_oracle(graph: CoocGraph, d: float) -> dict[str, float]:
    nodes = list(graph.nodes)
    index = {n: i for i, n in enumerate(nodes)}
    w = np.zeros((len(nodes), len(nodes)))
    for a in nodes:
        for b, weight in graph.adj[a].items():
            w[index[a], index[b]] = weight
    out_w = w.sum(axis=1)
    m = np.zeros_like(w)
    for j in range(len(nodes)):
        if out_w[j] > 0:
            m[:, j] = w[j, :] / out_w[j]
    s = np.ones(len(nodes))
    for _ in range(5000):
        s_new = (1 - d) + d * (m @ s)
        if np.abs(s_new - s).max() < 1e-14:
            s = s_new
            break
        s = s_new
    return {n: float(s[index[n]]) for n in nodes}


def test_criterion_2_keyword_oracles():
    failures: list[str] = []

    # TF-IDF against direct arithmetic over 50 random toy corpora
    rng = np.random.default_rng(17)
    alphabet = list("abcdefgh")
    for trial in range(50):
        docs = [
            [alphabet[i] for i in rng.integers(0, len(alphabet), rng.integers(1, 9))]
            for _ in range(rng.integers(1, 7))
        ]
        model = fit_tfidf(docs)
        doc = docs[int(rng.integers(0, len(docs)))]
        for word in set(doc):
            expected = (doc.count(word) / len(doc)) * math.log2(
                len(docs) / sum(1 for d in docs if word in d)
            )
            if abs(tfidf(model, doc, word) - expected) > 1e-12:
                failures.append(f"tfidf trial {trial} word {word}")

    # TextRank: exhaustive sweep, all graphs on 2..4 nodes, weights 0..3,
    # plus seeded random graphs on 5 and 6 nodes
    swept = 0
    graphs = []
    for n in range(2, 5):
        edges = list(itertools.combinations(range(n), 2))
        for weights in itertools.product(range(4), repeat=len(edges)):
            graph = CoocGraph()
            for i in range(n):
                graph.add_node(f"n{i}")
            for (a, b), w in zip(edges, weights):
                if w:
                    graph.add_edge(f"n{a}", f"n{b}", float(w))
            graphs.append(graph)
    grng = np.random.default_rng(23)
    for _ in range(150):
        n = int(grng.integers(5, 7))
        graph = CoocGraph()
        for i in range(n):
            graph.add_node(f"n{i}")
        for a, b in itertools.combinations(range(n), 2):
            w = int(grng.integers(0, 4))
            if w:
                graph.add_edge(f"n{a}", f"n{b}", float(w))
        graphs.append(graph)
    for graph in graphs:
        scores = textrank_scores(graph, d=0.85, tol=1e-12, max_iter=10000).scores
        oracle = power_iteration_oracle(graph, 0.85)
        for node in graph.nodes:
            if abs(scores[node] - oracle[node]) > 1e-8:
                failures.append(f"textrank graph {swept} node {node}")
        swept += 1
    if swept < 500:
        failures.append(f"swept only {swept} graphs")

    # isolated node scores exactly 1 - d
    lone = CoocGraph()
    lone.add_edge("a", "b")
    lone.add_node("x")
    if textrank_scores(lone, d=0.85).scores["x"] != 1.0 - 0.85:
        failures.append("isolated node != 1-d")

    # symmetric uniform graphs have the all-ones fixed point
    for n in (2, 3, 5):
        graph = CoocGraph()
        for a, b in itertools.combinations(range(n), 2):
            graph.add_edge(f"n{a}", f"n{b}", 1.0)
        scores = textrank_scores(graph, d=0.85, tol=1e-12, max_iter=10000).scores
        if any(abs(s - 1.0) > 1e-8 for s in scores.values()):
            failures.append(f"uniform K{n} not all ones")

    report(2, "keyword oracles", failures)


# ---------------------------------------------------------------------------
# 3. Worked example
# ---------------------------------------------------------------------------


def test_criterion_3_worked_example(overfit_two_pair, jingyesi_poem):
    failures: list[str] = []
    keywords = {"床前明月光": "月光", "疑是地上霜": "霜"}
    pairs = build_training_pairs(jingyesi_poem, keywords.__getitem__)
    expected = [
        TrainingPair(tuple("月光"), (), tuple("床前明月光")),
        TrainingPair(tuple("霜"), tuple("床前明月光"), tuple("疑是地上霜")),
    ]
    if pairs != expected:
        failures.append("prepared pairs differ from the worked example")
    if read_pair_file(overfit_two_pair["pair_path"]) != expected:
        failures.append("pair file round trip differs")
    if overfit_two_pair["seconds"] >= 300:
        failures.append(f"training took {overfit_two_pair['seconds']:.0f}s >= 300s")
    lines = generate_poem(
        overfit_two_pair["model"], GenerationPlan(("月光", "霜"), Form.FIVE, 2)
    )
    if lines != ["床前明月光", "疑是地上霜"]:
        failures.append(f"generated {lines!r}")
    if not all(len(line) == 5 for line in lines):
        failures.append("line length != 5")
    report(3, "worked example", failures)


# ---------------------------------------------------------------------------
# 4. Overfit perplexity
# ---------------------------------------------------------------------------


def test_criterion_4_overfit_perplexity(toy20):
    failures: list[str] = []
    history = toy20["history"]
    if len(history) > 300:
        failures.append("more than 300 epochs")
    if not any(pp < 1.2 for _, _, pp in history):
        failures.append(f"training PP never fell below 1.2 (last {history[-1][2]:.3f})")
    train_pp = perplexity(toy20["model"], toy20["pairs"]).perplexity
    if train_pp >= 1.2:
        failures.append(f"final training-set PP {train_pp:.3f} >= 1.2")

    vocab = toy20["vocab"]
    v = len(vocab)
    untrained = Seq2SeqModel.create(vocab, embed_dim=16, hidden=12, seed=99,
                                    dtype=np.float64)
    pp0 = perplexity(untrained, toy20["pairs"]).perplexity
    if not (v / 2 <= pp0 <= 2 * v):
        failures.append(f"untrained PP {pp0:.1f} outside [{v/2}, {2*v}]")

    uniform = Seq2SeqModel.create(vocab, embed_dim=16, hidden=12, seed=1,
                                  dtype=np.float64)
    uniform.params["proj_w"][:] = 0.0
    uniform.params["proj_b"][:] = 0.0
    ppu = perplexity(uniform, toy20["pairs"]).perplexity
    if abs(ppu - v) / v > 1e-6:
        failures.append(f"uniform-logit PP {ppu!r} != V={v}")
    report(4, "overfit perplexity", failures)


# ---------------------------------------------------------------------------
# 5. Padding invariance
# ---------------------------------------------------------------------------


def widen(batch, extra_dec: int, extra_src: int):
    import dataclasses

    b = batch.decoder_in_ids.shape[0]

    def pad_cols(mat, n):
        return np.concatenate([mat, np.full((b, n), PAD_ID, dtype=np.int64)], axis=1)

    return dataclasses.replace(
        batch,
        keyword_ids=pad_cols(batch.keyword_ids, extra_src),
        context_ids=pad_cols(batch.context_ids, extra_src),
        decoder_in_ids=pad_cols(batch.decoder_in_ids, extra_dec),
        decoder_target_ids=pad_cols(batch.decoder_target_ids, extra_dec),
        loss_mask=np.concatenate([batch.loss_mask, np.zeros((b, extra_dec))], axis=1),
    )


def test_criterion_5_padding_invariance():
    failures: list[str] = []
    rng = np.random.default_rng(31)
    vocab = Vocab(list("abcdefghij"))
    content = vocab.id2word[4:]
    for trial in range(20):
        mode = Mode.ATTENTION if trial % 2 == 0 else Mode.FIXED_C
        model = Seq2SeqModel.create(vocab, embed_dim=5, hidden=4, mode=mode,
                                    seed=trial, dtype=np.float64)
        pairs = []
        for _ in range(int(rng.integers(1, 4))):
            kw = tuple(rng.choice(content, rng.integers(1, 3)))
            prec = tuple(rng.choice(content, rng.integers(0, 4)))
            tgt = tuple(rng.choice(content, rng.integers(1, 5)))
            pairs.append(TrainingPair(kw, prec, tgt))
        batch = pad_batch(pairs, vocab)
        wide = widen(batch, extra_dec=int(rng.integers(1, 4)),
                     extra_src=int(rng.integers(1, 4)))

        loss_a, grads_a = loss_and_grads(model, batch)
        loss_b, grads_b = loss_and_grads(model, wide)
        if abs(loss_a - loss_b) >= 1e-9:
            failures.append(f"trial {trial}: loss moved {abs(loss_a - loss_b):.2e}")
        worst = max(np.abs(grads_a[k] - grads_b[k]).max() for k in grads_a)
        if worst >= 1e-9:
            failures.append(f"trial {trial}: grad moved {worst:.2e}")

        enc_a = encode(model, batch.keyword_ids, batch.context_ids,
                       batch.keyword_lengths, batch.context_lengths)
        enc_b = encode(model, wide.keyword_ids, wide.context_ids,
                       wide.keyword_lengths, wide.context_lengths)
        for row in range(batch.size):
            out_a = decode_greedy(model, enc_a.states[row], enc_a.mask[row], max_len=7)
            out_b = decode_greedy(model, enc_b.states[row], enc_b.mask[row], max_len=7)
            if out_a != out_b:
                failures.append(f"trial {trial} row {row}: generated tokens changed")
    report(5, "padding invariance", failures)


# ---------------------------------------------------------------------------
# 6. Skip-gram separation
# ---------------------------------------------------------------------------


def test_criterion_6_skipgram_separation(twoclique):
    failures: list[str] = []
    matrix, vocab = twoclique["matrix"], twoclique["vocab"]
    vecs = {w: matrix.rows[vocab.word2id[w]] for w in "abcd"}
    intra = (cosine(vecs["a"], vecs["b"]) + cosine(vecs["c"], vecs["d"])) / 2
    inter = (
        cosine(vecs["a"], vecs["c"]) + cosine(vecs["a"], vecs["d"])
        + cosine(vecs["b"], vecs["c"]) + cosine(vecs["b"], vecs["d"])
    ) / 4
    if intra - inter < 0.3:
        failures.append(f"separation {intra - inter:.3f} < 0.3")
    if twoclique["seconds"] >= 60:
        failures.append(f"runtime {twoclique['seconds']:.1f}s >= 60s")
    report(6, "skip-gram separation", failures)


# ---------------------------------------------------------------------------
# 7. Emotion pipeline
# ---------------------------------------------------------------------------


def test_criterion_7_emotion_pipeline(emotion_toy):
    failures: list[str] = []
    model = emotion_toy["model"]
    examples = emotion_toy["examples"]
    if emotion_toy["config"].epochs > 200:
        failures.append("needed more than 200 epochs")
    wrong = sum(1 for ex in examples if classify(model, ex.text)[0] != ex.label)
    if wrong:
        failures.append(f"{wrong}/30 training examples misclassified")

    rng = np.random.default_rng(3)
    pool = sorted({tok for ex in examples for tok in ex.text})
    for _ in range(10):
        text = [str(t) for t in rng.choice(pool, 5)]
        _, probs = classify(model, text)
        if probs.shape != (6,) or abs(float(probs.sum()) - 1.0) > 1e-12:
            failures.append("probabilities malformed")
            break

    hundred = [
        EmotionExample((f"字{label}{i}",), label)
        for label in range(6)
        for i in range(17 if label < 4 else 16)
    ]
    assert len(hundred) == 100
    train, test = split_dataset(hundred, seed=0)
    if (len(train), len(test)) != (80, 20):
        failures.append(f"split {len(train)}/{len(test)} != 80/20")
    for label in range(6):
        n_total = sum(1 for ex in hundred if ex.label == label)
        n_test = sum(1 for ex in test if ex.label == label)
        if abs(n_test - 0.2 * n_total) > 1.0:
            failures.append(f"label {label} test share {n_test} of {n_total}")
    report(7, "emotion pipeline", failures)


# ---------------------------------------------------------------------------
# 8. CLI determinism
# ---------------------------------------------------------------------------


def run_cli(capsys, args: list[str]) -> str:
    assert main(args) == EXIT_OK, f"command failed: {args}"
    return capsys.readouterr().out


def tree_bytes(root: Path) -> dict[str, bytes]:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*")) if p.is_file()
    }


def test_criterion_8_cli_determinism(tmp_path, capsys):
    failures: list[str] = []
    runs = []
    for tag in ("one", "two"):
        root = tmp_path / tag
        root.mkdir()
        outputs: dict[str, str] = {}
        prep = root / "prep"
        outputs["prepare"] = run_cli(capsys, [
            "prepare", "--corpus", str(DATA / "corpus"), "--form", "five",
            "--out", str(prep), "--seed", "42",
        ])
        outputs["train-embed"] = run_cli(capsys, [
            "train-embed", "--vocab", str(prep / "vocab.txt"),
            "--pairs", str(prep / "pairs.txt"), "--out", str(root / "embed.txt"),
            "--dim", "10", "--epochs", "2", "--seed", "42",
        ])
        outputs["train-gen"] = run_cli(capsys, [
            "train-gen", "--pairs", str(prep / "pairs.txt"),
            "--vocab", str(prep / "vocab.txt"), "--embed", str(root / "embed.txt"),
            "--out", str(root / "gen.ckpt"), "--epochs", "2", "--hidden", "8",
            "--batch-size", "8", "--seed", "42",
        ])
        outputs["generate"] = run_cli(capsys, [
            "generate", "--ckpt", str(root / "gen.ckpt"),
            "--vocab", str(prep / "vocab.txt"), "--embed", str(root / "embed.txt"),
            "--tfidf", str(prep / "tfidf.txt"), "--text", "明月照山水",
            "--lines", "2", "--seed", "42",
        ])
        outputs["eval"] = run_cli(capsys, [
            "eval", "--ckpt", str(root / "gen.ckpt"),
            "--vocab", str(prep / "vocab.txt"), "--pairs", str(prep / "pairs.txt"),
        ])
        outputs["train-emotion"] = run_cli(capsys, [
            "train-emotion", "--data", str(DATA / "emotion_toy.tsv"),
            "--out", str(root / "emotion.bin"), "--epochs", "10",
            "--hidden", "8", "--dim", "8", "--seed", "42",
        ])
        outputs["emotion"] = run_cli(capsys, [
            "emotion", "--model", str(root / "emotion.bin"),
            "--text", "开心笑出声音",
        ])
        runs.append((tree_bytes(root), outputs))

    files_a, out_a = runs[0]
    files_b, out_b = runs[1]
    if set(files_a) != set(files_b):
        failures.append("artifact sets differ")
    else:
        for name in files_a:
            if files_a[name] != files_b[name]:
                failures.append(f"artifact {name} differs between runs")
    for command in out_a:
        if out_a[command] != out_b[command]:
            failures.append(f"stdout of {command} differs")
    report(8, "CLI determinism", failures)


# ---------------------------------------------------------------------------
# 9. Round trips
# ---------------------------------------------------------------------------


def test_criterion_9_round_trips(tmp_path, jingyesi_poem, worked_example_pairs):
    failures: list[str] = []

    p1, p2 = tmp_path / "pairs1.txt", tmp_path / "pairs2.txt"
    write_pair_file(worked_example_pairs, p1)
    write_pair_file(read_pair_file(p1), p2)
    if p1.read_bytes() != p2.read_bytes():
        failures.append("pair file")

    vocab = build_vocab([jingyesi_poem])
    v1, v2 = tmp_path / "vocab1.txt", tmp_path / "vocab2.txt"
    vocab.save(v1)
    Vocab.load(v1).save(v2)
    if v1.read_bytes() != v2.read_bytes():
        failures.append("vocab file")

    matrix = EmbeddingMatrix.random_init(vocab, dim=7, seed=3)
    e1, e2 = tmp_path / "emb1.txt", tmp_path / "emb2.txt"
    save_embeddings(matrix, e1)
    save_embeddings(load_embeddings(e1), e2)
    if e1.read_bytes() != e2.read_bytes():
        failures.append("embedding file")

    model = Seq2SeqModel.create(vocab, embed_dim=7, hidden=5, seed=4,
                                dtype=np.float32)
    optimizer = AdamState.init(model.params, learning_rate=1e-3)
    c1, c2 = tmp_path / "m1.ckpt", tmp_path / "m2.ckpt"
    save_checkpoint(c1, model, vocab.content_hash(), optimizer=optimizer, epoch=3)
    loaded, opt, extra = load_checkpoint(c1, vocab)
    save_checkpoint(c2, loaded, vocab.content_hash(), optimizer=opt,
                    epoch=extra["epoch"])
    if c1.read_bytes() != c2.read_bytes():
        failures.append("checkpoint")

    report(9, "round trips", failures)
