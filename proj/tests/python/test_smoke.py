import math

import pytest

import rumorlab


def small_config():
    cfg = rumorlab.default_config()
    cfg["corpus"]["n_trees"] = 40
    cfg["corpus"]["max_size"] = 12
    cfg["encoder"]["dim"] = 32
    cfg["detector"]["hidden_dims"] = [8]
    cfg["train"]["epochs"] = 4
    cfg["attack"]["budget"] = 4
    cfg["experiment"]["seeds"] = 1
    return cfg


def test_tree_scores():
    path = rumorlab.PropagationTree(["a", "b", "c"], [(0, 1), (1, 2)], rumorlab.Label.RUMOR)
    assert len(path) == 3
    assert rumorlab.degree(path, 1) == 2
    assert math.isclose(rumorlab.influence_score(path, 1), 2 + 2 * math.sqrt(2))
    assert rumorlab.rank_by_influence(path) == [1, 0, 2]
    grown = path.with_leaf(1, "new")
    assert grown.injected == [False, False, False, True]
    with pytest.raises(rumorlab.ArgumentError):
        rumorlab.PropagationTree(["a", "b"], [(1, 0)], rumorlab.Label.RUMOR)


def test_encoder_and_loss():
    v = rumorlab.encode_message("Hello hello world", dim=16)
    assert len(v) == 16
    assert math.isclose(sum(x * x for x in v), 1.0)
    s = [0.3, -0.2, 0.9]
    assert math.isclose(rumorlab.sincon_loss([(s, s, s)]), -math.log(3.0))


def test_config_roundtrip_and_errors():
    cfg = rumorlab.load_config(overrides=["train.lr=0.5"])
    assert cfg["train"]["lr"] == 0.5
    assert rumorlab.config_hash(cfg) != rumorlab.config_hash(rumorlab.default_config())
    with pytest.raises(rumorlab.ConfigError):
        rumorlab.load_config(overrides=["train.unknown=1"])


def test_train_attack_pipeline():
    cfg = small_config()
    corpus = rumorlab.synth_corpus(cfg, seed=3)
    assert len(corpus) == 40
    assert rumorlab.corpus_from_json(rumorlab.corpus_to_json(corpus)) == corpus
    trained = rumorlab.train_and_evaluate(corpus, cfg, mode="sincon", seed=1)
    assert 0.0 <= trained["accuracy"] <= 1.0
    assert len(trained["loss_history"]) == 4
    result = rumorlab.attack(trained["params"], corpus, cfg, seed=2)
    assert 0.0 <= result["aua"] <= 1.0
    assert len(result["corpus"]) == len(corpus)
    assert result["failures"] == 0


def test_run_and_report(tmp_path):
    rows = rumorlab.run_experiment(small_config(), seed=5, out_dir=tmp_path / "run")
    assert [r["arm"] for r in rows] == ["normal", "sincon", "sincon-random"]
    assert all(r["ok"] for r in rows)
    text, csv = rumorlab.report(tmp_path / "run")
    assert "sincon-random" in text
    assert csv.count("\n") >= 4
    with pytest.raises(rumorlab.ReportError):
        rumorlab.report(tmp_path / "missing")
