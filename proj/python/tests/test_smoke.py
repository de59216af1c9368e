# Copyright 2026 The topicreply Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import math

import pytest

import topicreply


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    root = tmp_path_factory.mktemp("chain")
    corpus = root / "chain.jsonl"
    pairs, oracle = topicreply.synthesize("chain", path=corpus, num_pairs=600, num_topics=10, seed=3)
    p = topicreply.Pipeline(
        corpus=corpus,
        out_dir=root / "out",
        m_grid=[10],
        t2_m=10,
        ablation=False,
        lda={"sweeps": 150},
    )
    results = p.run_all()
    return root, p, results, pairs, oracle


def test_bhattacharyya_analytic():
    assert topicreply.bhattacharyya([0.5, 0.5], [0.5, 0.5]) == pytest.approx(1.0, abs=1e-12)
    assert topicreply.bhattacharyya([0.25] * 4, [1, 0, 0, 0]) == pytest.approx(0.5, abs=1e-12)


def test_dominant_topic_tie_goes_low():
    assert topicreply.dominant_topic([0.5, 0.5]) == (0, 0.5, False)
    topic, prob, peaked = topicreply.dominant_topic([0.1, 0.8, 0.1])
    assert (topic, peaked) == (1, True) and prob == pytest.approx(0.8)


def test_synth_is_seeded():
    a, _ = topicreply.synthesize("two_vocab", seed=5)
    b, _ = topicreply.synthesize("two_vocab", seed=5)
    c, _ = topicreply.synthesize("two_vocab", seed=6)
    assert a == b and a != c


def test_bad_synth_params_raise_value_error():
    with pytest.raises(ValueError):
        topicreply.synthesize("chain", concentration=1.5)


def test_pipeline_runs_every_stage(trained):
    root, p, results, pairs, oracle = trained
    assert [r["stage"] for r in results] == [
        "ingest", "train-lda", "annotate", "train-predictors", "evaluate", "perplexity",
        "describe-topics",
    ]
    assert (root / "chain.jsonl.oracle.json").exists()
    again = p.run("annotate")
    assert again["skipped"]
    report = json.loads((root / "out" / "eval" / "t2.json").read_text())
    systems = [r["system"] for r in report["rows"]]
    assert systems[:2] == ["uniform", "average"]


def test_missing_prerequisite(tmp_path):
    p = topicreply.Pipeline(out_dir=tmp_path / "empty", m_grid=[5], t2_m=5)
    with pytest.raises(topicreply.MissingArtifactError):
        p.run("evaluate")


def test_engine_suggestions(trained):
    root, *_ = trained
    engine = topicreply.SuggestEngine(root / "out")
    assert engine.num_topics == 10
    health = engine.health()
    assert health["status"] == "ok"
    assert health["serve_sweeps"] == {"burn_in": 5, "samples": 3}

    reply = engine.suggest_reply("some customer text", k=10)
    assert len(reply["topics"]) == 10
    assert math.fsum(reply["tau"]) == pytest.approx(1.0, abs=1e-9)
    probs = [t["probability"] for t in reply["topics"]]
    assert probs == sorted(probs, reverse=True)

    first = engine.suggest_next("some customer text", [], k=3)
    assert first["position"] == 0 and first["route"] == "first"
    nxt = engine.suggest_next("some customer text", ["one.", "two."], k=3)
    assert nxt["position"] == 2 and len(nxt["topics"]) == 3
    assert engine.suggest_next("some customer text", ["one.", "two."], k=3) == nxt

    with pytest.raises(topicreply.BadRequest):
        engine.suggest_reply("some customer text", k=0)
    with pytest.raises(topicreply.BadRequest):
        engine.suggest_reply("   ", k=1)
    with pytest.raises(topicreply.BadRequest):
        engine.topics("X")
    assert len(engine.topics("S")["topics"]) == 10
