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
"""Python access to the topicreply pipeline and suggestion engine."""

import json
import os

from . import _core
from ._core import BadRequest, Error, MissingArtifactError, bhattacharyya, dominant_topic, topic_rank

__version__ = _core.__version__

__all__ = [
    "BadRequest",
    "Error",
    "MissingArtifactError",
    "Pipeline",
    "SuggestEngine",
    "bhattacharyya",
    "dominant_topic",
    "synthesize",
    "topic_rank",
]


def synthesize(profile="coupled", path=None, **params):
    """Generate a synthetic corpus.

    Returns (pairs, oracle) where pairs is a list of dicts. With `path`, the
    corpus is also written there as JSONL and the oracle beside it.
    """
    params["profile"] = profile
    out = json.loads(_core.synthesize(json.dumps(params)))
    text = out["pairs_jsonl"]
    if path is not None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        with open(os.fspath(path) + ".oracle.json", "w", encoding="utf-8") as f:
            json.dump(out["oracle"], f)
    pairs = [json.loads(line) for line in text.splitlines() if line]
    return pairs, out["oracle"]


class Pipeline:
    def __init__(self, **config):
        config = {k: os.fspath(v) if isinstance(v, os.PathLike) else v for k, v in config.items()}
        self._p = _core.Pipeline(json.dumps(config))

    @property
    def config(self):
        return json.loads(self._p.config_json())

    def expected_hash(self, stage):
        return self._p.expected_hash(stage)

    def run(self, stage):
        return json.loads(self._p.run(stage))

    def run_all(self):
        return json.loads(self._p.run_all())


class SuggestEngine:
    def __init__(self, models_dir, num_topics=0, serve_sweeps="5,3"):
        self._e = _core.SuggestEngine.load(os.fspath(models_dir), num_topics, serve_sweeps)

    @property
    def num_topics(self):
        return self._e.num_topics

    def health(self):
        return json.loads(self._e.health())

    def suggest_reply(self, customer, k=5):
        return json.loads(self._e.suggest_reply(json.dumps({"customer": customer, "k": k})))

    def suggest_next(self, customer, sentences=(), k=5):
        body = {"customer": customer, "sentences": list(sentences), "k": k}
        return json.loads(self._e.suggest_next(json.dumps(body)))

    def topics(self, view="S"):
        return json.loads(self._e.topics(view))
