// Copyright 2026 The topicreply Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Structured values cross the boundary as JSON text; the Python package
// decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "topicreply/common.h"
#include "topicreply/evaluation.h"
#include "topicreply/pipeline.h"
#include "topicreply/service.h"
#include "topicreply/synth.h"
#include "topicreply/topic_model.h"

namespace py = pybind11;
using nlohmann::json;
using namespace topicreply;

namespace {

Stage parse_stage(const std::string& name) {
  for (Stage s : {Stage::kIngest, Stage::kTrainLda, Stage::kAnnotate, Stage::kTrainPredictors,
                  Stage::kEvaluate, Stage::kPerplexity, Stage::kDescribeTopics}) {
    if (stage_name(s) == name) return s;
  }
  throw std::invalid_argument("unknown stage: " + name);
}

json result_json(const StageResult& r) {
  json outputs = json::array();
  for (const auto& p : r.outputs) outputs.push_back(p.generic_string());
  return {{"stage", stage_name(r.stage)},
          {"skipped", r.skipped},
          {"config_hash", r.config_hash},
          {"outputs", outputs}};
}

std::string synthesize_jsonl(const std::string& params_json) {
  const auto params = SynthParams::from_json(json::parse(params_json));
  const auto corpus = synthesize(params);
  std::ostringstream out;
  write_pairs_jsonl(out, corpus.pairs);
  return json{{"pairs_jsonl", out.str()}, {"oracle", corpus.oracle}}.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "topicreply native core";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception<MissingArtifactError>(m, "MissingArtifactError", error.ptr());
  py::register_exception<BadRequest>(m, "BadRequest", PyExc_ValueError);

  m.def("bhattacharyya", [](const std::vector<double>& p, const std::vector<double>& q) {
    return bhattacharyya(p, q);
  });
  m.def("dominant_topic", [](const std::vector<double>& dist) {
    const auto d = dominant_topic(dist);
    return py::make_tuple(d.topic, d.probability, d.peaked);
  });
  m.def("topic_rank", [](const std::vector<double>& dist, uint32_t topic) {
    return topic_rank(dist, topic);
  });
  m.def("synthesize", &synthesize_jsonl, py::arg("params_json"),
        "Generate a synthetic corpus; returns JSON with pairs_jsonl and oracle.");

  py::class_<Pipeline>(m, "Pipeline")
      .def(py::init([](const std::string& config_json) {
             auto config = PipelineConfig::from_json(json::parse(config_json));
             config.validate();
             return std::make_unique<Pipeline>(std::move(config));
           }),
           py::arg("config_json"))
      .def("config_json", [](const Pipeline& p) { return p.config().to_json().dump(); })
      .def("expected_hash",
           [](const Pipeline& p, const std::string& stage) {
             return p.expected_hash(parse_stage(stage));
           })
      .def(
          "run",
          [](Pipeline& p, const std::string& stage) {
            py::gil_scoped_release release;
            return result_json(p.run(parse_stage(stage))).dump();
          },
          py::arg("stage"))
      .def("run_all", [](Pipeline& p) {
        py::gil_scoped_release release;
        json out = json::array();
        for (const auto& r : p.run_all()) out.push_back(result_json(r));
        return out.dump();
      });

  py::class_<SuggestEngine>(m, "SuggestEngine")
      .def_static(
          "load",
          [](const std::string& models_dir, uint32_t num_topics, const std::string& sweeps) {
            ServeOptions o;
            o.models_dir = models_dir;
            o.num_topics = num_topics;
            o.infer = parse_serve_sweeps(sweeps);
            py::gil_scoped_release release;
            return SuggestEngine::load(o);
          },
          py::arg("models_dir"), py::arg("num_topics") = 0, py::arg("serve_sweeps") = "5,3")
      .def_property_readonly("num_topics", &SuggestEngine::num_topics)
      .def("health", [](const SuggestEngine& e) { return e.health().dump(); })
      .def("suggest_reply",
           [](const SuggestEngine& e, const std::string& body) {
             return e.suggest_reply(json::parse(body)).dump();
           })
      .def("suggest_next",
           [](const SuggestEngine& e, const std::string& body) {
             return e.suggest_next(json::parse(body)).dump();
           })
      .def("topics", [](const SuggestEngine& e, const std::string& view) {
        return e.topics(view).dump();
      });

#ifdef TOPICREPLY_VERSION
  m.attr("__version__") = TOPICREPLY_VERSION;
#else
  m.attr("__version__") = "dev";
#endif
}
