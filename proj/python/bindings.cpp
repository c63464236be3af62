#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rumorlab/attack.hpp"
#include "rumorlab/config.hpp"
#include "rumorlab/corpus_io.hpp"
#include "rumorlab/errors.hpp"
#include "rumorlab/experiment.hpp"
#include "rumorlab/report.hpp"
#include "rumorlab/rng.hpp"
#include "rumorlab/sincon.hpp"
#include "rumorlab/synth.hpp"
#include "rumorlab/train.hpp"

namespace py = pybind11;
using namespace rumorlab;

namespace {

ExperimentConfig config_from_text(const std::string& text) {
  if (text.empty()) return ExperimentConfig{};
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  auto cfg = config_from_json(doc);
  cfg.validate();
  return cfg;
}

Corpus split_part(const Corpus& corpus, const std::vector<std::size_t>& idx) {
  Corpus out;
  for (auto i : idx) out.push_back(corpus[i]);
  return out;
}

py::dict metrics_dict(const ArmMetrics& m) {
  py::dict d;
  d["arm"] = to_string(m.arm);
  d["replicate"] = m.replicate;
  d["ok"] = m.ok;
  d["error"] = m.error;
  d["acc_clean"] = m.acc_clean;
  d["aua_self"] = m.aua_self;
  d["aua_transfer"] = m.has_transfer ? py::object(py::float_(m.aua_transfer)) : py::object(py::none());
  d["influence_gap"] = m.influence_gap;
  d["attack_failures"] = m.attack_failures;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Propagation-tree rumor detection, message injection attacks and influence-guided contrastive training";

  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<DegenerateInputError>(m, "DegenerateInputError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);
  py::register_exception<AttackError>(m, "AttackError", PyExc_RuntimeError);
  py::register_exception<ReportError>(m, "ReportError", PyExc_RuntimeError);

  py::enum_<Label>(m, "Label").value("RUMOR", Label::Rumor).value("NONRUMOR", Label::NonRumor);

  py::class_<PropagationTree>(m, "PropagationTree")
      .def(py::init(&PropagationTree::from_texts), py::arg("texts"), py::arg("edges"), py::arg("label"))
      .def("__len__", &PropagationTree::size)
      .def_property_readonly("texts",
                             [](const PropagationTree& t) {
                               std::vector<std::string> out;
                               for (const auto& msg : t.messages()) out.push_back(msg.text);
                               return out;
                             })
      .def_property_readonly("injected",
                             [](const PropagationTree& t) {
                               std::vector<bool> out;
                               for (const auto& msg : t.messages()) out.push_back(msg.injected);
                               return out;
                             })
      .def_property_readonly("edges", &PropagationTree::edges)
      .def_property_readonly("label", &PropagationTree::label)
      .def("parent", &PropagationTree::parent)
      .def("with_leaf", &PropagationTree::with_leaf, py::arg("parent"), py::arg("text"), py::arg("injected") = true)
      .def("__eq__", [](const PropagationTree& a, const PropagationTree& b) { return a == b; });

  m.def("degree", &degree, py::arg("tree"), py::arg("node"));
  m.def("influence_score", &influence_score, py::arg("tree"), py::arg("node"));
  m.def(
      "rank_by_influence", [](const PropagationTree& t) { return rank_by_influence(t).order; }, py::arg("tree"));
  m.def(
      "root_homophily",
      [](const PropagationTree& t, std::size_t dim, std::uint64_t vocab_seed) {
        return root_homophily(t, encode_tree({dim, vocab_seed}, t));
      },
      py::arg("tree"), py::arg("dim") = 64, py::arg("vocab_seed") = 0);

  m.def("tokenize", &tokenize, py::arg("text"));
  m.def(
      "encode_message",
      [](const std::string& text, std::size_t dim, std::uint64_t vocab_seed) {
        return encode_message({dim, vocab_seed}, text);
      },
      py::arg("text"), py::arg("dim") = 64, py::arg("vocab_seed") = 0);

  m.def(
      "sincon_loss",
      [](const std::vector<std::array<std::vector<double>, 3>>& triples, double tau) {
        std::vector<SummaryTriple> batch;
        for (const auto& t : triples) batch.push_back({t[0], t[1], t[2]});
        return sincon_loss(batch, tau).mean;
      },
      py::arg("triples"), py::arg("tau") = 0.5, "Mean contrastive loss over (original, imp, ump) summaries.");

  m.def(
      "default_config", [] { return config_to_json(ExperimentConfig{}).dump(); },
      "Default experiment configuration as JSON text.");
  m.def(
      "load_config",
      [](const std::string& path, const std::vector<std::string>& overrides) {
        return config_to_json(load_config(path, overrides)).dump();
      },
      py::arg("path") = "", py::arg("overrides") = std::vector<std::string>{});
  m.def(
      "config_hash", [](const std::string& config) { return config_hash(config_from_text(config)); },
      py::arg("config"));

  m.def(
      "synth_corpus",
      [](const std::string& config, std::optional<std::uint64_t> seed) {
        const auto cfg = config_from_text(config);
        return synth_corpus(cfg.corpus, seed.value_or(cfg.corpus_seed));
      },
      py::arg("config") = "", py::arg("seed") = py::none());
  m.def("corpus_to_json", &serialize_corpus, py::arg("corpus"));
  m.def("corpus_from_json", &parse_corpus, py::arg("text"));

  m.def(
      "train_and_evaluate",
      [](const Corpus& corpus, const std::string& config, const std::string& mode, std::uint64_t seed) {
        const auto cfg = config_from_text(config);
        const auto split = split_corpus(corpus, cfg.experiment.test_fraction, derive_seed(seed, 1));
        const auto train_set = encode_corpus(cfg.encoder, split_part(corpus, split.train));
        const auto test_set = encode_corpus(cfg.encoder, split_part(corpus, split.test));
        auto tc = cfg.train;
        tc.mode = parse_train_mode(mode);
        tc.seed = derive_seed(seed, 3);
        py::gil_scoped_release release;
        const auto result = train(init_params(cfg.detector, cfg.encoder.dim, derive_seed(seed, 2)), train_set, tc);
        const double acc = evaluate(result.params, test_set);
        py::gil_scoped_acquire acquire;
        std::vector<double> losses;
        for (const auto& e : result.history) losses.push_back(e.total);
        py::dict out;
        out["accuracy"] = acc;
        out["loss_history"] = losses;
        out["params"] = params_to_json(result.params);
        return out;
      },
      py::arg("corpus"), py::arg("config") = "", py::arg("mode") = "normal", py::arg("seed") = 0,
      "Trains on a stratified split and returns held-out accuracy, loss history and parameters.");

  m.def(
      "attack",
      [](const std::string& params_json, const Corpus& corpus, const std::string& config, std::uint64_t seed) {
        const auto cfg = config_from_text(config);
        const auto params = params_from_json(params_json);
        const auto encoded = encode_corpus(cfg.encoder, corpus);
        const auto gen = make_generator(cfg.generator, cfg.encoder, corpus_vocabulary(corpus), seed);
        py::gil_scoped_release release;
        auto campaign = attack_corpus(detector_victim(params), encoded, cfg.attack, *gen, cfg.encoder);
        const double aua = evaluate(params, campaign.perturbed);
        py::gil_scoped_acquire acquire;
        Corpus perturbed;
        for (auto& e : campaign.perturbed) perturbed.push_back(std::move(e.tree));
        py::dict out;
        out["aua"] = aua;
        out["corpus"] = perturbed;
        out["traces"] = traces_jsonl(campaign.traces);
        out["failures"] = campaign.failures;
        return out;
      },
      py::arg("params"), py::arg("corpus"), py::arg("config") = "", py::arg("seed") = 0,
      "Attacks every rumor tree against the given model; returns AUA, perturbed corpus and JSON-lines traces.");

  m.def(
      "run_experiment",
      [](const std::string& config, std::uint64_t seed, const std::string& out_dir) {
        const auto cfg = config_from_text(config);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg, seed, out_dir);
        }
        py::list rows;
        for (const auto& mtr : r.metrics) rows.append(metrics_dict(mtr));
        return rows;
      },
      py::arg("config") = "", py::arg("seed") = 1, py::arg("out_dir") = "",
      "Full experiment matrix; returns per-replicate, per-arm metrics.");

  m.def(
      "report",
      [](const std::filesystem::path& dir) {
        const auto r = report(dir);
        return py::make_tuple(r.text, r.csv);
      },
      py::arg("run_dir"));
}
