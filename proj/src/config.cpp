#include "rumorlab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "rumorlab/checksum.hpp"
#include "rumorlab/errors.hpp"

namespace rumorlab {

using nlohmann::json;

const char* to_string(Arm arm) {
  switch (arm) {
    case Arm::Normal:
      return "normal";
    case Arm::Sincon:
      return "sincon";
    case Arm::SinconRandom:
      return "sincon-random";
  }
  return "unknown";
}

Arm parse_arm(const std::string& text) {
  if (text == "normal") return Arm::Normal;
  if (text == "sincon") return Arm::Sincon;
  if (text == "sincon-random") return Arm::SinconRandom;
  throw ConfigError("unknown arm '" + text + "' (expected normal, sincon or sincon-random)");
}

namespace {

// Reads fields of one JSON object, remembering which keys were consumed so
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError("'" + label() + "' must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    const json* v = take(key);
    if (v == nullptr) return;
    try {
      if constexpr (std::is_unsigned_v<T>) {
        if (!v->is_number_unsigned()) throw ConfigError("");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw ConfigError("");
      }
      out = v->get<T>();
    } catch (const std::exception&) {
      throw ConfigError("'" + key_path(key) + "' has the wrong type: " + v->dump());
    }
  }

  template <typename Fn>
  void read_with(const char* key, Fn&& parse) {
    const json* v = take(key);
    if (v == nullptr) return;
    try {
      parse(*v);
    } catch (const ConfigError& e) {
      throw ConfigError("'" + key_path(key) + "': " + e.what());
    } catch (const std::exception& e) {
      throw ConfigError("'" + key_path(key) + "': " + e.what() + " (value " + v->dump() + ")");
    }
  }

  Section child(const char* key) {
    const json* v = take(key);
    static const json empty = json::object();
    return Section(v ? *v : empty, key_path(key));
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!used_.count(key)) throw ConfigError("unknown config key '" + key_path(key) + "'");
    }
  }

 private:
  const json* take(const std::string& key) {
    used_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }
  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string label() const { return path_.empty() ? "<root>" : path_; }

  const json& node_;
  std::string path_;
  std::set<std::string> used_;
};

std::string as_string(const json& v) {
  if (!v.is_string()) throw ConfigError("expected a string");
  return v.get<std::string>();
}

std::uint64_t as_seed(const json& v) {
  if (!v.is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
  return v.get<std::uint64_t>();
}

}  // namespace

void ExperimentConfig::validate() const {
  auto wrap = [](const char* section, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string(section) + ": " + e.what());
    }
  };
  wrap("encoder", [&] { encoder.validate(); });
  wrap("train", [&] { train.validate(); });
  wrap("attack", [&] { attack.validate(); });
  wrap("corpus", [&] { corpus.validate(); });
  if (detector.hidden_dims.empty()) throw ConfigError("detector.hidden_dims must list at least one layer");
  for (std::size_t h : detector.hidden_dims) {
    if (h == 0) throw ConfigError("detector.hidden_dims entries must be positive");
  }
  if (generator.kind != "builtin" && generator.kind != "http") {
    throw ConfigError("generator.kind must be 'builtin' or 'http'");
  }
  if (generator.length == 0) throw ConfigError("generator.length must be positive");
  if (generator.http.port <= 0 || generator.http.port > 65535) throw ConfigError("generator.http.port out of range");
  if (!(generator.http.timeout_seconds > 0.0)) throw ConfigError("generator.http.timeout_seconds must be positive");
  if (experiment.seeds == 0) throw ConfigError("experiment.seeds must be at least 1");
  if (!(experiment.test_fraction > 0.0 && experiment.test_fraction < 1.0)) {
    throw ConfigError("experiment.test_fraction must lie in (0, 1)");
  }
  if (experiment.arms.empty()) throw ConfigError("experiment.arms must not be empty");
  std::set<Arm> distinct(experiment.arms.begin(), experiment.arms.end());
  if (distinct.size() != experiment.arms.size()) throw ConfigError("experiment.arms contains duplicates");
  if (experiment.jobs == 0) throw ConfigError("experiment.jobs must be at least 1");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig c;
  Section root(doc, "");
  {
    Section s = root.child("encoder");
    s.read("dim", c.encoder.dim);
    s.read_with("vocab_seed", [&](const json& v) { c.encoder.vocab_seed = as_seed(v); });
    s.finish();
  }
  {
    Section s = root.child("detector");
    s.read_with("arch", [&](const json& v) { c.detector.arch = parse_architecture(as_string(v)); });
    s.read_with("hidden_dims", [&](const json& v) {
      if (!v.is_array()) throw ConfigError("expected an array of positive integers");
      c.detector.hidden_dims.clear();
      for (const auto& h : v) {
        if (!h.is_number_unsigned()) throw ConfigError("expected an array of positive integers");
        c.detector.hidden_dims.push_back(h.get<std::size_t>());
      }
    });
    s.finish();
  }
  {
    Section s = root.child("train");
    s.read("epochs", c.train.epochs);
    s.read("lr", c.train.lr);
    s.read("batch_size", c.train.batch_size);
    s.read("tau", c.train.tau);
    s.read("alpha1", c.train.alpha1);
    s.read("alpha2", c.train.alpha2);
    s.read_with("mode", [&](const json& v) {
      const Arm arm = parse_arm(as_string(v));
      c.train.mode = arm == Arm::Normal ? TrainMode::Normal : TrainMode::Sincon;
      c.train.augmentation = arm == Arm::SinconRandom ? Augmentation::Random : Augmentation::Influence;
    });
    s.finish();
  }
  {
    Section s = root.child("attack");
    s.read("budget", c.attack.budget);
    s.read("homophily_threshold", c.attack.homophily_threshold);
    s.read("max_refine_iters", c.attack.max_refine_iters);
    s.read_with("surrogate_arch", [&](const json& v) { c.surrogate_arch = parse_architecture(as_string(v)); });
    s.finish();
  }
  {
    Section s = root.child("generator");
    s.read("kind", c.generator.kind);
    s.read("length", c.generator.length);
    Section h = s.child("http");
    h.read("host", c.generator.http.host);
    h.read("port", c.generator.http.port);
    h.read("path", c.generator.http.path);
    h.read("timeout_seconds", c.generator.http.timeout_seconds);
    h.read("retries", c.generator.http.retries);
    h.finish();
    s.finish();
  }
  {
    Section s = root.child("corpus");
    auto& k = c.corpus;
    s.read("n_trees", k.n_trees);
    s.read("min_size", k.min_size);
    s.read("max_size", k.max_size);
    s.read("vocab_per_class", k.vocab_per_class);
    s.read("min_tokens", k.min_tokens);
    s.read("max_tokens", k.max_tokens);
    s.read("separation", k.separation);
    s.read("rumor_fraction", k.rumor_fraction);
    s.read("rumor_root_attach", k.rumor_root_attach);
    s.read("nonrumor_root_attach", k.nonrumor_root_attach);
    s.read("rumor_echo", k.rumor_echo);
    s.read("nonrumor_echo", k.nonrumor_echo);
    s.read_with("seed", [&](const json& v) { c.corpus_seed = as_seed(v); });
    s.finish();
  }
  {
    Section s = root.child("experiment");
    s.read("seeds", c.experiment.seeds);
    s.read("test_fraction", c.experiment.test_fraction);
    s.read("jobs", c.experiment.jobs);
    s.read_with("arms", [&](const json& v) {
      if (!v.is_array()) throw ConfigError("expected an array of arm names");
      c.experiment.arms.clear();
      for (const auto& a : v) c.experiment.arms.push_back(parse_arm(as_string(a)));
    });
    s.finish();
  }
  root.read("output_dir", c.output_dir);
  root.finish();
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json arms = json::array();
  for (Arm a : c.experiment.arms) arms.push_back(to_string(a));
  const char* mode = c.train.mode == TrainMode::Normal
                         ? "normal"
                         : (c.train.augmentation == Augmentation::Random ? "sincon-random" : "sincon");
  return json{
      {"encoder", {{"dim", c.encoder.dim}, {"vocab_seed", c.encoder.vocab_seed}}},
      {"detector", {{"arch", to_string(c.detector.arch)}, {"hidden_dims", c.detector.hidden_dims}}},
      {"train",
       {{"epochs", c.train.epochs},
        {"lr", c.train.lr},
        {"batch_size", c.train.batch_size},
        {"tau", c.train.tau},
        {"alpha1", c.train.alpha1},
        {"alpha2", c.train.alpha2},
        {"mode", mode}}},
      {"attack",
       {{"budget", c.attack.budget},
        {"homophily_threshold", c.attack.homophily_threshold},
        {"max_refine_iters", c.attack.max_refine_iters},
        {"surrogate_arch", to_string(c.surrogate_arch)}}},
      {"generator",
       {{"kind", c.generator.kind},
        {"length", c.generator.length},
        {"http",
         {{"host", c.generator.http.host},
          {"port", c.generator.http.port},
          {"path", c.generator.http.path},
          {"timeout_seconds", c.generator.http.timeout_seconds},
          {"retries", c.generator.http.retries}}}}},
      {"corpus",
       {{"n_trees", c.corpus.n_trees},
        {"min_size", c.corpus.min_size},
        {"max_size", c.corpus.max_size},
        {"vocab_per_class", c.corpus.vocab_per_class},
        {"min_tokens", c.corpus.min_tokens},
        {"max_tokens", c.corpus.max_tokens},
        {"separation", c.corpus.separation},
        {"rumor_fraction", c.corpus.rumor_fraction},
        {"rumor_root_attach", c.corpus.rumor_root_attach},
        {"nonrumor_root_attach", c.corpus.nonrumor_root_attach},
        {"rumor_echo", c.corpus.rumor_echo},
        {"nonrumor_echo", c.corpus.nonrumor_echo},
        {"seed", c.corpus_seed}}},
      {"experiment",
       {{"seeds", c.experiment.seeds},
        {"test_fraction", c.experiment.test_fraction},
        {"arms", arms},
        {"jobs", c.experiment.jobs}}},
      {"output_dir", c.output_dir},
  };
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key.path=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::stringstream keys(path);
  std::string key;
  std::vector<std::string> parts;
  while (std::getline(keys, key, '.')) {
    if (key.empty()) throw ConfigError("override '" + assignment + "' has an empty key segment");
    parts.push_back(key);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) throw ConfigError("override '" + assignment + "' descends into a non-object");
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw ConfigError("override '" + assignment + "' descends into a non-object");
  (*node)[parts.back()] = std::move(value);
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  json doc = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      doc = json::parse(buf.str());
    } catch (const json::parse_error& e) {
      throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return config_from_json(doc);
}

std::string config_hash(const ExperimentConfig& config) {
  json doc = config_to_json(config);
  // Neither affects results.
  doc.erase("output_dir");
  doc["experiment"].erase("jobs");
  return sha1_hex(doc.dump());
}

}  // namespace rumorlab
