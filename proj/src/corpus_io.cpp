#include "rumorlab/corpus_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rumorlab/errors.hpp"

namespace rumorlab {

using nlohmann::json;

namespace {

[[noreturn]] void fail(std::size_t record, const std::string& field, const std::string& why) {
  throw ParseError("corpus record " + std::to_string(record) + ", field '" + field + "': " + why);
}

PropagationTree parse_tree(const json& rec, std::size_t index) {
  if (!rec.is_object()) fail(index, "<record>", "expected an object");

  auto label_it = rec.find("label");
  if (label_it == rec.end() || !label_it->is_string()) fail(index, "label", "missing or not a string");
  Label label{};
  try {
    label = parse_label(label_it->get<std::string>());
  } catch (const ArgumentError& e) {
    fail(index, "label", e.what());
  }

  auto msgs_it = rec.find("messages");
  if (msgs_it == rec.end() || !msgs_it->is_array()) fail(index, "messages", "missing or not an array");
  std::vector<Message> messages;
  for (std::size_t i = 0; i < msgs_it->size(); ++i) {
    const json& m = (*msgs_it)[i];
    const std::string field = "messages[" + std::to_string(i) + "]";
    if (!m.is_object()) fail(index, field, "expected an object");
    auto text = m.find("text");
    if (text == m.end() || !text->is_string()) fail(index, field + ".text", "missing or not a string");
    bool injected = false;
    if (auto inj = m.find("injected"); inj != m.end()) {
      if (!inj->is_boolean()) fail(index, field + ".injected", "not a boolean");
      injected = inj->get<bool>();
    }
    messages.push_back({i, text->get<std::string>(), injected});
  }

  auto edges_it = rec.find("edges");
  if (edges_it == rec.end() || !edges_it->is_array()) fail(index, "edges", "missing or not an array");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < edges_it->size(); ++i) {
    const json& e = (*edges_it)[i];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned()) {
      fail(index, "edges[" + std::to_string(i) + "]", "expected [parent, child] of non-negative integers");
    }
    edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
  }

  try {
    return PropagationTree(std::move(messages), std::move(edges), label);
  } catch (const ArgumentError& e) {
    fail(index, "edges", e.what());
  }
}

}  // namespace

Corpus parse_corpus(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return {};
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("corpus is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("trees") || !doc["trees"].is_array()) {
    throw ParseError("corpus document must be an object with a 'trees' array");
  }
  Corpus corpus;
  const json& trees = doc["trees"];
  corpus.reserve(trees.size());
  for (std::size_t i = 0; i < trees.size(); ++i) corpus.push_back(parse_tree(trees[i], i));
  return corpus;
}

std::string serialize_corpus(const Corpus& corpus) {
  json trees = json::array();
  for (const auto& tree : corpus) {
    json messages = json::array();
    for (const auto& m : tree.messages()) messages.push_back({{"text", m.text}, {"injected", m.injected}});
    json edges = json::array();
    for (const auto& [p, c] : tree.edges()) edges.push_back({p, c});
    trees.push_back({{"label", to_string(tree.label())}, {"messages", std::move(messages)}, {"edges", std::move(edges)}});
  }
  return json{{"trees", std::move(trees)}}.dump() + "\n";
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open corpus file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str());
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write corpus file " + path.string());
  out << serialize_corpus(corpus);
}

}  // namespace rumorlab
