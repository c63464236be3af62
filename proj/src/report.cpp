#include "rumorlab/report.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "rumorlab/checksum.hpp"
#include "rumorlab/config.hpp"
#include "rumorlab/errors.hpp"
#include "rumorlab/experiment.hpp"

namespace rumorlab {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ReportError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::vector<std::vector<std::string>> read_csv(const std::string& text, const std::string& name,
                                               std::size_t columns) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != columns) {
      throw ReportError(name + " line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                        " fields, found " + std::to_string(fields.size()));
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

double to_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ReportError(where + ": '" + s + "' is not a number");
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

RunReport report(const std::filesystem::path& run_dir) {
  if (!std::filesystem::is_directory(run_dir)) throw ReportError("run directory " + run_dir.string() + " does not exist");

  const std::vector<std::string> required{"manifest.json", "config.json", "metrics.csv", "predictions.csv"};
  std::vector<std::string> absent;
  for (const auto& f : required) {
    if (!std::filesystem::is_regular_file(run_dir / f)) absent.push_back(f);
  }
  nlohmann::json manifest;
  if (std::find(absent.begin(), absent.end(), "manifest.json") == absent.end()) {
    try {
      manifest = nlohmann::json::parse(read_file(run_dir / "manifest.json"));
      for (const auto& [path, sha] : manifest.at("files").items()) {
        if (!std::filesystem::is_regular_file(run_dir / path) &&
            std::find(absent.begin(), absent.end(), path) == absent.end()) {
          absent.push_back(path);
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw ReportError(std::string("manifest.json is malformed: ") + e.what());
    }
  }
  if (!absent.empty()) {
    std::string list;
    for (const auto& f : absent) list += (list.empty() ? "" : ", ") + f;
    throw ReportError("run directory " + run_dir.string() + " is missing: " + list);
  }

  for (const auto& [path, sha] : manifest.at("files").items()) {
    const std::string actual = git_blob_sha1(read_file(run_dir / path));
    if (actual != sha.get<std::string>()) {
      throw ReportError("checksum mismatch for " + path + ": manifest " + sha.get<std::string>() + ", file " + actual);
    }
  }
  for (const auto& f : {"config.json", "metrics.csv", "predictions.csv"}) {
    if (!manifest["files"].contains(f)) throw ReportError(std::string("manifest does not cover ") + f);
  }

  ExperimentConfig config;
  try {
    config = config_from_json(nlohmann::json::parse(read_file(run_dir / "config.json")));
  } catch (const std::exception& e) {
    throw ReportError(std::string("config.json is invalid: ") + e.what());
  }
  if (config_hash(config) != manifest.value("config_hash", std::string())) {
    throw ReportError("config hash does not match the manifest");
  }

  // Recompute every accuracy from the per-tree predictions.
  std::map<std::tuple<std::string, std::string, std::string>, std::pair<std::size_t, std::size_t>> tallies;
  for (const auto& row : read_csv(read_file(run_dir / "predictions.csv"), "predictions.csv", 7)) {
    auto& t = tallies[{row[0], row[1], row[2]}];
    t.first += row[4] == row[5];
    t.second += 1;
  }
  auto recomputed = [&](const std::string& rep, const std::string& arm, const char* cond) -> std::optional<double> {
    auto it = tallies.find({rep, arm, cond});
    if (it == tallies.end()) return std::nullopt;
    return static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
  };

  std::vector<ArmMetrics> metrics;
  for (const auto& row : read_csv(read_file(run_dir / "metrics.csv"), "metrics.csv", 9)) {
    ArmMetrics m;
    const std::string where = "metrics.csv replicate " + row[0] + " arm " + row[1];
    m.replicate = static_cast<std::size_t>(to_double(row[0], where));
    try {
      m.arm = parse_arm(row[1]);
    } catch (const ConfigError& e) {
      throw ReportError(where + ": " + e.what());
    }
    m.ok = row[2] == "ok";
    m.error = row[8];
    if (m.ok) {
      m.acc_clean = to_double(row[3], where);
      m.aua_self = to_double(row[4], where);
      m.has_transfer = !row[5].empty();
      if (m.has_transfer) m.aua_transfer = to_double(row[5], where);
      m.influence_gap = to_double(row[6], where);
      auto check = [&](const char* cond, double stored) {
        const auto r = recomputed(row[0], row[1], cond);
        if (!r || fmt(*r) != fmt(stored)) {
          throw ReportError(where + ": " + cond + " accuracy " + fmt(stored) +
                            " does not match predictions.csv (" + (r ? fmt(*r) : "no rows") + ")");
        }
      };
      check("clean", m.acc_clean);
      check("self", m.aua_self);
      if (m.has_transfer) check("transfer", m.aua_transfer);
    }
    metrics.push_back(std::move(m));
  }
  if (metrics.empty()) throw ReportError("metrics.csv has no rows");

  ExperimentResult result;
  result.metrics = std::move(metrics);
  result.summary = summarize_arms(config.experiment.arms, result.metrics);
  RunReport out;
  out.text = summary_text(result);
  out.csv = summary_csv(result);
  return out;
}

}  // namespace rumorlab
