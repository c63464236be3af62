#pragma once

#include <filesystem>
#include <string>

namespace rumorlab {

struct RunReport {
  std::string text;  // arms x {ACC, AUA} table with deltas against the normal arm
  std::string csv;   // same table as CSV
};

/// Verifies a run directory and summarizes it. Throws ReportError when
/// artifacts are missing (listing them), when a checksum or the config hash
/// does not match the manifest, or when metrics.csv disagrees with the
/// accuracies recomputed from predictions.csv. Never writes to the directory.
RunReport report(const std::filesystem::path& run_dir);

}  // namespace rumorlab
