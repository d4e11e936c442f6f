#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace ghpsnr {

/// One subjectively rated stimulus plus any objective scores computed for it.
struct MosRecord {
  std::string stimulus_id;
  double mos = 0.0;
  std::map<std::string, double> objective_scores;
};

/// Parses a comma-separated MOS table with a header row.
///
/// `stimulus_id` and `mos` are required. Every other column whose cells all
/// parse as numbers (including `inf`, used for lossless PSNR) becomes an
/// objective score keyed by its header name; text columns are ignored.
/// Row order is preserved.
std::vector<MosRecord> load_mos_table(const std::filesystem::path& path);

/// Same as load_mos_table, reading from an in-memory CSV document.
std::vector<MosRecord> parse_mos_table(const std::string& csv, const std::string& source = "<memory>");

/// Union of objective score labels present in `records`, sorted.
std::vector<std::string> score_labels(const std::vector<MosRecord>& records);

}  // namespace ghpsnr
