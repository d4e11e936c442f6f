#include "ghpsnr/mos_table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string_view>

#include "ghpsnr/errors.hpp"

namespace ghpsnr {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// RFC 4180 style field splitting with double-quote escaping. Quoted fields do
// not span lines.
std::vector<std::string> split_csv_line(const std::string& line, const std::string& source,
                                        std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) {
    throw IoError(source + ":" + std::to_string(line_no) + ": unterminated quoted field");
  }
  fields.push_back(trim(cur));
  return fields;
}

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || std::isnan(v)) return std::nullopt;
  return v;
}

}  // namespace

std::vector<MosRecord> parse_mos_table(const std::string& csv, const std::string& source) {
  std::istringstream in(csv);
  std::string line;
  std::size_t line_no = 0;

  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    header = split_csv_line(line, source, line_no);
    break;
  }
  if (header.empty()) throw IoError(source + ": missing header row");

  int id_col = -1;
  int mos_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "stimulus_id") id_col = static_cast<int>(i);
    if (header[i] == "mos") mos_col = static_cast<int>(i);
  }
  if (id_col < 0) throw ValidationError(source + ": missing required column 'stimulus_id'");
  if (mos_col < 0) throw ValidationError(source + ": missing required column 'mos'");

  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line, source, line_no);
    if (fields.size() != header.size()) {
      throw IoError(source + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(header.size()) + " fields, found " +
                    std::to_string(fields.size()));
    }
    rows.push_back(std::move(fields));
    row_lines.push_back(line_no);
  }
  if (rows.empty()) throw ValidationError(source + ": no data rows");

  // A column is an objective score iff every one of its cells is numeric.
  std::vector<bool> numeric(header.size(), true);
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (numeric[c] && !parse_number(r[c])) numeric[c] = false;
    }
  }

  std::vector<MosRecord> records;
  records.reserve(rows.size());
  std::set<std::string> seen;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    const std::string where = source + ":" + std::to_string(row_lines[k]);
    MosRecord rec;
    rec.stimulus_id = r[static_cast<std::size_t>(id_col)];
    if (rec.stimulus_id.empty()) throw ValidationError(where + ": empty stimulus_id");
    if (!seen.insert(rec.stimulus_id).second) {
      throw ValidationError(where + ": duplicate stimulus_id '" + rec.stimulus_id + "'");
    }
    const auto mos = parse_number(r[static_cast<std::size_t>(mos_col)]);
    if (!mos || !std::isfinite(*mos)) {
      throw ValidationError(where + ": mos '" + r[static_cast<std::size_t>(mos_col)] +
                            "' is not a finite number");
    }
    rec.mos = *mos;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (static_cast<int>(c) == id_col || static_cast<int>(c) == mos_col || !numeric[c]) continue;
      rec.objective_scores[header[c]] = *parse_number(r[c]);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<MosRecord> load_mos_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_mos_table(ss.str(), path.string());
}

std::vector<std::string> score_labels(const std::vector<MosRecord>& records) {
  std::set<std::string> labels;
  for (const auto& r : records) {
    for (const auto& [k, v] : r.objective_scores) labels.insert(k);
  }
  return {labels.begin(), labels.end()};
}

}  // namespace ghpsnr
