#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "twoscale/grid.hpp"

namespace twoscale::io {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Shortest text that round-trips every double: 17 significant digits.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(std::string_view text) {
  std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw std::runtime_error("malformed number '" + s + "'");
  }
  return v;
}

/// One block of the snapshot CSV: `# key=value` header lines (n_cells and t
/// first), a `# columns=` line, then one row per cell starting with x.
struct CsvSnapshot {
  KeyValues header;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  const std::string* find(std::string_view key) const {
    for (const auto& [k, v] : header) {
      if (k == key) return &v;
    }
    return nullptr;
  }
};

inline CsvSnapshot make_csv_snapshot(const Snapshot& snap,
                                     const std::vector<std::string>& field_names,
                                     const KeyValues& extra = {}) {
  if (snap.fields.empty() || field_names.size() != snap.fields.size()) {
    throw std::invalid_argument("make_csv_snapshot: one name per field required");
  }
  const GridSpec& grid = snap.fields.front().grid();
  CsvSnapshot out;
  out.header.emplace_back("n_cells", std::to_string(grid.n_cells()));
  out.header.emplace_back("t", format_double(snap.time));
  for (const auto& kv : extra) out.header.push_back(kv);
  out.columns.push_back("x");
  for (const auto& n : field_names) out.columns.push_back(n);
  for (std::size_t i = 0; i < grid.n_cells(); ++i) {
    std::vector<double> row{grid.center(i)};
    for (const auto& f : snap.fields) row.push_back(f[i]);
    out.rows.push_back(std::move(row));
  }
  return out;
}

inline void write_snapshot(std::ostream& os, const CsvSnapshot& snap) {
  for (const auto& [k, v] : snap.header) os << "# " << k << '=' << v << '\n';
  os << "# columns=";
  for (std::size_t c = 0; c < snap.columns.size(); ++c) {
    os << (c ? "," : "") << snap.columns[c];
  }
  os << '\n';
  for (const auto& row : snap.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
    os << '\n';
  }
}

inline std::string to_text(const std::vector<CsvSnapshot>& series) {
  std::ostringstream os;
  for (const auto& s : series) write_snapshot(os, s);
  return os.str();
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

/// Parses a file holding one or more snapshot blocks. A `# n_cells=` line
/// starts a new block.
inline std::vector<CsvSnapshot> parse_series(std::string_view text) {
  std::vector<CsvSnapshot> out;
  std::size_t line_no = 0;
  bool in_rows = false;
  for (std::string_view line : detail::split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fail = [&](const std::string& what) {
      throw std::runtime_error("snapshot csv line " + std::to_string(line_no) + ": " + what);
    };
    if (line.front() == '#') {
      std::string_view body = line.substr(1);
      if (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) fail("header line without '='");
      std::string key(body.substr(0, eq));
      std::string value(body.substr(eq + 1));
      if (key == "n_cells" && (out.empty() || in_rows || !out.back().header.empty())) {
        out.emplace_back();
        in_rows = false;
      }
      if (out.empty() || in_rows) fail("header must start with n_cells");
      if (key == "columns") {
        for (auto c : detail::split(value, ',')) out.back().columns.emplace_back(c);
      } else {
        out.back().header.emplace_back(std::move(key), std::move(value));
      }
      continue;
    }
    if (out.empty()) fail("data row before any header");
    in_rows = true;
    std::vector<double> row;
    for (auto cell : detail::split(line, ',')) row.push_back(parse_double(cell));
    if (!out.back().columns.empty() && row.size() != out.back().columns.size()) {
      fail("row has " + std::to_string(row.size()) + " cells, expected " +
           std::to_string(out.back().columns.size()));
    }
    out.back().rows.push_back(std::move(row));
  }
  for (const auto& s : out) {
    const auto* n = s.find("n_cells");
    if (!n || std::stoul(*n) != s.rows.size()) {
      throw std::runtime_error("snapshot csv: n_cells does not match row count");
    }
  }
  return out;
}

/// Fields (every column except x) of one parsed block.
inline Snapshot to_snapshot(const CsvSnapshot& block) {
  const auto* t = block.find("t");
  if (!t) throw std::runtime_error("snapshot csv: missing t header");
  const GridSpec grid(block.rows.size());
  Snapshot snap{parse_double(*t), {}};
  const std::size_t width = block.rows.empty() ? 0 : block.rows.front().size();
  for (std::size_t c = 1; c < width; ++c) {
    std::vector<double> v;
    for (const auto& row : block.rows) v.push_back(row.at(c));
    snap.fields.emplace_back(grid, std::move(v));
  }
  return snap;
}

inline std::string to_text(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

inline KeyValues parse_key_values(std::string_view text) {
  KeyValues out;
  for (std::string_view line : detail::split(text, '\n')) {
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw std::runtime_error("key=value line without '='");
    out.emplace_back(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a sibling temporary file and renames it into place, so a
/// reader never observes a partially written file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace twoscale::io
