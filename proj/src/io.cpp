#include "larfi/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace larfi {

const char* const kVersion = "0.1.0";

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string content_hash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

[[noreturn]] void fail(int lineno, const std::string& msg) {
  throw std::invalid_argument("line " + std::to_string(lineno) + ": " + msg);
}

double parse_double(const std::string& s, int lineno, const std::string& what) {
  double v;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(lineno, "non-numeric " + what + " value '" + s + "'");
  return v;
}

long parse_long(const std::string& s, int lineno, const std::string& what) {
  long v;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(lineno, "non-integer " + what + " value '" + s + "'");
  return v;
}

}  // namespace

Panel read_panel_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("line 1: empty panel file");
  auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "subject" || header[1] != "t" ||
      header[2] != "y")
    throw std::invalid_argument("line 1: header must start with subject,t,y");

  Panel panel;
  panel.covariate_names.assign(header.begin() + 3, header.end());
  const int l = panel.l();

  std::string cur_id;
  std::vector<std::int8_t> cur_y;
  std::vector<double> cur_x;
  auto flush = [&]() {
    if (cur_id.empty()) return;
    Subject s;
    s.series.y = cur_y;
    if (l > 0) {
      s.exog.resize(static_cast<int>(cur_y.size()), l);
      for (size_t t = 0; t < cur_y.size(); ++t)
        for (int j = 0; j < l; ++j) s.exog(t, j) = cur_x[t * l + j];
    }
    panel.ids.push_back(cur_id);
    panel.data.subjects.push_back(std::move(s));
    cur_y.clear();
    cur_x.clear();
  };

  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      fail(lineno, "expected " + std::to_string(header.size()) + " fields, got " +
                       std::to_string(cells.size()));
    const std::string& id = cells[0];
    if (id.empty()) fail(lineno, "empty subject id");
    if (id != cur_id) {
      for (const auto& seen : panel.ids)
        if (seen == id) fail(lineno, "subject '" + id + "' rows are not contiguous");
      flush();
      cur_id = id;
    }
    const long t = parse_long(cells[1], lineno, "t");
    const long expected = static_cast<long>(cur_y.size()) + 1;
    if (t != expected)
      fail(lineno, "subject '" + id + "': expected t=" + std::to_string(expected) +
                       ", got t=" + std::to_string(t) + " (gap or disorder)");
    const long y = parse_long(cells[2], lineno, "y");
    if (y != 0 && y != 1) fail(lineno, "y must be 0 or 1, got '" + cells[2] + "'");
    cur_y.push_back(static_cast<std::int8_t>(y));
    for (int j = 0; j < l; ++j)
      cur_x.push_back(parse_double(cells[3 + j], lineno, panel.covariate_names[j]));
  }
  flush();
  if (panel.data.subjects.empty())
    throw std::invalid_argument("panel file contains no data rows");
  return panel;
}

Panel read_panel_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open panel file: " + path);
  try {
    return read_panel_csv(in);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void write_panel_csv(std::ostream& out, const Panel& panel) {
  out << "subject,t,y";
  for (const auto& name : panel.covariate_names) out << ',' << name;
  out << '\n';
  for (size_t i = 0; i < panel.data.subjects.size(); ++i) {
    const Subject& s = panel.data.subjects[i];
    for (int t = 0; t < s.series.length(); ++t) {
      out << panel.ids[i] << ',' << (t + 1) << ',' << int(s.series.y[t]);
      for (int j = 0; j < panel.l(); ++j) out << ',' << format_double(s.exog(t, j));
      out << '\n';
    }
  }
}

void write_panel_csv_file(const std::string& path, const Panel& panel) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write panel file: " + path);
  write_panel_csv(out, panel);
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_csv_file(const std::string& path,
                    const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

nlohmann::json make_manifest(const nlohmann::json& config) {
  nlohmann::json m;
  m["config"] = config;
  m["config_hash"] = content_hash(config.dump());
  m["version"] = kVersion;
  return m;
}

void write_json_file(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace larfi
