#ifndef LARFI_IO_HPP
#define LARFI_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "larfi/estimation.hpp"
#include "larfi/model.hpp"

namespace larfi {

/// Multi-subject panel with stable subject ids and covariate names.
/// File format: CSV, header `subject,t,y[,<covariate names>]`, rows grouped
/// by subject with t running 1..T_i without gaps. UTF-8, LF, '.' decimal
/// separator, shortest round-trip float formatting.
struct Panel {
  std::vector<std::string> ids;
  SubjectPanel data;
  std::vector<std::string> covariate_names;

  int l() const { return static_cast<int>(covariate_names.size()); }
};

/// Parses a panel file; malformed rows are reported with their 1-based
/// line number via std::invalid_argument.
Panel read_panel_csv(std::istream& in);
Panel read_panel_csv_file(const std::string& path);

void write_panel_csv(std::ostream& out, const Panel& panel);
void write_panel_csv_file(const std::string& path, const Panel& panel);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

/// FNV-1a 64-bit content hash, hex-encoded; used in run manifests.
std::string content_hash(const std::string& s);

/// Generic CSV table writer for study outputs (one header, string cells).
void write_csv_file(const std::string& path,
                    const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows);

/// JSON run manifest: config echo plus content hash and library version.
nlohmann::json make_manifest(const nlohmann::json& config);
void write_json_file(const std::string& path, const nlohmann::json& doc);

extern const char* const kVersion;

}  // namespace larfi

#endif  // LARFI_IO_HPP
