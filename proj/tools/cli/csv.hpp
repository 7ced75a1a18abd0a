#pragma once

#include <charconv>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace robust_affine::cli {

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Writes "# <comment>", a header row, then comma-separated rows.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::string_view comment, const std::vector<std::string>& header)
      : out_(out) {
    out_ << "# " << comment << '\n';
    write_row(header);
  }

  void write_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  template <typename... Ts>
  void row(const Ts&... cells) {
    write_row({cell(cells)...});
  }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(bool v) { return v ? "true" : "false"; }
  static std::string cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char ch : s) {
      if (ch == '"') quoted += '"';
      quoted += ch;
    }
    return quoted + '"';
  }
  static std::string cell(const char* s) { return cell(std::string(s)); }
  template <typename I>
    requires std::is_integral_v<I>
  static std::string cell(I v) { return std::to_string(v); }

  std::ostream& out_;
};

}  // namespace robust_affine::cli
