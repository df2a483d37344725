#ifndef POLYREG_IO_HPP
#define POLYREG_IO_HPP

#include <polyreg/error.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace polyreg {

/// Shortest decimal text that reads back to the same double; inf and nan
/// are spelled out.
inline std::string format_double(double x)
{
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

/// Fixed 17-significant-digit scientific form used in CSV output.
inline std::string format_csv_double(double x)
{
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::scientific, 16);
  return std::string(buf, r.ptr);
}

/// Comma-separated table with a fixed header.
class CsvTable
{
public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  class Row
  {
  public:
    Row& operator<<(double x) { return push(format_csv_double(x)); }
    Row& operator<<(int x) { return push(std::to_string(x)); }
    Row& operator<<(long x) { return push(std::to_string(x)); }
    Row& operator<<(unsigned long x) { return push(std::to_string(x)); }
    Row& operator<<(unsigned long long x) { return push(std::to_string(x)); }
    Row& operator<<(bool x) { return push(x ? "1" : "0"); }
    Row& operator<<(const char* s) { return push(quote(s)); }
    Row& operator<<(const std::string& s) { return push(quote(s)); }

  private:
    friend class CsvTable;
    explicit Row(std::vector<std::string>& cells) : cells_(cells) {}
    Row& push(std::string s)
    {
      cells_.push_back(std::move(s));
      return *this;
    }
    static std::string quote(std::string_view s)
    {
      if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
      std::string out = "\"";
      for (char c : s) {
        if (c == '"') out += '"';
        out += c;
      }
      return out + "\"";
    }
    std::vector<std::string>& cells_;
  };

  Row row()
  {
    rows_.emplace_back();
    return Row(rows_.back());
  }

  const std::vector<std::string>& header() const { return header_; }
  std::size_t size() const { return rows_.size(); }

  std::string str() const
  {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) {
      require(r.size() == header_.size(), ErrorKind::invalid_argument, "CSV row has the wrong number of cells");
      line(r);
    }
    return out;
  }

private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline void write_text_file(const std::filesystem::path& path, const std::string& text)
{
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(f), ErrorKind::io, "cannot open " + path.string() + " for writing");
  f << text;
  require(static_cast<bool>(f), ErrorKind::io, "failed writing " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path)
{
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

} // namespace polyreg

#endif
