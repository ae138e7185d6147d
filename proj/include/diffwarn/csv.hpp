#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace diffwarn {

// Fixed-format double rendering ("%.15g"). All CSV emitters go through this
// so that a rerun with the same seed produces byte-identical files.
std::string fmt_double(double v);

std::string fmt_int(long long v);

// Minimal CSV writer: header once, then rows of preformatted cells.
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header);

    void add_row(std::vector<std::string> cells);
    const std::string& text() const { return buf_; }
    void write_file(const std::filesystem::path& path) const;

  private:
    std::string buf_;
    std::size_t columns_;
};

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Parse error carrying the offending file line; line is 1-based, 0 = n/a.
struct ParseError : std::runtime_error {
    ParseError(const std::string& what, std::size_t line_arg)
        : std::runtime_error(what), line(line_arg) {}
    std::size_t line;
};

}  // namespace diffwarn
