#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace berm::csv {

// Header plus string cells. Comma-delimited, double-quoted fields may hold
// commas, quotes ("") and newlines. CRLF is accepted on input.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Throws MissingColumn.
    std::size_t column(std::string_view name) const;
    std::optional<std::size_t> find_column(std::string_view name) const;
};

// Throws IoError on malformed input (ragged rows, unterminated quotes, empty
// or duplicate header names).
Table parse(std::istream& in);
Table read_file(const std::filesystem::path& path);

// Decimal floating point, surrounding blanks allowed. Throws UnparseableCell
// (row is 1-based over data rows).
double parse_number(std::string_view text, std::size_t row, const std::string& column);

// Shortest round-trip decimal form; "" for an absent value.
std::string format_number(double v);
std::string format_number(const std::optional<double>& v);

// Quotes the field when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

class Writer {
public:
    explicit Writer(std::vector<std::string> header);

    // Throws InvalidArgument when the width differs from the header.
    void row(const std::vector<std::string>& cells);
    const std::string& str() const noexcept { return out_; }

private:
    std::size_t width_;
    std::string out_;
};

// Writes to a temporary file in the same directory, then renames over
// `path`, so readers never see a partial file. Throws IoError.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace berm::csv
