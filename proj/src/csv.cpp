#include "berm/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include <fmt/format.h>

#include "berm/errors.hpp"

namespace berm::csv {

std::size_t Table::column(std::string_view name) const {
    if (auto c = find_column(name)) return *c;
    throw MissingColumn(std::string(name));
}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == name) return c;
    return std::nullopt;
}

namespace {

// One record; false at end of input. Line counter tracks physical lines for
// error messages.
bool next_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
    fields.clear();
    int ch = in.get();
    if (ch == EOF) return false;
    ++line;
    const std::size_t start_line = line;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (;; ch = in.get()) {
        if (quoted) {
            if (ch == EOF)
                throw IoError(fmt::format("line {}: unterminated quoted field", start_line));
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get();
                    cur.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++line;
                cur.push_back(static_cast<char>(ch));
            }
            continue;
        }
        if (ch == '"') {
            if (!cur.empty() || was_quoted)
                throw IoError(fmt::format("line {}: stray quote inside field", line));
            quoted = was_quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
            was_quoted = false;
        } else if (ch == '\r' && in.peek() == '\n') {
            continue;
        } else if (ch == '\n' || ch == EOF) {
            fields.push_back(std::move(cur));
            return true;
        } else {
            if (was_quoted)
                throw IoError(fmt::format("line {}: text after closing quote", line));
            cur.push_back(static_cast<char>(ch));
        }
    }
}

}  // namespace

Table parse(std::istream& in) {
    Table t;
    std::size_t line = 0;
    std::vector<std::string> fields;
    // Leading UTF-8 byte order mark.
    if (in.peek() == 0xEF) {
        char bom[3];
        in.read(bom, 3);
        if (!(static_cast<unsigned char>(bom[1]) == 0xBB && static_cast<unsigned char>(bom[2]) == 0xBF))
            throw IoError("malformed byte order mark");
    }
    if (!next_record(in, fields, line)) throw IoError("empty CSV: header row is required");
    std::set<std::string> seen;
    for (const auto& h : fields) {
        if (h.empty()) throw IoError("empty column name in header");
        if (!seen.insert(h).second) throw IoError("duplicate column name '" + h + "'");
    }
    t.header = fields;
    while (next_record(in, fields, line)) {
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
        if (fields.size() != t.header.size())
            throw IoError(fmt::format("line {}: {} fields, header has {}", line, fields.size(),
                                      t.header.size()));
        t.rows.push_back(fields);
    }
    return t;
}

Table read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    try {
        return parse(in);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

double parse_number(std::string_view text, std::size_t row, const std::string& column) {
    std::string_view s = text;
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw UnparseableCell(row, column, std::string(text));
    return v;
}

std::string format_number(double v) { return fmt::format("{}", v); }

std::string format_number(const std::optional<double>& v) {
    return v ? format_number(*v) : std::string();
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

Writer::Writer(std::vector<std::string> header) : width_(header.size()) { row(header); }

void Writer::row(const std::vector<std::string>& cells) {
    if (cells.size() != width_)
        throw InvalidArgument(fmt::format("CSV row has {} cells, expected {}", cells.size(), width_));
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (c) out_.push_back(',');
        out_ += escape(cells[c]);
    }
    out_.push_back('\n');
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create '" + path.parent_path().string() + "': " + ec.message());
    }
    fs::path tmp = path;
    tmp += fmt::format(".tmp.{}", static_cast<long>(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            fs::remove(tmp, ec);
            throw IoError("write failed for '" + tmp.string() + "'");
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename onto '" + path.string() + "'");
    }
}

}  // namespace berm::csv
