#include "photon_lattice/io.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace photon_lattice::io {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    // to_chars is locale independent.
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

CsvWriter::CsvWriter(const std::filesystem::path& path, std::string_view header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out_ << header << '\n';
}

CsvWriter& CsvWriter::cell(std::string_view text) {
    if (row_started_) out_ << ',';
    out_ << text;
    row_started_ = true;
    return *this;
}

CsvWriter& CsvWriter::cell(double v) { return cell(std::string_view(format_number(v))); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::string_view(std::to_string(v))); }

CsvWriter& CsvWriter::cell(std::uint64_t v, bool) { return cell(std::string_view(std::to_string(v))); }

void CsvWriter::end_row() {
    out_ << '\n';
    row_started_ = false;
}

void CsvWriter::close() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed for '" + path_.string() + "'");
    out_.close();
}

}  // namespace photon_lattice::io
