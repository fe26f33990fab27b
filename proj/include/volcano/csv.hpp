#pragma once

#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

namespace volcano {

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

/// Minimal CSV emitter: header row, then numeric rows.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::initializer_list<std::string_view> header);
    CsvWriter(std::ostream& out, std::span<const std::string> header);

    void row(std::initializer_list<double> values);
    void row(std::span<const double> values);

private:
    std::ostream& out_;
    std::size_t columns_;
};

} // namespace volcano
