#include "volcano/csv.hpp"

#include <array>
#include <charconv>
#include <stdexcept>

namespace volcano {

std::string format_double(double value) {
    std::array<char, 32> buffer{};
    const auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    if (ec != std::errc{}) {
        throw std::runtime_error("format_double: conversion failed");
    }
    return {buffer.data(), end};
}

CsvWriter::CsvWriter(std::ostream& out, std::initializer_list<std::string_view> header)
    : out_(out), columns_(header.size()) {
    bool first = true;
    for (auto name : header) {
        out_ << (first ? "" : ",") << name;
        first = false;
    }
    out_ << '\n';
}

CsvWriter::CsvWriter(std::ostream& out, std::span<const std::string> header) : out_(out), columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        out_ << (i == 0 ? "" : ",") << header[i];
    }
    out_ << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) {
    row(std::span<const double>(values.begin(), values.size()));
}

void CsvWriter::row(std::span<const double> values) {
    if (values.size() != columns_) {
        throw std::invalid_argument("CsvWriter: row width does not match header");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        out_ << (i == 0 ? "" : ",") << format_double(values[i]);
    }
    out_ << '\n';
}

} // namespace volcano
