#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "fddkit/signal.hpp"

namespace fddkit {

// Shortest representation that round-trips exactly through from_chars.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& token, std::size_t line, std::size_t column) {
    const char* begin = token.data();
    const char* end = begin + token.size();
    while (begin != end && (*begin == ' ' || *begin == '\t')) {
        ++begin;
    }
    while (end != begin && (*(end - 1) == ' ' || *(end - 1) == '\t' || *(end - 1) == '\r')) {
        --end;
    }
    double value = 0.0;
    auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end || begin == end) {
        throw std::runtime_error("cannot parse '" + std::string(begin, end) + "' as a number at line " +
                                 std::to_string(line) + ", column " + std::to_string(column));
    }
    if (!std::isfinite(value)) {
        throw std::runtime_error("non-finite value at line " + std::to_string(line) + ", column " +
                                 std::to_string(column));
    }
    return value;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

inline std::string strip_crlf(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) {
        s.pop_back();
    }
    return s;
}

/// Reads the standard input format: header `timestamp,<sensor>,...`, comma
/// delimited, one float row per sample.
inline MeasurementMatrix load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error(path + ": missing header row");
    }
    auto header = split_csv_line(strip_crlf(line));
    if (header.size() < 3) {
        throw std::runtime_error(path + ": header must name a timestamp column and at least 2 sensors");
    }
    if (header[0] != "timestamp") {
        throw std::runtime_error(path + ": first column must be 'timestamp', got '" + header[0] + "'");
    }
    MeasurementMatrix m;
    m.sensor_ids.assign(header.begin() + 1, header.end());
    m.values.resize(m.sensor_ids.size());

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = strip_crlf(line);
        if (stripped.empty()) {
            continue;
        }
        auto fields = split_csv_line(stripped);
        if (fields.size() != header.size()) {
            throw std::runtime_error(path + ": line " + std::to_string(line_no) + " has " +
                                     std::to_string(fields.size()) + " fields, expected " +
                                     std::to_string(header.size()));
        }
        m.timestamps.push_back(parse_double(fields[0], line_no, 1));
        for (std::size_t c = 1; c < fields.size(); ++c) {
            m.values[c - 1].push_back(parse_double(fields[c], line_no, c + 1));
        }
    }
    validate_matrix(m);
    return m;
}

inline void write_csv(const MeasurementMatrix& matrix, const std::string& path) {
    validate_matrix(matrix);
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << "timestamp";
    for (const auto& id : matrix.sensor_ids) {
        out << ',' << id;
    }
    out << '\n';
    for (std::size_t i = 0; i < matrix.n_samples(); ++i) {
        out << format_double(matrix.timestamps[i]);
        for (std::size_t c = 0; c < matrix.n_sensors(); ++c) {
            out << ',' << format_double(matrix.values[c][i]);
        }
        out << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed for " + path);
    }
}

}  // namespace fddkit
