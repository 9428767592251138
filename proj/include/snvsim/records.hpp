#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace snvsim {

// Delimited-text record files with a commented header block. Every file is
// self-describing: schema id, config hash, seed and column names travel with
// the data, so `analyze` needs no side channel. No timestamps: identical
// runs must produce identical bytes.
struct RecordFile {
    std::string schema;                         // e.g. "pairs.v1"
    std::map<std::string, std::string> meta;    // config_hash, seed, ...
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_index(const std::string& name) const;
    double as_number(std::size_t row, std::size_t col) const;
    std::int64_t as_int(std::size_t row, std::size_t col) const;

    std::string to_text() const;
    static RecordFile from_text(const std::string& text);  // throws on malformed input

    void save(const std::string& path) const;
    static RecordFile load(const std::string& path);
};

std::string format_double(double v);  // shortest round-trip representation

}  // namespace snvsim
