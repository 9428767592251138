#include "snvsim/records.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace snvsim {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::size_t RecordFile::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw std::runtime_error("record file has no column '" + name + "'");
}

double RecordFile::as_number(std::size_t row, std::size_t col) const {
    const std::string& s = rows.at(row).at(col);
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw std::runtime_error("record file: '" + s + "' is not a number");
    }
}

std::int64_t RecordFile::as_int(std::size_t row, std::size_t col) const {
    const std::string& s = rows.at(row).at(col);
    try {
        std::size_t pos = 0;
        const std::int64_t v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("record file: '" + s + "' is not an integer");
    }
}

std::string RecordFile::to_text() const {
    std::ostringstream os;
    os << "# snvsim-record v1\n";
    os << "# schema: " << schema << "\n";
    for (const auto& [k, v] : meta) os << "# " << k << ": " << v << "\n";
    os << "# columns:";
    for (const auto& c : columns) os << " " << c;
    os << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << '\t';
            os << row[i];
        }
        os << '\n';
    }
    return os.str();
}

RecordFile RecordFile::from_text(const std::string& text) {
    RecordFile rf;
    std::istringstream is(text);
    std::string line;
    bool saw_magic = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            if (!body.empty() && body[0] == ' ') body.erase(0, 1);
            if (body == "snvsim-record v1") {
                saw_magic = true;
                continue;
            }
            const auto colon = body.find(": ");
            if (colon == std::string::npos) continue;
            const std::string key = body.substr(0, colon);
            const std::string value = body.substr(colon + 2);
            if (key == "schema") {
                rf.schema = value;
            } else if (key == "columns") {
                std::istringstream cs(value);
                std::string c;
                while (cs >> c) rf.columns.push_back(c);
            } else {
                rf.meta[key] = value;
            }
            continue;
        }
        std::vector<std::string> row;
        std::size_t start = 0;
        while (true) {
            const auto tab = line.find('\t', start);
            row.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        rf.rows.push_back(std::move(row));
    }
    if (!saw_magic) throw std::runtime_error("not a snvsim record file (missing magic line)");
    if (rf.schema.empty()) throw std::runtime_error("record file: missing schema header");
    if (rf.columns.empty()) throw std::runtime_error("record file: missing columns header");
    for (std::size_t i = 0; i < rf.rows.size(); ++i)
        if (rf.rows[i].size() != rf.columns.size())
            throw std::runtime_error("record file: row " + std::to_string(i) +
                                     " has wrong column count");
    return rf;
}

void RecordFile::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    const std::string text = to_text();
    out.write(text.data(), std::streamsize(text.size()));
    if (!out) throw std::runtime_error("failed writing output file: " + path);
}

RecordFile RecordFile::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open record file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

}  // namespace snvsim
