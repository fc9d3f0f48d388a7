#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pinnelast::io {

struct ArchiveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Tabular field samples. Standard channel order is
/// x, y, t, u, v, s11, s22, s12 with an optional trailing svm column.
struct FieldArchive {
    std::vector<std::string> columns;
    std::vector<double> data;  // row-major

    std::size_t rows() const { return columns.empty() ? 0 : data.size() / columns.size(); }
    double at(std::size_t r, std::size_t c) const { return data[r * columns.size() + c]; }

    int column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<int>(i);
        return -1;
    }

    static std::vector<std::string> standard_columns(bool with_svm) {
        std::vector<std::string> c{"x", "y", "t", "u", "v", "s11", "s22", "s12"};
        if (with_svm) c.push_back("svm");
        return c;
    }
};

inline void write_csv(const std::string& path, const FieldArchive& a) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw ArchiveError("cannot open for writing: " + path);
    for (std::size_t i = 0; i < a.columns.size(); ++i)
        os << (i ? "," : "") << a.columns[i];
    os << '\n';
    os.precision(17);
    const std::size_t nc = a.columns.size();
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < nc; ++c) os << (c ? "," : "") << a.at(r, c);
        os << '\n';
    }
    if (!os) throw ArchiveError("write failure: " + path);
}

inline FieldArchive read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ArchiveError("cannot open: " + path);
    FieldArchive a;
    std::string line;
    if (!std::getline(is, line)) throw ArchiveError("empty archive: " + path);
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) a.columns.push_back(cell);
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t n = 0;
        while (std::getline(ss, cell, ',')) {
            a.data.push_back(std::stod(cell));
            ++n;
        }
        if (n != a.columns.size()) throw ArchiveError("ragged row in " + path);
    }
    return a;
}

// Compact block format: magic, version, column names, then raw rows.
namespace detail_blk {
constexpr char kMagic[4] = {'P', 'N', 'F', 'B'};
constexpr std::uint32_t kVersion = 1;
}  // namespace detail_blk

inline void write_block(const std::string& path, const FieldArchive& a) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ArchiveError("cannot open for writing: " + path);
    os.write(detail_blk::kMagic, 4);
    const std::uint32_t v = detail_blk::kVersion;
    os.write(reinterpret_cast<const char*>(&v), 4);
    const std::uint32_t nc = static_cast<std::uint32_t>(a.columns.size());
    os.write(reinterpret_cast<const char*>(&nc), 4);
    for (const auto& c : a.columns) {
        const std::uint32_t len = static_cast<std::uint32_t>(c.size());
        os.write(reinterpret_cast<const char*>(&len), 4);
        os.write(c.data(), len);
    }
    const std::uint64_t nr = a.rows();
    os.write(reinterpret_cast<const char*>(&nr), 8);
    os.write(reinterpret_cast<const char*>(a.data.data()),
             static_cast<std::streamsize>(a.data.size() * sizeof(double)));
    if (!os) throw ArchiveError("write failure: " + path);
}

inline FieldArchive read_block(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ArchiveError("cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, detail_blk::kMagic, 4) != 0)
        throw ArchiveError("not a field block: " + path);
    std::uint32_t version, nc;
    is.read(reinterpret_cast<char*>(&version), 4);
    is.read(reinterpret_cast<char*>(&nc), 4);
    if (!is || version != detail_blk::kVersion) throw ArchiveError("unsupported block version");
    FieldArchive a;
    for (std::uint32_t i = 0; i < nc; ++i) {
        std::uint32_t len;
        is.read(reinterpret_cast<char*>(&len), 4);
        std::string name(len, '\0');
        is.read(name.data(), len);
        a.columns.push_back(name);
    }
    std::uint64_t nr;
    is.read(reinterpret_cast<char*>(&nr), 8);
    a.data.resize(nr * nc);
    is.read(reinterpret_cast<char*>(a.data.data()),
            static_cast<std::streamsize>(a.data.size() * sizeof(double)));
    if (!is) throw ArchiveError("truncated block: " + path);
    return a;
}

/// Reads either format, by magic.
inline FieldArchive read_archive(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw ArchiveError("cannot open: " + path);
    char magic[4] = {0, 0, 0, 0};
    probe.read(magic, 4);
    probe.close();
    if (std::memcmp(magic, detail_blk::kMagic, 4) == 0) return read_block(path);
    return read_csv(path);
}

}  // namespace pinnelast::io
