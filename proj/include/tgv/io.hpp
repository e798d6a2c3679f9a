/* File formats.
 *
 * Plain-text matrix: one grid row per line, full double precision (%.17g),
 * lossless round-trip.  A file with one value per line reads back as a 1-D
 * field.
 *
 * Binary PGM (P5, 8-bit): values affinely mapped onto 0..255; the original
 * min/max ride in a header comment so the mapping can be undone.
 *
 * CSV writing lives with ExperimentReport in harness.hpp.
 */
#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tgv/fields.hpp"

namespace tgv {

inline std::string format_full(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_matrix(const std::string& path, const ScalarField& f) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    if (f.shape.spacing != 1.0) out << "# spacing=" << format_full(f.shape.spacing) << '\n';
    for (int i = 0; i < f.shape.n1; ++i) {
        for (int j = 0; j < f.shape.n2; ++j) {
            if (j) out << ' ';
            out << format_full(f.at(i, j));
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline ScalarField read_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    double spacing = 1.0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::size_t p = line.find("spacing=");
            if (p != std::string::npos) spacing = std::strtod(line.c_str() + p + 8, nullptr);
            continue;
        }
        std::istringstream ls(line);
        std::vector<double> row;
        double x;
        while (ls >> x) row.push_back(x);
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("empty matrix file: " + path);
    const std::size_t n2 = rows.front().size();
    for (const auto& r : rows)
        if (r.size() != n2) throw std::runtime_error("ragged matrix file: " + path);
    GridShape shape = n2 == 1 ? grid_1d(static_cast<int>(rows.size()), spacing)
                              : grid_2d(static_cast<int>(rows.size()), static_cast<int>(n2), spacing);
    ScalarField f(shape);
    for (int i = 0; i < shape.n1; ++i)
        for (int j = 0; j < shape.n2; ++j) f.at(i, j) = rows[i][j];
    return f;
}

inline void write_pgm(const std::string& path, const ScalarField& f) {
    double lo = f.v.empty() ? 0.0 : f.v[0], hi = lo;
    for (double x : f.v) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "P5\n# min=" << format_full(lo) << " max=" << format_full(hi) << " spacing="
        << format_full(f.shape.spacing) << "\n"
        << f.shape.n2 << ' ' << f.shape.n1 << "\n255\n";
    const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
    std::vector<unsigned char> bytes(f.v.size());
    for (std::size_t k = 0; k < f.v.size(); ++k) {
        const double t = (f.v[k] - lo) * scale;
        bytes[k] = static_cast<unsigned char>(t < 0.0 ? 0.0 : (t > 255.0 ? 255.0 : t + 0.5));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline ScalarField read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P5") throw std::runtime_error("not a binary PGM: " + path);
    double lo = 0.0, hi = 255.0, spacing = 1.0;
    int width = 0, height = 0, maxval = 0;
    int fields_read = 0;
    while (fields_read < 3) {
        in >> std::ws;
        if (in.peek() == '#') {
            std::string comment;
            std::getline(in, comment);
            std::size_t p = comment.find("min=");
            if (p != std::string::npos) lo = std::strtod(comment.c_str() + p + 4, nullptr);
            p = comment.find("max=");
            if (p != std::string::npos) hi = std::strtod(comment.c_str() + p + 4, nullptr);
            p = comment.find("spacing=");
            if (p != std::string::npos) spacing = std::strtod(comment.c_str() + p + 8, nullptr);
            continue;
        }
        int v;
        if (!(in >> v)) throw std::runtime_error("bad PGM header: " + path);
        if (fields_read == 0) width = v;
        else if (fields_read == 1) height = v;
        else maxval = v;
        ++fields_read;
    }
    if (maxval != 255) throw std::runtime_error("unsupported PGM maxval: " + path);
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> bytes(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw std::runtime_error("truncated PGM: " + path);
    GridShape shape = width == 1 ? grid_1d(height, spacing) : grid_2d(height, width, spacing);
    ScalarField f(shape);
    const double scale = (hi - lo) / 255.0;
    for (std::size_t k = 0; k < f.v.size(); ++k) f.v[k] = lo + bytes[k] * scale;
    return f;
}

// dispatch on extension: .pgm binary, anything else plain-text matrix
inline void write_image(const std::string& path, const ScalarField& f) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".pgm") == 0)
        write_pgm(path, f);
    else
        write_matrix(path, f);
}

inline ScalarField read_image(const std::string& path) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".pgm") == 0) return read_pgm(path);
    return read_matrix(path);
}

}  // namespace tgv
