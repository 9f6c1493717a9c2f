#pragma once

// File formats.
//
// Raw tensor ("DACT"), all integers little-endian:
//   bytes 0-3   magic "DACT"
//   byte  4     version (1)
//   byte  5     rank r (channel axis included, so 2 to 4)
//   byte  6     dtype (1 = float64)
//   bytes 7-15  zero padding
//   then r u32 extents (channels first), then the float64 data row-major.
//
// PGM: P2 (ASCII) and P5 (binary) greyscale, read as one-channel 2D maps.

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "dirac/core.hpp"

namespace dirac {

inline constexpr std::array<char, 4> dact_magic{'D', 'A', 'C', 'T'};
inline constexpr std::uint8_t dact_version = 1;
inline constexpr std::uint8_t dact_dtype_f64 = 1;

namespace detail {

inline void put_le(std::string& out, std::uint64_t v, int bytes) {
    for (int b = 0; b < bytes; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

inline std::uint64_t get_le(const unsigned char* p, int bytes) {
    std::uint64_t v = 0;
    for (int b = 0; b < bytes; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
    return v;
}

}  // namespace detail

inline std::string encode_tensor(const FeatureMap<double>& map) {
    const Extents shape = map.shape();
    std::string out(dact_magic.begin(), dact_magic.end());
    out.push_back(static_cast<char>(dact_version));
    out.push_back(static_cast<char>(shape.size()));
    out.push_back(static_cast<char>(dact_dtype_f64));
    out.append(9, '\0');
    for (auto e : shape) {
        if (e > std::numeric_limits<std::uint32_t>::max()) throw io_error("encode_tensor: extent too large");
        detail::put_le(out, e, 4);
    }
    out.reserve(out.size() + 8 * map.size());
    for (double v : map.data()) detail::put_le(out, std::bit_cast<std::uint64_t>(v), 8);
    return out;
}

inline FeatureMap<double> decode_tensor(const std::string& bytes) {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < 16 || std::memcmp(p, dact_magic.data(), 4) != 0)
        throw io_error("decode_tensor: missing DACT header");
    if (p[4] != dact_version) throw io_error("decode_tensor: unsupported version");
    if (p[6] != dact_dtype_f64) throw io_error("decode_tensor: unsupported dtype");
    const std::size_t rank = p[5];
    if (rank < 2 || rank > 4) throw io_error("decode_tensor: rank must lie in 2..4");
    if (bytes.size() < 16 + 4 * rank) throw io_error("decode_tensor: truncated extents");
    Extents shape(rank);
    for (std::size_t i = 0; i < rank; ++i) shape[i] = detail::get_le(p + 16 + 4 * i, 4);
    const std::size_t n = volume(shape);
    const std::size_t offset = 16 + 4 * rank;
    if (bytes.size() != offset + 8 * n) throw io_error("decode_tensor: data length does not match extents");
    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i) data[i] = std::bit_cast<double>(detail::get_le(p + offset + 8 * i, 8));
    return FeatureMap<double>(shape[0], Extents(shape.begin() + 1, shape.end()), std::move(data));
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes through a temporary sibling and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw io_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw io_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline FeatureMap<double> read_tensor(const std::filesystem::path& path) {
    try {
        return decode_tensor(read_file(path));
    } catch (const io_error& e) {
        throw io_error(path.string() + ": " + e.what());
    }
}

inline void write_tensor(const std::filesystem::path& path, const FeatureMap<double>& map) {
    write_file_atomic(path, encode_tensor(map));
}

// ---------------------------------------------------------------------------

enum class PgmFormat { Ascii, Binary };

/// Min-max scales one plane to 0..255. A constant plane maps to 0.
inline std::string encode_pgm(std::span<const double> plane, std::size_t rows, std::size_t cols,
                              PgmFormat format) {
    if (plane.size() != rows * cols) throw shape_mismatch("encode_pgm: plane size does not match extents");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : plane) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    auto level = [&](double v) {
        if (!(hi > lo)) return 0;
        return static_cast<int>(std::lround((v - lo) / (hi - lo) * 255.0));
    };
    std::ostringstream os;
    os << (format == PgmFormat::Ascii ? "P2" : "P5") << '\n' << cols << ' ' << rows << "\n255\n";
    std::string out = os.str();
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const int v = level(plane[i * cols + j]);
            if (format == PgmFormat::Binary) {
                out.push_back(static_cast<char>(v));
            } else {
                out += std::to_string(v);
                out.push_back(j + 1 == cols ? '\n' : ' ');
            }
        }
    }
    return out;
}

/// Reads P2/P5 into a (1, rows, cols) map of raw sample values.
inline FeatureMap<double> decode_pgm(const std::string& bytes) {
    std::size_t pos = 0;
    auto token = [&]() {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
        const std::size_t start = pos;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        if (start == pos) throw io_error("decode_pgm: truncated header");
        return bytes.substr(start, pos - start);
    };
    auto number = [&]() {
        const auto t = token();
        std::size_t v = 0;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || ptr != t.data() + t.size()) throw io_error("decode_pgm: bad number '" + t + "'");
        return v;
    };
    const auto magic = token();
    if (magic != "P2" && magic != "P5") throw io_error("decode_pgm: not a P2/P5 file");
    const std::size_t cols = number(), rows = number(), maxval = number();
    if (cols == 0 || rows == 0 || maxval == 0 || maxval > 65535) throw io_error("decode_pgm: bad header values");
    std::vector<double> data(rows * cols);
    if (magic == "P2") {
        for (auto& v : data) v = static_cast<double>(number());
    } else {
        ++pos;  // single whitespace after maxval
        const std::size_t width = maxval > 255 ? 2 : 1;
        if (bytes.size() < pos + data.size() * width) throw io_error("decode_pgm: truncated pixel data");
        const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + pos;
        for (std::size_t i = 0; i < data.size(); ++i)
            data[i] = width == 1 ? p[i] : static_cast<double>((p[2 * i] << 8) | p[2 * i + 1]);
    }
    return FeatureMap<double>(1, {rows, cols}, std::move(data));
}

/// Loads a DACT tensor, or a PGM when the extension is .pgm.
inline FeatureMap<double> read_map(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw io_error("no such file: " + path.string());
    if (path.extension() == ".pgm") {
        try {
            return decode_pgm(read_file(path));
        } catch (const io_error& e) {
            throw io_error(path.string() + ": " + e.what());
        }
    }
    return read_tensor(path);
}

/// Shortest round-trip decimal form, so text outputs are reproducible.
inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw io_error("format_double failed");
    return std::string(buf.data(), ptr);
}

}  // namespace dirac
