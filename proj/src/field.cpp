#include "kdc/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace kdc {

double quantize_coord(double v) { return std::round(v * 256.0) / 256.0; }

SubPixel quantize(SubPixel p) { return {quantize_coord(p.x), quantize_coord(p.y)}; }

DenseField::DenseField(int height, int width, int channels, float fill)
    : height_(height), width_(width), channels_(channels) {
    if (height <= 0 || width <= 0 || channels <= 0) {
        throw std::invalid_argument("DenseField: dimensions must be positive");
    }
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

bool DenseField::all_finite() const {
    for (float v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double sample_bilinear(const DenseField& f, int c, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(f.width() - 1));
    y = std::clamp(y, 0.0, static_cast<double>(f.height() - 1));
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const int x1 = std::min(x0 + 1, f.width() - 1);
    const int y1 = std::min(y0 + 1, f.height() - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = (1.0 - fx) * f.at(c, y0, x0) + fx * f.at(c, y0, x1);
    const double bot = (1.0 - fx) * f.at(c, y1, x0) + fx * f.at(c, y1, x1);
    return (1.0 - fy) * top + fy * bot;
}

namespace {

// The file format is little-endian by definition; the code below assumes a
// little-endian host (checked at startup of the writer/reader).
void ensure_little_endian() {
    const std::uint32_t probe = 1;
    unsigned char b;
    std::memcpy(&b, &probe, 1);
    if (b != 1) throw std::runtime_error("KDCF io requires a little-endian host");
}

template <typename T>
void write_raw(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

}  // namespace

void write_kdcf(const std::string& path, const DenseField& field) {
    ensure_little_endian();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write("KDCF", 4);
    write_raw<std::uint16_t>(out, kKdcfVersion);
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(field.height()));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(field.width()));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(field.channels()));
    out.write(reinterpret_cast<const char*>(field.raw().data()),
              static_cast<std::streamsize>(field.size() * sizeof(float)));
    if (!out) throw std::runtime_error("short write: " + path);
}

DenseField read_kdcf(const std::string& path) {
    ensure_little_endian();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "KDCF", 4) != 0) {
        throw std::runtime_error("not a KDCF file: " + path);
    }
    const auto version = read_raw<std::uint16_t>(in);
    if (version != kKdcfVersion) throw std::runtime_error("unsupported KDCF version");
    const auto h = read_raw<std::uint32_t>(in);
    const auto w = read_raw<std::uint32_t>(in);
    const auto c = read_raw<std::uint32_t>(in);
    if (!in || h == 0 || w == 0 || c == 0 || h > (1u << 20) || w > (1u << 20) ||
        c > (1u << 16)) {
        throw std::runtime_error("corrupt KDCF header: " + path);
    }
    DenseField field(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
    in.read(reinterpret_cast<char*>(field.raw().data()),
            static_cast<std::streamsize>(field.size() * sizeof(float)));
    if (!in) throw std::runtime_error("truncated KDCF payload: " + path);
    return field;
}

}  // namespace kdc
