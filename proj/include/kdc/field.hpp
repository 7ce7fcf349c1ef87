// Dense 2D multi-channel field container and the KDCF binary tensor format.
//
// Storage is planar (channel-major): data[(c*H + y)*W + x]. Decoding walks
// whole channels independently, so planar keeps the hot loops contiguous.
// Coordinate convention throughout the library: x = column, y = row, origin
// at the top-left, pixel centers at integer coordinates.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace kdc {

struct GridPoint {
    int x = 0;
    int y = 0;
};

struct SubPixel {
    double x = 0.0;
    double y = 0.0;
};

// Quantize a coordinate to 1/256 px. Keypoints and centroids live on this
// grid so that offset targets (centroid minus integer pixel) are exactly
// representable in 32-bit floats and round-trip without drift.
double quantize_coord(double v);
SubPixel quantize(SubPixel p);

class DenseField {
public:
    DenseField() = default;
    DenseField(int height, int width, int channels, float fill = 0.0f);

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    std::size_t size() const { return data_.size(); }

    float& at(int c, int y, int x) {
        return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
    }
    float at(int c, int y, int x) const {
        return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
    }

    std::span<float> channel(int c) {
        return {data_.data() + static_cast<std::size_t>(c) * height_ * width_,
                static_cast<std::size_t>(height_) * width_};
    }
    std::span<const float> channel(int c) const {
        return {data_.data() + static_cast<std::size_t>(c) * height_ * width_,
                static_cast<std::size_t>(height_) * width_};
    }

    std::span<float> raw() { return data_; }
    std::span<const float> raw() const { return data_; }

    bool same_shape(const DenseField& o) const {
        return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
    }

    // True when every value is finite. Public operations must keep this.
    bool all_finite() const;

private:
    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<float> data_;
};

// Bilinear sample of one channel with clamp-to-edge semantics.
double sample_bilinear(const DenseField& f, int c, double x, double y);

// KDCF tensor file: magic "KDCF", version u16, height u32, width u32,
// channels u32, all little-endian, then H*W*C little-endian f32 in planar
// order.
inline constexpr std::uint16_t kKdcfVersion = 1;

void write_kdcf(const std::string& path, const DenseField& field);
DenseField read_kdcf(const std::string& path);

}  // namespace kdc
