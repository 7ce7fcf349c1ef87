#include "kdc/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace kdc {

namespace {

// 16-entry palette; instance i wears color i % 16.
constexpr unsigned char kPalette[16][3] = {
    {230, 25, 75},  {60, 180, 75},   {255, 225, 25}, {0, 130, 200},
    {245, 130, 48}, {145, 30, 180},  {70, 240, 240}, {240, 50, 230},
    {210, 245, 60}, {250, 190, 212}, {0, 128, 128},  {220, 190, 255},
    {170, 110, 40}, {255, 250, 200}, {128, 0, 0},    {170, 255, 195}};

std::ofstream open_binary(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

}  // namespace

void write_field_pgm(const std::string& path, const DenseField& field, int channel) {
    if (channel < 0 || channel >= field.channels()) {
        throw std::invalid_argument("write_field_pgm: channel out of range");
    }
    const auto data = field.channel(channel);
    float lo = data[0], hi = data[0];
    for (float v : data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;

    auto out = open_binary(path);
    out << "P5\n" << field.width() << " " << field.height() << "\n255\n";
    std::vector<unsigned char> row(field.width());
    for (int y = 0; y < field.height(); ++y) {
        for (int x = 0; x < field.width(); ++x) {
            row[x] = static_cast<unsigned char>(
                std::lround((data[static_cast<std::size_t>(y) * field.width() + x] - lo) * scale));
        }
        out.write(reinterpret_cast<const char*>(row.data()), row.size());
    }
}

void write_overlay_ppm(const std::string& path, int height, int width,
                       const std::vector<Mask>& masks,
                       const std::vector<std::vector<SubPixel>>& keypoints) {
    std::vector<unsigned char> img(static_cast<std::size_t>(height) * width * 3, 0);
    for (std::size_t i = 0; i < masks.size(); ++i) {
        const auto* color = kPalette[i % 16];
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                if (!masks[i].at(y, x)) continue;
                const std::size_t o = (static_cast<std::size_t>(y) * width + x) * 3;
                img[o] = color[0];
                img[o + 1] = color[1];
                img[o + 2] = color[2];
            }
        }
    }
    for (const auto& person : keypoints) {
        for (const auto& kp : person) {
            const int cx = static_cast<int>(std::lround(kp.x));
            const int cy = static_cast<int>(std::lround(kp.y));
            for (int d = -1; d <= 1; ++d) {
                for (auto [x, y] : {std::pair{cx + d, cy}, std::pair{cx, cy + d}}) {
                    if (x < 0 || x >= width || y < 0 || y >= height) continue;
                    const std::size_t o = (static_cast<std::size_t>(y) * width + x) * 3;
                    img[o] = img[o + 1] = img[o + 2] = 255;
                }
            }
        }
    }
    auto out = open_binary(path);
    out << "P6\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data()), img.size());
}

void write_scene_ppm(const std::string& path, const Scene& scene) {
    std::vector<Mask> masks;
    std::vector<std::vector<SubPixel>> keypoints;
    for (const auto& person : scene.persons) {
        masks.push_back(person.mask);
        std::vector<SubPixel> kps;
        for (const auto& kp : person.keypoints) {
            if (kp.visible()) kps.push_back(kp.pos);
        }
        keypoints.push_back(std::move(kps));
    }
    write_overlay_ppm(path, scene.height, scene.width, masks, keypoints);
}

}  // namespace kdc
