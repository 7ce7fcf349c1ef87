#include "kdc/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "kdc/rng.hpp"

namespace kdc {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kDeg = 0.017453292519943295;

// Stick-figure template in units of the person scale s. Limb segments are
// chosen so eyes and ears stay inside the head disk and every joint sits
// inside its capsule.
struct Template {
    double hip_half = 0.18;
    double shoulder_half = 0.22;
    double shoulder_y = -0.62;
    double nose_y = -0.85;
    double eye_dx = 0.06, eye_dy = -0.05;
    double ear_dx = 0.12, ear_dy = -0.03;
    double upper_arm = 0.30, forearm = 0.28;
    double thigh = 0.36, shin = 0.34;
    double head_r = 0.17, head_dy = -0.06;
};

struct Capsule {
    SubPixel a, b;
    double r;
};

double seg_dist2(double px, double py, const Capsule& c) {
    const double vx = c.b.x - c.a.x;
    const double vy = c.b.y - c.a.y;
    const double len2 = vx * vx + vy * vy;
    double t = 0.0;
    if (len2 > 0.0) {
        t = ((px - c.a.x) * vx + (py - c.a.y) * vy) / len2;
        t = std::clamp(t, 0.0, 1.0);
    }
    const double dx = px - (c.a.x + t * vx);
    const double dy = py - (c.a.y + t * vy);
    return dx * dx + dy * dy;
}

struct Figure {
    std::array<SubPixel, kNumJoints> joints;
    std::vector<Capsule> capsules;
};

// Joint angles are measured from straight down; positive swings outward.
Figure build_figure(SubPixel root, double s, Rng& rng) {
    const Template t;
    Figure fig;
    auto& j = fig.joints;

    const double sway = rng.uniform(-0.05, 0.05) * s;
    j[kLeftHip] = {root.x - t.hip_half * s, root.y};
    j[kRightHip] = {root.x + t.hip_half * s, root.y};
    j[kLeftShoulder] = {root.x - t.shoulder_half * s, root.y + t.shoulder_y * s};
    j[kRightShoulder] = {root.x + t.shoulder_half * s, root.y + t.shoulder_y * s};
    j[kNose] = {root.x + sway, root.y + t.nose_y * s};
    j[kLeftEye] = {j[kNose].x - t.eye_dx * s, j[kNose].y + t.eye_dy * s};
    j[kRightEye] = {j[kNose].x + t.eye_dx * s, j[kNose].y + t.eye_dy * s};
    j[kLeftEar] = {j[kNose].x - t.ear_dx * s, j[kNose].y + t.ear_dy * s};
    j[kRightEar] = {j[kNose].x + t.ear_dx * s, j[kNose].y + t.ear_dy * s};

    auto limb = [](SubPixel from, double len, double angle, double side) {
        return SubPixel{from.x + side * len * std::sin(angle), from.y + len * std::cos(angle)};
    };

    for (double side : {-1.0, 1.0}) {
        const int shoulder = side < 0 ? kLeftShoulder : kRightShoulder;
        const int elbow = side < 0 ? kLeftElbow : kRightElbow;
        const int wrist = side < 0 ? kLeftWrist : kRightWrist;
        const double upper = rng.uniform(-20.0, 70.0) * kDeg;
        const double bend = rng.uniform(-30.0, 80.0) * kDeg;
        j[elbow] = limb(j[shoulder], t.upper_arm * s, upper, side);
        j[wrist] = limb(j[elbow], t.forearm * s, upper + bend, side);

        const int hip = side < 0 ? kLeftHip : kRightHip;
        const int knee = side < 0 ? kLeftKnee : kRightKnee;
        const int ankle = side < 0 ? kLeftAnkle : kRightAnkle;
        const double thigh = rng.uniform(-15.0, 25.0) * kDeg;
        const double kick = rng.uniform(-10.0, 40.0) * kDeg;
        j[knee] = limb(j[hip], t.thigh * s, thigh, side);
        j[ankle] = limb(j[knee], t.shin * s, thigh + kick, side);
    }

    auto r = [&](double units) { return std::max(2.0, units * s); };
    auto add = [&](int a, int b, double radius) {
        fig.capsules.push_back({j[a], j[b], r(radius)});
    };
    // Head disk (a zero-length capsule) plus a filled torso.
    const SubPixel head{j[kNose].x, j[kNose].y + t.head_dy * s};
    fig.capsules.push_back({head, head, r(t.head_r)});
    add(kNose, kLeftShoulder, 0.05);
    add(kNose, kRightShoulder, 0.05);
    add(kLeftShoulder, kLeftHip, 0.13);
    add(kRightShoulder, kRightHip, 0.13);
    add(kLeftShoulder, kRightShoulder, 0.12);
    add(kLeftHip, kRightHip, 0.12);
    add(kLeftShoulder, kRightHip, 0.13);
    add(kRightShoulder, kLeftHip, 0.13);
    add(kLeftShoulder, kLeftElbow, 0.07);
    add(kLeftElbow, kLeftWrist, 0.06);
    add(kRightShoulder, kRightElbow, 0.07);
    add(kRightElbow, kRightWrist, 0.06);
    add(kLeftHip, kLeftKnee, 0.10);
    add(kLeftKnee, kLeftAnkle, 0.08);
    add(kRightHip, kRightKnee, 0.10);
    add(kRightKnee, kRightAnkle, 0.08);
    return fig;
}

void shift_figure(Figure& fig, double dx, double dy) {
    for (auto& p : fig.joints) {
        p.x += dx;
        p.y += dy;
    }
    for (auto& c : fig.capsules) {
        c.a.x += dx;
        c.a.y += dy;
        c.b.x += dx;
        c.b.y += dy;
    }
}

Mask shift_mask(const Mask& m, int tx, int ty) {
    Mask out(m.height, m.width);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(y, x)) continue;
            const int nx = x + tx;
            const int ny = y + ty;
            if (out.in_bounds(nx, ny)) out.at(ny, nx) = 1;
        }
    }
    return out;
}

void refresh_visibility(Scene& scene) {
    for (auto& person : scene.persons) {
        for (auto& kp : person.keypoints) {
            const int px = static_cast<int>(std::lround(kp.pos.x));
            const int py = static_cast<int>(std::lround(kp.pos.y));
            bool visible = px >= 0 && px < scene.width && py >= 0 && py < scene.height;
            if (visible) {
                for (const auto& other : scene.persons) {
                    if (other.instance_id == person.instance_id) continue;
                    if (other.mask.at(py, px)) {
                        visible = false;
                        break;
                    }
                }
            }
            kp.vis = visible ? kVisible : kNotVisible;
        }
    }
}

}  // namespace

Scene generate_scene(int num_persons, int height, int width, std::uint64_t seed,
                     const GenConfig& cfg) {
    if (num_persons < 1) throw std::invalid_argument("generate_scene: need at least one person");
    if (height < 64 || width < 64) {
        throw std::invalid_argument("generate_scene: canvas must be at least 64x64");
    }

    Rng rng(seed);
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(num_persons))));
    const int rows = static_cast<int>(std::ceil(static_cast<double>(num_persons) / cols));
    const double cell_w = static_cast<double>(width) / cols;
    const double cell_h = static_cast<double>(height) / rows;
    const double d = std::min(cell_w, cell_h);
    const double jitter = 0.05 * d;

    // Scale bounds: the figure fits a 1.1s radius around its root; with more
    // than one person the inter-mask gap must exceed 2R = 64 px so decoding
    // stays separable per instance.
    const double s_fit = (d - 2.0 * jitter - 8.0) / 2.2;
    const double s_cap = 0.22 * std::min(height, width);
    double s_max = std::min(s_fit, s_cap);
    if (num_persons > 1) {
        const double s_sep = (d - 2.0 * jitter - 66.0) / 1.85;
        if (s_sep > 10.0) s_max = std::min(s_max, s_sep);
    }
    if (s_max < 6.0) throw std::invalid_argument("generate_scene: canvas too small for a figure");

    std::vector<int> cells(static_cast<std::size_t>(cols) * rows);
    std::iota(cells.begin(), cells.end(), 0);
    rng.shuffle(cells);

    Scene scene;
    scene.height = height;
    scene.width = width;

    std::vector<Figure> figures;
    for (int i = 0; i < num_persons; ++i) {
        const int cell = cells[i];
        const double cx = (cell % cols + 0.5) * cell_w + rng.uniform(-jitter, jitter);
        const double cy = (cell / cols + 0.5) * cell_h + rng.uniform(-jitter, jitter);
        const double s = s_max * rng.uniform(0.72, 0.95);
        Figure fig = build_figure({cx, cy}, s, rng);

        // Keep the whole silhouette inside the canvas.
        double max_r = 0.0;
        double min_x = 1e18, max_x = -1e18, min_y = 1e18, max_y = -1e18;
        for (const auto& c : fig.capsules) {
            max_r = std::max(max_r, c.r);
            for (const auto& p : {c.a, c.b}) {
                min_x = std::min(min_x, p.x);
                max_x = std::max(max_x, p.x);
                min_y = std::min(min_y, p.y);
                max_y = std::max(max_y, p.y);
            }
        }
        const double margin = max_r + 2.0;
        double dx = 0.0, dy = 0.0;
        if (min_x - margin < 0) dx = margin - min_x;
        if (max_x + margin > width - 1) dx = (width - 1) - margin - max_x;
        if (min_y - margin < 0) dy = margin - min_y;
        if (max_y + margin > height - 1) dy = (height - 1) - margin - max_y;
        if (dx != 0.0 || dy != 0.0) shift_figure(fig, dx, dy);

        for (auto& p : fig.joints) p = quantize(p);
        figures.push_back(std::move(fig));
    }

    // Rasterize in person order; earlier persons own contested pixels (the
    // placement makes contests impossible, this just pins the rule).
    std::vector<int> owner(static_cast<std::size_t>(height) * width, -1);
    for (int i = 0; i < num_persons; ++i) {
        PersonGT person;
        person.instance_id = i;
        person.mask = Mask(height, width);
        for (const auto& c : figures[i].capsules) {
            const int x0 = std::max(0, static_cast<int>(std::floor(std::min(c.a.x, c.b.x) - c.r)));
            const int x1 = std::min(width - 1, static_cast<int>(std::ceil(std::max(c.a.x, c.b.x) + c.r)));
            const int y0 = std::max(0, static_cast<int>(std::floor(std::min(c.a.y, c.b.y) - c.r)));
            const int y1 = std::min(height - 1, static_cast<int>(std::ceil(std::max(c.a.y, c.b.y) + c.r)));
            const double r2 = c.r * c.r;
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    if (seg_dist2(x, y, c) > r2) continue;
                    auto& own = owner[static_cast<std::size_t>(y) * width + x];
                    if (own == -1 || own == i) {
                        own = i;
                        person.mask.at(y, x) = 1;
                    }
                }
            }
        }
        for (int jj = 0; jj < kNumJoints; ++jj) {
            person.keypoints[jj] = {figures[i].joints[jj], kVisible};
        }
        person.flag_small = static_cast<double>(person.mask.area()) < cfg.small_area_threshold;
        scene.persons.push_back(std::move(person));
    }
    return scene;
}

OcclusionResult occlude_scene(const Scene& scene, int front_id, int back_id,
                              double overlap_fraction, std::uint64_t seed) {
    if (overlap_fraction < 0.0 || overlap_fraction > 1.0) {
        throw std::invalid_argument("occlude_scene: overlap_fraction must be in [0,1]");
    }
    int front_idx = -1, back_idx = -1;
    for (int i = 0; i < static_cast<int>(scene.persons.size()); ++i) {
        if (scene.persons[i].instance_id == front_id) front_idx = i;
        if (scene.persons[i].instance_id == back_id) back_idx = i;
    }
    if (front_idx < 0 || back_idx < 0 || front_idx == back_idx) {
        throw std::invalid_argument("occlude_scene: ids must name two existing persons");
    }

    const Mask& front = scene.persons[front_idx].mask;
    const Mask& back = scene.persons[back_idx].mask;
    const double back_area = static_cast<double>(back.area());
    if (back_area == 0.0) throw std::invalid_argument("occlude_scene: back person has empty mask");

    std::vector<GridPoint> back_pixels;
    back_pixels.reserve(static_cast<std::size_t>(back_area));
    for (int y = 0; y < back.height; ++y) {
        for (int x = 0; x < back.width; ++x) {
            if (back.at(y, x)) back_pixels.push_back({x, y});
        }
    }

    auto overlap_at = [&](int tx, int ty) {
        std::int64_t inter = 0;
        for (const auto& p : back_pixels) {
            const int nx = p.x + tx;
            const int ny = p.y + ty;
            if (front.in_bounds(nx, ny) && front.at(ny, nx)) ++inter;
        }
        return static_cast<double>(inter) / back_area;
    };

    const SubPixel fc = front.centroid();
    const SubPixel bc = back.centroid();
    double dir_x = fc.x - bc.x;
    double dir_y = fc.y - bc.y;
    if (dir_x == 0.0 && dir_y == 0.0) {
        Rng rng(seed);
        const double ang = rng.uniform(0.0, 6.283185307179586);
        dir_x = std::cos(ang);
        dir_y = std::sin(ang);
    }

    int best_tx = 0, best_ty = 0;
    double best_overlap = -1.0;
    bool reached = false;
    for (int i = 0; i <= 64; ++i) {
        const double t = i / 64.0;
        const int tx = static_cast<int>(std::lround(t * dir_x));
        const int ty = static_cast<int>(std::lround(t * dir_y));
        const double ov = overlap_at(tx, ty);
        if (ov > best_overlap) {
            best_overlap = ov;
            best_tx = tx;
            best_ty = ty;
        }
        if (ov >= overlap_fraction) {
            best_overlap = ov;
            best_tx = tx;
            best_ty = ty;
            reached = true;
            break;
        }
    }
    if (!reached) {
        // Target not reachable along the centroid line; search the integer
        // neighborhood of full centroid alignment for the best fraction.
        const int cx = static_cast<int>(std::lround(dir_x));
        const int cy = static_cast<int>(std::lround(dir_y));
        for (int dy = -16; dy <= 16; ++dy) {
            for (int dx = -16; dx <= 16; ++dx) {
                const double ov = overlap_at(cx + dx, cy + dy);
                if (ov > best_overlap) {
                    best_overlap = ov;
                    best_tx = cx + dx;
                    best_ty = cy + dy;
                    if (ov >= overlap_fraction) reached = true;
                }
            }
        }
    }

    OcclusionResult result;
    result.scene = scene;
    result.achieved_overlap = best_overlap;
    result.reached_target = reached || best_overlap >= overlap_fraction;

    PersonGT& moved = result.scene.persons[back_idx];
    for (auto& kp : moved.keypoints) {
        kp.pos.x += best_tx;
        kp.pos.y += best_ty;
    }
    Mask shifted = shift_mask(back, best_tx, best_ty);
    // The moved person goes behind everyone: it loses every contested pixel.
    for (const auto& other : result.scene.persons) {
        if (other.instance_id == back_id) continue;
        for (std::size_t i = 0; i < shifted.data.size(); ++i) {
            if (other.mask.data[i]) shifted.data[i] = 0;
        }
    }
    moved.mask = std::move(shifted);
    refresh_visibility(result.scene);
    result.scene.occlusion_fraction = std::max(scene.occlusion_fraction, best_overlap);
    return result;
}

std::string scene_to_json(const Scene& scene) {
    ordered_json root;
    root["images"] = ordered_json::array(
        {{{"id", scene.image_id}, {"height", scene.height}, {"width", scene.width}}});
    ordered_json anns = ordered_json::array();
    for (const auto& person : scene.persons) {
        ordered_json ann;
        ann["id"] = person.instance_id;
        ann["image_id"] = scene.image_id;
        ann["category_id"] = 1;
        ordered_json kps = ordered_json::array();
        int visible = 0;
        for (const auto& kp : person.keypoints) {
            kps.push_back(kp.pos.x);
            kps.push_back(kp.pos.y);
            kps.push_back(kp.vis);
            visible += kp.visible();
        }
        ann["keypoints"] = std::move(kps);
        ann["num_keypoints"] = visible;
        ann["segmentation"] = {{"size", {person.mask.height, person.mask.width}},
                               {"counts", rle_encode(person.mask)}};
        ann["area"] = person.mask.area();
        ann["iscrowd"] = 0;
        ann["flag_small"] = person.flag_small;
        anns.push_back(std::move(ann));
    }
    root["annotations"] = std::move(anns);
    root["info"] = {{"occlusion_fraction", scene.occlusion_fraction}};
    return root.dump(2) + "\n";
}

Scene scene_from_json(const std::string& text) {
    const auto root = nlohmann::json::parse(text);
    Scene scene;
    const auto& image = root.at("images").at(0);
    scene.image_id = image.at("id").get<int>();
    scene.height = image.at("height").get<int>();
    scene.width = image.at("width").get<int>();
    if (root.contains("info") && root["info"].contains("occlusion_fraction")) {
        scene.occlusion_fraction = root["info"]["occlusion_fraction"].get<double>();
    }
    for (const auto& ann : root.at("annotations")) {
        PersonGT person;
        person.instance_id = ann.at("id").get<int>();
        const auto& kps = ann.at("keypoints");
        if (kps.size() != 3 * kNumJoints) throw std::runtime_error("scene json: bad keypoints");
        for (int j = 0; j < kNumJoints; ++j) {
            person.keypoints[j].pos = {kps[3 * j].get<double>(), kps[3 * j + 1].get<double>()};
            person.keypoints[j].vis = kps[3 * j + 2].get<int>();
        }
        const auto& seg = ann.at("segmentation");
        person.mask = rle_decode(seg.at("counts").get<std::vector<std::int64_t>>(),
                                 seg.at("size")[0].get<int>(), seg.at("size")[1].get<int>());
        person.flag_small = ann.value("flag_small", false);
        scene.persons.push_back(std::move(person));
    }
    return scene;
}

void save_scene(const std::string& path, const Scene& scene) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << scene_to_json(scene);
}

Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return scene_from_json(ss.str());
}

}  // namespace kdc
