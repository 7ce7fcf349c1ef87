// kdc: batch front-end for the pose + instance-segmentation pipeline.
//
// Subcommands: gen, encode, decode, eval, bench, render, config.
// Exit codes: 0 ok, 2 usage/config/input error, 3 evaluation failure.
// KDC_LOG=debug|info|quiet controls stderr verbosity.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"
#include "kdc/encoder.hpp"
#include "kdc/evaluator.hpp"
#include "kdc/losses.hpp"
#include "kdc/pipeline.hpp"
#include "kdc/render.hpp"
#include "kdc/scene.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("KDC_LOG");
        if (env == nullptr) return LogLevel::kInfo;
        const std::string v(env);
        if (v == "debug") return LogLevel::kDebug;
        if (v == "quiet") return LogLevel::kQuiet;
        return LogLevel::kInfo;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::kInfo) std::cerr << "[kdc] " << msg << "\n";
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::kDebug) std::cerr << "[kdc:debug] " << msg << "\n";
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
}

// Every tunable of every subcommand; serializable so whole ablation sweeps
// can be described by a single config file.
struct RunConfig {
    double radius = 32.0;
    double sigma_hvk = 0.3;
    double sigma_lvk = 0.7;
    double sigma_instance = 5.0;
    double sigma_igo = 0.1;
    double threshold = 0.5;
    double nms_radius = 10.0;
    double noise = 0.0;
    std::string mode = "dynamic";
    std::uint64_t seed = 1;
    int workers = 0;  // 0 = library default
    int persons = 1;
    std::string canvas = "401x401";
    double occlude = -1.0;  // < 0 disables occlusion
    std::string pair = "0,1";
    double flag_small_below = 220.0;

    bool operator==(const RunConfig&) const = default;
};

ordered_json config_to_json(const RunConfig& c) {
    return ordered_json{{"radius", c.radius},
                        {"sigma_hvk", c.sigma_hvk},
                        {"sigma_lvk", c.sigma_lvk},
                        {"sigma_instance", c.sigma_instance},
                        {"sigma_igo", c.sigma_igo},
                        {"threshold", c.threshold},
                        {"nms_radius", c.nms_radius},
                        {"noise", c.noise},
                        {"mode", c.mode},
                        {"seed", c.seed},
                        {"workers", c.workers},
                        {"persons", c.persons},
                        {"canvas", c.canvas},
                        {"occlude", c.occlude},
                        {"pair", c.pair},
                        {"flag_small_below", c.flag_small_below}};
}

RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig c;
    c.radius = j.value("radius", c.radius);
    c.sigma_hvk = j.value("sigma_hvk", c.sigma_hvk);
    c.sigma_lvk = j.value("sigma_lvk", c.sigma_lvk);
    c.sigma_instance = j.value("sigma_instance", c.sigma_instance);
    c.sigma_igo = j.value("sigma_igo", c.sigma_igo);
    c.threshold = j.value("threshold", c.threshold);
    c.nms_radius = j.value("nms_radius", c.nms_radius);
    c.noise = j.value("noise", c.noise);
    c.mode = j.value("mode", c.mode);
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
    c.persons = j.value("persons", c.persons);
    c.canvas = j.value("canvas", c.canvas);
    c.occlude = j.value("occlude", c.occlude);
    c.pair = j.value("pair", c.pair);
    c.flag_small_below = j.value("flag_small_below", c.flag_small_below);
    return c;
}

std::pair<int, int> parse_canvas(const std::string& s) {
    const auto x = s.find('x');
    if (x == std::string::npos) throw std::invalid_argument("canvas must be HxW, e.g. 401x401");
    return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
}

std::pair<int, int> parse_pair(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("pair must be A,B");
    return {std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1))};
}

kdc::CentroidMode parse_mode(const std::string& s) {
    if (s == "static") return kdc::CentroidMode::kStatic;
    if (s == "dynamic") return kdc::CentroidMode::kDynamic;
    throw std::invalid_argument("mode must be 'static' or 'dynamic'");
}

void apply_workers(int workers) {
#ifdef _OPENMP
    if (workers > 0) omp_set_num_threads(workers);
#else
    (void)workers;
#endif
}

kdc::DecodeParams decode_params(const RunConfig& cfg) {
    kdc::DecodeParams p;
    p.radius = cfg.radius;
    p.sigma_hvk = cfg.sigma_hvk;
    p.sigma_lvk = cfg.sigma_lvk;
    p.threshold = cfg.threshold;
    p.nms_radius = cfg.nms_radius;
    p.sigma_instance = cfg.sigma_instance;
    p.sigma_igo = cfg.sigma_igo;
    p.mode = parse_mode(cfg.mode);
    return p;
}

// ---------------------------------------------------------------- commands

void cmd_gen(const RunConfig& cfg, const std::string& out_dir) {
    const auto [h, w] = parse_canvas(cfg.canvas);
    kdc::GenConfig gen_cfg;
    gen_cfg.small_area_threshold = cfg.flag_small_below;
    kdc::Scene scene = kdc::generate_scene(cfg.persons, h, w, cfg.seed, gen_cfg);
    scene.image_id = static_cast<int>(cfg.seed);

    double achieved = 0.0;
    if (cfg.occlude >= 0.0) {
        const auto [front, back] = parse_pair(cfg.pair);
        auto occ = kdc::occlude_scene(scene, front, back, cfg.occlude, cfg.seed);
        scene = std::move(occ.scene);
        achieved = occ.achieved_overlap;
    }

    fs::create_directories(out_dir);
    kdc::save_scene(out_dir + "/scene.json", scene);
    kdc::write_scene_ppm(out_dir + "/preview.ppm", scene);
    log_info("gen: wrote " + out_dir + "/scene.json persons=" + std::to_string(cfg.persons) +
             (cfg.occlude >= 0.0 ? " achieved_overlap=" + std::to_string(achieved) : ""));
}

void cmd_encode(const RunConfig& cfg, const std::string& scene_path, const std::string& out_dir) {
    const kdc::Scene scene = kdc::load_scene(scene_path);
    const auto fields =
        kdc::encode_scene(scene, cfg.radius, parse_mode(cfg.mode), cfg.sigma_instance);

    fs::create_directories(out_dir);
    kdc::write_kdcf(out_dir + "/heatmaps.kdcf", fields.heatmaps);
    kdc::write_kdcf(out_dir + "/keycentroid.kdcf", fields.keycentroid.displacement);
    kdc::write_kdcf(out_dir + "/kc_valid.kdcf", fields.keycentroid.valid);
    kdc::write_kdcf(out_dir + "/kc_response.kdcf", fields.keycentroid.response);

    // Offsets travel as a 3-channel tensor: vx, vy, foreground.
    kdc::DenseField offsets3(scene.height, scene.width, 3);
    for (int y = 0; y < scene.height; ++y) {
        for (int x = 0; x < scene.width; ++x) {
            offsets3.at(0, y, x) = fields.offsets.offsets.at(0, y, x);
            offsets3.at(1, y, x) = fields.offsets.offsets.at(1, y, x);
            offsets3.at(2, y, x) = fields.offsets.foreground.at(y, x) ? 1.0f : 0.0f;
        }
    }
    kdc::write_kdcf(out_dir + "/offsets.kdcf", offsets3);
    kdc::write_kdcf(out_dir + "/exclusion.kdcf", fields.exclusion);
    write_text(out_dir + "/centroids.json", kdc::centroids_to_json(fields.centroids));

    ordered_json meta{{"image_id", scene.image_id},
                      {"height", scene.height},
                      {"width", scene.width},
                      {"radius", cfg.radius},
                      {"mode", cfg.mode}};
    write_text(out_dir + "/meta.json", meta.dump(2) + "\n");
    log_info("encode: wrote tensors to " + out_dir);
}

void cmd_decode(const RunConfig& cfg, const std::string& in_dir, const std::string& out_dir) {
    kdc::DenseField heatmaps = kdc::read_kdcf(in_dir + "/heatmaps.kdcf");
    kdc::DenseField kc = kdc::read_kdcf(in_dir + "/keycentroid.kdcf");
    const kdc::DenseField offsets3 = kdc::read_kdcf(in_dir + "/offsets.kdcf");
    const auto meta = nlohmann::json::parse(read_text(in_dir + "/meta.json"));
    const int image_id = meta.value("image_id", 0);

    kdc::OffsetField offsets;
    offsets.offsets = kdc::DenseField(offsets3.height(), offsets3.width(), 2);
    offsets.foreground = kdc::Mask(offsets3.height(), offsets3.width());
    for (int y = 0; y < offsets3.height(); ++y) {
        for (int x = 0; x < offsets3.width(); ++x) {
            offsets.offsets.at(0, y, x) = offsets3.at(0, y, x);
            offsets.offsets.at(1, y, x) = offsets3.at(1, y, x);
            offsets.foreground.at(y, x) = offsets3.at(2, y, x) != 0.0f;
        }
    }

    // Noise simulates prediction error on every decoded tensor; the
    // foreground support itself stays intact.
    if (cfg.noise > 0.0) {
        kdc::Rng rng(cfg.seed);
        kdc::add_field_noise(heatmaps, cfg.noise, rng);
        kdc::add_field_noise(kc, cfg.noise, rng);
        kdc::add_field_noise(offsets.offsets, cfg.noise, rng);
    }

    kdc::MaskCentroidSet centroids;
    const kdc::DecodeParams params = decode_params(cfg);
    const kdc::MaskCentroidSet* centroid_ptr = nullptr;
    if (params.mode == kdc::CentroidMode::kStatic) {
        centroids = kdc::centroids_from_json(read_text(in_dir + "/centroids.json"));
        centroid_ptr = &centroids;
    }

    const auto t0 = std::chrono::steady_clock::now();
    const kdc::DecodeResult result =
        kdc::decode_fields(heatmaps, kc, offsets, centroid_ptr, params);
    const auto t1 = std::chrono::steady_clock::now();
    log_debug("decode_fields took " +
              std::to_string(std::chrono::duration<double, std::milli>(t1 - t0).count()) + " ms");

    fs::create_directories(out_dir);
    write_text(out_dir + "/poses.json", kdc::poses_to_json(result.poses, image_id));
    write_text(out_dir + "/masks.json", kdc::masks_to_json(result, image_id));
    write_text(out_dir + "/instances.json", kdc::instances_to_json(result, image_id));
    log_info("decode: " + std::to_string(result.poses.size()) + " poses, " +
             std::to_string(result.masks.size()) + " masks -> " + out_dir);
}

std::vector<std::string> collect_json_files(const std::string& path) {
    std::vector<std::string> files;
    if (fs::is_directory(path)) {
        for (const auto& entry : fs::recursive_directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().extension() == ".json") {
                files.push_back(entry.path().string());
            }
        }
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(path);
    }
    return files;
}

void cmd_eval(const std::string& gt_path, const std::string& poses_path,
              const std::string& masks_path, const std::string& out_path) {
    std::vector<kdc::GtImage> gts;
    for (const auto& f : collect_json_files(gt_path)) {
        if (f.find("scene") == std::string::npos && fs::is_directory(gt_path)) continue;
        gts.push_back(kdc::gt_from_scene(kdc::load_scene(f)));
    }

    const kdc::EvalConfig cfg = kdc::EvalConfig::coco_defaults();
    ordered_json metrics;
    auto summarize = [](const kdc::ApSummary& s) {
        return ordered_json{{"ap", s.ap},       {"ap50", s.ap50},         {"ap75", s.ap75},
                            {"ap_easy", s.ap_easy}, {"ap_medium", s.ap_medium}, {"ap_hard", s.ap_hard}};
    };

    if (!poses_path.empty()) {
        std::vector<kdc::KeypointDetection> dets;
        for (const auto& f : collect_json_files(poses_path)) {
            if (fs::is_directory(poses_path) && f.find("poses") == std::string::npos) continue;
            auto part = kdc::keypoint_detections_from_json(read_text(f));
            dets.insert(dets.end(), part.begin(), part.end());
        }
        metrics["keypoint"] = summarize(kdc::keypoint_ap(gts, dets, cfg));
    }
    if (!masks_path.empty()) {
        std::vector<kdc::MaskDetection> dets;
        for (const auto& f : collect_json_files(masks_path)) {
            if (fs::is_directory(masks_path) && f.find("masks") == std::string::npos) continue;
            auto part = kdc::mask_detections_from_json(read_text(f));
            dets.insert(dets.end(), part.begin(), part.end());
        }
        metrics["mask"] = summarize(kdc::mask_ap(gts, dets, cfg));
    }

    const std::string text = metrics.dump(2) + "\n";
    if (!out_path.empty()) write_text(out_path, text);
    std::cout << text;
}

double percentile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double idx = p * (v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(idx);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (idx - lo) * (v[hi] - v[lo]);
}

void cmd_bench(const RunConfig& cfg, int iters, int warmup, const std::string& out_path) {
    if (warmup < 1) throw std::invalid_argument("bench: warmup must be >= 1");
    const auto [h, w] = parse_canvas(cfg.canvas);
    const int persons = std::max(cfg.persons, 3);
    const kdc::Scene scene = kdc::generate_scene(persons, h, w, cfg.seed);
    const auto fields =
        kdc::encode_scene(scene, cfg.radius, parse_mode(cfg.mode), cfg.sigma_instance);
    const kdc::DecodeParams params = decode_params(cfg);
    const kdc::MaskCentroidSet* centroid_ptr =
        params.mode == kdc::CentroidMode::kStatic ? &fields.centroids : nullptr;

    auto time_ms = [](auto&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        return std::chrono::duration<double, std::milli>(t1 - t0).count();
    };

#ifdef _OPENMP
    const int max_threads = cfg.workers > 0 ? cfg.workers : omp_get_max_threads();
#else
    const int max_threads = 1;
#endif

    auto run_suite = [&](int threads) {
        apply_workers(threads);
        std::vector<double> pgo, decode;
        for (int i = 0; i < warmup + iters; ++i) {
            const double t_pgo = time_ms([&] {
                volatile float sink = kdc::pgo_smooth(fields.heatmaps, kdc::coco_skeleton(),
                                                      params.sigma_hvk, params.sigma_lvk)
                                          .at(0, 0, 0);
                (void)sink;
            });
            const double t_decode = time_ms([&] {
                const auto r = kdc::decode_fields(fields.heatmaps,
                                                  fields.keycentroid.displacement, fields.offsets,
                                                  centroid_ptr, params);
                volatile std::size_t sink = r.poses.size();
                (void)sink;
            });
            if (i >= warmup) {
                pgo.push_back(t_pgo);
                decode.push_back(t_decode);
            }
        }
        return std::pair{pgo, decode};
    };

    const auto [pgo_serial, decode_serial] = run_suite(1);
    const auto [pgo_parallel, decode_parallel] = run_suite(max_threads);
    apply_workers(cfg.workers);

    // The checksum pins the work: two runs with one seed must produce the
    // same value even though timings differ.
    const auto result = kdc::decode_fields(fields.heatmaps, fields.keycentroid.displacement,
                                           fields.offsets, centroid_ptr, params);
    double checksum = 0.0;
    for (const auto& pose : result.poses) {
        for (const auto& j : pose.joints) {
            if (j) checksum += j->pos.x + j->pos.y + j->confidence;
        }
    }
    for (const auto& mask : result.masks) checksum += static_cast<double>(mask.area());

    ordered_json out{
        {"config", config_to_json(cfg)},
        {"iters", iters},
        {"threads_parallel", max_threads},
        {"checksum", checksum},
        {"stages",
         ordered_json{
             {"pgo_smooth",
              ordered_json{{"serial_p50_ms", percentile(pgo_serial, 0.5)},
                           {"parallel_p50_ms", percentile(pgo_parallel, 0.5)},
                           {"speedup", percentile(pgo_serial, 0.5) /
                                           std::max(1e-9, percentile(pgo_parallel, 0.5))}}}}},
        {"decode",
         ordered_json{{"serial_p50_ms", percentile(decode_serial, 0.5)},
                      {"serial_p90_ms", percentile(decode_serial, 0.9)},
                      {"parallel_p50_ms", percentile(decode_parallel, 0.5)},
                      {"parallel_p90_ms", percentile(decode_parallel, 0.9)}}}};

    const std::string text = out.dump(2) + "\n";
    if (!out_path.empty()) write_text(out_path, text);
    std::cout << text;
}

void cmd_render(const std::string& in_path, const std::string& out_path, int channel) {
    if (in_path.size() > 5 && in_path.substr(in_path.size() - 5) == ".kdcf") {
        kdc::write_field_pgm(out_path, kdc::read_kdcf(in_path), channel);
    } else if (in_path.size() > 5 && in_path.substr(in_path.size() - 5) == ".json") {
        const auto root = nlohmann::json::parse(read_text(in_path));
        if (root.is_object() && root.contains("annotations")) {
            kdc::write_scene_ppm(out_path, kdc::load_scene(in_path));
        } else if (root.is_array()) {
            // Instance results: masks plus keypoints where present.
            std::vector<kdc::Mask> masks;
            std::vector<std::vector<kdc::SubPixel>> keypoints;
            int h = 0, w = 0;
            for (const auto& item : root) {
                if (item.contains("segmentation")) {
                    const auto& seg = item["segmentation"];
                    h = seg["size"][0].get<int>();
                    w = seg["size"][1].get<int>();
                    masks.push_back(kdc::rle_decode(
                        seg["counts"].get<std::vector<std::int64_t>>(), h, w));
                }
                if (item.contains("keypoints")) {
                    std::vector<kdc::SubPixel> kps;
                    const auto& arr = item["keypoints"];
                    for (std::size_t j = 0; j + 2 < arr.size(); j += 3) {
                        if (arr[j + 2].get<double>() > 0.0) {
                            kps.push_back({arr[j].get<double>(), arr[j + 1].get<double>()});
                        }
                    }
                    keypoints.push_back(std::move(kps));
                }
            }
            if (h == 0) throw std::invalid_argument("render: results carry no masks");
            kdc::write_overlay_ppm(out_path, h, w, masks, keypoints);
        } else {
            throw std::invalid_argument("render: unrecognized json input");
        }
    } else {
        throw std::invalid_argument("render: input must be .kdcf or .json");
    }
    log_info("render: wrote " + out_path);
}

RunConfig preload_config(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            return config_from_json(nlohmann::json::parse(read_text(argv[i + 1])));
        }
    }
    return RunConfig{};
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    try {
        cfg = preload_config(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "kdc: bad config: " << e.what() << "\n";
        return 2;
    }

    CLI::App app{"kdc: unified keypoint + instance segmentation pipeline over dense fields"};
    app.require_subcommand(1);
    std::string config_path, out_dir, scene_path, in_dir, gt_path, poses_path, masks_path;
    std::string out_path, in_path;
    int channel = 0, iters = 20, warmup = 2;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config with defaults for all flags");
        cmd->add_option("--seed", cfg.seed, "RNG seed");
        cmd->add_option("--workers", cfg.workers, "worker threads (0 = all cores)");
    };

    auto* gen = app.add_subcommand("gen", "generate a synthetic scene");
    add_common(gen);
    gen->add_option("--persons", cfg.persons, "number of persons");
    gen->add_option("--canvas", cfg.canvas, "canvas HxW");
    gen->add_option("--occlude", cfg.occlude, "target overlap fraction (enables occlusion)");
    gen->add_option("--pair", cfg.pair, "front,back instance ids for occlusion");
    gen->add_option("--flag-small-below", cfg.flag_small_below,
                    "mask area below which persons are flagged small");
    gen->add_option("--out", out_dir, "output directory")->required();

    auto* encode = app.add_subcommand("encode", "encode a scene into target tensors");
    add_common(encode);
    encode->add_option("--scene", scene_path, "scene json")->required();
    encode->add_option("--radius", cfg.radius, "keypoint disk radius");
    encode->add_option("--mode", cfg.mode, "static|dynamic centroids");
    encode->add_option("--sigma-instance", cfg.sigma_instance, "membership sigma");
    encode->add_option("--out", out_dir, "output directory")->required();

    auto* decode = app.add_subcommand("decode", "decode tensors into poses and masks");
    add_common(decode);
    decode->add_option("--in", in_dir, "directory with encoded tensors")->required();
    decode->add_option("--radius", cfg.radius, "keypoint disk radius");
    decode->add_option("--mode", cfg.mode, "static|dynamic centroids");
    decode->add_option("--noise", cfg.noise, "additive gaussian noise sigma");
    decode->add_option("--sigma-hvk", cfg.sigma_hvk, "PGO sigma, high-variance joints");
    decode->add_option("--sigma-lvk", cfg.sigma_lvk, "PGO sigma, low-variance joints");
    decode->add_option("--sigma-instance", cfg.sigma_instance, "membership sigma");
    decode->add_option("--sigma-igo", cfg.sigma_igo, "instance-wise smoothing sigma");
    decode->add_option("--threshold", cfg.threshold, "detection threshold");
    decode->add_option("--nms-radius", cfg.nms_radius, "candidate suppression radius");
    decode->add_option("--out", out_dir, "output directory")->required();

    auto* eval = app.add_subcommand("eval", "score results against ground truth");
    add_common(eval);
    eval->add_option("--gt", gt_path, "scene json or directory of scenes")->required();
    eval->add_option("--poses", poses_path, "keypoint results json or directory");
    eval->add_option("--masks", masks_path, "mask results json or directory");
    eval->add_option("--out", out_path, "metrics json output path");

    auto* bench = app.add_subcommand("bench", "time the decode stages");
    add_common(bench);
    bench->add_option("--iters", iters, "measured iterations");
    bench->add_option("--warmup", warmup, "warmup iterations (>= 1)");
    bench->add_option("--persons", cfg.persons, "persons in the benchmark scene");
    bench->add_option("--canvas", cfg.canvas, "canvas HxW");
    bench->add_option("--mode", cfg.mode, "static|dynamic centroids");
    bench->add_option("--radius", cfg.radius, "keypoint disk radius");
    bench->add_option("--out", out_path, "benchmark json output path");

    auto* render = app.add_subcommand("render", "render fields or results to images");
    add_common(render);
    render->add_option("--in", in_path, "kdcf tensor, scene json, or results json")->required();
    render->add_option("--channel", channel, "channel for kdcf inputs");
    render->add_option("--out", out_path, "output image (pgm for fields, ppm otherwise)")
        ->required();

    auto* config_cmd = app.add_subcommand("config", "write the effective config to a file");
    add_common(config_cmd);
    config_cmd->add_option("--out", out_path, "config json path")->required();

    try {
        app.parse(argc, argv);
        apply_workers(cfg.workers);
        if (gen->parsed()) cmd_gen(cfg, out_dir);
        if (encode->parsed()) cmd_encode(cfg, scene_path, out_dir);
        if (decode->parsed()) cmd_decode(cfg, in_dir, out_dir);
        if (eval->parsed()) {
            if (poses_path.empty() && masks_path.empty()) {
                throw std::invalid_argument("eval: need --poses and/or --masks");
            }
            cmd_eval(gt_path, poses_path, masks_path, out_path);
        }
        if (bench->parsed()) cmd_bench(cfg, iters, warmup, out_path);
        if (render->parsed()) cmd_render(in_path, out_path, channel);
        if (config_cmd->parsed()) write_text(out_path, config_to_json(cfg).dump(2) + "\n");
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const kdc::EvalError& e) {
        std::cerr << "kdc: evaluation error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "kdc: error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
