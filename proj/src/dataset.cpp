#include "vloc/pipe/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "vloc/core/binio.hpp"
#include "vloc/core/hash.hpp"
#include "vloc/core/parallel.hpp"
#include "vloc/eik/tmv.hpp"
#include "vloc/heart/param_sampler.hpp"
#include "vloc/heart/placement.hpp"
#include "vloc/sig/bsp_image.hpp"
#include "vloc/mesh/sampling.hpp"
#include "vloc/sig/noise.hpp"

namespace vloc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kMaxWindow = 700;  // samples at 1 kHz; ScaleNet's padded window

json record_to_json(const SampleRecord& r) {
    return json{{"id", r.id},
                {"heart", r.heart},
                {"placement", r.placement},
                {"origin", {r.origin_point.x(), r.origin_point.y(), r.origin_point.z()}},
                {"origin_tri", r.origin_tri},
                {"origin_wall", static_cast<int>(r.origin_wall)},
                {"coords",
                 {{"v", r.coords.v},
                  {"m", r.coords.m},
                  {"a", r.coords.a},
                  {"rsin", r.coords.r_sin},
                  {"rcos", r.coords.r_cos}}},
                {"aug_scale", r.aug_scale},
                {"aug_shift", r.aug_shift},
                {"start_ms", r.start_ms},
                {"end_ms", r.end_ms},
                {"t_samples", r.t_samples},
                {"shard", r.shard},
                {"offset", r.offset}};
}

SampleRecord record_from_json(const json& j) {
    SampleRecord r;
    r.id = j.at("id");
    r.heart = j.at("heart");
    r.placement = j.at("placement");
    r.origin_point = Vec3(j.at("origin")[0], j.at("origin")[1], j.at("origin")[2]);
    r.origin_tri = j.at("origin_tri");
    r.origin_wall = static_cast<WallClass>(j.at("origin_wall").get<int>());
    const auto& c = j.at("coords");
    r.coords.v = c.at("v");
    r.coords.m = c.at("m");
    r.coords.a = c.at("a");
    r.coords.r_sin = c.at("rsin");
    r.coords.r_cos = c.at("rcos");
    r.aug_scale = j.at("aug_scale");
    r.aug_shift = j.at("aug_shift");
    r.start_ms = j.at("start_ms");
    r.end_ms = j.at("end_ms");
    r.t_samples = j.at("t_samples");
    r.shard = j.at("shard");
    r.offset = j.at("offset");
    return r;
}

std::string heart_base(const std::string& dir, int h, int p) {
    char buf[64];
    snprintf(buf, sizeof(buf), "hearts/h%03d_p%02d", h, p);
    return dir + "/" + buf;
}

std::string shard_path(const std::string& dir, int h) {
    char buf[64];
    snprintf(buf, sizeof(buf), "shards/images_h%03d.bin", h);
    return dir + "/" + buf;
}

std::string chunk_path(const std::string& dir, int h) {
    char buf[64];
    snprintf(buf, sizeof(buf), "chunks/chunk_h%03d.json", h);
    return dir + "/" + buf;
}

struct SimulatedSample {
    bool ok = false;
    std::string skip_reason;
    SampleRecord rec;
    Eigen::MatrixXf image;  // 224 x T
};

// One origin end-to-end: eikonal -> augment -> TMV -> forward -> noise ->
// filter -> normalize -> grid.
SimulatedSample simulate_sample(const Config& cfg, const HeartModel& heart,
                                const Eigen::MatrixXf& A, const std::vector<int>& source_verts,
                                const ElectrodeLayout& layout, const BaryPoint& origin,
                                uint64_t sample_key) {
    SimulatedSample out;
    Rng rng(cfg.seed, 0xa0c5 ^ sample_key);

    ATMap at = solve_eikonal(heart, cfg.conduction, origin);
    AugmentParams aug;
    aug.cv_scale = rng.uniform(cfg.aug_scale_lo, cfg.aug_scale_hi);
    aug.shift_ms = rng.uniform(cfg.aug_shift_lo, cfg.aug_shift_hi);
    augment_at(at, aug);

    const double start = at.min_at();
    const double end = at.max_at();
    double trunc = rng.uniform(cfg.truncation_lo, cfg.truncation_hi);
    int t_samples = static_cast<int>(std::ceil(end + trunc)) + 1;
    if (t_samples > kMaxWindow) {
        trunc = kMaxWindow - 1 - std::ceil(end);
        if (trunc < 0) {
            out.skip_reason = "activation exceeds the padded window";
            return out;
        }
        t_samples = kMaxWindow;
    }

    std::vector<double> at_surface(source_verts.size());
    for (size_t i = 0; i < source_verts.size(); ++i)
        at_surface[i] = at.at[static_cast<size_t>(source_verts[i])];
    const TMVMatrix tmv = synthesize_tmv(at_surface, cfg.ap, t_samples);
    BSPMatrix bsp = forward_bsp(A, tmv);

    NoiseSpec noise;
    noise.snr_wgn_db = cfg.snr_wgn_db;
    noise.snr_emg_db = cfg.snr_emg_db;
    noise.snr_drift_db = cfg.snr_drift_db;
    noise.window_start_ms = std::max(0, static_cast<int>(std::floor(start)));
    noise.window_end_ms = std::min(t_samples, static_cast<int>(std::ceil(end)));
    noise.seed = Rng::mix(cfg.seed ^ sample_key);
    bsp = add_noise(bsp, noise);
    bsp = bandpass(bsp, cfg.filter);
    bsp = normalize_maxabs(bsp);
    const BSPImage img = arrange_grid(bsp, layout);

    out.rec.origin_point = origin.point(heart.surf.mesh);
    out.rec.origin_tri = origin.tri;
    out.rec.origin_wall = heart.surf_tri_wall[static_cast<size_t>(origin.tri)];
    out.rec.coords = encode_origin_coords(heart.surf, origin);
    out.rec.aug_scale = aug.cv_scale;
    out.rec.aug_shift = aug.shift_ms;
    out.rec.start_ms = start;
    out.rec.end_ms = end;
    out.rec.t_samples = t_samples;
    out.image = img.values;
    out.ok = true;
    return out;
}

}  // namespace

std::vector<int> split_by_heart(int n_hearts, double f_train, double f_val, double f_test,
                                uint64_t seed) {
    if (std::abs(f_train + f_val + f_test - 1.0) > 1e-9)
        throw std::runtime_error("split: fractions must sum to 1");
    if (n_hearts < 3) throw std::runtime_error("split: fewer hearts than splits");
    std::vector<int> ids(static_cast<size_t>(n_hearts));
    for (int i = 0; i < n_hearts; ++i) ids[static_cast<size_t>(i)] = i;
    Rng rng(seed, 0x5b11);
    for (int i = n_hearts - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(i) + 1));
        std::swap(ids[static_cast<size_t>(i)], ids[static_cast<size_t>(j)]);
    }
    const int n_train = static_cast<int>(std::lround(f_train * n_hearts));
    const int n_val = static_cast<int>(std::floor(f_val * n_hearts));
    std::vector<int> split(static_cast<size_t>(n_hearts), 2);
    for (int i = 0; i < n_train; ++i) split[static_cast<size_t>(ids[static_cast<size_t>(i)])] = 0;
    for (int i = n_train; i < n_train + n_val && i < n_hearts; ++i)
        split[static_cast<size_t>(ids[static_cast<size_t>(i)])] = 1;
    return split;
}

std::vector<int> DatasetManifest::sample_ids_of_split(int which) const {
    std::vector<int> out;
    for (const auto& s : samples)
        if (split[static_cast<size_t>(s.heart)] == which) out.push_back(s.id);
    return out;
}

void generate_dataset(const Config& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/hearts");
    fs::create_directories(out_dir + "/shards");
    fs::create_directories(out_dir + "/chunks");
    fs::create_directories(out_dir + "/cache");
    write_text_file(out_dir + "/config.json", cfg.to_json());

    const TorsoModel torso = make_reference_torso();
    const ElectrodeLayout layout = build_electrode_layout(torso);
    {
        const CoarseMesh coarse = build_coarse_mesh(ShapeParams::mean(), cfg.rv_wall, cfg.coarse_triangles);
        save_coarse_mesh(coarse, out_dir + "/coarse");
        HeartGenOptions mean_opt;
        mean_opt.resolution = cfg.mesh_resolution;
        mean_opt.cavity_resolution = cfg.cavity_resolution;
        mean_opt.cavity_erosion = cfg.cavity_erosion;
        mean_opt.rv_wall = cfg.rv_wall;
        HeartModel mean_heart = generate_heart(ShapeParams::mean(), mean_opt);
        assign_fibers(mean_heart, FiberSpec{});
        save_heart(mean_heart, out_dir + "/mean_heart");
    }

    const auto plan = sample_model_batch(cfg.n_hearts, cfg.placements_per_heart, cfg.seed);

    for (const auto& task : plan) {
        const int h = task.heart_index, p = task.placement_index;
        const std::string chunk = chunk_path(out_dir, h * cfg.placements_per_heart + p);
        if (fs::exists(chunk)) continue;  // resume

        // Shape or placement draws can be degenerate (self-intersections,
        // hearts outside the torso, sliver blood surfaces that break the
        // BEM); resample the shape deterministically until the whole
        // heart-level setup succeeds.
        HeartModel heart;
        std::vector<int> source_verts;
        Eigen::MatrixXf A;
        {
            HeartGenOptions opt;
            opt.resolution = cfg.mesh_resolution;
            opt.cavity_resolution = cfg.cavity_resolution;
            opt.cavity_erosion = cfg.cavity_erosion;
            opt.rv_wall = cfg.rv_wall;
            ShapeParams shape = task.shape;
            Rng resample(cfg.seed, 0x7e5a + static_cast<uint64_t>(h));
            bool ready = false;
            for (int attempt = 0; attempt < 10 && !ready; ++attempt) {
                try {
                    heart = generate_heart(shape, opt);
                    assign_fibers(heart, task.fibers);
                    place_heart_baseline(heart, torso);
                    place_heart(heart, torso, task.placement);

                    // Transfer matrix (cached by content).
                    const TriMesh source_surf = heart.tet.surface(std::nullopt);
                    source_verts.clear();
                    heart.tet.surface(std::nullopt, &source_verts);
                    ContentHash key;
                    for (const auto& v : heart.tet.vertices) {
                        key.update_pod(v.x());
                        key.update_pod(v.y());
                        key.update_pod(v.z());
                    }
                    key.update_pod(cfg.sigma_torso).update_pod(cfg.sigma_blood).update_pod(cfg.sigma_intra);
                    key.update_pod(torso.surface.vertices.size());
                    const std::string cache_base = out_dir + "/cache/transfer_" + key.hex();
                    if (fs::exists(cache_base + ".json")) {
                        const json meta = json::parse(read_text_file(cache_base + ".json"));
                        const int rows = meta.at("rows"), cols = meta.at("cols");
                        std::ifstream bin(cache_base + ".bin", std::ios::binary);
                        const auto flat = read_array<float>(bin, static_cast<size_t>(rows) * cols);
                        A = Eigen::Map<const Eigen::MatrixXf>(flat.data(), rows, cols);
                    } else {
                        std::vector<Compartment> comps(3);
                        comps[0].surface = torso.surface;
                        comps[0].sigma_inside = cfg.sigma_torso;
                        comps[0].sigma_outside = 0.0;
                        comps[1].surface = heart.lv_blood;
                        comps[1].sigma_inside = cfg.sigma_blood;
                        comps[1].sigma_outside = cfg.sigma_torso;
                        comps[2].surface = heart.rv_blood;
                        comps[2].sigma_inside = cfg.sigma_blood;
                        comps[2].sigma_outside = cfg.sigma_torso;
                        BemSolver bem(std::move(comps));
                        bem.factorize();
                        const Eigen::MatrixXd B = bem.source_matrix(source_surf, cfg.sigma_intra);
                        A = bem.transfer(layout.bary, B).cast<float>();
                        json meta;
                        meta["rows"] = A.rows();
                        meta["cols"] = A.cols();
                        write_text_file(cache_base + ".json", meta.dump());
                        std::ofstream bin(cache_base + ".bin", std::ios::binary);
                        std::vector<float> flat(static_cast<size_t>(A.size()));
                        Eigen::Map<Eigen::MatrixXf>(flat.data(), A.rows(), A.cols()) = A;
                        write_array(bin, flat);
                    }
                    ready = true;
                } catch (const std::exception& e) {
                    fprintf(stderr, "  heart %d attempt %d rejected: %s\n", h, attempt, e.what());
                    for (auto& w : shape.weights) w = resample.uniform(-3.0, 3.0);
                }
            }
            if (!ready) throw std::runtime_error("generate_dataset: heart resampling exhausted");
        }
        save_heart(heart, heart_base(out_dir, h, p));

        const auto origins = sample_surface_uniform(
            heart.surf.mesh, cfg.origins_per_heart,
            Rng::mix(cfg.seed ^ (0x07191 + static_cast<uint64_t>(h) * 131 + p)));

        std::vector<SimulatedSample> results(origins.size());
        parallel_for(origins.size(), cfg.threads, [&](size_t oi) {
            const uint64_t key = (static_cast<uint64_t>(h) << 24) ^ (static_cast<uint64_t>(p) << 16) ^ oi;
            results[oi] = simulate_sample(cfg, heart, A, source_verts, layout, origins[oi], key);
        });

        // Sequential write keeps shards byte-identical across runs.
        json chunk_json;
        chunk_json["heart"] = h;
        chunk_json["placement"] = p;
        chunk_json["samples"] = json::array();
        int n_skipped = 0;
        uint64_t offset = 0;
        std::ofstream shard(shard_path(out_dir, h * cfg.placements_per_heart + p), std::ios::binary);
        if (!shard) throw std::runtime_error("generate_dataset: cannot write shard");
        for (size_t oi = 0; oi < results.size(); ++oi) {
            auto& r = results[oi];
            if (!r.ok) {
                ++n_skipped;
                continue;
            }
            r.rec.heart = h;
            r.rec.placement = p;
            r.rec.shard = h * cfg.placements_per_heart + p;
            r.rec.offset = offset;
            std::vector<float> flat(static_cast<size_t>(r.image.size()));
            Eigen::Map<Eigen::MatrixXf>(flat.data(), r.image.rows(), r.image.cols()) = r.image;
            write_array(shard, flat);
            offset += flat.size();
            chunk_json["samples"].push_back(record_to_json(r.rec));
        }
        chunk_json["skipped"] = n_skipped;
        write_text_file(chunk, chunk_json.dump());
    }

    // Merge chunks into the manifest (ids assigned in deterministic order).
    json manifest;
    manifest["format_version"] = 1;
    char hash_hex[32];
    snprintf(hash_hex, sizeof(hash_hex), "%016llx",
             static_cast<unsigned long long>(cfg.content_hash()));
    manifest["config_hash"] = hash_hex;
    manifest["n_hearts"] = cfg.n_hearts;
    manifest["placements_per_heart"] = cfg.placements_per_heart;
    manifest["samples"] = json::array();
    manifest["skipped_per_heart"] = json::array();
    int id = 0;
    long total = 0, skipped = 0;
    for (int h = 0; h < cfg.n_hearts; ++h) {
        for (int p = 0; p < cfg.placements_per_heart; ++p) {
            const json chunk = json::parse(read_text_file(chunk_path(out_dir, h * cfg.placements_per_heart + p)));
            for (const auto& js : chunk.at("samples")) {
                json rec = js;
                rec["id"] = id++;
                manifest["samples"].push_back(rec);
            }
            const int sk = chunk.at("skipped");
            manifest["skipped_per_heart"].push_back(sk);
            skipped += sk;
            total += sk + static_cast<long>(chunk.at("samples").size());
        }
    }
    if (skipped * 100 > total) throw std::runtime_error("generate_dataset: more than 1% samples failed");
    manifest["split"] = split_by_heart(cfg.n_hearts, cfg.split_train, cfg.split_val, cfg.split_test, cfg.seed);
    write_text_file(out_dir + "/manifest.json", manifest.dump(1));
}

DatasetManifest load_manifest(const std::string& dir) {
    const json j = json::parse(read_text_file(dir + "/manifest.json"));
    DatasetManifest man;
    man.format_version = j.at("format_version");
    man.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
    man.n_hearts = j.at("n_hearts");
    for (const auto& js : j.at("samples")) man.samples.push_back(record_from_json(js));
    man.split = j.at("split").get<std::vector<int>>();
    man.skipped_per_heart = j.at("skipped_per_heart").get<std::vector<int>>();
    return man;
}

void save_split(const std::string& dir, const std::vector<int>& split) {
    json j = json::parse(read_text_file(dir + "/manifest.json"));
    j["split"] = split;
    write_text_file(dir + "/manifest.json", j.dump(1));
}

BSPImage load_sample_image(const std::string& dir, const SampleRecord& rec) {
    std::ifstream bin(shard_path(dir, rec.shard), std::ios::binary);
    if (!bin) throw std::runtime_error("dataset: cannot open shard");
    bin.seekg(static_cast<std::streamoff>(rec.offset * sizeof(float)));
    const auto flat = read_array<float>(bin, static_cast<size_t>(224) * rec.t_samples);
    BSPImage img;
    img.values = Eigen::Map<const Eigen::MatrixXf>(flat.data(), 224, rec.t_samples);
    img.filtered = true;
    img.normalized = true;
    return img;
}

const HeartModel& HeartCache::heart(int id, int placement) {
    const auto key = std::make_pair(id, placement);
    auto it = hearts_.find(key);
    if (it == hearts_.end())
        it = hearts_.emplace(key, load_heart(heart_base(dir_, id, placement))).first;
    return it->second;
}

const GeodesicSolver& HeartCache::geodesic(int id, int placement) {
    const auto key = std::make_pair(id, placement);
    auto it = solvers_.find(key);
    if (it == solvers_.end())
        it = solvers_.emplace(key, std::make_unique<GeodesicSolver>(heart(id, placement).tet)).first;
    return *it->second;
}

nn::SampleSet build_scalenet_set(const std::string& dir, const DatasetManifest& man,
                                 const std::vector<int>& sample_ids, int threads) {
    nn::SampleSet set;
    set.n = static_cast<int>(sample_ids.size());
    set.rows = 224;
    set.cols = 350;
    set.label_dim = 2;
    set.images.resize(static_cast<size_t>(set.n) * 224 * 350);
    set.labels.resize(static_cast<size_t>(set.n) * 2);
    parallel_for(sample_ids.size(), threads, [&](size_t i) {
        const SampleRecord& rec = man.samples[static_cast<size_t>(sample_ids[i])];
        const BSPImage img = load_sample_image(dir, rec);
        const BSPImage padded = pad_resample_scalenet(img);
        Eigen::Map<Eigen::MatrixXf>(set.images.data() + i * 224 * 350, 224, 350) = padded.values;
        set.labels[2 * i] = static_cast<float>(rec.start_ms / kMaxWindow);
        set.labels[2 * i + 1] = static_cast<float>(rec.end_ms / kMaxWindow);
    });
    return set;
}

nn::SampleSet build_localizer_set(const std::string& dir, const DatasetManifest& man,
                                  const std::vector<int>& sample_ids,
                                  const nn::Network<float>& scalenet, nn::LossKind kind,
                                  const CoarseMesh& coarse, const SvdBasis* svd, int threads) {
    nn::SampleSet set;
    set.n = static_cast<int>(sample_ids.size());
    set.rows = 224;
    set.cols = 125;
    set.label_dim = kind == nn::LossKind::RegNet ? 5 : coarse.n_classes();
    set.images.resize(static_cast<size_t>(set.n) * 224 * 125);
    set.labels.resize(static_cast<size_t>(set.n) * set.label_dim);

    parallel_for(sample_ids.size(), threads, [&](size_t i) {
        const SampleRecord& rec = man.samples[static_cast<size_t>(sample_ids[i])];
        const BSPImage img = load_sample_image(dir, rec);
        const BSPImage padded = pad_resample_scalenet(img);

        nn::Tensor4<float> pred;
        nn::predict_batch(scalenet, padded.values.data(), 1, 1, pred, 1);
        const double start = std::clamp(static_cast<double>(pred.v[0]) * kMaxWindow, 0.0,
                                        static_cast<double>(rec.t_samples - 2));
        const double end = std::clamp(static_cast<double>(pred.v[1]) * kMaxWindow, start + 2.0,
                                      static_cast<double>(rec.t_samples));
        BSPImage crop = crop_resample_localizer(img, start, end);
        if (svd) crop = svd_filter(crop, *svd);
        Eigen::Map<Eigen::MatrixXf>(set.images.data() + i * 224 * 125, 224, 125) = crop.values;

        float* label = set.labels.data() + i * set.label_dim;
        if (kind == nn::LossKind::RegNet) {
            label[0] = static_cast<float>(rec.coords.a);
            label[1] = static_cast<float>(rec.coords.r_sin);
            label[2] = static_cast<float>(rec.coords.r_cos);
            label[3] = static_cast<float>(rec.coords.m);
            label[4] = static_cast<float>(rec.coords.v);
        } else {
            const ClassWeights w = encode_fuzzy_coords(rec.coords, coarse);
            for (int c = 0; c < w.size(); ++c) label[c] = w[c];
        }
    });
    return set;
}

}  // namespace vloc
