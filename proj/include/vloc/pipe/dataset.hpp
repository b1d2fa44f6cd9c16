#pragma once

#include <map>
#include <optional>

#include "vloc/labels/fuzzy_codec.hpp"
#include "vloc/nn/train.hpp"
#include "vloc/pipe/config.hpp"
#include "vloc/sig/svd_filter.hpp"

namespace vloc {

struct SampleRecord {
    int id = 0, heart = 0, placement = 0;
    Vec3 origin_point;
    int origin_tri = -1;
    WallClass origin_wall = WallClass::Epi;
    VentCoord coords;
    double aug_scale = 1.0, aug_shift = 0.0;
    double start_ms = 0.0, end_ms = 0.0;
    int t_samples = 0;
    int shard = 0;        // per-heart shard index
    uint64_t offset = 0;  // float offset within the shard
};

struct DatasetManifest {
    int format_version = 1;
    uint64_t config_hash = 0;
    int n_hearts = 0;
    std::vector<SampleRecord> samples;
    std::vector<int> split = {};  // per heart: 0 train, 1 val, 2 test
    std::vector<int> skipped_per_heart;

    std::vector<int> sample_ids_of_split(int which) const;
};

// Full synthesis chain: hearts -> activation -> forward -> processed grid
// images, written as manifest.json + per-heart float32 shards + heart models.
// Resumable at heart granularity; deterministic for a given config.
void generate_dataset(const Config& cfg, const std::string& out_dir);

// Hearts shuffled by seed, then partitioned so every sample of a heart
// shares its split. Counts follow round(train), floor(val), rest.
std::vector<int> split_by_heart(int n_hearts, double f_train, double f_val, double f_test,
                                uint64_t seed);

DatasetManifest load_manifest(const std::string& dir);
void save_split(const std::string& dir, const std::vector<int>& split);

BSPImage load_sample_image(const std::string& dir, const SampleRecord& rec);

// Heart models (with geodesic solvers) cached per heart id.
class HeartCache {
  public:
    explicit HeartCache(std::string dir) : dir_(std::move(dir)) {}
    const HeartModel& heart(int id, int placement);
    const GeodesicSolver& geodesic(int id, int placement);

  private:
    std::string dir_;
    std::map<std::pair<int, int>, HeartModel> hearts_;
    std::map<std::pair<int, int>, std::unique_ptr<GeodesicSolver>> solvers_;
};

// ScaleNet training set: padded/decimated images with normalized boundary
// labels (ms / 700).
nn::SampleSet build_scalenet_set(const std::string& dir, const DatasetManifest& man,
                                 const std::vector<int>& sample_ids, int threads);

// Localizer sets: images cropped with ScaleNet's predicted boundaries and
// resampled to 125 samples; optional SVD filtering. Labels are either the
// 5-component coordinates (RegNet) or fuzzy class weights (ClassNet).
nn::SampleSet build_localizer_set(const std::string& dir, const DatasetManifest& man,
                                  const std::vector<int>& sample_ids,
                                  const nn::Network<float>& scalenet, nn::LossKind kind,
                                  const CoarseMesh& coarse, const SvdBasis* svd, int threads);

}  // namespace vloc
