#include "vloc/pipe/config.hpp"

#include <json.hpp>

#include "vloc/core/binio.hpp"
#include "vloc/core/hash.hpp"

namespace vloc {

using nlohmann::json;

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Config Config::from_json_text(const std::string& text) {
    Config c;
    const json j = json::parse(text);
    maybe(j, "seed", c.seed);
    maybe(j, "threads", c.threads);
    if (j.contains("counts")) {
        const auto& k = j.at("counts");
        maybe(k, "hearts", c.n_hearts);
        maybe(k, "placements", c.placements_per_heart);
        maybe(k, "origins", c.origins_per_heart);
    }
    if (j.contains("split")) {
        const auto& k = j.at("split");
        maybe(k, "train", c.split_train);
        maybe(k, "val", c.split_val);
        maybe(k, "test", c.split_test);
    }
    if (j.contains("mesh")) {
        const auto& k = j.at("mesh");
        maybe(k, "resolution", c.mesh_resolution);
        maybe(k, "cavity_resolution", c.cavity_resolution);
        maybe(k, "cavity_erosion", c.cavity_erosion);
        maybe(k, "rv_wall", c.rv_wall);
        maybe(k, "coarse_triangles", c.coarse_triangles);
    }
    if (j.contains("conduction")) {
        const auto& k = j.at("conduction");
        maybe(k, "v_fiber", c.conduction.v_fiber);
        maybe(k, "anisotropy_ratio", c.conduction.anisotropy_ratio);
    }
    if (j.contains("augment")) {
        const auto& k = j.at("augment");
        maybe(k, "scale_lo", c.aug_scale_lo);
        maybe(k, "scale_hi", c.aug_scale_hi);
        maybe(k, "shift_lo", c.aug_shift_lo);
        maybe(k, "shift_hi", c.aug_shift_hi);
        maybe(k, "truncation_lo", c.truncation_lo);
        maybe(k, "truncation_hi", c.truncation_hi);
    }
    if (j.contains("noise")) {
        const auto& k = j.at("noise");
        maybe(k, "wgn_db", c.snr_wgn_db);
        maybe(k, "emg_db", c.snr_emg_db);
        maybe(k, "drift_db", c.snr_drift_db);
    }
    if (j.contains("filter")) {
        const auto& k = j.at("filter");
        maybe(k, "order", c.filter.order);
        maybe(k, "low_hz", c.filter.low_hz);
        maybe(k, "high_hz", c.filter.high_hz);
    }
    if (j.contains("net")) {
        const auto& k = j.at("net");
        maybe(k, "stem_channels", c.net.stem_channels);
        maybe(k, "stage_blocks", c.net.stage_blocks);
        maybe(k, "stage_width", c.net.stage_width);
        maybe(k, "cardinality", c.net.cardinality);
        maybe(k, "bottleneck_div", c.net.bottleneck_div);
        maybe(k, "fc_dim", c.net.fc_dim);
        maybe(k, "dropout", c.net.dropout);
        maybe(k, "use_norm", c.net.use_norm);
    }
    if (j.contains("train")) {
        const auto& k = j.at("train");
        maybe(k, "batch", c.train.batch);
        maybe(k, "max_epochs", c.train.max_epochs);
        maybe(k, "patience", c.train.patience);
        maybe(k, "lr_min", c.train.lr_min);
        maybe(k, "lr_max", c.train.lr_max);
        maybe(k, "cycle_epochs", c.train.cycle_epochs);
        maybe(k, "auto_lr", c.auto_lr);
    }
    if (j.contains("svd")) {
        const auto& k = j.at("svd");
        maybe(k, "rank", c.svd_rank);
        maybe(k, "axis", c.svd_axis);
    }
    if (c.svd_axis != "spatial" && c.svd_axis != "temporal")
        throw std::runtime_error("config: svd axis must be 'spatial' or 'temporal'");
    return c;
}

Config Config::load(const std::string& path) { return from_json_text(read_text_file(path)); }

std::string Config::to_json() const {
    json j;
    j["format_version"] = format_version;
    j["seed"] = seed;
    j["threads"] = threads;
    j["counts"] = {{"hearts", n_hearts}, {"placements", placements_per_heart}, {"origins", origins_per_heart}};
    j["split"] = {{"train", split_train}, {"val", split_val}, {"test", split_test}};
    j["mesh"] = {{"resolution", mesh_resolution},
                 {"cavity_resolution", cavity_resolution},
                 {"cavity_erosion", cavity_erosion},
                 {"rv_wall", rv_wall},
                 {"coarse_triangles", coarse_triangles}};
    j["conduction"] = {{"v_fiber", conduction.v_fiber}, {"anisotropy_ratio", conduction.anisotropy_ratio}};
    j["augment"] = {{"scale_lo", aug_scale_lo}, {"scale_hi", aug_scale_hi},
                    {"shift_lo", aug_shift_lo}, {"shift_hi", aug_shift_hi},
                    {"truncation_lo", truncation_lo}, {"truncation_hi", truncation_hi}};
    j["noise"] = {{"wgn_db", snr_wgn_db}, {"emg_db", snr_emg_db}, {"drift_db", snr_drift_db}};
    j["filter"] = {{"order", filter.order}, {"low_hz", filter.low_hz}, {"high_hz", filter.high_hz}};
    j["net"] = {{"stem_channels", net.stem_channels}, {"stage_blocks", net.stage_blocks},
                {"stage_width", net.stage_width},     {"cardinality", net.cardinality},
                {"bottleneck_div", net.bottleneck_div}, {"fc_dim", net.fc_dim},
                {"dropout", net.dropout},             {"use_norm", net.use_norm}};
    j["train"] = {{"batch", train.batch},   {"max_epochs", train.max_epochs},
                  {"patience", train.patience}, {"lr_min", train.lr_min},
                  {"lr_max", train.lr_max}, {"cycle_epochs", train.cycle_epochs},
                  {"auto_lr", auto_lr}};
    j["svd"] = {{"rank", svd_rank}, {"axis", svd_axis}};
    return j.dump(2);
}

uint64_t Config::content_hash() const {
    ContentHash h;
    h.update(to_json());
    return h.digest();
}

}  // namespace vloc
