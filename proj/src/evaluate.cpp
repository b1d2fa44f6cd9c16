#include "vloc/pipe/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "vloc/core/parallel.hpp"
#include "vloc/mesh/sampling.hpp"
#include "vloc/sig/bsp_image.hpp"

namespace vloc {

using nlohmann::json;

double median_of(std::vector<double> v) {
    if (v.empty()) throw std::runtime_error("median of empty vector");
    const size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + static_cast<long>(mid) - 1, v.end());
        m = 0.5 * (m + v[mid - 1]);
    }
    return m;
}

std::pair<double, double> quartiles_of(std::vector<double> v) {
    if (v.empty()) throw std::runtime_error("quartiles of empty vector");
    std::sort(v.begin(), v.end());
    auto at = [&](double q) {
        const double pos = q * (static_cast<double>(v.size()) - 1);
        const size_t lo = static_cast<size_t>(pos);
        const size_t hi = std::min(lo + 1, v.size() - 1);
        const double w = pos - static_cast<double>(lo);
        return (1.0 - w) * v[lo] + w * v[hi];
    };
    return {at(0.25), at(0.75)};
}

std::string MetricsReport::to_json() const {
    json j;
    j["method"] = method;
    j["n"] = n;
    j["median_mm"] = median_mm;
    j["iqr_mm"] = iqr_mm;
    j["rate_m"] = rate_m;
    j["rate_v"] = rate_v;
    if (!topk_median_mm.empty()) {
        j["topk_median_mm"] = topk_median_mm;
        j["topk_iqr_mm"] = topk_iqr_mm;
    }
    return j.dump(2);
}

void EvalContext::check_split_integrity() const {
    std::set<int> train, val, test;
    for (size_t h = 0; h < man.split.size(); ++h) {
        switch (man.split[h]) {
            case 0: train.insert(static_cast<int>(h)); break;
            case 1: val.insert(static_cast<int>(h)); break;
            case 2: test.insert(static_cast<int>(h)); break;
            default: throw std::runtime_error("split: unknown assignment");
        }
    }
    for (int h : train)
        if (val.count(h) || test.count(h)) throw std::runtime_error("split leakage");
    if (train.empty() || val.empty() || test.empty())
        throw std::runtime_error("split: empty partition");
}

namespace {

constexpr int kMaxWindow = 700;

struct CropBundle {
    std::vector<int> ids;
    std::vector<float> crops;           // n x 224 x 125
    std::vector<double> start, end;     // predicted boundaries, ms
};

CropBundle prepare_crops(EvalContext& ctx, const nn::Network<float>& scalenet, int split,
                         const SvdBasis* svd, int threads) {
    CropBundle out;
    out.ids = ctx.man.sample_ids_of_split(split);
    const size_t n = out.ids.size();
    out.crops.resize(n * 224 * 125);
    out.start.resize(n);
    out.end.resize(n);
    parallel_for(n, threads, [&](size_t i) {
        const SampleRecord& rec = ctx.man.samples[static_cast<size_t>(out.ids[i])];
        const BSPImage img = load_sample_image(ctx.dir, rec);
        const BSPImage padded = pad_resample_scalenet(img);
        nn::Tensor4<float> pred;
        nn::predict_batch(scalenet, padded.values.data(), 1, 1, pred, 1);
        const double start = std::clamp(static_cast<double>(pred.v[0]) * kMaxWindow, 0.0,
                                        static_cast<double>(rec.t_samples - 2));
        const double end = std::clamp(static_cast<double>(pred.v[1]) * kMaxWindow, start + 2.0,
                                      static_cast<double>(rec.t_samples));
        out.start[i] = start;
        out.end[i] = end;
        BSPImage crop = crop_resample_localizer(img, start, end);
        if (svd) crop = svd_filter(crop, *svd);
        Eigen::Map<Eigen::MatrixXf>(out.crops.data() + i * 224 * 125, 224, 125) = crop.values;
    });
    return out;
}

}  // namespace

ScaleNetEval run_scalenet_eval(EvalContext& ctx, const nn::Network<float>& scalenet, int split,
                               int threads) {
    const auto ids = ctx.man.sample_ids_of_split(split);
    std::vector<double> err_start(ids.size()), err_end(ids.size());
    parallel_for(ids.size(), threads, [&](size_t i) {
        const SampleRecord& rec = ctx.man.samples[static_cast<size_t>(ids[i])];
        const BSPImage padded = pad_resample_scalenet(load_sample_image(ctx.dir, rec));
        nn::Tensor4<float> pred;
        nn::predict_batch(scalenet, padded.values.data(), 1, 1, pred, 1);
        err_start[i] = std::abs(static_cast<double>(pred.v[0]) * kMaxWindow - rec.start_ms);
        err_end[i] = std::abs(static_cast<double>(pred.v[1]) * kMaxWindow - rec.end_ms);
    });
    ScaleNetEval out;
    out.n = static_cast<int>(ids.size());
    out.start_median_ms = median_of(err_start);
    out.end_median_ms = median_of(err_end);
    const auto qs = quartiles_of(err_start);
    const auto qe = quartiles_of(err_end);
    out.start_iqr_ms = qs.second - qs.first;
    out.end_iqr_ms = qe.second - qe.first;
    return out;
}

MetricsReport run_localizer_eval(EvalContext& ctx, const nn::Network<float>& scalenet,
                                 const nn::Network<float>& localizer, LocalizerMethod method,
                                 const SvdBasis* svd, int split, int threads) {
    ctx.check_split_integrity();
    const CropBundle bundle = prepare_crops(ctx, scalenet, split, svd, threads);
    const size_t n = bundle.ids.size();

    nn::Tensor4<float> preds;
    nn::predict_batch(localizer, bundle.crops.data(), static_cast<int>(n), 16, preds, threads);

    // Pre-touch heart/solver caches single-threaded (the map is shared).
    for (size_t i = 0; i < n; ++i) {
        const SampleRecord& rec = ctx.man.samples[static_cast<size_t>(bundle.ids[i])];
        ctx.hearts.geodesic(rec.heart, rec.placement);
    }

    std::vector<double> geo1(n), geo2(n), geo3(n);
    std::vector<char> ok_m(n), ok_v(n);
    parallel_for(n, threads, [&](size_t i) {
        const SampleRecord& rec = ctx.man.samples[static_cast<size_t>(bundle.ids[i])];
        const HeartModel& heart = ctx.hearts.heart(rec.heart, rec.placement);
        const GeodesicSolver& geo = ctx.hearts.geodesic(rec.heart, rec.placement);
        const float* y = preds.sample(static_cast<int>(i));

        if (method == LocalizerMethod::Regression) {
            VentCoord c;
            c.a = std::clamp<double>(y[0], 0.0, 1.0);
            const double norm = std::sqrt(static_cast<double>(y[1]) * y[1] + static_cast<double>(y[2]) * y[2]);
            c.r_sin = norm > 1e-6 ? y[1] / norm : 0.0;
            c.r_cos = norm > 1e-6 ? y[2] / norm : 1.0;
            c.m = y[3] > 0.0f ? 1.0 : 0.0;  // logits, threshold at sigmoid 0.5
            c.v = y[4] > 0.0f ? 1.0 : 0.0;
            const SurfacePoint sp = coords_to_point(c, heart.surf);
            const int tv = heart.tet.nearest_vertex(rec.origin_point);
            const auto dist = geo.distances_from(tv);
            const int sv = heart.tet.nearest_vertex(sp.point);
            geo1[i] = geo2[i] = geo3[i] = dist[static_cast<size_t>(sv)];
            ok_m[i] = c.m == rec.coords.m;
            ok_v[i] = c.v == rec.coords.v;
        } else {
            ClassWeights w(ctx.coarse.n_classes());
            // softmax of the logits
            float zmax = y[0];
            for (int k = 1; k < ctx.coarse.n_classes(); ++k) zmax = std::max(zmax, y[k]);
            double denom = 0;
            for (int k = 0; k < ctx.coarse.n_classes(); ++k) {
                w[k] = std::exp(y[k] - zmax);
                denom += w[k];
            }
            w /= static_cast<float>(denom);
            const auto sols = decode_fuzzy(w, ctx.coarse, 3);
            geo1[i] = topk_geodesic_error(sols, rec.origin_point, heart, geo, 1);
            geo2[i] = topk_geodesic_error(sols, rec.origin_point, heart, geo, 2);
            geo3[i] = topk_geodesic_error(sols, rec.origin_point, heart, geo, 3);
            ok_m[i] = sols[0].coords.m == rec.coords.m;
            ok_v[i] = sols[0].coords.v == rec.coords.v;
        }
    });

    MetricsReport rep;
    rep.method = method == LocalizerMethod::Regression ? "regnet" : "classnet";
    if (svd) rep.method += "+svd";
    rep.n = static_cast<int>(n);
    rep.median_mm = median_of(geo1);
    const auto q = quartiles_of(geo1);
    rep.iqr_mm = q.second - q.first;
    double sm = 0, sv = 0;
    for (size_t i = 0; i < n; ++i) {
        sm += ok_m[i];
        sv += ok_v[i];
    }
    rep.rate_m = sm / static_cast<double>(n);
    rep.rate_v = sv / static_cast<double>(n);
    if (method == LocalizerMethod::Classification) {
        for (const auto* g : {&geo1, &geo2, &geo3}) {
            rep.topk_median_mm.push_back(median_of(*g));
            const auto qq = quartiles_of(*g);
            rep.topk_iqr_mm.push_back(qq.second - qq.first);
        }
    }
    return rep;
}

MetricsReport random_baseline(EvalContext& ctx, uint64_t seed, int split) {
    const auto ids = ctx.man.sample_ids_of_split(split);
    const size_t n = ids.size();
    for (size_t i = 0; i < n; ++i) {
        const SampleRecord& rec = ctx.man.samples[static_cast<size_t>(ids[i])];
        ctx.hearts.geodesic(rec.heart, rec.placement);
    }
    std::vector<double> geo(n);
    std::vector<char> ok_m(n), ok_v(n);
    for (size_t i = 0; i < n; ++i) {
        const SampleRecord& rec = ctx.man.samples[static_cast<size_t>(ids[i])];
        const HeartModel& heart = ctx.hearts.heart(rec.heart, rec.placement);
        const GeodesicSolver& gs = ctx.hearts.geodesic(rec.heart, rec.placement);
        const auto pick = sample_surface_uniform(heart.surf.mesh, 1, Rng::mix(seed ^ (i * 977)))[0];
        const Vec3 guess = pick.point(heart.surf.mesh);
        geo[i] = gs.distance(rec.origin_point, guess);
        const VentCoord c = encode_origin_coords(heart.surf, pick);
        ok_m[i] = c.m == rec.coords.m;
        ok_v[i] = c.v == rec.coords.v;
    }
    MetricsReport rep;
    rep.method = "random-baseline";
    rep.n = static_cast<int>(n);
    rep.median_mm = median_of(geo);
    const auto q = quartiles_of(geo);
    rep.iqr_mm = q.second - q.first;
    double sm = 0, sv = 0;
    for (size_t i = 0; i < n; ++i) {
        sm += ok_m[i];
        sv += ok_v[i];
    }
    rep.rate_m = sm / static_cast<double>(n);
    rep.rate_v = sv / static_cast<double>(n);
    return rep;
}

}  // namespace vloc
