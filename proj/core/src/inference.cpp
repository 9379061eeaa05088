#include "nsf/inference.hpp"

#include <algorithm>
#include <cmath>

#include "nsf/resample.hpp"

namespace nsf {

namespace {

double percentile_of(std::vector<float>& values, double q)
{
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
    const double a = values[lo];
    if (lo + 1 >= values.size() || pos == static_cast<double>(lo))
        return a;
    const double b = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
    return a + (pos - static_cast<double>(lo)) * (b - a);
}

template <typename T>
Volume<T> crop(const Volume<T>& vol, const Dims& start, const Dims& size)
{
    Geometry g{size, vol.affine()};
    g.affine.set_translation(vol.affine().apply(
        {static_cast<double>(start[0]), static_cast<double>(start[1]), static_cast<double>(start[2])}));
    Volume<T> out(g);
    for (std::int64_t k = 0; k < size[2]; ++k)
        for (std::int64_t j = 0; j < size[1]; ++j)
            for (std::int64_t i = 0; i < size[0]; ++i)
                out(i, j, k) = vol(start[0] + i, start[1] + j, start[2] + k);
    return out;
}

std::vector<std::int64_t> tile_starts(std::int64_t n, std::int64_t tile, std::int64_t stride)
{
    std::vector<std::int64_t> starts;
    std::int64_t s = 0;
    while (true) {
        starts.push_back(s);
        if (s + tile >= n)
            break;
        s = std::min(s + stride, n - tile);
    }
    return starts;
}

std::vector<float> tile_ramp(std::int64_t start, std::int64_t tile, std::int64_t n, std::int64_t overlap)
{
    std::vector<float> w(static_cast<std::size_t>(tile), 1.0f);
    const double span = static_cast<double>(overlap + 1);
    for (std::int64_t t = 0; t < tile; ++t) {
        double v = 1.0;
        if (start > 0)
            v = std::min(v, static_cast<double>(t + 1) / span);
        if (start + tile < n)
            v = std::min(v, static_cast<double>(tile - t) / span);
        w[static_cast<std::size_t>(t)] = static_cast<float>(v);
    }
    return w;
}

PredictionBundle predict_checked(const Predictor& predictor, const IntensityVolume& input, const LabelSchema& schema)
{
    PredictionBundle b = predictor.predict(input);
    if (!b.pred_image.geometry().same_grid(input.geometry()))
        throw ContractError("predictor output is not on the input grid");
    b.validate(schema);
    return b;
}

PredictionBundle predict_tiled(const Predictor& predictor, const IntensityVolume& input, const LabelSchema& schema,
                               const SegmentOptions& options)
{
    if (options.tile_size <= 0 || options.tile_overlap < 0)
        throw InvalidArgument("tile size must be positive and overlap non-negative");
    const auto& d = input.dims();
    Dims tile{};
    std::array<std::vector<std::int64_t>, 3> starts;
    for (std::size_t a = 0; a < 3; ++a) {
        tile[a] = std::min(options.tile_size, d[a]);
        const std::int64_t stride = std::max<std::int64_t>(1, tile[a] - options.tile_overlap);
        starts[a] = tile_starts(d[a], tile[a], stride);
    }

    const std::size_t C = schema.channel_count() + 2;
    std::vector<IntensityVolume> acc(C, IntensityVolume(input.geometry(), 0.0f));
    IntensityVolume weight(input.geometry(), 0.0f);

    for (auto sz : starts[2])
        for (auto sy : starts[1])
            for (auto sx : starts[0]) {
                const Dims start{sx, sy, sz};
                const auto part = predict_checked(predictor, crop(input, start, tile), schema).to_channels();
                const auto wx = tile_ramp(sx, tile[0], d[0], options.tile_overlap);
                const auto wy = tile_ramp(sy, tile[1], d[1], options.tile_overlap);
                const auto wz = tile_ramp(sz, tile[2], d[2], options.tile_overlap);
                for (std::int64_t k = 0; k < tile[2]; ++k)
                    for (std::int64_t j = 0; j < tile[1]; ++j)
                        for (std::int64_t i = 0; i < tile[0]; ++i) {
                            const float w = wx[static_cast<std::size_t>(i)] * wy[static_cast<std::size_t>(j)] *
                                            wz[static_cast<std::size_t>(k)];
                            const std::size_t dst = input.index(sx + i, sy + j, sz + k);
                            const std::size_t src = part.front().index(i, j, k);
                            weight[dst] += w;
                            for (std::size_t c = 0; c < C; ++c)
                                acc[c][dst] += w * part[c][src];
                        }
            }
    for (std::size_t n = 0; n < weight.size(); ++n)
        for (std::size_t c = 0; c < C; ++c)
            acc[c][n] /= weight[n];
    return PredictionBundle::from_channels(std::move(acc), schema);
}

void average_into(IntensityVolume& a, const IntensityVolume& b)
{
    auto x = a.data();
    auto y = b.data();
    for (std::size_t n = 0; n < x.size(); ++n)
        x[n] = (x[n] + y[n]) * 0.5f;
}

} // namespace

IntensityVolume normalize_robust_minmax(const IntensityVolume& vol)
{
    if (vol.empty())
        throw InvalidArgument("volume is empty");
    std::vector<float> values(vol.data().begin(), vol.data().end());
    const double lo = percentile_of(values, 0.01);
    const double hi = percentile_of(values, 0.99);
    IntensityVolume out(vol.geometry(), 0.0f);
    if (!(hi > lo))
        return out;
    auto src = vol.data();
    auto dst = out.data();
    for (std::size_t n = 0; n < src.size(); ++n)
        dst[n] = static_cast<float>(std::clamp((static_cast<double>(src[n]) - lo) / (hi - lo), 0.0, 1.0));
    return out;
}

IntensityVolume prepare_input(const IntensityVolume& input, const SegmentOptions& options)
{
    if (input.empty())
        throw InvalidArgument("input volume is empty");
    IntensityVolume x = options.normalize ? normalize_robust_minmax(input) : input;
    if (!x.geometry().is_isotropic(1.0))
        x = resample(x, {1.0, 1.0, 1.0});
    return x;
}

LabelVolume argmax_labels(const std::vector<IntensityVolume>& posteriors, const LabelSchema& schema)
{
    if (posteriors.size() != schema.channel_count() || posteriors.empty())
        throw InvalidArgument("posterior stack does not match the label schema");
    LabelVolume out(posteriors.front().geometry(), schema.background_id());
    for (std::size_t n = 0; n < out.size(); ++n) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < posteriors.size(); ++c) {
            const float p = posteriors[c][n];
            const float q = posteriors[best][n];
            if (p > q || (p == q && schema.id_at(c) < schema.id_at(best)))
                best = c;
        }
        out[n] = schema.id_at(best);
    }
    return out;
}

PredictionBundle run_predictor(const Predictor& predictor, const IntensityVolume& input, const LabelSchema& schema,
                               const SegmentOptions& options)
{
    if (options.max_voxels == 0 || input.size() <= options.max_voxels)
        return predict_checked(predictor, input, schema);
    return predict_tiled(predictor, input, schema, options);
}

SegmentationResult segment(const IntensityVolume& input, const Predictor& predictor, const LabelSchema& schema,
                           const SegmentOptions& options)
{
    const auto meta = predictor.metadata();
    if (meta.channels != schema.channel_count() + 2)
        throw ContractError("predictor declares " + std::to_string(meta.channels) + " channels, schema needs " +
                            std::to_string(schema.channel_count() + 2));
    if (meta.schema_hash != schema.hash())
        throw ContractError("predictor schema hash " + meta.schema_hash + " does not match " + schema.hash());

    const IntensityVolume x = prepare_input(input, options);
    PredictionBundle p = run_predictor(predictor, x, schema, options);

    if (options.tta) {
        const PredictionBundle q = run_predictor(predictor, flip_lr(x), schema, options);
        const auto q_soft = flip_lr_channels(q.soft_labels, schema);
        for (std::size_t c = 0; c < p.soft_labels.size(); ++c)
            average_into(p.soft_labels[c], q_soft[c]);
        average_into(p.pred_image, flip_lr(q.pred_image));
        average_into(p.pred_bias, flip_lr(q.pred_bias));
    }

    SegmentationResult r;
    r.segmentation = argmax_labels(p.soft_labels, schema);
    r.report = roi_volumes(r.segmentation, schema);
    r.posteriors = std::move(p.soft_labels);
    r.predicted_image = std::move(p.pred_image);
    r.predicted_bias = std::move(p.pred_bias);
    return r;
}

const CorrelationEntry* DatasetReport::correlation(const std::string& name) const
{
    for (const auto& c : correlations)
        if (c.name == name)
            return &c;
    return nullptr;
}

namespace {

CorrelationEntry correlate(std::string name, const std::vector<double>& ref, const std::vector<double>& pred)
{
    CorrelationEntry e{std::move(name), std::nullopt, std::nullopt};
    if (ref.size() < 3)
        return e;
    try {
        e.pearson = pearson_correlation(ref, pred);
        e.spearman = spearman_correlation(ref, pred);
    } catch (const DegenerateInput&) {
    }
    return e;
}

} // namespace

DatasetReport evaluate_segmentations(const std::vector<SegmentationPair>& pairs, const LabelSchema& schema)
{
    if (pairs.empty())
        throw InvalidArgument("evaluation needs at least one case");
    const std::size_t L = schema.channel_count();
    DatasetReport report;
    report.mean_dice.assign(L, 0.0);
    for (const auto& p : pairs) {
        const LabelVolume ref_on_grid =
            resample_labels_to_grid(p.reference, p.predicted.geometry(), schema.background_id());
        CaseEvaluation ce{p.id, roi_volumes(p.predicted, schema, &ref_on_grid), roi_volumes(p.reference, schema)};
        for (std::size_t c = 0; c < L; ++c)
            report.mean_dice[c] += *ce.predicted.rois[c].dice;
        report.mean_wmh_volume_mm3 += ce.predicted.wmh_volume_mm3;
        report.cases.push_back(std::move(ce));
    }
    const double n = static_cast<double>(pairs.size());
    for (auto& d : report.mean_dice)
        d /= n;
    report.mean_wmh_volume_mm3 /= n;
    report.mean_wmh_dice = report.mean_dice[schema.channel(schema.wmh_id())];
    double anatomy = 0.0;
    for (Label id : schema.evaluation_ids())
        anatomy += report.mean_dice[schema.channel(id)];
    report.mean_anatomy_dice = anatomy / static_cast<double>(schema.evaluation_ids().size());

    for (std::size_t c = 0; c < L; ++c) {
        if (schema.id_at(c) == schema.background_id())
            continue;
        std::vector<double> ref, pred;
        for (const auto& ce : report.cases) {
            ref.push_back(ce.reference.rois[c].volume_mm3);
            pred.push_back(ce.predicted.rois[c].volume_mm3);
        }
        report.correlations.push_back(correlate(schema.labels()[c].name, ref, pred));
    }
    for (std::size_t k = 0; k < schema.lateral_pairs().size(); ++k) {
        std::vector<double> ref, pred;
        for (const auto& ce : report.cases) {
            ref.push_back(ce.reference.lateral[k].volume_mm3);
            pred.push_back(ce.predicted.lateral[k].volume_mm3);
        }
        report.correlations.push_back(correlate(report.cases.front().predicted.lateral[k].name, ref, pred));
    }
    return report;
}

DatasetReport evaluate_dataset(const std::vector<EvaluationCase>& cases, const Predictor& predictor,
                               const LabelSchema& schema, const SegmentOptions& options)
{
    if (cases.empty())
        throw InvalidArgument("evaluation needs at least one case");
    std::vector<SegmentationPair> pairs;
    pairs.reserve(cases.size());
    for (const auto& c : cases)
        pairs.push_back({c.id, segment(c.input, predictor, schema, options).segmentation, c.reference});
    return evaluate_segmentations(pairs, schema);
}

} // namespace nsf
