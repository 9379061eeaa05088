#include "nsf/loss.hpp"

#include <algorithm>
#include <cmath>

namespace nsf {

namespace {

constexpr double kProbabilityFloor = 1e-12;

void check_channels(const PredictionBundle& pred, const LabelVolume& target, const LabelSchema& schema,
                    const char* what)
{
    if (pred.soft_labels.size() != schema.channel_count())
        throw InvalidArgument(std::string(what) + ": prediction has " + std::to_string(pred.soft_labels.size()) +
                              " label channels, schema has " + std::to_string(schema.channel_count()));
    for (const auto& c : pred.soft_labels)
        require_same_grid(c, target, what);
}

double mean_abs_diff(const IntensityVolume& a, const IntensityVolume& b)
{
    double acc = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n)
        acc += std::abs(static_cast<double>(a[n]) - static_cast<double>(b[n]));
    return acc / static_cast<double>(a.size());
}

double mean_abs_log_diff(const IntensityVolume& a, const IntensityVolume& b)
{
    double acc = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) {
        if (!(a[n] > 0.0f) || !(b[n] > 0.0f))
            throw DomainError("bias fields must be strictly positive");
        acc += std::abs(std::log(static_cast<double>(a[n])) - std::log(static_cast<double>(b[n])));
    }
    return acc / static_cast<double>(a.size());
}

} // namespace

PredictionBundle PredictionBundle::from_channels(std::vector<IntensityVolume> channels, const LabelSchema& schema)
{
    const std::size_t L = schema.channel_count();
    if (channels.size() != L + 2)
        throw ContractError("expected " + std::to_string(L + 2) + " channels, got " + std::to_string(channels.size()));
    PredictionBundle b;
    b.pred_bias = std::move(channels[L + 1]);
    b.pred_image = std::move(channels[L]);
    channels.resize(L);
    b.soft_labels = std::move(channels);
    return b;
}

std::vector<IntensityVolume> PredictionBundle::to_channels() const
{
    std::vector<IntensityVolume> out = soft_labels;
    out.push_back(pred_image);
    out.push_back(pred_bias);
    return out;
}

void PredictionBundle::validate(const LabelSchema& schema) const
{
    if (soft_labels.size() != schema.channel_count())
        throw ContractError("prediction has " + std::to_string(soft_labels.size()) + " label channels, expected " +
                            std::to_string(schema.channel_count()));
    const Geometry& g = geometry();
    if (!pred_bias.geometry().same_grid(g))
        throw ContractError("predicted bias is not on the prediction grid");
    for (const auto& c : soft_labels)
        if (!c.geometry().same_grid(g))
            throw ContractError("posterior channels are not on one grid");

    for (std::size_t n = 0; n < g.voxel_count(); ++n) {
        double sum = 0.0;
        for (const auto& c : soft_labels) {
            const double p = c[n];
            if (!(p >= 0.0))
                throw ContractError("posterior channel has a negative or NaN value");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-4)
            throw ContractError("posterior channels do not sum to 1 at voxel " + std::to_string(n));
        if (!(pred_bias[n] > 0.0f) || !std::isfinite(pred_image[n]))
            throw ContractError("predicted bias must be positive and image finite");
    }
}

double cross_entropy(const PredictionBundle& pred, const LabelVolume& target, const LabelSchema& schema)
{
    check_channels(pred, target, schema, "cross_entropy");
    double acc = 0.0;
    for (std::size_t n = 0; n < target.size(); ++n) {
        // Float storage cannot hold most p exactly; renormalise in double.
        double sum = 0.0;
        for (const auto& c : pred.soft_labels)
            sum += c[n];
        const double p = sum > 0.0 ? pred.soft_labels[schema.channel(target[n])][n] / sum : 0.0;
        acc -= std::log(std::max(p, kProbabilityFloor));
    }
    return acc / static_cast<double>(target.size());
}

std::vector<double> soft_dice_per_label(const PredictionBundle& pred, const LabelVolume& target,
                                        const LabelSchema& schema, double epsilon)
{
    check_channels(pred, target, schema, "soft_dice");
    const std::size_t L = schema.channel_count();
    std::vector<double> intersection(L, 0.0), predicted(L, 0.0), reference(L, 0.0);
    for (std::size_t n = 0; n < target.size(); ++n) {
        const std::size_t t = schema.channel(target[n]);
        reference[t] += 1.0;
        intersection[t] += pred.soft_labels[t][n];
    }
    for (std::size_t c = 0; c < L; ++c)
        for (float p : pred.soft_labels[c].data())
            predicted[c] += p;
    std::vector<double> dice(L);
    for (std::size_t c = 0; c < L; ++c)
        dice[c] = 2.0 * intersection[c] / (predicted[c] + reference[c] + epsilon);
    return dice;
}

double soft_dice_average(const PredictionBundle& pred, const LabelVolume& target, const LabelSchema& schema,
                         const DiceOptions& options)
{
    const auto dice = soft_dice_per_label(pred, target, schema, options.epsilon);
    const std::size_t bg = schema.channel(schema.background_id());
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t c = 0; c < dice.size(); ++c) {
        if (!options.include_background && c == bg)
            continue;
        acc += dice[c];
        ++count;
    }
    if (count == 0)
        throw InvalidArgument("no labels left to average");
    return acc / static_cast<double>(count);
}

LossBreakdown composite_loss(const PredictionBundle& pred, const SynthSample& sample, const LabelSchema& schema,
                             const DiceOptions& options)
{
    require_same_grid(pred.pred_image, sample.target_image, "composite_loss");
    require_same_grid(pred.pred_bias, sample.target_bias, "composite_loss");
    require_same_grid(pred.pred_image, sample.labels, "composite_loss");

    LossBreakdown out;
    out.l1_logbias = mean_abs_log_diff(pred.pred_bias, sample.target_bias);
    out.ce = cross_entropy(pred, sample.labels, schema);
    out.avg_dice = soft_dice_average(pred, sample.labels, schema, options);
    out.l1_image = mean_abs_diff(pred.pred_image, sample.target_image);
    out.total = out.ce - out.avg_dice + out.l1_image + out.l1_logbias;
    return out;
}

} // namespace nsf
