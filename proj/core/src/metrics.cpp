#include "nsf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace nsf {

std::vector<double> hard_dice(const LabelVolume& a, const LabelVolume& b, std::span<const Label> label_ids)
{
    require_same_grid(a, b, "hard_dice");
    std::unordered_map<Label, std::size_t> slot;
    for (std::size_t i = 0; i < label_ids.size(); ++i)
        slot.emplace(label_ids[i], i);
    std::vector<double> count_a(label_ids.size(), 0.0), count_b(label_ids.size(), 0.0), both(label_ids.size(), 0.0);
    for (std::size_t n = 0; n < a.size(); ++n) {
        const auto ia = slot.find(a[n]);
        const auto ib = slot.find(b[n]);
        if (ia != slot.end())
            count_a[ia->second] += 1.0;
        if (ib != slot.end())
            count_b[ib->second] += 1.0;
        if (a[n] == b[n] && ia != slot.end())
            both[ia->second] += 1.0;
    }
    std::vector<double> dice(label_ids.size());
    for (std::size_t i = 0; i < label_ids.size(); ++i) {
        const double denom = count_a[i] + count_b[i];
        dice[i] = denom == 0.0 ? 1.0 : 2.0 * both[i] / denom;
    }
    return dice;
}

double ROIReport::volume_of(Label id) const
{
    const auto* e = find(id);
    if (!e)
        throw InvalidArgument("label " + std::to_string(id) + " is not in the report");
    return e->volume_mm3;
}

const RoiEntry* ROIReport::find(Label id) const
{
    for (const auto& e : rois)
        if (e.id == id)
            return &e;
    return nullptr;
}

std::string lateral_name(const LabelSchema& schema, Label left)
{
    std::string name = schema.name_of(left);
    constexpr std::string_view prefix = "Left-";
    if (name.rfind(prefix, 0) == 0)
        name.erase(0, prefix.size());
    return name;
}

ROIReport roi_volumes(const LabelVolume& seg, const LabelSchema& schema, const LabelVolume* reference)
{
    schema.validate(seg);
    const std::size_t L = schema.channel_count();
    std::vector<std::size_t> counts(L, 0);
    for (Label v : seg.data())
        ++counts[schema.channel(v)];

    std::vector<double> dice;
    if (reference) {
        std::vector<Label> ids;
        for (const auto& e : schema.labels())
            ids.push_back(e.id);
        dice = hard_dice(seg, *reference, ids);
    }

    const double voxel = seg.geometry().voxel_volume();
    ROIReport report;
    report.rois.reserve(L);
    for (std::size_t c = 0; c < L; ++c) {
        RoiEntry e{schema.id_at(c), schema.labels()[c].name, static_cast<double>(counts[c]) * voxel, std::nullopt};
        if (reference)
            e.dice = dice[c];
        report.rois.push_back(std::move(e));
    }
    for (const auto& [left, right] : schema.lateral_pairs()) {
        const double v = 0.5 * (report.volume_of(left) + report.volume_of(right));
        report.lateral.push_back({left, right, lateral_name(schema, left), v});
    }
    report.wmh_volume_mm3 = report.volume_of(schema.wmh_id());
    return report;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw InvalidArgument("correlation inputs differ in length");
    if (x.size() < 3)
        throw InvalidArgument("correlation needs at least 3 samples");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw DegenerateInput("correlation is undefined for zero-variance input");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

std::vector<double> mid_ranks(std::span<const double> v)
{
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]])
            ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

} // namespace

double spearman_correlation(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw InvalidArgument("correlation inputs differ in length");
    const auto rx = mid_ranks(x);
    const auto ry = mid_ranks(y);
    return pearson_correlation(rx, ry);
}

} // namespace nsf
