#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nsf/label_schema.hpp"
#include "nsf/volume.hpp"

namespace nsf {

/// 2|A n B| / (|A| + |B|) per id; 1 when both masks are empty.
std::vector<double> hard_dice(const LabelVolume& a, const LabelVolume& b, std::span<const Label> label_ids);

struct RoiEntry {
    Label id = 0;
    std::string name;
    double volume_mm3 = 0.0;
    std::optional<double> dice;
};

struct LateralEntry {
    Label left = 0;
    Label right = 0;
    std::string name;
    double volume_mm3 = 0.0;  // mean of left and right
};

struct ROIReport {
    std::vector<RoiEntry> rois;  // schema order
    std::vector<LateralEntry> lateral;
    double wmh_volume_mm3 = 0.0;

    double volume_of(Label id) const;
    const RoiEntry* find(Label id) const;
};

/// Voxel counts times voxel volume; Dice filled in when a reference on the
/// same grid is supplied.
ROIReport roi_volumes(const LabelVolume& seg, const LabelSchema& schema, const LabelVolume* reference = nullptr);

/// Name of a lateral pair with its "Left-" prefix dropped.
std::string lateral_name(const LabelSchema& schema, Label left);

/// Product-moment correlation. Throws InvalidArgument on length mismatch or
/// fewer than 3 samples, DegenerateInput on zero variance.
double pearson_correlation(std::span<const double> x, std::span<const double> y);
/// Pearson correlation of mid-ranks.
double spearman_correlation(std::span<const double> x, std::span<const double> y);

} // namespace nsf
