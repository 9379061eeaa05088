#pragma once

#include <vector>

#include "nsf/generator.hpp"
#include "nsf/label_schema.hpp"
#include "nsf/volume.hpp"

namespace nsf {

/// Network output: L softmax channels (schema order) plus predicted T1w
/// intensities and predicted bias field.
struct PredictionBundle {
    std::vector<IntensityVolume> soft_labels;
    IntensityVolume pred_image;
    IntensityVolume pred_bias;

    const Geometry& geometry() const { return pred_image.geometry(); }

    /// Splits an L+2 channel stack (softmax..., image, bias).
    static PredictionBundle from_channels(std::vector<IntensityVolume> channels, const LabelSchema& schema);
    std::vector<IntensityVolume> to_channels() const;

    /// Throws ContractError on channel count, grid, negativity, channel sums
    /// outside 1 +- 1e-4, or non-positive bias.
    void validate(const LabelSchema& schema) const;
};

struct LossBreakdown {
    double ce = 0.0;
    double avg_dice = 0.0;
    double l1_image = 0.0;
    double l1_logbias = 0.0;
    double total = 0.0;
};

struct DiceOptions {
    bool include_background = true;
    double epsilon = 1e-6;
};

/// Mean over voxels of -log p_target, with p renormalised by the voxel's
/// channel sum and floored at 1e-12.
double cross_entropy(const PredictionBundle& pred, const LabelVolume& target, const LabelSchema& schema);

/// dice_l = 2 sum(p_l t_l) / (sum p_l + sum t_l + eps), one entry per schema channel.
std::vector<double> soft_dice_per_label(const PredictionBundle& pred, const LabelVolume& target,
                                        const LabelSchema& schema, double epsilon = 1e-6);
/// Unweighted mean of soft_dice_per_label (background optionally excluded).
double soft_dice_average(const PredictionBundle& pred, const LabelVolume& target, const LabelSchema& schema,
                         const DiceOptions& options = {});

/// ce - avg_dice + mean|I_hat - I| + mean|log B_hat - log B|, equal weights.
/// Throws DomainError if either bias field has a non-positive voxel.
LossBreakdown composite_loss(const PredictionBundle& pred, const SynthSample& sample, const LabelSchema& schema,
                             const DiceOptions& options = {});

} // namespace nsf
