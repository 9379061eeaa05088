#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nsf/label_schema.hpp"
#include "nsf/metrics.hpp"
#include "nsf/predictor.hpp"
#include "nsf/volume.hpp"

namespace nsf {

struct SegmentOptions {
    bool tta = true;
    bool normalize = true;
    /// Above this many voxels the input is cut into overlapping tiles; 0 disables tiling.
    std::size_t max_voxels = 0;
    std::int64_t tile_size = 160;
    std::int64_t tile_overlap = 16;
};

struct SegmentationResult {
    LabelVolume segmentation;                // 1mm
    std::vector<IntensityVolume> posteriors;  // schema channel order
    IntensityVolume predicted_image;
    IntensityVolume predicted_bias;
    ROIReport report;
};

/// Maps the 1st/99th intensity percentiles to 0/1 and clips to [0, 1].
IntensityVolume normalize_robust_minmax(const IntensityVolume& vol);

/// Normalisation (if enabled) followed by resampling to 1mm isotropic; the
/// exact volume `segment` hands to the predictor.
IntensityVolume prepare_input(const IntensityVolume& input, const SegmentOptions& options = {});

/// Per-voxel argmax; ties go to the lowest label id.
LabelVolume argmax_labels(const std::vector<IntensityVolume>& posteriors, const LabelSchema& schema);

/// Predictor call with tiling per `options`; validates the bundle.
PredictionBundle run_predictor(const Predictor& predictor, const IntensityVolume& input, const LabelSchema& schema,
                               const SegmentOptions& options = {});

/// Resample to 1mm, predict, optionally average with the flipped-back
/// prediction of the mirrored input, argmax.
SegmentationResult segment(const IntensityVolume& input, const Predictor& predictor, const LabelSchema& schema,
                           const SegmentOptions& options = {});

// --- dataset evaluation ------------------------------------------------------

struct CaseEvaluation {
    std::string id;
    ROIReport predicted;  // dice filled against the reference
    ROIReport reference;  // volumes on the reference's native grid
};

struct CorrelationEntry {
    std::string name;
    std::optional<double> pearson;
    std::optional<double> spearman;
};

struct DatasetReport {
    std::vector<CaseEvaluation> cases;
    /// Mean Dice over cases for each schema label (schema order).
    std::vector<double> mean_dice;
    /// Mean over the schema's evaluation ROIs, averaged over cases.
    double mean_anatomy_dice = 0.0;
    double mean_wmh_dice = 0.0;
    double mean_wmh_volume_mm3 = 0.0;
    /// Predicted vs reference volume across cases: every non-background
    /// label, every lateral average, and WMH.
    std::vector<CorrelationEntry> correlations;

    const CorrelationEntry* correlation(const std::string& name) const;
};

struct SegmentationPair {
    std::string id;
    LabelVolume predicted;
    LabelVolume reference;
};

/// References may sit on any grid; they are nearest-neighbour resampled onto
/// the prediction grid for Dice. Throws InvalidArgument on an empty list.
DatasetReport evaluate_segmentations(const std::vector<SegmentationPair>& pairs, const LabelSchema& schema);

struct EvaluationCase {
    std::string id;
    IntensityVolume input;
    LabelVolume reference;
};

DatasetReport evaluate_dataset(const std::vector<EvaluationCase>& cases, const Predictor& predictor,
                               const LabelSchema& schema, const SegmentOptions& options = {});

} // namespace nsf
