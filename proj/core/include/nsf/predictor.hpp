#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "nsf/label_schema.hpp"
#include "nsf/loss.hpp"
#include "nsf/volume.hpp"

namespace nsf {

inline constexpr const char* kInputNormalization = "robust-minmax-p1-p99";

struct PredictorMetadata {
    std::string schema_hash;
    std::size_t channels = 0;  // L + 2
    std::string normalization = kInputNormalization;
};

/// Anything that maps a normalised 1mm volume to an L+2 channel prediction
/// on the same grid. Implementations must be safe to call concurrently.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual PredictorMetadata metadata() const = 0;
    virtual PredictionBundle predict(const IntensityVolume& input) const = 0;
};

/// Wraps a callable; used for synthetic predictors in tests and benchmarks.
class FunctionPredictor : public Predictor {
public:
    using Fn = std::function<PredictionBundle(const IntensityVolume&)>;
    FunctionPredictor(const LabelSchema& schema, Fn fn);
    PredictorMetadata metadata() const override { return metadata_; }
    PredictionBundle predict(const IntensityVolume& input) const override { return fn_(input); }

private:
    PredictorMetadata metadata_;
    Fn fn_;
};

/// One-hot rendering of a label map; image channel = 0, bias channel = 1.
PredictionBundle one_hot_bundle(const LabelVolume& labels, const LabelSchema& schema);
/// Every channel 1/L.
PredictionBundle uniform_bundle(const Geometry& grid, const LabelSchema& schema);

/// Stub returning the one-hot of a known label map. It answers exactly two
/// inputs: the reference input it was built with, and that input's
/// left-right mirror (for which it answers with the mirrored map). Any other
/// input is a contract violation.
class OneHotStubPredictor : public Predictor {
public:
    OneHotStubPredictor(const LabelSchema& schema, LabelVolume map, IntensityVolume reference_input);
    PredictorMetadata metadata() const override;
    PredictionBundle predict(const IntensityVolume& input) const override;

private:
    LabelSchema schema_;
    LabelVolume map_;
    LabelVolume flipped_map_;
    IntensityVolume reference_;
    IntensityVolume flipped_reference_;
};

/// Runs `argv... <input.nii> <output.nii>` once per request. The response is
/// an L+2 channel float32 NIfTI plus `<output.nii>.json`:
///   {"schema_hash": "...", "channels": [<label ids in schema order>..., "image", "bias"]}
/// A nonzero exit status, missing files or a sidecar mismatch raise ContractError.
class ExternalPredictor : public Predictor {
public:
    ExternalPredictor(const LabelSchema& schema, std::vector<std::string> argv,
                      std::filesystem::path scratch_dir = std::filesystem::temp_directory_path());
    PredictorMetadata metadata() const override;
    PredictionBundle predict(const IntensityVolume& input) const override;

    /// Sidecar text a conforming predictor writes for `schema`.
    static std::string sidecar_json(const LabelSchema& schema);

private:
    LabelSchema schema_;
    std::vector<std::string> argv_;
    std::filesystem::path scratch_;
};

/// Runs argv and waits; returns the exit status (or 128 + signal).
int run_process(const std::vector<std::string>& argv);

} // namespace nsf
