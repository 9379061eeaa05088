#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "nsf/label_schema.hpp"
#include "nsf/resample.hpp"
#include "nsf/volume.hpp"

namespace nsf {

using Rng = std::mt19937_64;

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

enum class Regime { Isotropic1mm = 0, Clinical2D = 1, PortableStock = 2, LowFieldIsotropic = 3 };
enum class Orientation { Axial, Coronal, Sagittal };

std::string_view to_string(Regime r);
std::string_view to_string(Orientation o);

/// Simulated acquisition. voxel_size is expressed along world axes
/// (x = left-right, y = anterior-posterior, z = inferior-superior).
struct ResolutionSpec {
    Regime regime = Regime::Isotropic1mm;
    std::optional<Orientation> orientation;
    Vec3 voxel_size{1.0, 1.0, 1.0};
};

/// Per-channel Gaussian parameters, in schema channel order.
struct GMMParams {
    std::vector<double> means;
    std::vector<double> stds;

    double mean_of(const LabelSchema& schema, Label id) const { return means.at(schema.channel(id)); }
    double std_of(const LabelSchema& schema, Label id) const { return stds.at(schema.channel(id)); }
    /// Average of the white matter means; the value the WMH constraint keys on.
    double wm_mean(const LabelSchema& schema) const;
};

struct GeneratorConfig {
    Range mean_range{0.0, 255.0};
    /// Twice the U(1, 15) of the single-contrast generator, for low-field SNR.
    Range std_range{1.0, 30.0};
    /// WM mean above this makes WMH hypointense, otherwise hyperintense.
    double wmh_threshold = 128.0;
    /// Lateral pairs draw one shared Gaussian.
    bool share_lateral_gmm = true;

    /// Log-domain bias amplitude (twice the usual 0.3).
    double bias_log_sigma = 0.6;
    std::int64_t bias_control_size = 4;

    double rotation_deg = 15.0;
    Range scaling{0.9, 1.1};
    double shear = 0.1;
    double translation_mm = 10.0;
    std::int64_t deformation_control_size = 10;
    double deformation_sigma_mm = 3.0;

    /// Isotropic 1mm, clinical 2D, portable stock, low-field isotropic.
    std::array<double, 4> regime_probabilities{0.25, 0.25, 0.25, 0.25};
    Range clinical_slice_spacing{2.5, 8.5};
    Range portable_in_plane{1.4, 1.8};
    double portable_slice_spacing = 5.0;
    Range lowfield_spacing{2.0, 5.0};

    std::uint64_t seed = 1234;

    /// Throws InvalidArgument for inverted ranges or probabilities not summing to 1.
    void validate() const;
    /// Every random component switched off: zero stds, identity deformation,
    /// unit bias, isotropic acquisition.
    static GeneratorConfig deterministic();
};

struct TrainingPair {
    IntensityVolume image;  // 1mm isotropic T1w
    LabelVolume labels;     // same grid
};

struct SynthSample {
    IntensityVolume synth;         // simulated acquisition, upsampled to 1mm
    LabelVolume labels;            // deformed segmentation
    IntensityVolume target_image;  // deformed real image, WM median = 1
    IntensityVolume target_bias;   // multiplicative bias field, > 0
    GMMParams gmm;
    ResolutionSpec resolution;
};

/// WMH mean given the WM mean: U(lo, wm) when wm > threshold, else U(wm, hi) exclusive of wm.
double sample_wmh_mean(double wm_mean, const GeneratorConfig& config, Rng& rng);
GMMParams sample_gmm_params(const LabelSchema& schema, const GeneratorConfig& config, Rng& rng);

/// Random affine about the grid centre composed with a smooth displacement
/// field. Control displacements are N(0, sigma^2) truncated at 3 sigma.
DeformationField sample_deformation(const Geometry& geometry, const GeneratorConfig& config, Rng& rng);
/// Largest displacement the configured affine ranges allow at any voxel of `geometry`, plus 3*sqrt(3)*sigma_d.
double deformation_bound_mm(const Geometry& geometry, const GeneratorConfig& config);

/// B = exp(U), U trilinearly upsampled from a coarse N(0, sigma_B^2) grid.
IntensityVolume sample_bias_field(const Geometry& geometry, const GeneratorConfig& config, Rng& rng);

ResolutionSpec sample_resolution(const GeneratorConfig& config, Rng& rng);

/// Voxel-size triple of `spec` mapped onto the voxel axes of `affine`.
Vec3 voxel_axis_spacing(const Affine& affine, const ResolutionSpec& spec);

/// Normalised sampled Gaussian, radius ceil(4 sigma); taps falling outside
/// the line are dropped and the rest renormalised.
IntensityVolume gaussian_smooth(const IntensityVolume& vol, const Vec3& sigma_voxels);

/// Thick-slice acquisition: Gaussian PSF with FWHM equal to each simulated
/// spacing above 1mm, resampling to that spacing and back onto the input grid.
IntensityVolume simulate_acquisition(const IntensityVolume& vol, const ResolutionSpec& spec);

/// Divides by the median over white matter voxels.
IntensityVolume normalize_wm_median(const IntensityVolume& img, const LabelVolume& labels, const LabelSchema& schema);

/// Voxelwise draw from N(mean(label), std(label)^2), clamped at 0.
IntensityVolume render_gmm(const LabelVolume& labels, const LabelSchema& schema, const GMMParams& params, Rng& rng);

SynthSample generate_sample(const TrainingPair& pair, const LabelSchema& schema, const GeneratorConfig& config,
                            Rng& rng);

} // namespace nsf
