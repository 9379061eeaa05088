#include "nsf/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace nsf {

namespace {

constexpr double kFwhmPerSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

double uniform(Rng& rng, double lo, double hi)
{
    if (lo == hi)
        return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

void check_range(const Range& r, const char* name)
{
    if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi))
        throw InvalidArgument(std::string("generator config: invalid range for ") + name);
}

using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 matmul(const Mat3& a, const Mat3& b)
{
    Mat3 out{};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 3; ++k)
                out[i][j] += a[i][k] * b[k][j];
    return out;
}

Mat3 rotation(std::size_t axis, double radians)
{
    const double c = std::cos(radians);
    const double s = std::sin(radians);
    const std::size_t a = (axis + 1) % 3;
    const std::size_t b = (axis + 2) % 3;
    Mat3 r{};
    r[axis][axis] = 1.0;
    r[a][a] = c;
    r[a][b] = -s;
    r[b][a] = s;
    r[b][b] = c;
    return r;
}

/// Trilinear upsampling of a coarse scalar grid whose corner nodes coincide
/// with the corner voxels of `dims`.
std::vector<double> upsample_corner_aligned(const std::vector<double>& coarse, std::int64_t cs, const Dims& dims)
{
    std::vector<double> out(static_cast<std::size_t>(dims[0] * dims[1] * dims[2]));
    // Per-axis interpolation tables.
    std::array<std::vector<std::int64_t>, 3> lo;
    std::array<std::vector<double>, 3> frac;
    for (std::size_t a = 0; a < 3; ++a) {
        lo[a].resize(static_cast<std::size_t>(dims[a]));
        frac[a].resize(static_cast<std::size_t>(dims[a]));
        for (std::int64_t v = 0; v < dims[a]; ++v) {
            const double u = dims[a] > 1 ? static_cast<double>(v) * static_cast<double>(cs - 1) / static_cast<double>(dims[a] - 1) : 0.0;
            auto i0 = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(u)), cs - 1);
            lo[a][static_cast<std::size_t>(v)] = i0;
            frac[a][static_cast<std::size_t>(v)] = u - static_cast<double>(i0);
        }
    }
    auto at = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
        x = std::min(x, cs - 1);
        y = std::min(y, cs - 1);
        z = std::min(z, cs - 1);
        return coarse[static_cast<std::size_t>(x + cs * (y + cs * z))];
    };
    std::size_t n = 0;
    for (std::int64_t k = 0; k < dims[2]; ++k) {
        const auto z0 = lo[2][static_cast<std::size_t>(k)];
        const double fz = frac[2][static_cast<std::size_t>(k)];
        for (std::int64_t j = 0; j < dims[1]; ++j) {
            const auto y0 = lo[1][static_cast<std::size_t>(j)];
            const double fy = frac[1][static_cast<std::size_t>(j)];
            for (std::int64_t i = 0; i < dims[0]; ++i, ++n) {
                const auto x0 = lo[0][static_cast<std::size_t>(i)];
                const double fx = frac[0][static_cast<std::size_t>(i)];
                double acc = 0.0;
                for (int dz = 0; dz < 2; ++dz)
                    for (int dy = 0; dy < 2; ++dy)
                        for (int dx = 0; dx < 2; ++dx) {
                            const double w = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy) * (dz ? fz : 1.0 - fz);
                            if (w != 0.0)
                                acc += w * at(x0 + dx, y0 + dy, z0 + dz);
                        }
                out[n] = acc;
            }
        }
    }
    return out;
}

/// Voxel axis -> dominant world axis. Throws when two voxel axes share one.
std::array<std::size_t, 3> world_axis_of(const Affine& affine)
{
    const Vec3 norms = affine.column_norms();
    std::array<std::size_t, 3> out{};
    std::array<bool, 3> used{};
    for (std::size_t c = 0; c < 3; ++c) {
        std::size_t best = 0;
        for (std::size_t r = 1; r < 3; ++r)
            if (std::abs(affine(r, c)) > std::abs(affine(best, c)))
                best = r;
        if (used[best] || norms[c] == 0.0)
            throw OrientationError("voxel axes do not map one-to-one onto world axes");
        used[best] = true;
        out[c] = best;
    }
    return out;
}

} // namespace

std::string_view to_string(Regime r)
{
    switch (r) {
    case Regime::Isotropic1mm: return "isotropic-1mm";
    case Regime::Clinical2D: return "clinical-2d";
    case Regime::PortableStock: return "portable-stock";
    case Regime::LowFieldIsotropic: return "lowfield-isotropic";
    }
    return "unknown";
}

std::string_view to_string(Orientation o)
{
    switch (o) {
    case Orientation::Axial: return "axial";
    case Orientation::Coronal: return "coronal";
    case Orientation::Sagittal: return "sagittal";
    }
    return "unknown";
}

double GMMParams::wm_mean(const LabelSchema& schema) const
{
    std::set<Label> ids(schema.wm_ids().begin(), schema.wm_ids().end());
    if (ids.empty())
        throw InvalidArgument("label schema has no white matter ids");
    double sum = 0.0;
    for (Label id : ids)
        sum += mean_of(schema, id);
    return sum / static_cast<double>(ids.size());
}

void GeneratorConfig::validate() const
{
    check_range(mean_range, "mean_range");
    check_range(std_range, "std_range");
    check_range(scaling, "scaling");
    check_range(clinical_slice_spacing, "clinical_slice_spacing");
    check_range(portable_in_plane, "portable_in_plane");
    check_range(lowfield_spacing, "lowfield_spacing");
    if (std_range.lo < 0.0)
        throw InvalidArgument("generator config: std_range must be non-negative");
    if (!(wmh_threshold > mean_range.lo && wmh_threshold < mean_range.hi))
        throw InvalidArgument("generator config: wmh_threshold must lie inside mean_range");
    if (bias_log_sigma < 0.0 || deformation_sigma_mm < 0.0 || rotation_deg < 0.0 || shear < 0.0 || translation_mm < 0.0)
        throw InvalidArgument("generator config: amplitudes must be non-negative");
    if (scaling.lo <= 0.0)
        throw InvalidArgument("generator config: scaling must be positive");
    if (bias_control_size < 2 || deformation_control_size < 2)
        throw InvalidArgument("generator config: control grids need at least 2 nodes per axis");
    if (clinical_slice_spacing.lo <= 0.0 || portable_in_plane.lo <= 0.0 || portable_slice_spacing <= 0.0 ||
        lowfield_spacing.lo <= 0.0)
        throw InvalidArgument("generator config: spacings must be positive");
    double total = 0.0;
    for (double p : regime_probabilities) {
        if (p < 0.0)
            throw InvalidArgument("generator config: negative regime probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw InvalidArgument("generator config: regime probabilities must sum to 1");
}

GeneratorConfig GeneratorConfig::deterministic()
{
    GeneratorConfig c;
    c.std_range = {0.0, 0.0};
    c.bias_log_sigma = 0.0;
    c.rotation_deg = 0.0;
    c.scaling = {1.0, 1.0};
    c.shear = 0.0;
    c.translation_mm = 0.0;
    c.deformation_sigma_mm = 0.0;
    c.regime_probabilities = {1.0, 0.0, 0.0, 0.0};
    return c;
}

double sample_wmh_mean(double wm_mean, const GeneratorConfig& config, Rng& rng)
{
    if (wm_mean > config.wmh_threshold)
        return uniform(rng, config.mean_range.lo, wm_mean);
    const double lo = std::nextafter(wm_mean, std::numeric_limits<double>::infinity());
    return uniform(rng, lo, std::max(lo, config.mean_range.hi));
}

GMMParams sample_gmm_params(const LabelSchema& schema, const GeneratorConfig& config, Rng& rng)
{
    const std::size_t L = schema.channel_count();
    GMMParams p;
    p.means.assign(L, 0.0);
    p.stds.assign(L, 0.0);
    const std::size_t wmh = schema.channel(schema.wmh_id());
    std::vector<bool> done(L, false);
    for (std::size_t c = 0; c < L; ++c) {
        if (done[c])
            continue;
        p.means[c] = uniform(rng, config.mean_range.lo, config.mean_range.hi);
        p.stds[c] = uniform(rng, config.std_range.lo, config.std_range.hi);
        done[c] = true;
        if (config.share_lateral_gmm) {
            const std::size_t partner = schema.channel(schema.lateral_counterpart(schema.id_at(c)));
            if (!done[partner]) {
                p.means[partner] = p.means[c];
                p.stds[partner] = p.stds[c];
                done[partner] = true;
            }
        }
    }
    p.means[wmh] = sample_wmh_mean(p.wm_mean(schema), config, rng);
    return p;
}

DeformationField sample_deformation(const Geometry& geometry, const GeneratorConfig& config, Rng& rng)
{
    geometry.validate();
    constexpr double deg = std::numbers::pi / 180.0;
    Mat3 rot = rotation(0, uniform(rng, -config.rotation_deg, config.rotation_deg) * deg);
    rot = matmul(rotation(1, uniform(rng, -config.rotation_deg, config.rotation_deg) * deg), rot);
    rot = matmul(rotation(2, uniform(rng, -config.rotation_deg, config.rotation_deg) * deg), rot);
    Mat3 shear{};
    Mat3 scale{};
    for (std::size_t i = 0; i < 3; ++i) {
        shear[i][i] = 1.0;
        scale[i][i] = uniform(rng, config.scaling.lo, config.scaling.hi);
    }
    shear[0][1] = uniform(rng, -config.shear, config.shear);
    shear[0][2] = uniform(rng, -config.shear, config.shear);
    shear[1][2] = uniform(rng, -config.shear, config.shear);
    Vec3 translation{};
    for (auto& t : translation)
        t = uniform(rng, -config.translation_mm, config.translation_mm);

    const Mat3 a = matmul(rot, matmul(shear, scale));
    const Vec3 centre = geometry.affine.apply({0.5 * static_cast<double>(geometry.dims[0] - 1),
                                               0.5 * static_cast<double>(geometry.dims[1] - 1),
                                               0.5 * static_cast<double>(geometry.dims[2] - 1)});
    // q = A (p - c) + c + t
    Affine world;
    for (std::size_t i = 0; i < 3; ++i) {
        double ac = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
            world(i, j) = a[i][j];
            ac += a[i][j] * centre[j];
        }
        world(i, 3) = (centre[i] - ac) + translation[i];
    }

    std::vector<Vec3> control;
    Dims control_dims{0, 0, 0};
    if (config.deformation_sigma_mm > 0.0) {
        const std::int64_t cs = config.deformation_control_size;
        control_dims = {cs, cs, cs};
        control.resize(static_cast<std::size_t>(cs * cs * cs));
        std::normal_distribution<double> normal(0.0, config.deformation_sigma_mm);
        const double cap = 3.0 * config.deformation_sigma_mm;
        for (auto& v : control)
            for (auto& c : v)
                c = std::clamp(normal(rng), -cap, cap);
    }
    return DeformationField(geometry.dims, world, control_dims, std::move(control));
}

double deformation_bound_mm(const Geometry& geometry, const GeneratorConfig& config)
{
    const double theta = config.rotation_deg * std::numbers::pi / 180.0;
    const double smax = std::max(std::abs(config.scaling.hi), std::abs(config.scaling.lo));
    const double sdev = std::max(std::abs(config.scaling.hi - 1.0), std::abs(config.scaling.lo - 1.0));
    const double shear_norm = std::sqrt(3.0) * config.shear;
    const double rot_dev = 3.0 * 2.0 * std::sin(theta / 2.0);
    const double linear_dev = rot_dev * (1.0 + shear_norm) * smax + shear_norm * smax + sdev;

    const Vec3 centre = geometry.affine.apply({0.5 * static_cast<double>(geometry.dims[0] - 1),
                                               0.5 * static_cast<double>(geometry.dims[1] - 1),
                                               0.5 * static_cast<double>(geometry.dims[2] - 1)});
    double radius = 0.0;
    for (int corner = 0; corner < 8; ++corner) {
        Vec3 v{};
        for (std::size_t a = 0; a < 3; ++a)
            v[a] = (corner >> a) & 1 ? static_cast<double>(geometry.dims[a] - 1) : 0.0;
        const Vec3 p = geometry.affine.apply(v);
        radius = std::max(radius, std::hypot(p[0] - centre[0], p[1] - centre[1], p[2] - centre[2]));
    }
    return linear_dev * radius + std::sqrt(3.0) * config.translation_mm +
           3.0 * std::sqrt(3.0) * config.deformation_sigma_mm;
}

IntensityVolume sample_bias_field(const Geometry& geometry, const GeneratorConfig& config, Rng& rng)
{
    geometry.validate();
    if (config.bias_log_sigma == 0.0)
        return IntensityVolume(geometry, 1.0f);
    const std::int64_t cs = config.bias_control_size;
    std::vector<double> coarse(static_cast<std::size_t>(cs * cs * cs));
    std::normal_distribution<double> normal(0.0, config.bias_log_sigma);
    for (auto& c : coarse)
        c = normal(rng);
    const auto log_field = upsample_corner_aligned(coarse, cs, geometry.dims);
    IntensityVolume out(geometry);
    auto data = out.data();
    for (std::size_t n = 0; n < data.size(); ++n)
        data[n] = static_cast<float>(std::exp(log_field[n]));
    return out;
}

ResolutionSpec sample_resolution(const GeneratorConfig& config, Rng& rng)
{
    const double u = uniform(rng, 0.0, 1.0);
    double cumulative = 0.0;
    std::size_t pick = 3;
    for (std::size_t r = 0; r < 4; ++r) {
        cumulative += config.regime_probabilities[r];
        if (u < cumulative) {
            pick = r;
            break;
        }
    }
    while (config.regime_probabilities[pick] == 0.0 && pick > 0)
        --pick;

    ResolutionSpec spec;
    spec.regime = static_cast<Regime>(pick);
    switch (spec.regime) {
    case Regime::Isotropic1mm:
        spec.voxel_size = {1.0, 1.0, 1.0};
        break;
    case Regime::Clinical2D: {
        const auto o = std::uniform_int_distribution<int>(0, 2)(rng);
        spec.orientation = static_cast<Orientation>(o);
        spec.voxel_size = {1.0, 1.0, 1.0};
        // axial slices stack along z, coronal along y, sagittal along x
        const std::size_t slice_axis = 2 - static_cast<std::size_t>(o);
        spec.voxel_size[slice_axis] = uniform(rng, config.clinical_slice_spacing.lo, config.clinical_slice_spacing.hi);
        break;
    }
    case Regime::PortableStock: {
        spec.orientation = Orientation::Axial;
        const double in_plane = uniform(rng, config.portable_in_plane.lo, config.portable_in_plane.hi);
        spec.voxel_size = {in_plane, in_plane, config.portable_slice_spacing};
        break;
    }
    case Regime::LowFieldIsotropic:
        for (auto& s : spec.voxel_size)
            s = uniform(rng, config.lowfield_spacing.lo, config.lowfield_spacing.hi);
        break;
    }
    return spec;
}

Vec3 voxel_axis_spacing(const Affine& affine, const ResolutionSpec& spec)
{
    const auto world = world_axis_of(affine);
    return {spec.voxel_size[world[0]], spec.voxel_size[world[1]], spec.voxel_size[world[2]]};
}

IntensityVolume gaussian_smooth(const IntensityVolume& vol, const Vec3& sigma_voxels)
{
    std::vector<double> buf(vol.data().begin(), vol.data().end());
    std::vector<double> line;
    std::vector<double> result;
    const auto& d = vol.dims();
    const std::int64_t stride[3] = {1, d[0], d[0] * d[1]};

    for (std::size_t axis = 0; axis < 3; ++axis) {
        const double sigma = sigma_voxels[axis];
        if (!(sigma > 0.0))
            continue;
        const auto radius = static_cast<std::int64_t>(std::ceil(4.0 * sigma));
        std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
        for (std::int64_t t = -radius; t <= radius; ++t)
            kernel[static_cast<std::size_t>(t + radius)] = std::exp(-0.5 * static_cast<double>(t * t) / (sigma * sigma));

        const std::int64_t n = d[axis];
        const std::size_t a1 = (axis + 1) % 3;
        const std::size_t a2 = (axis + 2) % 3;
        line.resize(static_cast<std::size_t>(n));
        result.resize(static_cast<std::size_t>(n));
        for (std::int64_t q = 0; q < d[a2]; ++q)
            for (std::int64_t p = 0; p < d[a1]; ++p) {
                const std::int64_t base = p * stride[a1] + q * stride[a2];
                for (std::int64_t t = 0; t < n; ++t)
                    line[static_cast<std::size_t>(t)] = buf[static_cast<std::size_t>(base + t * stride[axis])];
                for (std::int64_t t = 0; t < n; ++t) {
                    double acc = 0.0;
                    double wsum = 0.0;
                    const std::int64_t lo = std::max<std::int64_t>(0, t - radius);
                    const std::int64_t hi = std::min<std::int64_t>(n - 1, t + radius);
                    for (std::int64_t s = lo; s <= hi; ++s) {
                        const double w = kernel[static_cast<std::size_t>(s - t + radius)];
                        acc += w * line[static_cast<std::size_t>(s)];
                        wsum += w;
                    }
                    result[static_cast<std::size_t>(t)] = acc / wsum;
                }
                for (std::int64_t t = 0; t < n; ++t)
                    buf[static_cast<std::size_t>(base + t * stride[axis])] = result[static_cast<std::size_t>(t)];
            }
    }
    IntensityVolume out(vol.geometry());
    auto data = out.data();
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i] = static_cast<float>(buf[i]);
    return out;
}

IntensityVolume simulate_acquisition(const IntensityVolume& vol, const ResolutionSpec& spec)
{
    if (vol.empty())
        throw InvalidArgument("volume is empty");
    if (!vol.geometry().is_isotropic(1.0))
        throw InvalidArgument("acquisition simulation expects a 1mm isotropic volume");
    for (double s : spec.voxel_size)
        if (!(s > 0.0))
            throw InvalidArgument("simulated voxel size must be positive");
    if (spec.regime == Regime::Isotropic1mm)
        return vol;

    const Vec3 spacing = voxel_axis_spacing(vol.affine(), spec);
    bool coarser = false;
    Vec3 sigma{};
    for (std::size_t a = 0; a < 3; ++a)
        if (spacing[a] > 1.0) {
            sigma[a] = spacing[a] / kFwhmPerSigma;
            coarser = true;
        }
    if (!coarser)
        return vol;

    const IntensityVolume blurred = gaussian_smooth(vol, sigma);
    const IntensityVolume low_res = resample_to_grid(blurred, resampled_geometry(vol.geometry(), spacing));
    return resample_to_grid(low_res, vol.geometry());
}

IntensityVolume normalize_wm_median(const IntensityVolume& img, const LabelVolume& labels, const LabelSchema& schema)
{
    require_same_grid(img, labels, "normalize_wm_median");
    std::set<Label> wm(schema.wm_ids().begin(), schema.wm_ids().end());
    std::vector<double> values;
    for (std::size_t n = 0; n < labels.size(); ++n)
        if (wm.count(labels[n]))
            values.push_back(img[n]);
    if (values.empty())
        throw DegenerateInput("no white matter voxels to normalise against");

    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    double median = values[mid];
    if (values.size() % 2 == 0) {
        const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
        median = 0.5 * (lower + median);
    }
    if (!(median > 0.0) || !std::isfinite(median))
        throw DegenerateInput("white matter median is not positive");

    IntensityVolume out(img.geometry());
    auto src = img.data();
    auto dst = out.data();
    for (std::size_t n = 0; n < src.size(); ++n)
        dst[n] = static_cast<float>(static_cast<double>(src[n]) / median);
    return out;
}

IntensityVolume render_gmm(const LabelVolume& labels, const LabelSchema& schema, const GMMParams& params, Rng& rng)
{
    if (params.means.size() != schema.channel_count() || params.stds.size() != schema.channel_count())
        throw InvalidArgument("GMM parameters do not match the label schema");
    IntensityVolume out(labels.geometry());
    auto dst = out.data();
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t n = 0; n < labels.size(); ++n) {
        const std::size_t c = schema.channel(labels[n]);
        double v = params.means[c];
        if (params.stds[c] > 0.0)
            v += params.stds[c] * normal(rng);
        dst[n] = static_cast<float>(std::max(0.0, v));
    }
    return out;
}

SynthSample generate_sample(const TrainingPair& pair, const LabelSchema& schema, const GeneratorConfig& config, Rng& rng)
{
    config.validate();
    require_same_grid(pair.image, pair.labels, "generate_sample");
    if (!pair.image.geometry().is_isotropic(1.0))
        throw InvalidArgument("training pairs must be on a 1mm isotropic grid");
    schema.validate(pair.labels);
    const Geometry& grid = pair.image.geometry();

    const DeformationField field = sample_deformation(grid, config, rng);
    IntensityVolume image = apply_deformation(pair.image, field);
    LabelVolume labels = apply_deformation(pair.labels, field, schema.background_id());

    GMMParams gmm = sample_gmm_params(schema, config, rng);
    IntensityVolume gaussian = render_gmm(labels, schema, gmm, rng);

    IntensityVolume bias = sample_bias_field(grid, config, rng);
    {
        auto g = gaussian.data();
        auto b = bias.data();
        for (std::size_t n = 0; n < g.size(); ++n)
            g[n] = static_cast<float>(static_cast<double>(g[n]) * static_cast<double>(b[n]));
    }

    ResolutionSpec resolution = sample_resolution(config, rng);
    IntensityVolume synth = simulate_acquisition(gaussian, resolution);
    IntensityVolume target = normalize_wm_median(image, labels, schema);

    return SynthSample{std::move(synth), std::move(labels), std::move(target), std::move(bias), std::move(gmm),
                       resolution};
}

} // namespace nsf
