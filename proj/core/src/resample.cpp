#include "nsf/resample.hpp"

#include <algorithm>
#include <cmath>

namespace nsf {

namespace {

// Coordinates this close to a lattice point are treated as on it, so that
// integer shifts and identity maps reproduce voxel values bit-exactly.
constexpr double kSnap = 1e-9;

struct AxisSample {
    bool inside = false;
    std::int64_t i0 = 0;
    std::int64_t i1 = 0;
    double frac = 0.0;
};

AxisSample axis_sample(double c, std::int64_t n)
{
    const double r = std::round(c);
    if (std::abs(c - r) < kSnap)
        c = r;
    if (!(c >= -0.5 - kSnap && c <= static_cast<double>(n) - 0.5 + kSnap))
        return {};
    c = std::clamp(c, 0.0, static_cast<double>(n - 1));
    AxisSample s;
    s.inside = true;
    s.i0 = static_cast<std::int64_t>(std::floor(c));
    s.frac = c - static_cast<double>(s.i0);
    s.i1 = std::min(s.i0 + 1, n - 1);
    if (s.i1 == s.i0)
        s.frac = 0.0;
    return s;
}

std::int64_t axis_nearest(double c, std::int64_t n, bool& inside)
{
    const double r = std::round(c);
    if (std::abs(c - r) < kSnap)
        c = r;
    inside = c >= -0.5 - kSnap && c <= static_cast<double>(n) - 0.5 + kSnap;
    if (!inside)
        return 0;
    return std::clamp(static_cast<std::int64_t>(std::floor(c + 0.5)), std::int64_t{0}, n - 1);
}

bool same_spacing(const Vec3& a, const Vec3& b)
{
    for (std::size_t i = 0; i < 3; ++i)
        if (std::abs(a[i] - b[i]) > 1e-12)
            return false;
    return true;
}

void check_spacing(const Vec3& spacing)
{
    for (double s : spacing)
        if (!(s > 0.0) || !std::isfinite(s))
            throw InvalidArgument("target spacing must be positive");
}

template <typename T>
void check_nonempty(const Volume<T>& vol)
{
    if (vol.empty())
        throw InvalidArgument("volume is empty");
}

Vec3 voxel_of(std::int64_t i, std::int64_t j, std::int64_t k)
{
    return {static_cast<double>(i), static_cast<double>(j), static_cast<double>(k)};
}

} // namespace

double sample_trilinear(const IntensityVolume& vol, const Vec3& voxel, double background)
{
    const auto& d = vol.dims();
    const AxisSample x = axis_sample(voxel[0], d[0]);
    const AxisSample y = axis_sample(voxel[1], d[1]);
    const AxisSample z = axis_sample(voxel[2], d[2]);
    if (!x.inside || !y.inside || !z.inside)
        return background;

    auto lerp_x = [&](std::int64_t j, std::int64_t k) {
        const double a = vol(x.i0, j, k);
        if (x.frac == 0.0)
            return a;
        return a * (1.0 - x.frac) + static_cast<double>(vol(x.i1, j, k)) * x.frac;
    };
    auto lerp_xy = [&](std::int64_t k) {
        const double a = lerp_x(y.i0, k);
        if (y.frac == 0.0)
            return a;
        return a * (1.0 - y.frac) + lerp_x(y.i1, k) * y.frac;
    };
    const double a = lerp_xy(z.i0);
    if (z.frac == 0.0)
        return a;
    return a * (1.0 - z.frac) + lerp_xy(z.i1) * z.frac;
}

Label sample_nearest(const LabelVolume& vol, const Vec3& voxel, Label background)
{
    const auto& d = vol.dims();
    bool in_x = false, in_y = false, in_z = false;
    const auto i = axis_nearest(voxel[0], d[0], in_x);
    const auto j = axis_nearest(voxel[1], d[1], in_y);
    const auto k = axis_nearest(voxel[2], d[2], in_z);
    if (!in_x || !in_y || !in_z)
        return background;
    return vol(i, j, k);
}

Geometry resampled_geometry(const Geometry& source, const Vec3& spacing)
{
    check_spacing(spacing);
    source.validate();
    const Vec3 old_spacing = source.voxel_size();
    const Affine& a = source.affine;

    Geometry out;
    Affine linear = a;
    Vec3 centre_old{};
    Vec3 centre_new{};
    for (std::size_t ax = 0; ax < 3; ++ax) {
        const double n = static_cast<double>(source.dims[ax]);
        const double extent = n * old_spacing[ax] / spacing[ax];
        out.dims[ax] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(extent - 1e-9)));
        for (std::size_t r = 0; r < 3; ++r)
            linear(r, ax) = a(r, ax) / old_spacing[ax] * spacing[ax];
        centre_old[ax] = 0.5 * (n - 1.0);
        centre_new[ax] = 0.5 * static_cast<double>(out.dims[ax] - 1);
    }
    const Vec3 world_centre = a.apply(centre_old);
    const Vec3 offset = linear.apply_linear(centre_new);
    linear.set_translation({world_centre[0] - offset[0], world_centre[1] - offset[1], world_centre[2] - offset[2]});
    out.affine = linear;
    return out;
}

IntensityVolume resample_to_grid(const IntensityVolume& vol, const Geometry& target, float background)
{
    check_nonempty(vol);
    target.validate();
    if (vol.geometry().same_grid(target, 1e-12))
        return vol;
    const Affine map = vol.affine().inverse() * target.affine;
    IntensityVolume out(target, background);
    const auto& d = target.dims;
    for (std::int64_t k = 0; k < d[2]; ++k)
        for (std::int64_t j = 0; j < d[1]; ++j)
            for (std::int64_t i = 0; i < d[0]; ++i)
                out(i, j, k) = static_cast<float>(sample_trilinear(vol, map.apply(voxel_of(i, j, k)), background));
    return out;
}

LabelVolume resample_labels_to_grid(const LabelVolume& vol, const Geometry& target, Label background)
{
    check_nonempty(vol);
    target.validate();
    if (vol.geometry().same_grid(target, 1e-12))
        return vol;
    const Affine map = vol.affine().inverse() * target.affine;
    LabelVolume out(target, background);
    const auto& d = target.dims;
    for (std::int64_t k = 0; k < d[2]; ++k)
        for (std::int64_t j = 0; j < d[1]; ++j)
            for (std::int64_t i = 0; i < d[0]; ++i)
                out(i, j, k) = sample_nearest(vol, map.apply(voxel_of(i, j, k)), background);
    return out;
}

IntensityVolume resample(const IntensityVolume& vol, const Vec3& spacing, Interpolation)
{
    check_spacing(spacing);
    check_nonempty(vol);
    if (same_spacing(vol.voxel_size(), spacing))
        return vol;
    return resample_to_grid(vol, resampled_geometry(vol.geometry(), spacing));
}

LabelVolume resample_labels(const LabelVolume& vol, const Vec3& spacing, Label background)
{
    check_spacing(spacing);
    check_nonempty(vol);
    if (same_spacing(vol.voxel_size(), spacing))
        return vol;
    return resample_labels_to_grid(vol, resampled_geometry(vol.geometry(), spacing), background);
}

// --- deformation -----------------------------------------------------------

DeformationField DeformationField::identity(const Dims& dims) { return DeformationField(dims, Affine{}, {0, 0, 0}, {}); }

DeformationField::DeformationField(const Dims& dims, const Affine& world_transform, const Dims& control_dims,
                                   std::vector<Vec3> control_displacements_mm)
    : dims_(dims), world_transform_(world_transform), control_dims_(control_dims), control_(std::move(control_displacements_mm))
{
    for (auto d : dims_)
        if (d <= 0)
            throw InvalidArgument("deformation dims must be positive");
    const auto expected = control_.empty() ? 0
                                           : static_cast<std::size_t>(control_dims_[0] * control_dims_[1] * control_dims_[2]);
    if (!control_.empty() && (control_dims_[0] <= 0 || control_dims_[1] <= 0 || control_dims_[2] <= 0 ||
                              expected != control_.size()))
        throw InvalidArgument("control grid size does not match control dims");
    for (const auto& v : control_)
        for (double c : v)
            if (!std::isfinite(c))
                throw InvalidArgument("deformation field must be finite");
    for (double c : world_transform_.row_major())
        if (!std::isfinite(c))
            throw InvalidArgument("deformation field must be finite");
}

bool DeformationField::is_identity() const
{
    if (world_transform_.row_major() != Affine{}.row_major())
        return false;
    for (const auto& v : control_)
        if (v[0] != 0.0 || v[1] != 0.0 || v[2] != 0.0)
            return false;
    return true;
}

Vec3 DeformationField::nonlinear_displacement(std::int64_t i, std::int64_t j, std::int64_t k) const
{
    if (control_.empty())
        return {0.0, 0.0, 0.0};
    const std::int64_t v[3] = {i, j, k};
    AxisSample s[3];
    for (std::size_t a = 0; a < 3; ++a) {
        const double u = dims_[a] > 1 ? static_cast<double>(v[a]) * static_cast<double>(control_dims_[a] - 1) /
                                            static_cast<double>(dims_[a] - 1)
                                      : 0.0;
        s[a] = axis_sample(u, control_dims_[a]);
    }
    auto at = [&](std::int64_t x, std::int64_t y, std::int64_t z) -> const Vec3& {
        return control_[static_cast<std::size_t>(x + control_dims_[0] * (y + control_dims_[1] * z))];
    };
    Vec3 out{};
    for (int dz = 0; dz < 2; ++dz)
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
                const double w = (dx ? s[0].frac : 1.0 - s[0].frac) * (dy ? s[1].frac : 1.0 - s[1].frac) *
                                 (dz ? s[2].frac : 1.0 - s[2].frac);
                if (w == 0.0)
                    continue;
                const Vec3& c = at(dx ? s[0].i1 : s[0].i0, dy ? s[1].i1 : s[1].i0, dz ? s[2].i1 : s[2].i0);
                for (std::size_t a = 0; a < 3; ++a)
                    out[a] += w * c[a];
            }
    return out;
}

Vec3 DeformationField::displacement_mm(const Affine& affine, std::int64_t i, std::int64_t j, std::int64_t k) const
{
    const Vec3 p = affine.apply(voxel_of(i, j, k));
    const Vec3 q = world_transform_.apply(p);
    const Vec3 d = nonlinear_displacement(i, j, k);
    return {q[0] - p[0] + d[0], q[1] - p[1] + d[1], q[2] - p[2] + d[2]};
}

namespace {

template <typename T, typename Sampler>
Volume<T> warp(const Volume<T>& vol, const DeformationField& field, Sampler&& sample)
{
    check_nonempty(vol);
    if (vol.dims() != field.dims())
        throw InvalidArgument("deformation field dims do not match volume dims");
    if (field.is_identity())
        return vol;
    const Affine inv = vol.affine().inverse();
    Volume<T> out(vol.geometry());
    const auto& d = vol.dims();
    for (std::int64_t k = 0; k < d[2]; ++k)
        for (std::int64_t j = 0; j < d[1]; ++j)
            for (std::int64_t i = 0; i < d[0]; ++i) {
                const Vec3 disp = inv.apply_linear(field.displacement_mm(vol.affine(), i, j, k));
                const Vec3 src{static_cast<double>(i) + disp[0], static_cast<double>(j) + disp[1],
                               static_cast<double>(k) + disp[2]};
                out(i, j, k) = sample(src);
            }
    return out;
}

} // namespace

IntensityVolume apply_deformation(const IntensityVolume& vol, const DeformationField& field)
{
    return warp(vol, field, [&](const Vec3& src) { return static_cast<float>(sample_trilinear(vol, src, 0.0)); });
}

LabelVolume apply_deformation(const LabelVolume& vol, const DeformationField& field, Label background)
{
    return warp(vol, field, [&](const Vec3& src) { return sample_nearest(vol, src, background); });
}

// --- left-right flip ---------------------------------------------------------

std::size_t lr_axis(const Affine& affine)
{
    const Vec3 norms = affine.column_norms();
    double score[3];
    for (std::size_t c = 0; c < 3; ++c)
        score[c] = norms[c] > 0.0 ? std::abs(affine(0, c)) / norms[c] : 0.0;
    std::size_t best = 0;
    for (std::size_t c = 1; c < 3; ++c)
        if (score[c] > score[best])
            best = c;
    for (std::size_t c = 0; c < 3; ++c)
        if (c != best && std::abs(score[c] - score[best]) < 1e-6)
            throw OrientationError("left-right axis is ambiguous for this affine");
    if (score[best] < 1e-6)
        throw OrientationError("no voxel axis has a left-right component");
    return best;
}

IntensityVolume flip_lr(const IntensityVolume& vol) { return mirror(vol, lr_axis(vol.affine())); }

LabelVolume flip_lr(const LabelVolume& vol, const LabelSchema& schema)
{
    LabelVolume out = mirror(vol, lr_axis(vol.affine()));
    for (auto& v : out.data())
        v = schema.lateral_counterpart(v);
    return out;
}

std::vector<IntensityVolume> flip_lr_channels(const std::vector<IntensityVolume>& channels, const LabelSchema& schema)
{
    if (channels.size() != schema.channel_count())
        throw InvalidArgument("channel count does not match the label schema");
    const auto perm = schema.lateral_channel_permutation();
    std::vector<IntensityVolume> out;
    out.reserve(channels.size());
    for (std::size_t c = 0; c < channels.size(); ++c)
        out.push_back(flip_lr(channels[perm[c]]));
    return out;
}

} // namespace nsf
