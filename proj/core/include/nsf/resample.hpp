#pragma once

#include <cstddef>
#include <vector>

#include "nsf/label_schema.hpp"
#include "nsf/volume.hpp"

namespace nsf {

enum class Interpolation { Trilinear };

/// Grid with the requested spacing covering the same field of view, centred on
/// the source FOV: m = ceil(n * old / new) voxels per axis, directions kept.
Geometry resampled_geometry(const Geometry& source, const Vec3& spacing);

/// Sampling convention shared by every geometric operation: a continuous
/// voxel coordinate inside the source field of view [-0.5, n - 0.5] is
/// clamped to the outermost voxel centres; anything beyond takes the
/// background value.
IntensityVolume resample(const IntensityVolume& vol, const Vec3& spacing,
                         Interpolation method = Interpolation::Trilinear);
LabelVolume resample_labels(const LabelVolume& vol, const Vec3& spacing, Label background = 0);

IntensityVolume resample_to_grid(const IntensityVolume& vol, const Geometry& target, float background = 0.0f);
LabelVolume resample_labels_to_grid(const LabelVolume& vol, const Geometry& target, Label background = 0);

/// Trilinear sample at a continuous voxel coordinate (x-fastest indices).
double sample_trilinear(const IntensityVolume& vol, const Vec3& voxel, double background = 0.0);
Label sample_nearest(const LabelVolume& vol, const Vec3& voxel, Label background = 0);

/// Pull-back warp: output(v) = input(source(v)) where source(v) is the
/// voxel position of world point T(p(v)) + d(v). T is a world-space affine,
/// d a smooth displacement (mm) interpolated from a coarse control grid whose
/// corner nodes sit on the corner voxels of the target grid.
class DeformationField {
public:
    static DeformationField identity(const Dims& dims);

    DeformationField(const Dims& dims, const Affine& world_transform, const Dims& control_dims,
                     std::vector<Vec3> control_displacements_mm);

    const Dims& dims() const { return dims_; }
    const Affine& world_transform() const { return world_transform_; }
    const Dims& control_dims() const { return control_dims_; }
    const std::vector<Vec3>& control_displacements() const { return control_; }

    bool is_identity() const;
    /// Smooth (nonlinear) part at voxel (i, j, k), world mm.
    Vec3 nonlinear_displacement(std::int64_t i, std::int64_t j, std::int64_t k) const;
    /// Total world displacement q - p at voxel (i, j, k) of a volume placed by `affine`.
    Vec3 displacement_mm(const Affine& affine, std::int64_t i, std::int64_t j, std::int64_t k) const;

private:
    Dims dims_;
    Affine world_transform_;
    Dims control_dims_;
    std::vector<Vec3> control_;
};

IntensityVolume apply_deformation(const IntensityVolume& vol, const DeformationField& field);
LabelVolume apply_deformation(const LabelVolume& vol, const DeformationField& field, Label background = 0);

/// Voxel axis carrying left-right: the one whose unit direction has the
/// largest |world x|. Throws OrientationError when two axes tie.
std::size_t lr_axis(const Affine& affine);

template <typename T>
Volume<T> mirror(const Volume<T>& vol, std::size_t axis)
{
    Volume<T> out(vol.geometry());
    const auto& d = vol.dims();
    for (std::int64_t k = 0; k < d[2]; ++k)
        for (std::int64_t j = 0; j < d[1]; ++j)
            for (std::int64_t i = 0; i < d[0]; ++i) {
                std::int64_t s[3] = {i, j, k};
                s[axis] = d[axis] - 1 - s[axis];
                out(i, j, k) = vol(s[0], s[1], s[2]);
            }
    return out;
}

IntensityVolume flip_lr(const IntensityVolume& vol);
/// Mirrors and exchanges lateral pair ids.
LabelVolume flip_lr(const LabelVolume& vol, const LabelSchema& schema);
/// Posterior stack in schema channel order: mirrors each channel and swaps lateral channels.
std::vector<IntensityVolume> flip_lr_channels(const std::vector<IntensityVolume>& channels,
                                              const LabelSchema& schema);

} // namespace nsf
