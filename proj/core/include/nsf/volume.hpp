#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "nsf/affine.hpp"
#include "nsf/error.hpp"

namespace nsf {

using Dims = std::array<std::int64_t, 3>;
using Label = std::int32_t;

/// Voxel lattice plus its placement in world space.
struct Geometry {
    Dims dims{1, 1, 1};
    Affine affine;

    std::size_t voxel_count() const
    {
        return static_cast<std::size_t>(dims[0] * dims[1] * dims[2]);
    }
    Vec3 voxel_size() const { return affine.column_norms(); }
    double voxel_volume() const
    {
        const auto s = voxel_size();
        return s[0] * s[1] * s[2];
    }
    bool is_isotropic(double spacing, double tol = 1e-4) const;
    bool same_grid(const Geometry& other, double tol = 1e-5) const
    {
        return dims == other.dims && affine.approx_equal(other.affine, tol);
    }
    /// Throws InvalidArgument for non-positive dims or a singular affine.
    void validate() const;
};

/// Dense scalar volume, x-fastest contiguous storage. Copies are deep.
template <typename T>
class Volume {
public:
    using value_type = T;

    Volume() = default;

    Volume(const Geometry& geometry, T fill = T{}) : geometry_(geometry)
    {
        geometry_.validate();
        data_.assign(geometry_.voxel_count(), fill);
    }

    Volume(const Geometry& geometry, std::vector<T> data) : geometry_(geometry), data_(std::move(data))
    {
        geometry_.validate();
        if (data_.size() != geometry_.voxel_count())
            throw InvalidArgument("volume data length does not match dims");
    }

    Volume(const Dims& dims, const Affine& affine, T fill = T{}) : Volume(Geometry{dims, affine}, fill) {}

    const Geometry& geometry() const { return geometry_; }
    const Dims& dims() const { return geometry_.dims; }
    const Affine& affine() const { return geometry_.affine; }
    Vec3 voxel_size() const { return geometry_.voxel_size(); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::span<const T> data() const { return data_; }
    std::span<T> data() { return data_; }

    std::size_t index(std::int64_t i, std::int64_t j, std::int64_t k) const
    {
        return static_cast<std::size_t>(i + geometry_.dims[0] * (j + geometry_.dims[1] * k));
    }
    T& operator()(std::int64_t i, std::int64_t j, std::int64_t k) { return data_[index(i, j, k)]; }
    const T& operator()(std::int64_t i, std::int64_t j, std::int64_t k) const { return data_[index(i, j, k)]; }
    T& operator[](std::size_t n) { return data_[n]; }
    const T& operator[](std::size_t n) const { return data_[n]; }

    bool operator==(const Volume& other) const
    {
        return geometry_.dims == other.geometry_.dims &&
               geometry_.affine.row_major() == other.geometry_.affine.row_major() && data_ == other.data_;
    }

private:
    Geometry geometry_;
    std::vector<T> data_;
};

using IntensityVolume = Volume<float>;
using LabelVolume = Volume<Label>;

/// Isotropic 1mm geometry centred on the world origin; handy for fixtures.
Geometry isotropic_geometry(const Dims& dims, double spacing = 1.0);

template <typename A, typename B>
void require_same_grid(const Volume<A>& a, const Volume<B>& b, const char* what)
{
    if (!a.geometry().same_grid(b.geometry()))
        throw InvalidArgument(std::string(what) + ": volumes are not on the same grid");
}

} // namespace nsf
