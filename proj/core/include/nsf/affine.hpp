#pragma once

#include <array>
#include <cstddef>

namespace nsf {

using Vec3 = std::array<double, 3>;

/// Voxel-to-world transform (mm), stored row-major as a 4x4 homogeneous
/// matrix whose last row is fixed at (0, 0, 0, 1).
class Affine {
public:
    Affine();
    explicit Affine(const std::array<double, 16>& row_major);

    static Affine identity() { return Affine{}; }
    static Affine from_spacing(const Vec3& spacing, const Vec3& origin = {0.0, 0.0, 0.0});

    double operator()(std::size_t row, std::size_t col) const { return m_[row * 4 + col]; }
    double& operator()(std::size_t row, std::size_t col) { return m_[row * 4 + col]; }

    const std::array<double, 16>& row_major() const { return m_; }

    Vec3 apply(const Vec3& voxel) const;
    /// Applies only the 3x3 linear part (direction vectors, no translation).
    Vec3 apply_linear(const Vec3& v) const;
    Vec3 translation() const { return {m_[3], m_[7], m_[11]}; }
    void set_translation(const Vec3& t);

    /// Column norms of the linear part; these are the voxel sizes.
    Vec3 column_norms() const;
    double determinant() const;
    bool invertible() const;
    /// Throws InvalidArgument when singular.
    Affine inverse() const;

    Affine operator*(const Affine& rhs) const;
    bool approx_equal(const Affine& other, double tol) const;

private:
    std::array<double, 16> m_;
};

} // namespace nsf
