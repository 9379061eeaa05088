#include "nsf/affine.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "nsf/error.hpp"

namespace nsf {

namespace {

using Mat4 = Eigen::Matrix<double, 4, 4, Eigen::RowMajor>;

Mat4 as_eigen(const std::array<double, 16>& m) { return Eigen::Map<const Mat4>(m.data()); }

std::array<double, 16> from_eigen(const Mat4& e)
{
    std::array<double, 16> out{};
    Eigen::Map<Mat4>(out.data()) = e;
    return out;
}

} // namespace

Affine::Affine() : m_{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1} {}

Affine::Affine(const std::array<double, 16>& row_major) : m_(row_major)
{
    m_[12] = 0.0;
    m_[13] = 0.0;
    m_[14] = 0.0;
    m_[15] = 1.0;
}

Affine Affine::from_spacing(const Vec3& spacing, const Vec3& origin)
{
    Affine a;
    for (std::size_t i = 0; i < 3; ++i) {
        a(i, i) = spacing[i];
        a(i, 3) = origin[i];
    }
    return a;
}

Vec3 Affine::apply(const Vec3& v) const
{
    Vec3 out{};
    for (std::size_t r = 0; r < 3; ++r)
        out[r] = m_[r * 4] * v[0] + m_[r * 4 + 1] * v[1] + m_[r * 4 + 2] * v[2] + m_[r * 4 + 3];
    return out;
}

Vec3 Affine::apply_linear(const Vec3& v) const
{
    Vec3 out{};
    for (std::size_t r = 0; r < 3; ++r)
        out[r] = m_[r * 4] * v[0] + m_[r * 4 + 1] * v[1] + m_[r * 4 + 2] * v[2];
    return out;
}

void Affine::set_translation(const Vec3& t)
{
    m_[3] = t[0];
    m_[7] = t[1];
    m_[11] = t[2];
}

Vec3 Affine::column_norms() const
{
    Vec3 out{};
    for (std::size_t c = 0; c < 3; ++c)
        out[c] = std::sqrt(m_[c] * m_[c] + m_[4 + c] * m_[4 + c] + m_[8 + c] * m_[8 + c]);
    return out;
}

double Affine::determinant() const { return as_eigen(m_).topLeftCorner<3, 3>().determinant(); }

bool Affine::invertible() const
{
    const double det = determinant();
    if (!std::isfinite(det))
        return false;
    const auto n = column_norms();
    const double scale = n[0] * n[1] * n[2];
    return scale > 0.0 && std::abs(det) > 1e-12 * scale;
}

Affine Affine::inverse() const
{
    if (!invertible())
        throw InvalidArgument("affine is singular");
    return Affine(from_eigen(as_eigen(m_).inverse()));
}

Affine Affine::operator*(const Affine& rhs) const
{
    return Affine(from_eigen(as_eigen(m_) * as_eigen(rhs.m_)));
}

bool Affine::approx_equal(const Affine& other, double tol) const
{
    for (std::size_t i = 0; i < 16; ++i)
        if (std::abs(m_[i] - other.m_[i]) > tol)
            return false;
    return true;
}

} // namespace nsf
