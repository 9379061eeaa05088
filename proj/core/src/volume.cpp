#include "nsf/volume.hpp"

#include <cmath>

namespace nsf {

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Orientation: return "orientation-error";
    case ErrorKind::Format: return "format-error";
    case ErrorKind::Unsupported: return "unsupported-error";
    case ErrorKind::Corrupt: return "corrupt-error";
    case ErrorKind::Io: return "io-error";
    case ErrorKind::DegenerateInput: return "degenerate-input";
    case ErrorKind::Domain: return "domain-error";
    case ErrorKind::Contract: return "contract-error";
    }
    return "error";
}

void Geometry::validate() const
{
    for (auto d : dims)
        if (d <= 0)
            throw InvalidArgument("volume dims must be positive");
    if (!affine.invertible())
        throw InvalidArgument("volume affine is not invertible");
}

bool Geometry::is_isotropic(double spacing, double tol) const
{
    for (double s : voxel_size())
        if (std::abs(s - spacing) > tol)
            return false;
    return true;
}

Geometry isotropic_geometry(const Dims& dims, double spacing)
{
    Vec3 origin{};
    for (std::size_t a = 0; a < 3; ++a)
        origin[a] = -0.5 * static_cast<double>(dims[a] - 1) * spacing;
    return Geometry{dims, Affine::from_spacing({spacing, spacing, spacing}, origin)};
}

} // namespace nsf
