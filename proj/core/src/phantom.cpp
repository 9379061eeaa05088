#include "nsf/phantom.hpp"

#include <algorithm>
#include <cmath>

namespace nsf {

namespace {

struct Blob {
    Vec3 centre;  // right hemisphere (x > 0) for lateral structures
    Vec3 radii;
    Label left;   // same as right for midline structures
    Label right;
};

// Units of the head radius; painted in order, later entries win.
const Blob kBlobs[] = {
    {{0.30, -0.55, -0.55}, {0.25, 0.22, 0.20}, 8, 47},
    {{0.30, -0.55, -0.55}, {0.12, 0.10, 0.09}, 7, 46},
    {{0.00, -0.20, -0.55}, {0.12, 0.12, 0.25}, 16, 16},
    {{0.15, 0.05, 0.15}, {0.08, 0.30, 0.10}, 4, 43},
    {{0.45, -0.10, -0.20}, {0.04, 0.06, 0.04}, 5, 44},
    {{0.00, -0.05, 0.00}, {0.03, 0.12, 0.08}, 14, 14},
    {{0.00, -0.40, -0.40}, {0.05, 0.05, 0.05}, 15, 15},
    {{0.12, -0.15, 0.02}, {0.09, 0.14, 0.09}, 10, 49},
    {{0.20, 0.25, 0.12}, {0.07, 0.07, 0.07}, 11, 50},
    {{0.33, 0.05, 0.00}, {0.07, 0.16, 0.10}, 12, 51},
    {{0.25, 0.00, -0.02}, {0.05, 0.05, 0.05}, 13, 52},
    {{0.32, -0.20, -0.25}, {0.06, 0.15, 0.06}, 17, 53},
    {{0.32, 0.05, -0.30}, {0.06, 0.06, 0.06}, 18, 54},
    {{0.12, 0.35, -0.05}, {0.04, 0.04, 0.04}, 26, 58},
    {{0.12, -0.10, -0.25}, {0.06, 0.06, 0.06}, 28, 60},
    {{0.28, 0.15, -0.12}, {0.045, 0.045, 0.045}, 30, 62},
    {{0.18, -0.20, 0.20}, {0.045, 0.045, 0.045}, 31, 63},
};

struct Tissue {
    Label id;
    float intensity;
};

const Tissue kTissue[] = {
    {0, 0.0f},    {24, 30.0f},  {3, 80.0f},   {42, 80.0f},  {2, 110.0f},  {41, 110.0f}, {8, 80.0f},
    {47, 80.0f},  {7, 110.0f},  {46, 110.0f}, {16, 105.0f}, {4, 25.0f},   {43, 25.0f},  {5, 25.0f},
    {44, 25.0f},  {14, 25.0f},  {15, 25.0f},  {10, 95.0f},  {49, 95.0f},  {11, 85.0f},  {50, 85.0f},
    {12, 90.0f},  {51, 90.0f},  {13, 100.0f}, {52, 100.0f}, {17, 78.0f},  {53, 78.0f},  {18, 80.0f},
    {54, 80.0f},  {26, 85.0f},  {58, 85.0f},  {28, 100.0f}, {60, 100.0f}, {30, 70.0f},  {62, 70.0f},
    {31, 60.0f},  {63, 60.0f},  {77, 60.0f},
};

bool inside(const Vec3& u, const Vec3& c, const Vec3& r)
{
    double s = 0.0;
    for (std::size_t a = 0; a < 3; ++a) {
        const double d = (u[a] - c[a]) / r[a];
        s += d * d;
    }
    return s <= 1.0;
}

} // namespace

TrainingPair make_phantom(const LabelSchema& schema, const PhantomOptions& options)
{
    for (const auto& t : kTissue)
        if (!schema.contains(t.id))
            throw InvalidArgument("phantom needs label " + std::to_string(t.id) + " in the schema");
    if (options.spacing <= 0.0 || options.noise_std < 0.0)
        throw InvalidArgument("phantom spacing must be positive and noise non-negative");

    const Geometry geometry = isotropic_geometry(options.dims, options.spacing);
    geometry.validate();
    double extent = static_cast<double>(std::min({options.dims[0], options.dims[1], options.dims[2]}));

    Rng rng(options.seed);
    // head size varies between seeds so cohort volumes are not all equal
    const double head_scale = options.jitter ? std::uniform_real_distribution<double>(0.9, 1.0)(rng) : 1.0;
    const double head_radius = 0.45 * head_scale * extent * options.spacing;
    std::normal_distribution<double> shift(0.0, 0.02);
    std::uniform_real_distribution<double> grow(0.85, 1.15);

    struct Placed {
        Vec3 centre;
        Vec3 radii;
        Label id;
    };
    std::vector<Placed> placed;
    for (const auto& b : kBlobs) {
        for (int side = 0; side < (b.left == b.right ? 1 : 2); ++side) {
            Placed p{b.centre, {1.5 * b.radii[0], 1.5 * b.radii[1], 1.5 * b.radii[2]}, side == 0 ? b.right : b.left};
            if (side == 1)
                p.centre[0] = -p.centre[0];
            if (options.jitter) {
                for (auto& c : p.centre)
                    c += shift(rng);
                const double g = grow(rng);
                for (auto& r : p.radii)
                    r *= g;
            }
            placed.push_back(p);
        }
    }
    Placed lesion{{0.25, 0.0, 0.35}, {0.06, 0.06, 0.06}, schema.wmh_id()};
    if (options.jitter) {
        std::uniform_real_distribution<double> lesion_scale(0.5, 1.5);
        const double g = lesion_scale(rng);
        for (auto& r : lesion.radii)
            r *= g;
    }
    placed.push_back(lesion);

    LabelVolume labels(geometry, schema.background_id());
    IntensityVolume image(geometry, 0.0f);
    std::normal_distribution<double> noise(0.0, options.noise_std);
    std::vector<float> intensity_of(static_cast<std::size_t>(schema.channel_count()), 0.0f);
    for (const auto& t : kTissue)
        intensity_of[schema.channel(t.id)] = t.intensity;

    const auto& d = options.dims;
    for (std::int64_t k = 0; k < d[2]; ++k)
        for (std::int64_t j = 0; j < d[1]; ++j)
            for (std::int64_t i = 0; i < d[0]; ++i) {
                const Vec3 w = geometry.affine.apply(
                    {static_cast<double>(i), static_cast<double>(j), static_cast<double>(k)});
                const Vec3 u{w[0] / head_radius, w[1] / head_radius, w[2] / head_radius};
                const double r = std::sqrt(u[0] * u[0] + u[1] * u[1] + (u[2] / 0.9) * (u[2] / 0.9));
                Label id = schema.background_id();
                if (r < 0.75)
                    id = u[0] < 0.0 ? 2 : 41;
                else if (r < 0.88)
                    id = u[0] < 0.0 ? 3 : 42;
                else if (r < 0.95)
                    id = 24;
                if (r < 0.88)
                    for (const auto& p : placed)
                        if (inside(u, p.centre, p.radii))
                            id = p.id;
                labels(i, j, k) = id;
                double v = intensity_of[schema.channel(id)];
                if (id != schema.background_id() && options.noise_std > 0.0)
                    v += noise(rng);
                image(i, j, k) = static_cast<float>(std::max(v, 0.0));
            }
    return {std::move(image), std::move(labels)};
}

} // namespace nsf
