#pragma once

// Fixtures and independent reference computations shared by the unit and
// acceptance suites. Nothing here calls into the code under test except for
// plain data access.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "nsf/generator.hpp"
#include "nsf/label_schema.hpp"
#include "nsf/loss.hpp"
#include "nsf/volume.hpp"

namespace nsf::testing {

class TempDir {
public:
    TempDir()
    {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("nsf-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

/// Background, one lateral WM pair, one lateral hippocampus pair, WMH.
inline LabelSchema small_schema()
{
    return LabelSchema({{0, "Unknown"},
                        {2, "Left-Cerebral-White-Matter"},
                        {41, "Right-Cerebral-White-Matter"},
                        {17, "Left-Hippocampus"},
                        {53, "Right-Hippocampus"},
                        {77, "WM-hypointensities"}},
                       {{2, 41}, {17, 53}}, {2, 41}, 77, 0);
}

inline LabelVolume random_labels(const Geometry& g, const LabelSchema& schema, std::mt19937_64& rng)
{
    std::uniform_int_distribution<std::size_t> pick(0, schema.channel_count() - 1);
    LabelVolume v(g, schema.background_id());
    for (auto& x : v.data())
        x = schema.labels()[pick(rng)].id;
    return v;
}

/// Every schema label at least once (first voxels), the rest random.
inline LabelVolume covering_labels(const Geometry& g, const LabelSchema& schema, std::mt19937_64& rng)
{
    LabelVolume v = random_labels(g, schema, rng);
    for (std::size_t c = 0; c < schema.channel_count() && c < v.size(); ++c)
        v[c] = schema.labels()[c].id;
    return v;
}

inline IntensityVolume random_intensity(const Geometry& g, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0)
{
    std::uniform_real_distribution<double> u(lo, hi);
    IntensityVolume v(g, 0.0f);
    for (auto& x : v.data())
        x = static_cast<float>(u(rng));
    return v;
}

/// Softmax of random logits, stored as float.
inline PredictionBundle random_bundle(const Geometry& g, const LabelSchema& schema, std::mt19937_64& rng)
{
    const std::size_t L = schema.channel_count();
    PredictionBundle b;
    b.soft_labels.assign(L, IntensityVolume(g, 0.0f));
    std::normal_distribution<double> logit(0.0, 2.0);
    std::vector<double> z(L);
    for (std::size_t n = 0; n < g.voxel_count(); ++n) {
        double sum = 0.0;
        for (auto& v : z) {
            v = std::exp(logit(rng));
            sum += v;
        }
        for (std::size_t c = 0; c < L; ++c)
            b.soft_labels[c][n] = static_cast<float>(z[c] / sum);
    }
    b.pred_image = random_intensity(g, rng, 0.0, 2.0);
    b.pred_bias = random_intensity(g, rng, 0.5, 2.0);
    return b;
}

inline SynthSample random_sample(const Geometry& g, const LabelSchema& schema, std::mt19937_64& rng)
{
    SynthSample s;
    s.labels = random_labels(g, schema, rng);
    s.target_image = random_intensity(g, rng, 0.0, 2.0);
    s.target_bias = random_intensity(g, rng, 0.5, 2.0);
    s.synth = s.target_image;
    return s;
}

// --- loss oracles: plain per-voxel loops over the label list ----------------

inline double oracle_cross_entropy(const PredictionBundle& p, const LabelVolume& t, const LabelSchema& schema)
{
    const auto& labels = schema.labels();
    double total = 0.0;
    for (std::size_t v = 0; v < t.size(); ++v) {
        double mass = 0.0;
        double hit = 0.0;
        for (std::size_t l = 0; l < labels.size(); ++l) {
            mass += static_cast<double>(p.soft_labels[l][v]);
            if (labels[l].id == t[v])
                hit = static_cast<double>(p.soft_labels[l][v]);
        }
        total += -std::log(std::max(hit / mass, 1e-12));
    }
    return total / static_cast<double>(t.size());
}

inline double oracle_soft_dice(const PredictionBundle& p, const LabelVolume& t, const LabelSchema& schema,
                               bool include_background = true, double eps = 1e-6)
{
    const auto& labels = schema.labels();
    double sum = 0.0;
    int used = 0;
    for (std::size_t l = 0; l < labels.size(); ++l) {
        if (!include_background && labels[l].id == schema.background_id())
            continue;
        double inter = 0.0, ps = 0.0, ts = 0.0;
        for (std::size_t v = 0; v < t.size(); ++v) {
            const double pv = p.soft_labels[l][v];
            const double tv = t[v] == labels[l].id ? 1.0 : 0.0;
            inter += pv * tv;
            ps += pv;
            ts += tv;
        }
        sum += 2.0 * inter / (ps + ts + eps);
        ++used;
    }
    return sum / used;
}

inline double oracle_total_loss(const PredictionBundle& p, const SynthSample& s, const LabelSchema& schema)
{
    double l1 = 0.0, lb = 0.0;
    for (std::size_t v = 0; v < s.labels.size(); ++v) {
        l1 += std::fabs(double(p.pred_image[v]) - double(s.target_image[v]));
        lb += std::fabs(std::log(double(p.pred_bias[v])) - std::log(double(s.target_bias[v])));
    }
    const double n = static_cast<double>(s.labels.size());
    return oracle_cross_entropy(p, s.labels, schema) - oracle_soft_dice(p, s.labels, schema) + l1 / n + lb / n;
}

/// Set-count Dice: 2|A n B| / (|A| + |B|), 1 when both empty.
inline double oracle_hard_dice(const LabelVolume& a, const LabelVolume& b, Label id)
{
    std::set<std::size_t> sa, sb;
    for (std::size_t v = 0; v < a.size(); ++v) {
        if (a[v] == id)
            sa.insert(v);
        if (b[v] == id)
            sb.insert(v);
    }
    if (sa.empty() && sb.empty())
        return 1.0;
    std::size_t both = 0;
    for (auto v : sa)
        both += sb.count(v);
    return 2.0 * double(both) / double(sa.size() + sb.size());
}

// --- correlation oracles ---------------------------------------------------

/// One-pass textbook formula in long double.
inline double oracle_pearson(const std::vector<double>& x, const std::vector<double>& y)
{
    long double n = x.size(), sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += (long double)x[i] * x[i];
        syy += (long double)y[i] * y[i];
        sxy += (long double)x[i] * y[i];
    }
    const long double num = n * sxy - sx * sy;
    const long double den = std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
    return static_cast<double>(num / den);
}

/// Rank = 1 + #smaller + (#ties - 1) / 2, by direct counting.
inline std::vector<double> oracle_ranks(const std::vector<double>& v)
{
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double less = 0, equal = 0;
        for (double w : v) {
            less += w < v[i];
            equal += w == v[i];
        }
        r[i] = 1.0 + less + (equal - 1.0) / 2.0;
    }
    return r;
}

inline double oracle_spearman(const std::vector<double>& x, const std::vector<double>& y)
{
    return oracle_pearson(oracle_ranks(x), oracle_ranks(y));
}

// --- geometry oracles --------------------------------------------------------

/// Brute-force nearest input voxel to each output voxel centre (in world
/// space); equidistant candidates resolve towards the higher index on each
/// axis, and centres outside the input field of view get `background`.
inline LabelVolume oracle_nearest_resample(const LabelVolume& in, const Geometry& out_grid, Label background)
{
    LabelVolume out(out_grid, background);
    const auto& a = in.affine();
    const auto& d = in.dims();
    const Vec3 s = in.voxel_size();
    for (std::int64_t k = 0; k < out_grid.dims[2]; ++k)
        for (std::int64_t j = 0; j < out_grid.dims[1]; ++j)
            for (std::int64_t i = 0; i < out_grid.dims[0]; ++i) {
                const Vec3 w = out_grid.affine.apply({double(i), double(j), double(k)});
                double best = std::numeric_limits<double>::infinity();
                std::array<std::int64_t, 3> pick{-1, -1, -1};
                for (std::int64_t z = 0; z < d[2]; ++z)
                    for (std::int64_t y = 0; y < d[1]; ++y)
                        for (std::int64_t x = 0; x < d[0]; ++x) {
                            const Vec3 c = a.apply({double(x), double(y), double(z)});
                            const double dist = std::hypot(c[0] - w[0], c[1] - w[1], c[2] - w[2]);
                            if (dist < best - 1e-9) {
                                best = dist;
                                pick = {x, y, z};
                            } else if (std::fabs(dist - best) <= 1e-9) {
                                pick = {std::max(pick[0], x), std::max(pick[1], y), std::max(pick[2], z)};
                            }
                        }
                // Outside the FOV when any axis offset exceeds half a voxel.
                const Vec3 c = a.apply({double(pick[0]), double(pick[1]), double(pick[2])});
                bool inside = true;
                const Vec3 diff{w[0] - c[0], w[1] - c[1], w[2] - c[2]};
                for (int ax = 0; ax < 3; ++ax)
                    if (std::fabs(diff[ax]) > 0.5 * s[ax] + 1e-9)
                        inside = false;
                if (inside)
                    out(i, j, k) = in(pick[0], pick[1], pick[2]);
            }
    return out;
}

/// Thick-slice response to a unit impulse on a 1mm line of `n` voxels at
/// index `at`: a continuous Gaussian of FWHM `spacing` sampled at the
/// centres of the coarse grid (field of view centred, ceil(n / spacing)
/// slices), then linearly interpolated back to the 1mm centres with constant
/// extension past the outermost coarse centres.
inline std::vector<double> oracle_thick_slice_impulse(int n, int at, double spacing)
{
    const double sigma = spacing / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    const int m = static_cast<int>(std::ceil(n / spacing));
    const double centre = (n - 1) / 2.0;
    std::vector<double> coarse_pos(m), coarse_val(m);
    for (int c = 0; c < m; ++c) {
        coarse_pos[c] = centre + (c - (m - 1) / 2.0) * spacing;
        const double x = coarse_pos[c] - at;
        coarse_val[c] = std::exp(-x * x / (2 * sigma * sigma)) / (sigma * std::sqrt(2 * M_PI));
    }
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        if (i <= coarse_pos.front()) {
            out[i] = coarse_val.front();
            continue;
        }
        if (i >= coarse_pos.back()) {
            out[i] = coarse_val.back();
            continue;
        }
        int c = 0;
        while (coarse_pos[c + 1] < i)
            ++c;
        const double t = (i - coarse_pos[c]) / spacing;
        out[i] = (1 - t) * coarse_val[c] + t * coarse_val[c + 1];
    }
    return out;
}

// --- NIfTI bytes built by hand ----------------------------------------------

/// Independent NIfTI-1 encoder used to craft golden and corrupt files.
struct NiftiBytes {
    std::array<std::int16_t, 8> dim{3, 1, 1, 1, 1, 1, 1, 1};
    std::int16_t datatype = 16;
    std::int16_t bitpix = 32;
    std::array<float, 8> pixdim{1, 1, 1, 1, 1, 1, 1, 1};
    float vox_offset = 352;
    float scl_slope = 1;
    float scl_inter = 0;
    std::int16_t qform_code = 0;
    std::int16_t sform_code = 1;
    std::array<float, 6> quatern{0, 0, 0, 0, 0, 0};  // b, c, d, qx, qy, qz
    std::array<float, 12> srow{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};
    char magic[4] = {'n', '+', '1', '\0'};
    std::int32_t sizeof_hdr = 348;
    bool big_endian = false;
    std::vector<std::uint8_t> payload;  // already in file byte order

    template <typename T>
    void put(std::vector<std::uint8_t>& out, std::size_t off, T v) const
    {
        std::uint8_t b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        if (big_endian)
            std::reverse(b, b + sizeof(T));
        std::memcpy(out.data() + off, b, sizeof(T));
    }

    template <typename T>
    void append_value(T v)
    {
        std::uint8_t b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        if (big_endian)
            std::reverse(b, b + sizeof(T));
        payload.insert(payload.end(), b, b + sizeof(T));
    }

    std::vector<std::uint8_t> bytes() const
    {
        const std::size_t header_end = std::max<std::size_t>(352, static_cast<std::size_t>(vox_offset));
        std::vector<std::uint8_t> out(header_end, 0);
        put(out, 0, sizeof_hdr);
        for (int i = 0; i < 8; ++i)
            put(out, 40 + 2 * i, dim[i]);
        put(out, 70, datatype);
        put(out, 72, bitpix);
        for (int i = 0; i < 8; ++i)
            put(out, 76 + 4 * i, pixdim[i]);
        put(out, 108, vox_offset);
        put(out, 112, scl_slope);
        put(out, 116, scl_inter);
        put(out, 252, qform_code);
        put(out, 254, sform_code);
        for (int i = 0; i < 6; ++i)
            put(out, 256 + 4 * i, quatern[i]);
        for (int i = 0; i < 12; ++i)
            put(out, 280 + 4 * i, srow[i]);
        std::memcpy(out.data() + 344, magic, 4);
        out.insert(out.end(), payload.begin(), payload.end());
        return out;
    }
};

} // namespace nsf::testing
