#include "nsf/nifti.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string_view>

#include <unistd.h>
#include <zlib.h>

namespace nsf::nifti {

namespace {

// Field offsets in the 348-byte NIfTI-1 header.
namespace off {
constexpr std::size_t sizeof_hdr = 0;
constexpr std::size_t dim = 40;
constexpr std::size_t datatype = 70;
constexpr std::size_t bitpix = 72;
constexpr std::size_t pixdim = 76;
constexpr std::size_t vox_offset = 108;
constexpr std::size_t scl_slope = 112;
constexpr std::size_t scl_inter = 116;
constexpr std::size_t xyzt_units = 123;
constexpr std::size_t descrip = 148;
constexpr std::size_t qform_code = 252;
constexpr std::size_t sform_code = 254;
constexpr std::size_t quatern_b = 256;
constexpr std::size_t qoffset_x = 268;
constexpr std::size_t srow_x = 280;
constexpr std::size_t magic = 344;
} // namespace off

constexpr std::string_view kMagic{"n+1\0", 4};

template <typename T>
T byteswap(T v)
{
    std::array<std::uint8_t, sizeof(T)> b;
    std::memcpy(b.data(), &v, sizeof(T));
    std::reverse(b.begin(), b.end());
    std::memcpy(&v, b.data(), sizeof(T));
    return v;
}

class Reader {
public:
    Reader(std::span<const std::uint8_t> bytes, bool big_endian) : bytes_(bytes), swap_(big_endian != (std::endian::native == std::endian::big)) {}

    template <typename T>
    T get(std::size_t offset) const
    {
        T v;
        std::memcpy(&v, bytes_.data() + offset, sizeof(T));
        return swap_ ? byteswap(v) : v;
    }

private:
    std::span<const std::uint8_t> bytes_;
    bool swap_;
};

class Writer {
public:
    explicit Writer(std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    template <typename T>
    void put(std::size_t offset, T v)
    {
        if constexpr (std::endian::native == std::endian::big)
            v = byteswap(v);
        std::memcpy(bytes_.data() + offset, &v, sizeof(T));
    }

private:
    std::vector<std::uint8_t>& bytes_;
};

bool supported(std::int16_t code)
{
    switch (static_cast<Datatype>(code)) {
    case Datatype::UInt8:
    case Datatype::Int16:
    case Datatype::Int32:
    case Datatype::Float32:
        return true;
    }
    return false;
}

Affine quaternion_affine(const Reader& r, const Vec3& pixdim, float qfac_raw)
{
    const double b = r.get<float>(off::quatern_b);
    const double c = r.get<float>(off::quatern_b + 4);
    const double d = r.get<float>(off::quatern_b + 8);
    double a = 1.0 - (b * b + c * c + d * d);
    a = a < 1e-7 ? 0.0 : std::sqrt(a);
    const double qfac = qfac_raw < 0.0f ? -1.0 : 1.0;
    const double rot[3][3] = {
        {a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)},
        {2 * (b * c + a * d), a * a + c * c - b * b - d * d, 2 * (c * d - a * b)},
        {2 * (b * d - a * c), 2 * (c * d + a * b), a * a + d * d - c * c - b * b},
    };
    const double scale[3] = {pixdim[0], pixdim[1], pixdim[2] * qfac};
    Affine out;
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j)
            out(i, j) = rot[i][j] * scale[j];
        out(i, 3) = r.get<float>(off::qoffset_x + 4 * i);
    }
    return out;
}

template <typename T>
double raw_value(std::span<const std::uint8_t> payload, std::size_t n, bool swap)
{
    T v;
    std::memcpy(&v, payload.data() + n * sizeof(T), sizeof(T));
    if (swap)
        v = byteswap(v);
    return static_cast<double>(v);
}

double voxel_value(std::span<const std::uint8_t> payload, Datatype dt, std::size_t n, bool swap)
{
    switch (dt) {
    case Datatype::UInt8: return raw_value<std::uint8_t>(payload, n, false);
    case Datatype::Int16: return raw_value<std::int16_t>(payload, n, swap);
    case Datatype::Int32: return raw_value<std::int32_t>(payload, n, swap);
    case Datatype::Float32: return raw_value<float>(payload, n, swap);
    }
    return 0.0;
}

struct Decoded {
    Header header;
    std::vector<std::uint8_t> bytes;

    std::span<const std::uint8_t> payload() const
    {
        return std::span<const std::uint8_t>(bytes).subspan(static_cast<std::size_t>(header.vox_offset),
                                                            header.payload_bytes());
    }
    bool swap() const { return header.big_endian != (std::endian::native == std::endian::big); }
};

Decoded decode_file(const std::string& path)
{
    Decoded d;
    d.bytes = read_file(path);
    d.header = parse_header(d.bytes);
    const std::size_t need = static_cast<std::size_t>(d.header.vox_offset) + d.header.payload_bytes();
    if (d.bytes.size() < need)
        throw CorruptError(path + ": data section is truncated (" + std::to_string(d.bytes.size()) + " of " +
                           std::to_string(need) + " bytes)");
    return d;
}

std::vector<std::uint8_t> encode_header(const Geometry& g, std::int64_t channels, Datatype dt)
{
    std::vector<std::uint8_t> bytes(kDataOffset, 0);
    Writer w(bytes);
    w.put<std::int32_t>(off::sizeof_hdr, static_cast<std::int32_t>(kHeaderSize));
    const std::int16_t ndim = channels > 1 ? 4 : 3;
    w.put<std::int16_t>(off::dim, ndim);
    for (std::size_t i = 0; i < 3; ++i) {
        if (g.dims[i] > std::numeric_limits<std::int16_t>::max())
            throw InvalidArgument("volume dimension exceeds NIfTI-1 limits");
        w.put<std::int16_t>(off::dim + 2 * (i + 1), static_cast<std::int16_t>(g.dims[i]));
    }
    w.put<std::int16_t>(off::dim + 8, static_cast<std::int16_t>(channels));
    for (std::size_t i = 5; i < 8; ++i)
        w.put<std::int16_t>(off::dim + 2 * i, 1);
    w.put<std::int16_t>(off::datatype, static_cast<std::int16_t>(dt));
    w.put<std::int16_t>(off::bitpix, static_cast<std::int16_t>(8 * bytes_per_voxel(dt)));

    const Vec3 vs = g.voxel_size();
    w.put<float>(off::pixdim, g.affine.determinant() < 0.0 ? -1.0f : 1.0f);
    for (std::size_t i = 0; i < 3; ++i)
        w.put<float>(off::pixdim + 4 * (i + 1), static_cast<float>(vs[i]));
    for (std::size_t i = 4; i < 8; ++i)
        w.put<float>(off::pixdim + 4 * i, 1.0f);
    w.put<float>(off::vox_offset, static_cast<float>(kDataOffset));
    w.put<float>(off::scl_slope, 1.0f);
    w.put<float>(off::scl_inter, 0.0f);
    bytes[off::xyzt_units] = 2;  // mm
    constexpr std::string_view descrip = "nsf";
    std::memcpy(bytes.data() + off::descrip, descrip.data(), descrip.size());
    w.put<std::int16_t>(off::qform_code, 0);
    w.put<std::int16_t>(off::sform_code, 1);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 4; ++c)
            w.put<float>(off::srow_x + 16 * r + 4 * c, static_cast<float>(g.affine(r, c)));
    std::memcpy(bytes.data() + off::magic, kMagic.data(), kMagic.size());
    return bytes;
}

template <typename T>
void append_value(std::vector<std::uint8_t>& out, T v)
{
    if constexpr (std::endian::native == std::endian::big)
        v = byteswap(v);
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
}

void append(std::vector<std::uint8_t>& out, double v, Datatype dt)
{
    switch (dt) {
    case Datatype::UInt8: out.push_back(static_cast<std::uint8_t>(v)); break;
    case Datatype::Int16: append_value(out, static_cast<std::int16_t>(v)); break;
    case Datatype::Int32: append_value(out, static_cast<std::int32_t>(v)); break;
    case Datatype::Float32: append_value(out, static_cast<float>(v)); break;
    }
}

void check_representable(double v, Datatype dt)
{
    if (!std::isfinite(v))
        throw InvalidArgument("refusing to write non-finite voxel data");
    auto check_range = [&](double lo, double hi) {
        if (v != std::floor(v) || v < lo || v > hi)
            throw InvalidArgument("voxel value " + std::to_string(v) + " is not representable in the requested datatype");
    };
    switch (dt) {
    case Datatype::UInt8: check_range(0, 255); break;
    case Datatype::Int16: check_range(-32768, 32767); break;
    case Datatype::Int32: check_range(-2147483648.0, 2147483647.0); break;
    case Datatype::Float32: break;
    }
}

bool ends_with(std::string_view s, std::string_view suffix)
{
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

void write_encoded(const std::string& path, const std::vector<std::uint8_t>& bytes)
{
    if (ends_with(path, ".gz"))
        write_file_atomic(path, gzip(bytes));
    else
        write_file_atomic(path, bytes);
}

} // namespace

std::size_t bytes_per_voxel(Datatype dt)
{
    switch (dt) {
    case Datatype::UInt8: return 1;
    case Datatype::Int16: return 2;
    case Datatype::Int32: return 4;
    case Datatype::Float32: return 4;
    }
    return 0;
}

std::vector<std::uint8_t> read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw IoError("read failed: " + path);
    if (raw.size() < 2 || raw[0] != 0x1f || raw[1] != 0x8b)
        return raw;

    z_stream zs{};
    if (inflateInit2(&zs, 15 + 32) != Z_OK)
        throw IoError("zlib initialisation failed");
    std::vector<std::uint8_t> out;
    std::array<std::uint8_t, 1 << 16> chunk{};
    zs.next_in = raw.data();
    zs.avail_in = static_cast<uInt>(raw.size());
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = chunk.data();
        zs.avail_out = static_cast<uInt>(chunk.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw CorruptError(path + ": gzip stream is corrupt or truncated");
        }
        out.insert(out.end(), chunk.data(), chunk.data() + (chunk.size() - zs.avail_out));
        if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
            inflateEnd(&zs);
            throw CorruptError(path + ": gzip stream is truncated");
        }
    }
    inflateEnd(&zs);
    return out;
}

std::vector<std::uint8_t> gzip(std::span<const std::uint8_t> bytes)
{
    z_stream zs{};
    if (deflateInit2(&zs, 6, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw IoError("zlib initialisation failed");
    std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(bytes.size())) + 32);
    zs.next_in = const_cast<Bytef*>(bytes.data());
    zs.avail_in = static_cast<uInt>(bytes.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END)
        throw IoError("gzip compression failed");
    out.resize(zs.total_out);
    return out;
}

void write_file_atomic(const std::string& path, std::span<const std::uint8_t> bytes)
{
    static std::atomic<unsigned> counter{0};
    const std::string tmp = path + ".tmp" + std::to_string(::getpid()) + "_" + std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot create " + tmp);
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw IoError("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place: " + path);
    }
}

Header parse_header(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < kHeaderSize)
        throw CorruptError("file is shorter than a NIfTI-1 header");

    const auto in_range = [](std::int16_t v) { return v >= 1 && v <= 7; };
    Header h;
    const std::int16_t dim0_le = Reader(bytes, false).get<std::int16_t>(off::dim);
    if (in_range(dim0_le))
        h.big_endian = false;
    else if (in_range(byteswap(dim0_le)))
        h.big_endian = true;
    else
        throw FormatError("dim[0] is not in [1, 7] in either byte order");
    const Reader r(bytes, h.big_endian);

    if (r.get<std::int32_t>(off::sizeof_hdr) != static_cast<std::int32_t>(kHeaderSize))
        throw FormatError("sizeof_hdr is not 348");
    if (std::string_view(reinterpret_cast<const char*>(bytes.data() + off::magic), 4) != kMagic)
        throw FormatError("bad magic: only single-file NIfTI-1 (n+1) is supported");

    const std::int16_t code = r.get<std::int16_t>(off::datatype);
    if (!supported(code))
        throw UnsupportedError("unsupported datatype code " + std::to_string(code));
    h.datatype = static_cast<Datatype>(code);

    const int ndim = r.get<std::int16_t>(off::dim);
    for (int i = 1; i <= ndim; ++i) {
        const std::int16_t d = r.get<std::int16_t>(off::dim + 2 * static_cast<std::size_t>(i));
        if (d < 1)
            throw FormatError("dim[" + std::to_string(i) + "] must be >= 1");
        if (i <= 4)
            h.dims[static_cast<std::size_t>(i - 1)] = d;
        else if (d > 1)
            throw UnsupportedError("more than four dimensions are not supported");
    }

    for (std::size_t i = 0; i < 3; ++i) {
        const double p = std::abs(r.get<float>(off::pixdim + 4 * (i + 1)));
        h.pixdim[i] = (p > 0.0 && std::isfinite(p)) ? p : 1.0;
    }

    const float vox_offset = r.get<float>(off::vox_offset);
    if (!std::isfinite(vox_offset) || vox_offset < static_cast<float>(kHeaderSize))
        throw FormatError("vox_offset must be at least 348");
    h.vox_offset = static_cast<std::int64_t>(vox_offset);

    const double slope = r.get<float>(off::scl_slope);
    const double inter = r.get<float>(off::scl_inter);
    h.scl_slope = (slope == 0.0 || !std::isfinite(slope)) ? 1.0 : slope;
    h.scl_inter = std::isfinite(inter) ? inter : 0.0;

    h.sform_code = r.get<std::int16_t>(off::sform_code);
    h.qform_code = r.get<std::int16_t>(off::qform_code);
    if (h.sform_code > 0) {
        for (std::size_t row = 0; row < 3; ++row)
            for (std::size_t c = 0; c < 4; ++c)
                h.affine(row, c) = r.get<float>(off::srow_x + 16 * row + 4 * c);
    } else if (h.qform_code > 0) {
        h.affine = quaternion_affine(r, h.pixdim, r.get<float>(off::pixdim));
    } else {
        h.affine = Affine::from_spacing(h.pixdim);
    }
    if (!h.affine.invertible())
        throw FormatError("header affine is singular");
    return h;
}

Header read_header(const std::string& path) { return parse_header(read_file(path)); }

std::vector<IntensityVolume> read_channels(const std::string& path)
{
    const Decoded d = decode_file(path);
    const Header& h = d.header;
    const auto payload = d.payload();
    const bool swap = d.swap();
    const std::size_t per = h.voxels_per_channel();

    std::vector<IntensityVolume> out;
    out.reserve(static_cast<std::size_t>(h.dims[3]));
    for (std::int64_t c = 0; c < h.dims[3]; ++c) {
        IntensityVolume vol(h.geometry());
        auto data = vol.data();
        for (std::size_t n = 0; n < per; ++n) {
            const double v = voxel_value(payload, h.datatype, static_cast<std::size_t>(c) * per + n, swap) * h.scl_slope +
                             h.scl_inter;
            if (!std::isfinite(v))
                throw CorruptError(path + ": non-finite voxel value");
            data[n] = static_cast<float>(v);
        }
        out.push_back(std::move(vol));
    }
    return out;
}

IntensityVolume read_volume(const std::string& path)
{
    auto channels = read_channels(path);
    if (channels.size() != 1)
        throw InvalidArgument(path + ": expected a single-channel volume, found " + std::to_string(channels.size()));
    return std::move(channels.front());
}

LabelVolume read_labels(const std::string& path)
{
    const Decoded d = decode_file(path);
    const Header& h = d.header;
    if (h.dims[3] != 1)
        throw InvalidArgument(path + ": label volumes must have a single channel");
    const auto payload = d.payload();
    const bool swap = d.swap();
    LabelVolume vol(h.geometry());
    auto data = vol.data();
    for (std::size_t n = 0; n < data.size(); ++n) {
        const double v = voxel_value(payload, h.datatype, n, swap) * h.scl_slope + h.scl_inter;
        if (!std::isfinite(v) || v != std::floor(v) || v < 0.0 || v > std::numeric_limits<Label>::max())
            throw FormatError(path + ": label volume holds a non-integer or negative value");
        data[n] = static_cast<Label>(v);
    }
    return vol;
}

std::vector<std::uint8_t> encode(std::span<const IntensityVolume> channels, Datatype dt)
{
    if (channels.empty())
        throw InvalidArgument("nothing to encode");
    const Geometry& g = channels.front().geometry();
    for (const auto& c : channels)
        if (!c.geometry().same_grid(g, 0.0))
            throw InvalidArgument("all channels must share one grid");
    auto bytes = encode_header(g, static_cast<std::int64_t>(channels.size()), dt);
    bytes.reserve(bytes.size() + g.voxel_count() * channels.size() * bytes_per_voxel(dt));
    for (const auto& c : channels)
        for (float v : c.data()) {
            check_representable(v, dt);
            append(bytes, v, dt);
        }
    return bytes;
}

std::vector<std::uint8_t> encode(const LabelVolume& vol, Datatype dt)
{
    if (dt == Datatype::Float32)
        throw InvalidArgument("label volumes must be written with an integer datatype");
    auto bytes = encode_header(vol.geometry(), 1, dt);
    bytes.reserve(bytes.size() + vol.size() * bytes_per_voxel(dt));
    for (Label v : vol.data()) {
        check_representable(static_cast<double>(v), dt);
        append(bytes, static_cast<double>(v), dt);
    }
    return bytes;
}

void write_volume(const IntensityVolume& vol, const std::string& path, Datatype dt)
{
    write_encoded(path, encode(std::span<const IntensityVolume>(&vol, 1), dt));
}

void write_volume(const LabelVolume& vol, const std::string& path, Datatype dt) { write_encoded(path, encode(vol, dt)); }

void write_channels(std::span<const IntensityVolume> channels, const std::string& path)
{
    write_encoded(path, encode(channels, Datatype::Float32));
}

} // namespace nsf::nifti
