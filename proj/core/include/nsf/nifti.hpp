#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nsf/volume.hpp"

namespace nsf::nifti {

enum class Datatype : std::int16_t {
    UInt8 = 2,
    Int16 = 4,
    Int32 = 8,
    Float32 = 16,
};

std::size_t bytes_per_voxel(Datatype dt);

/// Decoded single-file NIfTI-1 header. Only the fields the library acts on.
struct Header {
    std::array<std::int64_t, 4> dims{1, 1, 1, 1};  // x, y, z, channels
    Datatype datatype = Datatype::Float32;
    Vec3 pixdim{1.0, 1.0, 1.0};
    Affine affine;
    int sform_code = 0;
    int qform_code = 0;
    double scl_slope = 1.0;  // already defaulted to 1 when stored as 0
    double scl_inter = 0.0;
    std::int64_t vox_offset = 352;
    bool big_endian = false;

    std::size_t voxels_per_channel() const
    {
        return static_cast<std::size_t>(dims[0] * dims[1] * dims[2]);
    }
    std::size_t payload_bytes() const
    {
        return voxels_per_channel() * static_cast<std::size_t>(dims[3]) * bytes_per_voxel(datatype);
    }
    Geometry geometry() const { return Geometry{{dims[0], dims[1], dims[2]}, affine}; }
};

constexpr std::size_t kHeaderSize = 348;
constexpr std::size_t kDataOffset = 352;  // header + 4-byte extension flag

/// Reads a whole file, transparently inflating gzip content.
std::vector<std::uint8_t> read_file(const std::string& path);

Header parse_header(std::span<const std::uint8_t> bytes);
Header read_header(const std::string& path);

/// Throws FormatError (bad magic / layout), UnsupportedError (datatype or
/// >4 dims), CorruptError (payload shorter than declared) or IoError.
std::vector<IntensityVolume> read_channels(const std::string& path);
/// Single-channel intensity read; scl_slope / scl_inter applied.
IntensityVolume read_volume(const std::string& path);
/// Integer-valued read; exact for every integer datatype.
LabelVolume read_labels(const std::string& path);

/// Writers pick gzip when the path ends in ".gz" and replace the target
/// atomically. Non-finite data is refused with InvalidArgument.
void write_volume(const IntensityVolume& vol, const std::string& path, Datatype dt = Datatype::Float32);
void write_volume(const LabelVolume& vol, const std::string& path, Datatype dt = Datatype::Int32);
/// Multi-channel float32 file with dim[4] = channels.size().
void write_channels(std::span<const IntensityVolume> channels, const std::string& path);

/// Encoded (uncompressed) file image; exposed for tests and in-memory use.
std::vector<std::uint8_t> encode(std::span<const IntensityVolume> channels, Datatype dt);
std::vector<std::uint8_t> encode(const LabelVolume& vol, Datatype dt);

std::vector<std::uint8_t> gzip(std::span<const std::uint8_t> bytes);
/// Writes via a temporary sibling file and rename.
void write_file_atomic(const std::string& path, std::span<const std::uint8_t> bytes);

} // namespace nsf::nifti
