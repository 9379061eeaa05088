#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "nsf/nifti.hpp"

using namespace nsf;
using namespace nsf::testing;

namespace {

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes)
{
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::uint8_t> slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Geometry oblique_geometry(const Dims& dims)
{
    Affine a;
    a(0, 0) = 0.9;
    a(0, 1) = 0.1;
    a(1, 0) = -0.05;
    a(1, 1) = 1.1;
    a(2, 2) = -2.0;
    a.set_translation({-30.5, 12.25, 40.0});
    return {dims, a};
}

/// 2x2x1 float file whose raw payload is {0, 1, 2, 3}.
NiftiBytes tiny_float()
{
    NiftiBytes n;
    n.dim = {3, 2, 2, 1, 1, 1, 1, 1};
    for (float v : {0.0f, 1.0f, 2.0f, 3.0f})
        n.append_value(v);
    return n;
}

} // namespace

TEST(Nifti, LabelRoundTripIsExactForEveryIntegerType)
{
    TempDir dir;
    std::mt19937_64 rng(1);
    const auto schema = LabelSchema::default_brain();
    const auto labels = random_labels(oblique_geometry({5, 4, 3}), schema, rng);
    for (auto dt : {nifti::Datatype::UInt8, nifti::Datatype::Int16, nifti::Datatype::Int32}) {
        for (const char* name : {"l.nii", "l.nii.gz"}) {
            const auto path = dir.file(name);
            nifti::write_volume(labels, path, dt);
            const auto back = nifti::read_labels(path);
            EXPECT_EQ(back.dims(), labels.dims());
            EXPECT_EQ(std::vector<Label>(back.data().begin(), back.data().end()),
                      std::vector<Label>(labels.data().begin(), labels.data().end()));
            EXPECT_TRUE(back.affine().approx_equal(labels.affine(), 1e-5));
            EXPECT_EQ(nifti::read_header(path).datatype, dt);
        }
    }
}

TEST(Nifti, IntensityRoundTripIntegerTypesExactFloatWithinRelative)
{
    TempDir dir;
    std::mt19937_64 rng(2);
    const Geometry g = oblique_geometry({6, 5, 4});
    IntensityVolume ints(g);
    std::uniform_int_distribution<int> u(0, 255);
    for (auto& v : ints.data())
        v = static_cast<float>(u(rng));
    for (auto dt : {nifti::Datatype::UInt8, nifti::Datatype::Int16, nifti::Datatype::Int32}) {
        nifti::write_volume(ints, dir.file("i.nii.gz"), dt);
        const auto back = nifti::read_volume(dir.file("i.nii.gz"));
        for (std::size_t n = 0; n < ints.size(); ++n)
            EXPECT_EQ(back[n], ints[n]);
    }
    const auto f = random_intensity(g, rng, -1e4, 1e4);
    nifti::write_volume(f, dir.file("f.nii"));
    const auto back = nifti::read_volume(dir.file("f.nii"));
    for (std::size_t n = 0; n < f.size(); ++n)
        EXPECT_LE(std::fabs(back[n] - f[n]), 1e-6 * std::fabs(f[n]));
}

TEST(Nifti, GzipMatchesUncompressed)
{
    TempDir dir;
    std::mt19937_64 rng(3);
    const auto v = random_intensity(isotropic_geometry({7, 3, 5}), rng);
    nifti::write_volume(v, dir.file("a.nii"));
    // compress an independently written golden file with the system gzip
    ASSERT_EQ(std::system(("gzip -c " + dir.file("a.nii") + " > " + dir.file("b.nii.gz")).c_str()), 0);
    EXPECT_EQ(nifti::read_volume(dir.file("a.nii")), nifti::read_volume(dir.file("b.nii.gz")));
    const auto raw = slurp(dir.file("a.nii"));
    write_bytes(dir.file("c.nii.gz"), nifti::gzip(raw));
    ASSERT_EQ(std::system(("gzip -dc " + dir.file("c.nii.gz") + " > " + dir.file("c.nii")).c_str()), 0);
    EXPECT_EQ(slurp(dir.file("c.nii")), raw);
}

TEST(Nifti, UInt8CubeHasExactFileSize)
{
    TempDir dir;
    const LabelVolume cube(isotropic_geometry({3, 3, 3}), 2);
    nifti::write_volume(cube, dir.file("c.nii"), nifti::Datatype::UInt8);
    EXPECT_EQ(slurp(dir.file("c.nii")).size(), 348u + 4u + 27u);
}

TEST(Nifti, WriterHeaderFields)
{
    TempDir dir;
    nifti::write_volume(IntensityVolume(isotropic_geometry({2, 2, 2}), 1.0f), dir.file("h.nii"));
    const auto h = nifti::read_header(dir.file("h.nii"));
    EXPECT_EQ(h.sform_code, 1);
    EXPECT_EQ(h.scl_slope, 1.0);
    EXPECT_EQ(h.scl_inter, 0.0);
    EXPECT_EQ(h.vox_offset, 352);
    EXPECT_EQ(h.datatype, nifti::Datatype::Float32);
    const auto bytes = slurp(dir.file("h.nii"));
    EXPECT_EQ(std::string(reinterpret_cast<const char*>(bytes.data()) + 344, 4), std::string("n+1\0", 4));
}

TEST(Nifti, SlopeAndInterceptApplied)
{
    TempDir dir;
    NiftiBytes n;
    n.dim = {3, 1, 1, 1, 1, 1, 1, 1};
    n.datatype = 4;
    n.bitpix = 16;
    n.scl_slope = 2;
    n.scl_inter = 1;
    n.append_value<std::int16_t>(3);
    write_bytes(dir.file("s.nii"), n.bytes());
    EXPECT_EQ(nifti::read_volume(dir.file("s.nii"))[0], 7.0f);
    // zero slope means "no scaling"
    n.scl_slope = 0;
    n.scl_inter = 0;
    write_bytes(dir.file("z.nii"), n.bytes());
    EXPECT_EQ(nifti::read_volume(dir.file("z.nii"))[0], 3.0f);
}

TEST(Nifti, BigEndianFileReadsLikeLittleEndian)
{
    TempDir dir;
    for (bool big : {false, true}) {
        NiftiBytes n;
        n.big_endian = big;
        n.dim = {3, 2, 2, 1, 1, 1, 1, 1};
        n.datatype = 8;
        n.srow = {2, 0, 0, -3, 0, 2, 0, 5, 0, 0, 2, 7};
        for (std::int32_t v : {-70000, 5, 70000, 1})
            n.append_value(v);
        const auto path = dir.file(big ? "be.nii" : "le.nii");
        write_bytes(path, n.bytes());
        const auto v = nifti::read_volume(path);
        EXPECT_EQ(v[0], -70000.0f);
        EXPECT_EQ(v[2], 70000.0f);
        EXPECT_EQ(v.affine()(0, 3), -3.0);
        EXPECT_EQ(v.voxel_size()[1], 2.0);
        EXPECT_EQ(nifti::read_header(path).big_endian, big);
    }
}

TEST(Nifti, QformFallbackWhenSformAbsent)
{
    TempDir dir;
    NiftiBytes n = tiny_float();
    n.sform_code = 0;
    n.qform_code = 1;
    n.pixdim = {1, 2, 3, 4, 1, 1, 1, 1};
    // 180 degree rotation about z: quaternion (0, 0, 1)
    n.quatern = {0, 0, 1, 10, 20, 30};
    write_bytes(dir.file("q.nii"), n.bytes());
    const auto a = nifti::read_volume(dir.file("q.nii")).affine();
    EXPECT_NEAR(a(0, 0), -2.0, 1e-6);
    EXPECT_NEAR(a(1, 1), -3.0, 1e-6);
    EXPECT_NEAR(a(2, 2), 4.0, 1e-6);
    EXPECT_NEAR(a(0, 3), 10.0, 1e-6);
    EXPECT_NEAR(a(2, 3), 30.0, 1e-6);
    // neither: pixdim scaling
    n.qform_code = 0;
    write_bytes(dir.file("p.nii"), n.bytes());
    const auto b = nifti::read_volume(dir.file("p.nii")).affine();
    EXPECT_NEAR(b(0, 0), 2.0, 1e-6);
    EXPECT_NEAR(b(2, 2), 4.0, 1e-6);
}

TEST(Nifti, MultiChannelStack)
{
    TempDir dir;
    std::mt19937_64 rng(4);
    const Geometry g = isotropic_geometry({3, 3, 2});
    std::vector<IntensityVolume> ch;
    for (int c = 0; c < 5; ++c)
        ch.push_back(random_intensity(g, rng));
    nifti::write_channels(ch, dir.file("m.nii.gz"));
    EXPECT_EQ(nifti::read_header(dir.file("m.nii.gz")).dims[3], 5);
    const auto back = nifti::read_channels(dir.file("m.nii.gz"));
    ASSERT_EQ(back.size(), 5u);
    for (int c = 0; c < 5; ++c)
        EXPECT_EQ(back[c], ch[c]);
    EXPECT_THROW(nifti::read_volume(dir.file("m.nii.gz")), InvalidArgument);
}

TEST(Nifti, WriteRefusals)
{
    TempDir dir;
    IntensityVolume v(isotropic_geometry({2, 2, 2}), 1.0f);
    v[5] = NAN;
    EXPECT_THROW(nifti::write_volume(v, dir.file("nan.nii")), InvalidArgument);
    v[5] = INFINITY;
    EXPECT_THROW(nifti::write_volume(v, dir.file("inf.nii")), InvalidArgument);
    const LabelVolume l(isotropic_geometry({2, 2, 2}), 300);
    EXPECT_THROW(nifti::write_volume(l, dir.file("f.nii"), nifti::Datatype::Float32), InvalidArgument);
    EXPECT_THROW(nifti::write_volume(l, dir.file("u8.nii"), nifti::Datatype::UInt8), InvalidArgument);
    IntensityVolume frac(isotropic_geometry({1, 1, 1}), 0.5f);
    EXPECT_THROW(nifti::write_volume(frac, dir.file("frac.nii"), nifti::Datatype::Int16), InvalidArgument);
    EXPECT_THROW(nifti::write_volume(l, "/nonexistent-dir/x.nii"), IoError);
    EXPECT_FALSE(std::filesystem::exists(dir.file("nan.nii")));
}

// --- corrupt fixtures: each rejected with its designated error class --------

TEST(NiftiCorrupt, BadMagicIsFormatError)
{
    TempDir dir;
    NiftiBytes n = tiny_float();
    n.magic[1] = 'i';  // "ni1": the two-file variant, not supported
    write_bytes(dir.file("x.nii"), n.bytes());
    EXPECT_THROW(nifti::read_volume(dir.file("x.nii")), FormatError);
}

TEST(NiftiCorrupt, BadHeaderSizeIsFormatError)
{
    TempDir dir;
    NiftiBytes n = tiny_float();
    n.sizeof_hdr = 540;  // NIfTI-2
    write_bytes(dir.file("x.nii"), n.bytes());
    EXPECT_THROW(nifti::read_volume(dir.file("x.nii")), FormatError);
}

TEST(NiftiCorrupt, ShortHeaderIsCorrupt)
{
    TempDir dir;
    auto bytes = tiny_float().bytes();
    bytes.resize(200);
    write_bytes(dir.file("x.nii"), bytes);
    EXPECT_THROW(nifti::read_volume(dir.file("x.nii")), CorruptError);
}

TEST(NiftiCorrupt, UnsupportedDatatype)
{
    TempDir dir;
    NiftiBytes n = tiny_float();
    n.datatype = 64;  // float64
    n.bitpix = 64;
    write_bytes(dir.file("x.nii"), n.bytes());
    EXPECT_THROW(nifti::read_volume(dir.file("x.nii")), UnsupportedError);
}

TEST(NiftiCorrupt, FiveDimensionsUnsupported)
{
    TempDir dir;
    NiftiBytes n = tiny_float();
    n.dim = {5, 2, 2, 1, 1, 2, 1, 1};
    write_bytes(dir.file("x.nii"), n.bytes());
    EXPECT_THROW(nifti::read_volume(dir.file("x.nii")), UnsupportedError);
}

TEST(NiftiCorrupt, TruncatedPayloadIsCorrupt)
{
    TempDir dir;
    auto bytes = tiny_float().bytes();
    bytes.resize(bytes.size() - 3);
    write_bytes(dir.file("x.nii"), bytes);
    EXPECT_THROW(nifti::read_volume(dir.file("x.nii")), CorruptError);
}

TEST(NiftiCorrupt, TruncatedGzipIsCorrupt)
{
    TempDir dir;
    nifti::write_volume(IntensityVolume(isotropic_geometry({8, 8, 8}), 3.0f), dir.file("g.nii.gz"));
    auto bytes = slurp(dir.file("g.nii.gz"));
    bytes.resize(bytes.size() / 2);
    write_bytes(dir.file("x.nii.gz"), bytes);
    EXPECT_THROW(nifti::read_volume(dir.file("x.nii.gz")), CorruptError);
    // flipped bits inside the deflate stream
    bytes = slurp(dir.file("g.nii.gz"));
    for (std::size_t i = 12; i < 40 && i < bytes.size(); ++i)
        bytes[i] ^= 0xA5;
    write_bytes(dir.file("y.nii.gz"), bytes);
    EXPECT_THROW(nifti::read_volume(dir.file("y.nii.gz")), CorruptError);
}

TEST(NiftiCorrupt, NonsenseDimsIsFormatError)
{
    TempDir dir;
    NiftiBytes n = tiny_float();
    n.dim = {3, 0, 2, 1, 1, 1, 1, 1};
    write_bytes(dir.file("x.nii"), n.bytes());
    EXPECT_THROW(nifti::read_volume(dir.file("x.nii")), FormatError);
    n.dim = {3, 2, 2, 1, 1, 1, 1, 1};
    n.vox_offset = 100;
    write_bytes(dir.file("y.nii"), n.bytes());
    EXPECT_THROW(nifti::read_volume(dir.file("y.nii")), FormatError);
}

TEST(NiftiCorrupt, MissingFileIsIoError)
{
    EXPECT_THROW(nifti::read_volume("/nonexistent/none.nii"), IoError);
}

TEST(NiftiCorrupt, FractionalLabelsAreFormatError)
{
    TempDir dir;
    NiftiBytes n = tiny_float();
    n.payload.clear();
    for (float v : {0.0f, 1.5f, 2.0f, 3.0f})
        n.append_value(v);
    write_bytes(dir.file("x.nii"), n.bytes());
    EXPECT_THROW(nifti::read_labels(dir.file("x.nii")), FormatError);
    EXPECT_NO_THROW(nifti::read_labels((write_bytes(dir.file("ok.nii"), tiny_float().bytes()), dir.file("ok.nii"))));
}
