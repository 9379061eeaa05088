#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "nsf/inference.hpp"
#include "nsf/nifti.hpp"
#include "nsf/phantom.hpp"
#include "nsf/predictor.hpp"
#include "nsf/resample.hpp"

using namespace nsf;
using namespace nsf::testing;

namespace {

TrainingPair phantom(std::int64_t n = 24, double spacing = 1.0)
{
    PhantomOptions po;
    po.dims = {n, n, n};
    po.spacing = spacing;
    return make_phantom(LabelSchema::default_brain(), po);
}

// Pointwise predictor: posteriors depend only on the voxel's own intensity,
// so tiling cannot change the answer.
PredictionBundle pointwise(const IntensityVolume& x, const LabelSchema& schema)
{
    const std::size_t L = schema.channel_count();
    PredictionBundle b;
    b.soft_labels.assign(L, IntensityVolume(x.geometry(), 0.0f));
    std::vector<double> z(L);
    for (std::size_t n = 0; n < x.size(); ++n) {
        double sum = 0.0;
        for (std::size_t c = 0; c < L; ++c) {
            z[c] = std::exp(-std::pow(3.0 * (double(x[n]) - double(c) / double(L)), 2));
            sum += z[c];
        }
        for (std::size_t c = 0; c < L; ++c)
            b.soft_labels[c][n] = static_cast<float>(z[c] / sum);
    }
    b.pred_image = x;
    b.pred_bias = IntensityVolume(x.geometry(), 1.0f);
    for (std::size_t n = 0; n < x.size(); ++n)
        b.pred_bias[n] = 1.0f + x[n];
    return b;
}

class WrongMetadata : public Predictor {
public:
    WrongMetadata(PredictorMetadata m) : m_(std::move(m)) {}
    PredictorMetadata metadata() const override { return m_; }
    PredictionBundle predict(const IntensityVolume&) const override { throw std::logic_error("not reached"); }

private:
    PredictorMetadata m_;
};

} // namespace

TEST(Normalization, PercentilesMapToUnitInterval)
{
    IntensityVolume v(isotropic_geometry({100, 1, 1}), 0.0f);
    for (int i = 0; i < 100; ++i)
        v[static_cast<std::size_t>((i * 37) % 100)] = static_cast<float>(i);
    const auto out = normalize_robust_minmax(v);
    const double lo = 0.99, hi = 98.01;  // linear interpolation at 1% and 99%
    for (std::size_t n = 0; n < v.size(); ++n)
        EXPECT_NEAR(out[n], std::clamp((v[n] - lo) / (hi - lo), 0.0, 1.0), 1e-6);
    const IntensityVolume flat(isotropic_geometry({3, 3, 3}), 5.0f);
    const auto flat_out = normalize_robust_minmax(flat);
    for (float x : flat_out.data())
        EXPECT_EQ(x, 0.0f);
}

TEST(Normalization, InvariantToPositiveAffineIntensityChange)
{
    std::mt19937_64 rng(3);
    const auto v = random_intensity(isotropic_geometry({7, 6, 5}), rng, 0.0, 1.0);
    IntensityVolume w = v;
    for (std::size_t n = 0; n < w.size(); ++n)
        w[n] = 300.0f * v[n] + 20.0f;
    const auto a = normalize_robust_minmax(v);
    const auto b = normalize_robust_minmax(w);
    for (std::size_t n = 0; n < a.size(); ++n)
        EXPECT_NEAR(a[n], b[n], 1e-5);
}

TEST(Argmax, TiesGoToLowestId)
{
    const auto schema = LabelSchema::default_brain();
    const Geometry g = isotropic_geometry({4, 3, 2});
    const auto u = uniform_bundle(g, schema);
    const auto tied = argmax_labels(u.soft_labels, schema);
    for (Label x : tied.data())
        EXPECT_EQ(x, 0);

    auto b = uniform_bundle(g, schema);
    b.soft_labels[schema.channel(53)][0] = 0.5f;
    b.soft_labels[schema.channel(17)][0] = 0.5f;
    EXPECT_EQ(argmax_labels(b.soft_labels, schema)[0], 17);
}

TEST(Segment, UniformPredictorYieldsBackground)
{
    const auto schema = LabelSchema::default_brain();
    const auto p = phantom(16);
    FunctionPredictor pred(schema, [&](const IntensityVolume& x) { return uniform_bundle(x.geometry(), schema); });
    const auto r = segment(p.image, pred, schema);
    for (Label x : r.segmentation.data())
        ASSERT_EQ(x, schema.background_id());
}

TEST(Segment, StubRoundTripIsExactWithAndWithoutFlip)
{
    const auto schema = LabelSchema::default_brain();
    const auto p = phantom(32);
    for (bool tta : {false, true}) {
        SegmentOptions opt;
        opt.tta = tta;
        const OneHotStubPredictor stub(schema, p.labels, prepare_input(p.image, opt));
        const auto r = segment(p.image, stub, schema, opt);
        EXPECT_EQ(r.segmentation, p.labels) << "tta " << tta;
        for (std::size_t c = 0; c < schema.channel_count(); ++c)
            for (std::size_t n = 0; n < p.labels.size(); ++n)
                ASSERT_EQ(r.posteriors[c][n], p.labels[n] == schema.id_at(c) ? 1.0f : 0.0f);
    }
}

TEST(Segment, StubRejectsUnknownInput)
{
    const auto schema = LabelSchema::default_brain();
    const auto p = phantom(16);
    const OneHotStubPredictor stub(schema, p.labels, prepare_input(p.image));
    IntensityVolume other = p.image;
    other[0] += 10.0f;
    other[1] += 20.0f;
    EXPECT_THROW(segment(other, stub, schema), ContractError);
}

TEST(Segment, FlipAveragingIsSymmetric)
{
    // on a mirror-symmetric input, flip averaging makes left and right
    // posteriors of every lateral pair identical
    const auto schema = LabelSchema::default_brain();
    const auto p = phantom(20);
    IntensityVolume sym = p.image;
    const auto flipped = flip_lr(p.image);
    for (std::size_t n = 0; n < sym.size(); ++n)
        sym[n] = 0.5f * (p.image[n] + flipped[n]);
    FunctionPredictor pred(schema, [&](const IntensityVolume& x) { return pointwise(x, schema); });
    ASSERT_EQ(flip_lr(sym), sym);
    const auto r = segment(sym, pred, schema);
    for (const auto& [l, rt] : schema.lateral_pairs())
        EXPECT_EQ(r.posteriors[schema.channel(l)], r.posteriors[schema.channel(rt)]);
    SegmentOptions plain;
    plain.tta = false;
    const auto q = segment(sym, pred, schema, plain);
    EXPECT_NE(q.posteriors[schema.channel(2)], q.posteriors[schema.channel(41)]);
}

TEST(Segment, ContractViolations)
{
    const auto schema = LabelSchema::default_brain();
    const auto p = phantom(12);
    PredictorMetadata m{schema.hash(), schema.channel_count() + 1};
    EXPECT_THROW(segment(p.image, WrongMetadata(m), schema), ContractError);
    m = {"deadbeef", schema.channel_count() + 2};
    EXPECT_THROW(segment(p.image, WrongMetadata(m), schema), ContractError);

    FunctionPredictor short_stack(schema, [&](const IntensityVolume& x) {
        auto b = uniform_bundle(x.geometry(), schema);
        b.soft_labels.pop_back();
        return b;
    });
    EXPECT_THROW(segment(p.image, short_stack, schema), ContractError);
    FunctionPredictor wrong_grid(schema, [&](const IntensityVolume&) {
        return uniform_bundle(isotropic_geometry({3, 3, 3}), schema);
    });
    EXPECT_THROW(segment(p.image, wrong_grid, schema), ContractError);
    FunctionPredictor zero_bias(schema, [&](const IntensityVolume& x) {
        auto b = uniform_bundle(x.geometry(), schema);
        b.pred_bias[0] = 0.0f;
        return b;
    });
    EXPECT_THROW(segment(p.image, zero_bias, schema), ContractError);
}

TEST(Segment, AnisotropicInputIsResampledToMillimetre)
{
    const auto schema = LabelSchema::default_brain();
    PhantomOptions po;
    po.dims = {20, 20, 6};
    po.spacing = 1.0;
    auto p = make_phantom(schema, po);
    Affine a = p.image.affine();
    a(2, 2) = 4.0;
    const IntensityVolume thick(Geometry{p.image.dims(), a}, std::vector<float>(p.image.data().begin(),
                                                                                p.image.data().end()));
    FunctionPredictor pred(schema, [&](const IntensityVolume& x) { return pointwise(x, schema); });
    const auto r = segment(thick, pred, schema);
    EXPECT_TRUE(r.segmentation.geometry().is_isotropic(1.0));
    EXPECT_EQ(r.segmentation.dims(), (Dims{20, 20, 24}));
}

TEST(Tiling, MatchesWholeVolumePrediction)
{
    const auto schema = LabelSchema::default_brain();
    const auto p = phantom(22);
    FunctionPredictor pred(schema, [&](const IntensityVolume& x) { return pointwise(x, schema); });
    const auto x = prepare_input(p.image);
    const auto whole = run_predictor(pred, x, schema);
    SegmentOptions opt;
    opt.max_voxels = 1;
    opt.tile_size = 9;
    opt.tile_overlap = 3;
    const auto tiled = run_predictor(pred, x, schema, opt);
    const auto a = whole.to_channels();
    const auto b = tiled.to_channels();
    for (std::size_t c = 0; c < a.size(); ++c)
        for (std::size_t n = 0; n < a[c].size(); ++n)
            ASSERT_NEAR(a[c][n], b[c][n], 1e-6) << "channel " << c << " voxel " << n;
    // one-hot outputs blend to exactly 0 or 1, so the segmentation must not move
    FunctionPredictor hard(schema, [&](const IntensityVolume& v) {
        LabelVolume l(v.geometry(), 0);
        for (std::size_t n = 0; n < v.size(); ++n)
            l[n] = schema.id_at(std::min<std::size_t>(schema.channel_count() - 1,
                                                      static_cast<std::size_t>(v[n] * schema.channel_count())));
        return one_hot_bundle(l, schema);
    });
    EXPECT_EQ(segment(p.image, hard, schema).segmentation, segment(p.image, hard, schema, opt).segmentation);
}

TEST(Evaluate, SelfEvaluationIsPerfect)
{
    const auto schema = LabelSchema::default_brain();
    std::vector<SegmentationPair> pairs;
    for (std::uint64_t s = 0; s < 4; ++s) {
        PhantomOptions po;
        po.dims = {40, 40, 40};
        po.seed = s;
        const auto p = make_phantom(schema, po);
        pairs.push_back({"case" + std::to_string(s), p.labels, p.labels});
    }
    const auto rep = evaluate_segmentations(pairs, schema);
    for (double d : rep.mean_dice)
        EXPECT_EQ(d, 1.0);
    EXPECT_EQ(rep.mean_anatomy_dice, 1.0);
    EXPECT_EQ(rep.mean_wmh_dice, 1.0);
    ASSERT_FALSE(rep.correlations.empty());
    for (const auto& c : rep.correlations) {
        ASSERT_TRUE(c.pearson) << c.name;
        EXPECT_NEAR(*c.pearson, 1.0, 1e-12) << c.name;
        EXPECT_NEAR(*c.spearman, 1.0, 1e-12) << c.name;
    }
    EXPECT_TRUE(rep.correlation("Hippocampus"));
    EXPECT_TRUE(rep.correlation("WM-hypointensities"));
    EXPECT_THROW(evaluate_segmentations({}, schema), InvalidArgument);
}

TEST(Evaluate, TwelveCaseCohortMatchesOracle)
{
    const auto schema = small_schema();
    std::mt19937_64 rng(2024);
    std::vector<SegmentationPair> pairs;
    std::vector<double> ref_hip, pred_hip, ref_wm, pred_wm;
    for (int c = 0; c < 12; ++c) {
        const Geometry g = isotropic_geometry({12, 12, 12});
        LabelVolume ref(g, 0);
        // hippocampus volume grows with c, the rest random
        std::uniform_int_distribution<int> other(0, 2);
        const Label fill[] = {0, 2, 41};
        const std::size_t hip = 40 + 15 * static_cast<std::size_t>(c);
        for (std::size_t n = 0; n < ref.size(); ++n)
            ref[n] = n < hip ? 17 : fill[other(rng)];
        // prediction: reference with a known number of voxels relabelled
        LabelVolume pred = ref;
        std::uniform_int_distribution<std::size_t> where(0, ref.size() - 1);
        std::uniform_int_distribution<int> noise(0, 30);
        const int flips = noise(rng);
        for (int f = 0; f < flips; ++f)
            pred[where(rng)] = (f % 2) ? 17 : 53;

        auto count = [](const LabelVolume& v, Label id) {
            double k = 0;
            for (Label x : v.data())
                k += (x == id);
            return k;
        };
        ref_hip.push_back(count(ref, 17));
        pred_hip.push_back(count(pred, 17));
        ref_wm.push_back(0.5 * (count(ref, 2) + count(ref, 41)));
        pred_wm.push_back(0.5 * (count(pred, 2) + count(pred, 41)));
        pairs.push_back({"c" + std::to_string(c), std::move(pred), std::move(ref)});
    }
    const auto rep = evaluate_segmentations(pairs, schema);
    const auto* hip = rep.correlation("Left-Hippocampus");
    ASSERT_TRUE(hip && hip->pearson);
    EXPECT_NEAR(*hip->pearson, oracle_pearson(ref_hip, pred_hip), 1e-10);
    EXPECT_NEAR(*hip->spearman, oracle_spearman(ref_hip, pred_hip), 1e-10);
    const auto* wm = rep.correlation("Cerebral-White-Matter");
    ASSERT_TRUE(wm && wm->pearson);
    EXPECT_NEAR(*wm->pearson, oracle_pearson(ref_wm, pred_wm), 1e-10);
    for (const auto& cs : rep.cases)
        for (const auto& e : cs.predicted.rois)
            EXPECT_TRUE(e.dice && *e.dice >= 0.0 && *e.dice <= 1.0);
}

TEST(Evaluate, ReferenceOnCoarserGridIsResampled)
{
    const auto schema = LabelSchema::default_brain();
    const auto p = phantom(24);
    const auto coarse = resample_labels(p.labels, {2.0, 2.0, 2.0});
    const auto rep = evaluate_segmentations({{"a", p.labels, coarse}}, schema);
    EXPECT_GT(rep.mean_dice[schema.channel(2)], 0.7);
    EXPECT_LT(rep.mean_dice[schema.channel(2)], 1.0);
    EXPECT_FALSE(rep.correlations.front().pearson);  // one case
}

TEST(Evaluate, DatasetThroughStubPredictors)
{
    const auto schema = LabelSchema::default_brain();
    std::vector<EvaluationCase> cases;
    for (std::uint64_t s = 0; s < 3; ++s) {
        PhantomOptions po;
        po.dims = {20, 20, 20};
        po.seed = s;
        auto p = make_phantom(schema, po);
        cases.push_back({"s" + std::to_string(s), p.image, p.labels});
    }
    // one predictor that dispatches on the input to the right stub
    std::vector<std::unique_ptr<OneHotStubPredictor>> stubs;
    for (const auto& c : cases)
        stubs.push_back(std::make_unique<OneHotStubPredictor>(schema, c.reference, prepare_input(c.input)));
    FunctionPredictor pred(schema, [&](const IntensityVolume& x) -> PredictionBundle {
        for (const auto& s : stubs) {
            try {
                return s->predict(x);
            } catch (const ContractError&) {
            }
        }
        throw ContractError("unknown input");
    });
    const auto rep = evaluate_dataset(cases, pred, schema);
    ASSERT_EQ(rep.cases.size(), 3u);
    for (double d : rep.mean_dice)
        EXPECT_EQ(d, 1.0);
    EXPECT_THROW(evaluate_dataset({}, pred, schema), InvalidArgument);
}

TEST(ExternalPredictor, ShellPredictorRoundTrip)
{
    const auto schema = LabelSchema::default_brain();
    const auto p = phantom(12);
    TempDir dir;
    SegmentOptions opt;
    opt.tta = false;
    const auto x = prepare_input(p.image, opt);
    const auto response = one_hot_bundle(p.labels, schema).to_channels();
    const std::string resp = dir.file("response.nii");
    nifti::write_channels(response, resp);
    std::ofstream(resp + ".json") << ExternalPredictor::sidecar_json(schema);
    const std::string script = dir.file("predict.sh");
    std::ofstream(script) << "#!/bin/sh\ncp '" << resp << "' \"$2\" && cp '" << resp << ".json' \"$2.json\"\n";
    ASSERT_EQ(run_process({"chmod", "+x", script}), 0);

    const ExternalPredictor ext(schema, {script}, dir.path());
    const auto r = segment(p.image, ext, schema, opt);
    EXPECT_EQ(r.segmentation, p.labels);

    std::ofstream(resp + ".json") << R"({"schema_hash": "0000", "channels": []})";
    EXPECT_THROW(segment(p.image, ext, schema, opt), ContractError);
    const ExternalPredictor failing(schema, {"false"}, dir.path());
    EXPECT_THROW(segment(p.image, failing, schema, opt), ContractError);
    const ExternalPredictor silent(schema, {"true"}, dir.path());
    EXPECT_THROW(segment(p.image, silent, schema, opt), ContractError);
}
