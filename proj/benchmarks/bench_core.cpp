#include <benchmark/benchmark.h>

#include <random>

#include "nsf/generator.hpp"
#include "nsf/inference.hpp"
#include "nsf/loss.hpp"
#include "nsf/nifti.hpp"
#include "nsf/phantom.hpp"
#include "nsf/predictor.hpp"
#include "nsf/resample.hpp"

using namespace nsf;

namespace {

TrainingPair phantom(std::int64_t n)
{
    PhantomOptions po;
    po.dims = {n, n, n};
    return make_phantom(LabelSchema::default_brain(), po);
}

void BM_Resample(benchmark::State& state)
{
    const auto p = phantom(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(resample(p.image, {1.3, 1.3, 4.0}));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.image.size()));
}
BENCHMARK(BM_Resample)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_SimulateAcquisition(benchmark::State& state)
{
    const auto p = phantom(state.range(0));
    const ResolutionSpec spec{Regime::Clinical2D, Orientation::Axial, {1, 1, 6}};
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate_acquisition(p.image, spec));
}
BENCHMARK(BM_SimulateAcquisition)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_GenerateSample(benchmark::State& state)
{
    const auto schema = LabelSchema::default_brain();
    const auto p = phantom(state.range(0));
    const GeneratorConfig cfg;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        Rng rng(seed++);
        benchmark::DoNotOptimize(generate_sample(p, schema, cfg, rng));
    }
}
BENCHMARK(BM_GenerateSample)->Arg(64)->Arg(96)->Unit(benchmark::kMillisecond);

void BM_GmmDraw(benchmark::State& state)
{
    const auto schema = LabelSchema::default_brain();
    const GeneratorConfig cfg;
    Rng rng(1);
    for (auto _ : state)
        benchmark::DoNotOptimize(sample_gmm_params(schema, cfg, rng));
}
BENCHMARK(BM_GmmDraw);

void BM_CompositeLoss(benchmark::State& state)
{
    const auto schema = LabelSchema::default_brain();
    const auto p = phantom(state.range(0));
    SynthSample s{p.image, p.labels, p.image, IntensityVolume(p.image.geometry(), 1.0f), {}, {}};
    for (auto& x : s.target_image.data())
        x = 1.0f + x / 255.0f;
    PredictionBundle pred = one_hot_bundle(p.labels, schema);
    pred.pred_bias = IntensityVolume(p.image.geometry(), 1.1f);
    for (auto _ : state)
        benchmark::DoNotOptimize(composite_loss(pred, s, schema));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.labels.size()));
}
BENCHMARK(BM_CompositeLoss)->Arg(48)->Arg(96)->Unit(benchmark::kMillisecond);

void BM_SegmentStub(benchmark::State& state)
{
    const auto schema = LabelSchema::default_brain();
    const auto p = phantom(state.range(0));
    const OneHotStubPredictor stub(schema, p.labels, prepare_input(p.image));
    for (auto _ : state)
        benchmark::DoNotOptimize(segment(p.image, stub, schema));
}
BENCHMARK(BM_SegmentStub)->Arg(48)->Arg(96)->Unit(benchmark::kMillisecond);

void BM_NiftiEncodeGzip(benchmark::State& state)
{
    const auto p = phantom(state.range(0));
    const std::vector<IntensityVolume> channels{p.image};
    for (auto _ : state)
        benchmark::DoNotOptimize(nifti::gzip(nifti::encode(channels, nifti::Datatype::Float32)));
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(p.image.size() * sizeof(float)));
}
BENCHMARK(BM_NiftiEncodeGzip)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
