#include "nsf/predictor.hpp"

#include <atomic>
#include <cerrno>
#include <fstream>
#include <sstream>

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "nsf/nifti.hpp"
#include "nsf/resample.hpp"

extern char** environ;

namespace nsf {

namespace {

PredictorMetadata metadata_for(const LabelSchema& schema)
{
    return PredictorMetadata{schema.hash(), schema.channel_count() + 2, kInputNormalization};
}

class ScratchDir {
public:
    explicit ScratchDir(const std::filesystem::path& parent)
    {
        static std::atomic<unsigned> counter{0};
        path_ = parent / ("nsf-predict-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::error_code ec;
        std::filesystem::create_directories(path_, ec);
        if (ec)
            throw IoError("cannot create scratch directory " + path_.string());
    }
    ~ScratchDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace

FunctionPredictor::FunctionPredictor(const LabelSchema& schema, Fn fn) : metadata_(metadata_for(schema)), fn_(std::move(fn)) {}

PredictionBundle one_hot_bundle(const LabelVolume& labels, const LabelSchema& schema)
{
    PredictionBundle b;
    const std::size_t L = schema.channel_count();
    b.soft_labels.assign(L, IntensityVolume(labels.geometry(), 0.0f));
    for (std::size_t n = 0; n < labels.size(); ++n)
        b.soft_labels[schema.channel(labels[n])][n] = 1.0f;
    b.pred_image = IntensityVolume(labels.geometry(), 0.0f);
    b.pred_bias = IntensityVolume(labels.geometry(), 1.0f);
    return b;
}

PredictionBundle uniform_bundle(const Geometry& grid, const LabelSchema& schema)
{
    PredictionBundle b;
    const auto p = static_cast<float>(1.0 / static_cast<double>(schema.channel_count()));
    b.soft_labels.assign(schema.channel_count(), IntensityVolume(grid, p));
    b.pred_image = IntensityVolume(grid, 0.0f);
    b.pred_bias = IntensityVolume(grid, 1.0f);
    return b;
}

OneHotStubPredictor::OneHotStubPredictor(const LabelSchema& schema, LabelVolume map, IntensityVolume reference_input)
    : schema_(schema), map_(std::move(map)), reference_(std::move(reference_input))
{
    require_same_grid(map_, reference_, "stub predictor");
    schema_.validate(map_);
    flipped_map_ = flip_lr(map_, schema_);
    flipped_reference_ = flip_lr(reference_);
}

PredictorMetadata OneHotStubPredictor::metadata() const { return metadata_for(schema_); }

PredictionBundle OneHotStubPredictor::predict(const IntensityVolume& input) const
{
    if (input == reference_)
        return one_hot_bundle(map_, schema_);
    if (input == flipped_reference_)
        return one_hot_bundle(flipped_map_, schema_);
    throw ContractError("stub predictor received an input it was not built for");
}

ExternalPredictor::ExternalPredictor(const LabelSchema& schema, std::vector<std::string> argv,
                                     std::filesystem::path scratch_dir)
    : schema_(schema), argv_(std::move(argv)), scratch_(std::move(scratch_dir))
{
    if (argv_.empty())
        throw InvalidArgument("external predictor needs a command");
}

PredictorMetadata ExternalPredictor::metadata() const { return metadata_for(schema_); }

std::string ExternalPredictor::sidecar_json(const LabelSchema& schema)
{
    nlohmann::ordered_json j;
    j["schema_hash"] = schema.hash();
    auto channels = nlohmann::ordered_json::array();
    for (const auto& e : schema.labels())
        channels.push_back(e.id);
    channels.push_back("image");
    channels.push_back("bias");
    j["channels"] = channels;
    return j.dump();
}

PredictionBundle ExternalPredictor::predict(const IntensityVolume& input) const
{
    ScratchDir dir(scratch_);
    const std::string in_path = (dir.path() / "input.nii").string();
    const std::string out_path = (dir.path() / "output.nii").string();
    nifti::write_volume(input, in_path);

    std::vector<std::string> argv = argv_;
    argv.push_back(in_path);
    argv.push_back(out_path);
    const int status = run_process(argv);
    if (status != 0)
        throw ContractError("predictor '" + argv_.front() + "' exited with status " + std::to_string(status));

    std::ifstream sidecar(out_path + ".json");
    if (!sidecar)
        throw ContractError("predictor did not write a JSON sidecar");
    std::stringstream ss;
    ss << sidecar.rdbuf();
    try {
        const auto expected = nlohmann::json::parse(sidecar_json(schema_));
        const auto got = nlohmann::json::parse(ss.str());
        if (got.at("schema_hash") != expected.at("schema_hash"))
            throw ContractError("predictor schema hash " + got.at("schema_hash").dump() + " does not match " +
                                expected.at("schema_hash").dump());
        if (got.at("channels") != expected.at("channels"))
            throw ContractError("predictor channel order does not match the label schema");
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("malformed predictor sidecar: ") + e.what());
    }

    std::vector<IntensityVolume> channels;
    try {
        channels = nifti::read_channels(out_path);
    } catch (const Error& e) {
        throw ContractError(std::string("unreadable predictor output: ") + e.what());
    }
    if (channels.empty() || !channels.front().geometry().same_grid(input.geometry(), 1e-4))
        throw ContractError("predictor output is not on the input grid");
    // Snap float32 round-off in the stored affine back onto the request grid.
    for (auto& c : channels)
        c = IntensityVolume(input.geometry(), std::vector<float>(c.data().begin(), c.data().end()));
    auto bundle = PredictionBundle::from_channels(std::move(channels), schema_);
    bundle.validate(schema_);
    return bundle;
}

int run_process(const std::vector<std::string>& argv)
{
    if (argv.empty())
        return 127;
    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (const auto& a : argv)
        args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    pid_t pid = 0;
    if (posix_spawnp(&pid, args[0], nullptr, nullptr, args.data(), environ) != 0)
        return 127;
    int status = 0;
    while (waitpid(pid, &status, 0) < 0)
        if (errno != EINTR)
            return 127;
    if (WIFEXITED(status))
        return WEXITSTATUS(status);
    if (WIFSIGNALED(status))
        return 128 + WTERMSIG(status);
    return 1;
}

} // namespace nsf
