#include "cli.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "nsf/inference.hpp"
#include "nsf/nifti.hpp"
#include "nsf/phantom.hpp"
#include "nsf/report.hpp"

namespace fs = std::filesystem;

namespace nsf::cli {

namespace {

std::shared_ptr<spdlog::logger> logger()
{
    static std::shared_ptr<spdlog::logger> log = [] {
        auto l = spdlog::stderr_logger_mt("nsf");
        l->set_pattern("[%l] %v");
        return l;
    }();
    return log;
}

void configure_logging()
{
    auto level = spdlog::level::info;
    if (const char* env = std::getenv("NSF_LOG_LEVEL"))
        level = spdlog::level::from_str(env);
    logger()->set_level(level);
}

std::string trim(std::string s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size())
            throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw InvalidArgument("config key '" + key + "': not a number: " + value);
    }
}

std::vector<double> parse_list(const std::string& key, const std::string& value, std::size_t expected)
{
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_double(key, trim(item)));
    if (out.size() != expected)
        throw InvalidArgument("config key '" + key + "' needs " + std::to_string(expected) + " values");
    return out;
}

Range parse_range(const std::string& key, const std::string& value)
{
    const auto v = parse_list(key, value, 2);
    return {v[0], v[1]};
}

bool parse_bool(const std::string& key, const std::string& value)
{
    if (value == "true" || value == "1" || value == "yes" || value == "on")
        return true;
    if (value == "false" || value == "0" || value == "no" || value == "off")
        return false;
    throw InvalidArgument("config key '" + key + "': not a boolean: " + value);
}

std::uint64_t parse_count(const std::string& key, const std::string& value)
{
    const double v = parse_double(key, value);
    if (v < 0.0 || v != std::floor(v))
        throw InvalidArgument("config key '" + key + "' must be a non-negative integer");
    return static_cast<std::uint64_t>(v);
}

template <typename F>
void parallel_for(std::size_t n, unsigned workers, F&& body)
{
    const std::size_t threads = std::max<std::size_t>(1, std::min<std::size_t>(workers, n));
    std::atomic<std::size_t> next{0};
    auto loop = [&] {
        for (std::size_t i = next++; i < n; i = next++)
            body(i);
    };
    if (threads == 1) {
        loop();
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back(loop);
    for (auto& t : pool)
        t.join();
}

bool is_volume_file(const fs::path& p)
{
    const std::string name = p.filename().string();
    return name.ends_with(".nii") || name.ends_with(".nii.gz");
}

/// Files named directly plus the volumes inside named directories (sorted).
std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs)
{
    std::vector<std::string> out;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            std::vector<std::string> found;
            for (const auto& e : fs::directory_iterator(in))
                if (e.is_regular_file() && is_volume_file(e.path()))
                    found.push_back(e.path().string());
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else if (fs::is_regular_file(in)) {
            out.push_back(in);
        } else {
            throw IoError("input not found: " + in);
        }
    }
    return out;
}

std::string strip_suffix(std::string s, std::string_view suffix)
{
    if (s.ends_with(suffix))
        s.erase(s.size() - suffix.size());
    return s;
}

LabelSchema load_schema(const RunConfig& config)
{
    return config.schema_path.empty() ? LabelSchema::default_brain() : LabelSchema::load(config.schema_path);
}

void write_text(const fs::path& path, const std::string& text)
{
    nifti::write_file_atomic(path.string(), std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// --- generate ---------------------------------------------------------------

struct PairSource {
    std::string id;
    std::string image;
    std::string labels;
};

std::vector<PairSource> collect_pairs(const std::vector<std::string>& inputs)
{
    std::vector<PairSource> pairs;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            std::map<std::string, PairSource> by_stem;
            for (const auto& e : fs::directory_iterator(in)) {
                if (!e.is_regular_file() || !is_volume_file(e.path()))
                    continue;
                const std::string stem = volume_stem(e.path().string());
                if (stem.ends_with("_image"))
                    by_stem[strip_suffix(stem, "_image")].image = e.path().string();
                else if (stem.ends_with("_labels"))
                    by_stem[strip_suffix(stem, "_labels")].labels = e.path().string();
            }
            for (auto& [stem, p] : by_stem) {
                if (p.image.empty() || p.labels.empty()) {
                    logger()->warn("{}: incomplete pair '{}' skipped", in, stem);
                    continue;
                }
                p.id = stem;
                pairs.push_back(p);
            }
            continue;
        }
        const auto colon = in.find(':');
        if (colon == std::string::npos)
            throw InvalidArgument("generate inputs are IMAGE:LABELS pairs or directories: " + in);
        PairSource p{"", in.substr(0, colon), in.substr(colon + 1)};
        for (const auto& f : {p.image, p.labels})
            if (!fs::is_regular_file(f))
                throw IoError("input not found: " + f);
        p.id = strip_suffix(volume_stem(p.image), "_image");
        pairs.push_back(p);
    }
    return pairs;
}

TrainingPair load_pair(const PairSource& src, const LabelSchema& schema)
{
    TrainingPair pair{nifti::read_volume(src.image), nifti::read_labels(src.labels)};
    schema.validate(pair.labels);
    if (!pair.image.geometry().same_grid(pair.labels.geometry()))
        throw InvalidArgument("image and labels are on different grids");
    if (!pair.image.geometry().is_isotropic(1.0)) {
        pair.image = resample(pair.image, {1.0, 1.0, 1.0});
        pair.labels = resample_labels_to_grid(pair.labels, pair.image.geometry(), schema.background_id());
    }
    return pair;
}

int cmd_generate(const RunConfig& config)
{
    const LabelSchema schema = load_schema(config);
    config.generator.validate();
    const fs::path out(config.output);
    fs::create_directories(out);

    std::vector<std::optional<TrainingPair>> loaded;
    std::vector<PairSource> sources;
    if (config.count > 0) {
        sources = collect_pairs(config.inputs);
        loaded.resize(sources.size());
        parallel_for(sources.size(), config.workers, [&](std::size_t i) {
            try {
                loaded[i] = load_pair(sources[i], schema);
            } catch (const std::exception& e) {
                logger()->error("pair {} ({}, {}): {}", sources[i].id, sources[i].image, sources[i].labels, e.what());
            }
        });
    }
    if (config.count > 0 && sources.empty()) {
        logger()->error("no training pairs given");
        return kFailure;
    }
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < loaded.size(); ++i)
        if (loaded[i])
            usable.push_back(i);
    if (config.count > 0 && usable.empty()) {
        logger()->error("no readable training pairs");
        return kFailure;
    }

    std::vector<std::string> lines(config.count);
    std::vector<std::optional<Regime>> regimes(config.count);
    std::atomic<std::size_t> done{0};
    parallel_for(config.count, config.workers, [&](std::size_t i) {
        const std::uint64_t seed = sample_seed(config.seed, i);
        char prefix[32];
        std::snprintf(prefix, sizeof prefix, "sample_%04zu", i);
        try {
            Rng rng(seed);
            std::uniform_int_distribution<std::size_t> pick(0, usable.size() - 1);
            const std::size_t p = usable[pick(rng)];
            const SynthSample s = generate_sample(*loaded[p], schema, config.generator, rng);
            const std::string base = (out / prefix).string();
            nifti::write_volume(s.synth, base + "_synth.nii.gz");
            nifti::write_volume(s.labels, base + "_labels.nii.gz");
            nifti::write_volume(s.target_image, base + "_image.nii.gz");
            nifti::write_volume(s.target_bias, base + "_bias.nii.gz");

            nlohmann::ordered_json j;
            j["index"] = i;
            j["seed"] = seed;
            j["pair"] = sources[p].id;
            j["regime"] = to_string(s.resolution.regime);
            j["orientation"] = s.resolution.orientation ? nlohmann::ordered_json(to_string(*s.resolution.orientation))
                                                        : nlohmann::ordered_json(nullptr);
            j["voxel_size_mm"] = s.resolution.voxel_size;
            j["gmm"] = {{"labels", nlohmann::json::array()}, {"means", s.gmm.means}, {"stds", s.gmm.stds}};
            for (const auto& e : schema.labels())
                j["gmm"]["labels"].push_back(e.id);
            j["files"] = {std::string(prefix) + "_synth.nii.gz", std::string(prefix) + "_labels.nii.gz",
                          std::string(prefix) + "_image.nii.gz", std::string(prefix) + "_bias.nii.gz"};
            lines[i] = j.dump();
            regimes[i] = s.resolution.regime;
            logger()->info("{} written ({}/{})", prefix, ++done, config.count);
        } catch (const std::exception& e) {
            logger()->error("{}: {}", prefix, e.what());
        }
    });

    std::string manifest;
    std::array<std::size_t, 4> per_regime{};
    std::size_t ok = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!regimes[i])
            continue;
        manifest += lines[i] + "\n";
        ++per_regime[static_cast<std::size_t>(*regimes[i])];
        ++ok;
    }
    write_text(out / "manifest.jsonl", manifest);
    logger()->info("{} of {} samples written; regimes: {} {}, {} {}, {} {}, {} {}", ok, config.count,
                   to_string(Regime::Isotropic1mm), per_regime[0], to_string(Regime::Clinical2D), per_regime[1],
                   to_string(Regime::PortableStock), per_regime[2], to_string(Regime::LowFieldIsotropic),
                   per_regime[3]);
    if (config.count > 0 && ok == 0)
        return kFailure;
    return ok < config.count || usable.size() < sources.size() ? kPartial : kOk;
}

// --- segment ----------------------------------------------------------------

std::vector<std::string> split_words(const std::string& s)
{
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string w; in >> w;)
        out.push_back(w);
    return out;
}

int cmd_segment(const RunConfig& config)
{
    const LabelSchema schema = load_schema(config);
    if (config.predictor.empty())
        throw InvalidArgument("segment needs --predictor stub:<labels.nii> or cmd:<command>");
    std::optional<LabelVolume> stub_map;
    std::unique_ptr<Predictor> external;
    if (config.predictor.starts_with("stub:")) {
        stub_map = nifti::read_labels(config.predictor.substr(5));
        schema.validate(*stub_map);
    } else if (config.predictor.starts_with("cmd:")) {
        external = std::make_unique<ExternalPredictor>(schema, split_words(config.predictor.substr(4)));
    } else {
        throw InvalidArgument("unknown predictor (expected stub:<labels> or cmd:<command>): " + config.predictor);
    }

    const auto inputs = expand_inputs(config.inputs);
    if (inputs.empty()) {
        logger()->error("no input volumes");
        return kFailure;
    }
    const fs::path out(config.output);
    fs::create_directories(out);

    SegmentOptions options;
    options.tta = config.tta;
    options.max_voxels = config.max_voxels;

    std::atomic<bool> abort{false};
    std::mutex contract_mutex;
    std::string contract_message;
    std::atomic<std::size_t> failures{0};
    parallel_for(inputs.size(), config.workers, [&](std::size_t i) {
        if (abort)
            return;
        const std::string stem = volume_stem(inputs[i]);
        try {
            const IntensityVolume image = nifti::read_volume(inputs[i]);
            SegmentationResult r;
            if (stub_map) {
                const IntensityVolume x = prepare_input(image, options);
                LabelVolume map = stub_map->geometry().same_grid(x.geometry())
                                      ? *stub_map
                                      : resample_labels_to_grid(*stub_map, x.geometry(), schema.background_id());
                const OneHotStubPredictor stub(schema, std::move(map), x);
                r = segment(image, stub, schema, options);
            } else {
                r = segment(image, *external, schema, options);
            }
            nifti::write_volume(r.segmentation, (out / (stem + "_seg.nii.gz")).string());
            write_text(out / (stem + "_report.csv"), roi_report_csv(r.report, stem));
            write_text(out / (stem + "_report.json"), roi_report_json(r.report, stem));
            logger()->info("{}: segmented", inputs[i]);
        } catch (const ContractError& e) {
            abort = true;
            std::lock_guard lock(contract_mutex);
            if (contract_message.empty())
                contract_message = inputs[i] + ": " + e.what();
        } catch (const std::exception& e) {
            ++failures;
            logger()->error("{}: {}", inputs[i], e.what());
        }
    });
    if (abort) {
        logger()->error("predictor contract violation: {}", contract_message);
        return kFailure;
    }
    if (failures == 0)
        return kOk;
    return failures == inputs.size() ? kFailure : kPartial;
}

// --- evaluate ---------------------------------------------------------------

int cmd_evaluate(const RunConfig& config)
{
    const LabelSchema schema = load_schema(config);
    if (config.references.empty())
        throw InvalidArgument("evaluate needs --reference");
    const auto predictions = expand_inputs(config.inputs);
    const auto references = expand_inputs(config.references);

    std::map<std::string, std::string> ref_by_stem;
    for (const auto& r : references)
        ref_by_stem[strip_suffix(strip_suffix(volume_stem(r), "_labels"), "_seg")] = r;
    std::map<std::string, std::string> pred_by_stem;
    for (const auto& p : predictions)
        pred_by_stem[strip_suffix(volume_stem(p), "_seg")] = p;

    std::vector<std::pair<std::string, std::string>> matched_paths;
    std::vector<std::string> ids;
    std::size_t unmatched = 0;
    for (const auto& [stem, path] : pred_by_stem) {
        const auto it = ref_by_stem.find(stem);
        if (it == ref_by_stem.end()) {
            logger()->warn("no reference for prediction {} (skipped)", path);
            ++unmatched;
            continue;
        }
        ids.push_back(stem);
        matched_paths.emplace_back(path, it->second);
    }
    for (const auto& [stem, path] : ref_by_stem)
        if (!pred_by_stem.count(stem))
            logger()->warn("no prediction for reference {} (skipped)", path);
    if (matched_paths.empty()) {
        logger()->error("no prediction/reference stems match");
        return kFailure;
    }

    std::vector<std::optional<SegmentationPair>> loaded(matched_paths.size());
    parallel_for(matched_paths.size(), config.workers, [&](std::size_t i) {
        try {
            loaded[i] = SegmentationPair{ids[i], nifti::read_labels(matched_paths[i].first),
                                         nifti::read_labels(matched_paths[i].second)};
        } catch (const std::exception& e) {
            logger()->error("{}: {}", ids[i], e.what());
        }
    });
    std::vector<SegmentationPair> pairs;
    for (auto& p : loaded)
        if (p)
            pairs.push_back(std::move(*p));
    if (pairs.empty())
        return kFailure;

    const DatasetReport report = evaluate_segmentations(pairs, schema);
    const fs::path out(config.output);
    fs::create_directories(out);
    write_text(out / "evaluation_cases.csv", dataset_cases_csv(report));
    write_text(out / "evaluation_summary.csv", dataset_summary_csv(report, schema));
    write_text(out / "evaluation.json", dataset_report_json(report, schema));
    logger()->info("{} cases evaluated; mean anatomy dice {:.4f}, wmh dice {:.4f}", pairs.size(),
                   report.mean_anatomy_dice, report.mean_wmh_dice);
    return pairs.size() == matched_paths.size() && unmatched == 0 ? kOk : kPartial;
}

// --- phantom ----------------------------------------------------------------

int cmd_phantom(const RunConfig& config)
{
    const LabelSchema schema = load_schema(config);
    const fs::path out(config.output);
    fs::create_directories(out);
    parallel_for(config.count, config.workers, [&](std::size_t i) {
        PhantomOptions opts;
        opts.dims = {config.phantom_size, config.phantom_size, config.phantom_size};
        opts.seed = sample_seed(config.seed, i);
        const TrainingPair p = make_phantom(schema, opts);
        char prefix[32];
        std::snprintf(prefix, sizeof prefix, "case_%03zu", i);
        nifti::write_volume(p.image, (out / (std::string(prefix) + "_image.nii.gz")).string());
        nifti::write_volume(p.labels, (out / (std::string(prefix) + "_labels.nii.gz")).string());
    });
    logger()->info("{} phantom pairs written to {}", config.count, config.output);
    return kOk;
}

} // namespace

std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    std::array<std::uint32_t, 2> words{};
    seq.generate(words.begin(), words.end());
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::string volume_stem(const std::string& path)
{
    std::string name = fs::path(path).filename().string();
    name = strip_suffix(name, ".gz");
    return strip_suffix(name, ".nii");
}

void apply_config_text(const std::string& text, RunConfig& config, const std::vector<std::string>& locked)
{
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (std::find(locked.begin(), locked.end(), key) != locked.end())
            continue;

        auto& g = config.generator;
        if (key == "count")
            config.count = parse_count(key, value);
        else if (key == "seed")
            config.seed = parse_count(key, value);
        else if (key == "workers")
            config.workers = static_cast<unsigned>(std::max<std::uint64_t>(1, parse_count(key, value)));
        else if (key == "predictor")
            config.predictor = value;
        else if (key == "schema")
            config.schema_path = value;
        else if (key == "tta")
            config.tta = parse_bool(key, value);
        else if (key == "max_voxels")
            config.max_voxels = parse_count(key, value);
        else if (key == "mean_range")
            g.mean_range = parse_range(key, value);
        else if (key == "std_range")
            g.std_range = parse_range(key, value);
        else if (key == "wmh_threshold")
            g.wmh_threshold = parse_double(key, value);
        else if (key == "share_lateral_gmm")
            g.share_lateral_gmm = parse_bool(key, value);
        else if (key == "bias_log_sigma")
            g.bias_log_sigma = parse_double(key, value);
        else if (key == "bias_control_size")
            g.bias_control_size = static_cast<std::int64_t>(parse_count(key, value));
        else if (key == "rotation_deg")
            g.rotation_deg = parse_double(key, value);
        else if (key == "scaling")
            g.scaling = parse_range(key, value);
        else if (key == "shear")
            g.shear = parse_double(key, value);
        else if (key == "translation_mm")
            g.translation_mm = parse_double(key, value);
        else if (key == "deformation_control_size")
            g.deformation_control_size = static_cast<std::int64_t>(parse_count(key, value));
        else if (key == "deformation_sigma_mm")
            g.deformation_sigma_mm = parse_double(key, value);
        else if (key == "regime_probabilities") {
            const auto v = parse_list(key, value, 4);
            std::copy(v.begin(), v.end(), g.regime_probabilities.begin());
        } else if (key == "clinical_slice_spacing")
            g.clinical_slice_spacing = parse_range(key, value);
        else if (key == "portable_in_plane")
            g.portable_in_plane = parse_range(key, value);
        else if (key == "portable_slice_spacing")
            g.portable_slice_spacing = parse_double(key, value);
        else if (key == "lowfield_spacing")
            g.lowfield_spacing = parse_range(key, value);
        else
            throw InvalidArgument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
}

int run(const std::vector<std::string>& args)
{
    configure_logging();
    RunConfig config;
    std::string command_flag;

    CLI::App app{"Synthetic brain MRI generation, segmentation and evaluation"};
    app.set_version_flag("--version", "nsf 0.1.0");
    app.add_option("verb", config.command, "generate | segment | evaluate | phantom");
    app.add_option("--command", command_flag, "Same as the positional command");
    app.add_option("-i,--input", config.inputs,
                   "generate: IMAGE:LABELS or a directory of *_image/*_labels pairs; "
                   "segment/evaluate: volumes or directories");
    app.add_option("-r,--reference", config.references, "evaluate: reference segmentations or directories");
    app.add_option("-o,--output", config.output, "Output directory")->required();
    auto* schema_opt = app.add_option("--schema", config.schema_path, "Label schema JSON (default brain schema)");
    app.add_option("--config", config.config_path, "key = value file; command-line flags take precedence")
        ->check(CLI::ExistingFile);
    auto* count_opt = app.add_option("-n,--count", config.count, "Samples (generate) or cases (phantom)");
    auto* seed_opt = app.add_option("--seed", config.seed, "Run seed")->default_val(kDefaultSeed);
    app.add_flag("--random-seed", config.random_seed, "Draw the run seed from the system");
    auto* workers_opt =
        app.add_option("-j,--workers", config.workers, "Worker threads")->check(CLI::Range(1u, 1024u));
    auto* predictor_opt = app.add_option("--predictor", config.predictor, "stub:<labels.nii[.gz]> or cmd:<command>");
    auto* tta_opt = app.add_flag("--tta,!--no-tta", config.tta, "Left-right flip test-time augmentation");
    auto* max_voxels_opt =
        app.add_option("--max-voxels", config.max_voxels, "Tile the predictor input above this size (0 = never)");
    app.add_option("--size", config.phantom_size, "phantom: edge length in voxels")->check(CLI::Range(8, 512));

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kFailure;
    }
    if (!command_flag.empty()) {
        if (!config.command.empty() && config.command != command_flag) {
            logger()->error("conflicting commands '{}' and '{}'", config.command, command_flag);
            return kFailure;
        }
        config.command = command_flag;
    }

    try {
        if (!config.config_path.empty()) {
            std::vector<std::string> locked;
            const std::pair<CLI::Option*, const char*> keyed[] = {
                {count_opt, "count"},         {seed_opt, "seed"},   {workers_opt, "workers"},
                {predictor_opt, "predictor"}, {schema_opt, "schema"}, {tta_opt, "tta"},
                {max_voxels_opt, "max_voxels"}};
            for (const auto& [opt, key] : keyed)
                if (opt->count() > 0)
                    locked.emplace_back(key);
            std::ifstream in(config.config_path);
            std::stringstream ss;
            ss << in.rdbuf();
            apply_config_text(ss.str(), config, locked);
        }
        if (config.random_seed) {
            std::random_device rd;
            config.seed = (static_cast<std::uint64_t>(rd()) << 32) | rd();
            logger()->info("run seed {}", config.seed);
        }
        config.generator.seed = config.seed;
    } catch (const Error& e) {
        logger()->error("{}", e.what());
        return kFailure;
    }

    try {
        if (config.command == "generate")
            return cmd_generate(config);
        if (config.command == "segment")
            return cmd_segment(config);
        if (config.command == "evaluate")
            return cmd_evaluate(config);
        if (config.command == "phantom")
            return cmd_phantom(config);
        logger()->error("unknown command '{}'; expected generate, segment, evaluate or phantom", config.command);
        return kFailure;
    } catch (const std::exception& e) {
        logger()->error("{}", e.what());
        return kFailure;
    }
}

} // namespace nsf::cli
