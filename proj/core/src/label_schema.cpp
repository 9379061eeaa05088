#include "nsf/label_schema.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nsf {

namespace {

constexpr Label kMaxDenseId = 1 << 20;

} // namespace

LabelSchema::LabelSchema(std::vector<LabelEntry> labels, std::vector<LateralPair> lateral_pairs,
                         std::vector<Label> wm_ids, Label wmh_id, Label background_id,
                         std::vector<Label> evaluation_ids)
    : labels_(std::move(labels)),
      lateral_pairs_(std::move(lateral_pairs)),
      wm_ids_(std::move(wm_ids)),
      wmh_id_(wmh_id),
      background_id_(background_id),
      evaluation_ids_(std::move(evaluation_ids))
{
    if (labels_.empty())
        throw InvalidArgument("label schema is empty");

    Label max_id = 0;
    for (const auto& e : labels_) {
        if (e.id < 0 || e.id >= kMaxDenseId)
            throw InvalidArgument("label id out of range: " + std::to_string(e.id));
        max_id = std::max(max_id, e.id);
    }
    channel_lookup_.assign(static_cast<std::size_t>(max_id) + 1, -1);
    for (std::size_t c = 0; c < labels_.size(); ++c) {
        auto& slot = channel_lookup_[static_cast<std::size_t>(labels_[c].id)];
        if (slot >= 0)
            throw InvalidArgument("duplicate label id: " + std::to_string(labels_[c].id));
        slot = static_cast<int>(c);
    }

    std::set<Label> seen;
    counterpart_lookup_.resize(channel_lookup_.size());
    for (std::size_t i = 0; i < counterpart_lookup_.size(); ++i)
        counterpart_lookup_[i] = static_cast<Label>(i);
    for (const auto& [left, right] : lateral_pairs_) {
        if (!contains(left) || !contains(right))
            throw InvalidArgument("lateral pair references unknown label");
        if (left == right || !seen.insert(left).second || !seen.insert(right).second)
            throw InvalidArgument("lateral pairs must be disjoint");
        counterpart_lookup_[static_cast<std::size_t>(left)] = right;
        counterpart_lookup_[static_cast<std::size_t>(right)] = left;
    }

    if (!contains(wmh_id_))
        throw InvalidArgument("wmh id is not in the schema");
    if (seen.count(wmh_id_))
        throw InvalidArgument("wmh id cannot be lateral");
    if (!contains(background_id_))
        throw InvalidArgument("background id is not in the schema");
    for (Label id : wm_ids_)
        if (!contains(id) || id == wmh_id_)
            throw InvalidArgument("invalid white matter id: " + std::to_string(id));

    if (evaluation_ids_.empty()) {
        for (const auto& e : labels_)
            if (e.id != background_id_ && e.id != wmh_id_)
                evaluation_ids_.push_back(e.id);
    }
    for (Label id : evaluation_ids_)
        if (!contains(id))
            throw InvalidArgument("evaluation id is not in the schema: " + std::to_string(id));
}

LabelSchema LabelSchema::default_brain()
{
    std::vector<LabelEntry> labels = {
        {0, "background"},
        {2, "Left-Cerebral-White-Matter"},
        {3, "Left-Cerebral-Cortex"},
        {4, "Left-Lateral-Ventricle"},
        {5, "Left-Inf-Lat-Vent"},
        {7, "Left-Cerebellum-White-Matter"},
        {8, "Left-Cerebellum-Cortex"},
        {10, "Left-Thalamus"},
        {11, "Left-Caudate"},
        {12, "Left-Putamen"},
        {13, "Left-Pallidum"},
        {14, "3rd-Ventricle"},
        {15, "4th-Ventricle"},
        {16, "Brain-Stem"},
        {17, "Left-Hippocampus"},
        {18, "Left-Amygdala"},
        {24, "CSF"},
        {26, "Left-Accumbens-area"},
        {28, "Left-VentralDC"},
        {30, "Left-vessel"},
        {31, "Left-choroid-plexus"},
        {41, "Right-Cerebral-White-Matter"},
        {42, "Right-Cerebral-Cortex"},
        {43, "Right-Lateral-Ventricle"},
        {44, "Right-Inf-Lat-Vent"},
        {46, "Right-Cerebellum-White-Matter"},
        {47, "Right-Cerebellum-Cortex"},
        {49, "Right-Thalamus"},
        {50, "Right-Caudate"},
        {51, "Right-Putamen"},
        {52, "Right-Pallidum"},
        {53, "Right-Hippocampus"},
        {54, "Right-Amygdala"},
        {58, "Right-Accumbens-area"},
        {60, "Right-VentralDC"},
        {62, "Right-vessel"},
        {63, "Right-choroid-plexus"},
        {77, "WM-hypointensities"},
    };
    // 16 lateral pairs + 3rd/4th ventricle, brainstem, CSF = 36 ROIs.
    std::vector<LateralPair> pairs = {{2, 41},  {3, 42},  {4, 43},  {5, 44},  {7, 46},  {8, 47},
                                      {10, 49}, {11, 50}, {12, 51}, {13, 52}, {17, 53}, {18, 54},
                                      {26, 58}, {28, 60}, {30, 62}, {31, 63}};
    // Brainstem plus left/right cortex, WM, hippocampus, amygdala, thalamus, caudate, pallidum,
    // putamen, accumbens, cerebellar cortex and cerebellar WM.
    std::vector<Label> evaluation = {16, 3, 42, 2, 41, 17, 53, 18, 54, 10, 49, 11,
                                     50, 13, 52, 12, 51, 26, 58, 8, 47, 7, 46};
    return LabelSchema(std::move(labels), std::move(pairs), {2, 41}, 77, 0, std::move(evaluation));
}

LabelSchema LabelSchema::parse_json(std::string_view text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        std::vector<LabelEntry> labels;
        for (const auto& e : j.at("labels"))
            labels.push_back({e.at("id").get<Label>(), e.at("name").get<std::string>()});
        std::vector<LateralPair> pairs;
        if (j.contains("lateral_pairs"))
            for (const auto& p : j.at("lateral_pairs"))
                pairs.emplace_back(p.at(0).get<Label>(), p.at(1).get<Label>());
        auto wm = j.at("wm_ids").get<std::vector<Label>>();
        std::vector<Label> eval;
        if (j.contains("evaluation_ids"))
            eval = j.at("evaluation_ids").get<std::vector<Label>>();
        return LabelSchema(std::move(labels), std::move(pairs), std::move(wm), j.at("wmh_id").get<Label>(),
                           j.value("background_id", Label{0}), std::move(eval));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("label schema: ") + e.what());
    }
}

LabelSchema LabelSchema::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open label schema: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json(ss.str());
}

std::string LabelSchema::to_json() const
{
    nlohmann::ordered_json j;
    j["labels"] = nlohmann::ordered_json::array();
    for (const auto& e : labels_)
        j["labels"].push_back({{"id", e.id}, {"name", e.name}});
    j["lateral_pairs"] = nlohmann::ordered_json::array();
    for (const auto& [l, r] : lateral_pairs_)
        j["lateral_pairs"].push_back({l, r});
    j["wm_ids"] = wm_ids_;
    j["wmh_id"] = wmh_id_;
    j["background_id"] = background_id_;
    j["evaluation_ids"] = evaluation_ids_;
    return j.dump();
}

std::optional<std::size_t> LabelSchema::channel_of(Label id) const
{
    if (id < 0 || static_cast<std::size_t>(id) >= channel_lookup_.size())
        return std::nullopt;
    const int c = channel_lookup_[static_cast<std::size_t>(id)];
    if (c < 0)
        return std::nullopt;
    return static_cast<std::size_t>(c);
}

std::size_t LabelSchema::channel(Label id) const
{
    auto c = channel_of(id);
    if (!c)
        throw InvalidArgument("label " + std::to_string(id) + " is not in the schema");
    return *c;
}

const std::string& LabelSchema::name_of(Label id) const { return labels_[channel(id)].name; }

Label LabelSchema::lateral_counterpart(Label id) const
{
    if (id < 0 || static_cast<std::size_t>(id) >= counterpart_lookup_.size())
        return id;
    return counterpart_lookup_[static_cast<std::size_t>(id)];
}

std::vector<std::size_t> LabelSchema::lateral_channel_permutation() const
{
    std::vector<std::size_t> perm(labels_.size());
    for (std::size_t c = 0; c < labels_.size(); ++c)
        perm[c] = channel(lateral_counterpart(labels_[c].id));
    return perm;
}

void LabelSchema::validate(const LabelVolume& labels) const
{
    for (Label v : labels.data())
        if (!contains(v))
            throw InvalidArgument("label volume contains id " + std::to_string(v) + " outside the schema");
}

std::string LabelSchema::hash() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : to_json()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace nsf
