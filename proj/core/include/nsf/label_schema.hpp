#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nsf/volume.hpp"

namespace nsf {

struct LabelEntry {
    Label id;
    std::string name;
};

using LateralPair = std::pair<Label, Label>;

/// The label set a model segments. Order defines channel order: channel c of
/// a posterior stack belongs to labels()[c].id.
class LabelSchema {
public:
    LabelSchema(std::vector<LabelEntry> labels, std::vector<LateralPair> lateral_pairs, std::vector<Label> wm_ids,
                Label wmh_id, Label background_id, std::vector<Label> evaluation_ids = {});

    /// 36 FreeSurfer-style brain ROIs, WMH (77) and background (0).
    static LabelSchema default_brain();
    static LabelSchema parse_json(std::string_view text);
    static LabelSchema load(const std::string& path);
    std::string to_json() const;

    std::size_t channel_count() const { return labels_.size(); }
    const std::vector<LabelEntry>& labels() const { return labels_; }
    const std::vector<LateralPair>& lateral_pairs() const { return lateral_pairs_; }
    const std::vector<Label>& wm_ids() const { return wm_ids_; }
    Label wmh_id() const { return wmh_id_; }
    Label background_id() const { return background_id_; }
    /// ROIs averaged in anatomy Dice tables.
    const std::vector<Label>& evaluation_ids() const { return evaluation_ids_; }

    bool contains(Label id) const { return channel_of(id).has_value(); }
    std::optional<std::size_t> channel_of(Label id) const;
    /// Throws InvalidArgument for ids outside the schema.
    std::size_t channel(Label id) const;
    Label id_at(std::size_t channel) const { return labels_.at(channel).id; }
    const std::string& name_of(Label id) const;

    /// Mirror partner of a lateral label, or the id itself.
    Label lateral_counterpart(Label id) const;
    /// perm[c] is the channel that channel c maps to under a left-right swap.
    std::vector<std::size_t> lateral_channel_permutation() const;

    /// Throws InvalidArgument naming the first voxel value outside the schema.
    void validate(const LabelVolume& labels) const;

    /// Stable 64-bit FNV-1a digest of the canonical JSON form, hex encoded.
    std::string hash() const;

private:
    std::vector<LabelEntry> labels_;
    std::vector<LateralPair> lateral_pairs_;
    std::vector<Label> wm_ids_;
    Label wmh_id_;
    Label background_id_;
    std::vector<Label> evaluation_ids_;
    std::vector<int> channel_lookup_;  // dense id -> channel, -1 if absent
    std::vector<Label> counterpart_lookup_;
};

} // namespace nsf
