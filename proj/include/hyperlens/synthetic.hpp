#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "hyperlens/bundle.hpp"

namespace hyperlens {

// How slot values are drawn. Planted builds a noisy cluster tree whose
// geometry follows the mask hierarchy; IidGaussian draws every slot
// independently from a standard normal (masks and planted parent maps are
// still produced, so retrieval on such a bundle calibrates the chance
// baseline).
enum class SlotModel { Planted, IidGaussian };

struct SyntheticConfig {
    std::size_t n_scenes = 100;
    std::size_t slot_dim = 64;
    std::size_t patch_count = 576;
    std::vector<int> levels = {3, 5, 7, 11, 13};
    double parent_separation = 1.0;
    double child_noise = 0.05;  // std of child offsets, relative to parent_separation
    std::map<int, double> norm_profile;  // level -> target mean slot norm; empty = no rescale
    std::uint64_t seed = 0;
    SlotModel slot_model = SlotModel::Planted;
};

// Balanced child distribution: n_children split over n_parents as evenly as
// integer division allows, remainder going to the lowest parent indices.
std::vector<int> plan_child_counts(int n_children, int n_parents);

// Deterministic synthetic bundle with nested partition masks. Each level's
// patch ranges are split contiguously and exactly among the children, so the
// mask-derived hierarchy equals the planted parent map by construction.
// Output is a pure function of the config; slot values are quantized to
// float32 at generation time, matching the storage precision.
SlotBundle generate_synthetic(const SyntheticConfig& config);

} // namespace hyperlens
