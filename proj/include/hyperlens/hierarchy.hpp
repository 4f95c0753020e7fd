#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hyperlens/numeric.hpp"

namespace hyperlens {

enum class BinarizePolicy { Argmax, Threshold };

struct BinarizeOptions {
    BinarizePolicy policy = BinarizePolicy::Argmax;
    double threshold = 0.5;  // Threshold policy only; must lie in (0, 1)
};

// Binary segmentation regions, one row of L bits per slot. Under the argmax
// policy every patch column has exactly one set bit.
struct BinaryMaskSet {
    std::size_t slots = 0;
    std::size_t patches = 0;
    std::vector<std::uint8_t> bits;  // row-major slots x patches
    BinarizeOptions policy;

    std::uint8_t bit(std::size_t slot, std::size_t patch) const {
        return bits[slot * patches + patch];
    }
    std::span<const std::uint8_t> row(std::size_t slot) const {
        return std::span<const std::uint8_t>(bits.data() + slot * patches, patches);
    }
};

enum class ExclusionReason : std::uint8_t {
    None = 0,
    NearDuplicate,  // inclusion with the assigned parent exceeds tau_excl
    EmptyChild,     // all-zero child mask (possible under the threshold policy)
};

// Parent assignment for one coarse/fine level pair. Every fine slot gets
// exactly one parent; excluded slots keep their assignment but are skipped
// by downstream evaluation.
struct ParentAssignment {
    int coarse_level = 0;
    int fine_level = 0;
    std::vector<int> parent_of;               // fine index -> coarse index
    std::vector<double> inclusion;            // winning inclusion score per fine slot
    std::vector<ExclusionReason> exclusion;   // per fine slot
    double tau_excl = 0.95;

    bool is_excluded(std::size_t fine_index) const {
        return exclusion[fine_index] != ExclusionReason::None;
    }
    std::size_t n_evaluated() const;
};

// Per-scene assignments across consecutive level pairs, coarse to fine.
struct HierarchyGraph {
    std::string scene_id;
    std::vector<ParentAssignment> assignments;

    const ParentAssignment* find(int coarse_level, int fine_level) const;
};

// Argmax policy: each patch goes to the slot with the largest weight, ties
// to the lowest slot index. Threshold policy: bit = weight >= threshold.
BinaryMaskSet binarize_masks(const Matrix& weights, const BinarizeOptions& options = {});

// Fraction of the child's set bits contained in the parent's region,
// (child . parent) / |child|_1. Throws on an all-zero child mask.
double inclusion_score(std::span<const std::uint8_t> child, std::span<const std::uint8_t> parent);

// Assigns each fine slot to the coarse slot with the highest inclusion
// score (ties to the lowest coarse index). Slots whose winning score
// strictly exceeds tau_excl have not split and are marked excluded; empty
// child masks are excluded with their own reason instead of failing the
// scene.
ParentAssignment assign_parents(const BinaryMaskSet& fine, const BinaryMaskSet& coarse,
                                double tau_excl = 0.95);

// Binarizes each level's attention masks and assigns parents for every
// consecutive level pair. `masks_by_level` must cover all of `levels`.
HierarchyGraph build_hierarchy(const std::string& scene_id,
                               const std::map<int, Matrix>& masks_by_level,
                               const std::vector<int>& levels,
                               const BinarizeOptions& options = {}, double tau_excl = 0.95);

} // namespace hyperlens
