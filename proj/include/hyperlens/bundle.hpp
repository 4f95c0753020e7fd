#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hyperlens/numeric.hpp"

namespace hyperlens {

// Slot matrix and attention masks for one granularity level of one scene.
struct LevelData {
    Matrix slots;  // N x d_s
    Matrix masks;  // N x L, values in [0, 1]
};

// Ground truth carried by synthetic scenes: the planted parent map per
// consecutive level pair, plus the norm profile the generator targeted.
struct PlantedTruth {
    std::map<std::pair<int, int>, std::vector<int>> parents;
    std::map<int, double> norm_profile;
};

struct SceneRecord {
    std::string id;
    std::map<int, LevelData> levels;
    std::optional<PlantedTruth> planted;
};

struct BundleManifest {
    int format_version = 1;
    std::size_t slot_dim = 0;    // d_s
    std::size_t patch_count = 0; // L
    std::vector<int> levels;     // ascending
    std::string precision = "f32";
    std::string source = "hyperlens";
    bool planted = false;
};

// A dataset of scenes with slots and masks at every manifest level. Values
// are stored on disk as little-endian float32 and widened to float64 in
// memory.
struct SlotBundle {
    BundleManifest manifest;
    std::vector<SceneRecord> scenes;
};

// Layout under the bundle directory:
//   manifest.json
//   slots_<sceneid>_<N>.bin   raw little-endian float32, row-major N x d_s
//   masks_<sceneid>_<N>.bin   raw little-endian float32, row-major N x L
//   planted_<sceneid>.json    optional planted-truth block
void save_bundle(const SlotBundle& bundle, const std::filesystem::path& dir);

// Loads and fully validates a bundle; throws IoError / FormatError with
// scene and level context on the first violation.
SlotBundle load_bundle(const std::filesystem::path& dir);

struct ValidationIssue {
    std::string scene_id;  // empty for bundle-level issues
    int level = 0;         // 0 when not level-specific
    std::string message;
};

// Non-throwing integrity walk for the `validate` command: checks manifest /
// blob agreement, shapes, byte counts, finiteness and mask range, and
// collects every violation instead of stopping at the first.
std::vector<ValidationIssue> validate_bundle_dir(const std::filesystem::path& dir);

// Round-trips a double through float32; bundle payloads are stored at f32
// precision, so generated values are quantized at the source.
inline double quantize_f32(double x) { return static_cast<double>(static_cast<float>(x)); }

} // namespace hyperlens
