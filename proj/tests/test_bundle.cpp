#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "hyperlens/bundle.hpp"
#include "hyperlens/errors.hpp"
#include "hyperlens/synthetic.hpp"

using namespace hyperlens;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("hyperlens_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

SlotBundle small_bundle() {
    SyntheticConfig config;
    config.n_scenes = 3;
    config.slot_dim = 8;
    config.patch_count = 48;
    config.levels = {2, 3, 6};
    config.seed = 42;
    config.norm_profile = {{2, 2.0}, {3, 1.5}, {6, 1.0}};
    return generate_synthetic(config);
}

} // namespace

TEST_CASE("save/load round trip is exact") {
    const auto dir = fresh_dir("roundtrip");
    const SlotBundle bundle = small_bundle();
    save_bundle(bundle, dir);
    const SlotBundle loaded = load_bundle(dir);

    CHECK(loaded.manifest.slot_dim == bundle.manifest.slot_dim);
    CHECK(loaded.manifest.patch_count == bundle.manifest.patch_count);
    CHECK(loaded.manifest.levels == bundle.manifest.levels);
    CHECK(loaded.manifest.planted == bundle.manifest.planted);
    REQUIRE(loaded.scenes.size() == bundle.scenes.size());
    for (std::size_t s = 0; s < bundle.scenes.size(); ++s) {
        CHECK(loaded.scenes[s].id == bundle.scenes[s].id);
        for (int level : bundle.manifest.levels) {
            // Generated values are f32-quantized at the source, so the round
            // trip through the f32 blobs is bit-exact.
            CHECK(loaded.scenes[s].levels.at(level).slots ==
                  bundle.scenes[s].levels.at(level).slots);
            CHECK(loaded.scenes[s].levels.at(level).masks ==
                  bundle.scenes[s].levels.at(level).masks);
        }
        REQUIRE(loaded.scenes[s].planted.has_value());
        CHECK(loaded.scenes[s].planted->parents == bundle.scenes[s].planted->parents);
    }
}

TEST_CASE("saving twice produces byte-identical trees") {
    const auto dir_a = fresh_dir("bytes_a");
    const auto dir_b = fresh_dir("bytes_b");
    const SlotBundle bundle = small_bundle();
    save_bundle(bundle, dir_a);
    save_bundle(bundle, dir_b);

    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(dir_a)) {
        const auto name = entry.path().filename();
        CHECK(slurp(entry.path()) == slurp(dir_b / name));
        ++compared;
    }
    CHECK(compared > 1);

    // save -> load -> save is also byte-identical.
    const auto dir_c = fresh_dir("bytes_c");
    save_bundle(load_bundle(dir_a), dir_c);
    for (const auto& entry : fs::directory_iterator(dir_a))
        CHECK(slurp(entry.path()) == slurp(dir_c / entry.path().filename()));
}

TEST_CASE("empty bundle writes a manifest and nothing else") {
    const auto dir = fresh_dir("empty");
    SlotBundle bundle;
    bundle.manifest.slot_dim = 4;
    bundle.manifest.patch_count = 8;
    bundle.manifest.levels = {2, 4};
    save_bundle(bundle, dir);
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dir)) ++files;
    CHECK(files == 1);
    const SlotBundle loaded = load_bundle(dir);
    CHECK(loaded.scenes.empty());
}

TEST_CASE("loader reports missing and truncated blobs") {
    const auto dir = fresh_dir("negative");
    const SlotBundle bundle = small_bundle();
    save_bundle(bundle, dir);

    SUBCASE("missing blob") {
        fs::remove(dir / "slots_scene00001_3.bin");
        CHECK_THROWS_AS(load_bundle(dir), IoError);
        CHECK_THROWS_WITH_AS(load_bundle(dir),
                             doctest::Contains("slots_scene00001_3.bin"), IoError);
    }
    SUBCASE("truncated blob") {
        const auto file = dir / "slots_scene00000_2.bin";
        fs::resize_file(file, 10);
        CHECK_THROWS_AS(load_bundle(dir), FormatError);
        // The loader names the file and the expected byte count (2*8*4).
        CHECK_THROWS_WITH_AS(load_bundle(dir), doctest::Contains("64"), FormatError);
    }
    SUBCASE("oversized blob counts as a shape mismatch") {
        const auto file = dir / "slots_scene00000_2.bin";
        std::ofstream out(file, std::ios::binary | std::ios::app);
        const char zeros[40] = {};
        out.write(zeros, sizeof(zeros));
        out.close();
        CHECK_THROWS_AS(load_bundle(dir), FormatError);
    }
    SUBCASE("non-finite slot value") {
        const auto file = dir / "slots_scene00000_2.bin";
        std::ofstream out(file, std::ios::binary | std::ios::in);
        const unsigned char inf_le[4] = {0x00, 0x00, 0x80, 0x7f};
        out.write(reinterpret_cast<const char*>(inf_le), 4);
        out.close();
        CHECK_THROWS_AS(load_bundle(dir), FormatError);
    }
    SUBCASE("mask value out of range") {
        const auto file = dir / "masks_scene00000_2.bin";
        std::ofstream out(file, std::ios::binary | std::ios::in);
        const unsigned char one_point_five[4] = {0x00, 0x00, 0xc0, 0x3f};
        out.write(reinterpret_cast<const char*>(one_point_five), 4);
        out.close();
        CHECK_THROWS_WITH_AS(load_bundle(dir), doctest::Contains("outside [0,1]"), FormatError);
    }
    SUBCASE("missing manifest") {
        CHECK_THROWS_AS(load_bundle(dir / "nope"), IoError);
    }
}

TEST_CASE("validate_bundle_dir pinpoints violations") {
    const auto dir = fresh_dir("validate");
    const SlotBundle bundle = small_bundle();
    save_bundle(bundle, dir);
    CHECK(validate_bundle_dir(dir).empty());

    // Inject a bad mask value (1.5) at slot 0, patch 0 of scene 0, level 2.
    {
        std::ofstream out(dir / "masks_scene00000_2.bin", std::ios::binary | std::ios::in);
        const unsigned char one_point_five[4] = {0x00, 0x00, 0xc0, 0x3f};
        out.write(reinterpret_cast<const char*>(one_point_five), 4);
    }
    // Truncate another blob.
    fs::resize_file(dir / "slots_scene00002_6.bin", 3);

    const auto issues = validate_bundle_dir(dir);
    REQUIRE(issues.size() == 2);
    bool saw_mask = false;
    bool saw_truncation = false;
    for (const auto& issue : issues) {
        if (issue.scene_id == "scene00000" && issue.level == 2 &&
            issue.message.find("slot 0") != std::string::npos &&
            issue.message.find("patch 0") != std::string::npos)
            saw_mask = true;
        if (issue.scene_id == "scene00002" && issue.level == 6 &&
            issue.message.find("slots_scene00002_6.bin") != std::string::npos)
            saw_truncation = true;
    }
    CHECK(saw_mask);
    CHECK(saw_truncation);
}
