#include <doctest.h>

#include <cmath>

#include "hyperlens/errors.hpp"
#include "hyperlens/hierarchy.hpp"
#include "hyperlens/numeric.hpp"
#include "hyperlens/synthetic.hpp"

using namespace hyperlens;

TEST_CASE("plan_child_counts balances with remainder to lowest indices") {
    CHECK(plan_child_counts(5, 3) == std::vector<int>{2, 2, 1});
    CHECK(plan_child_counts(7, 5) == std::vector<int>{2, 2, 1, 1, 1});
    CHECK(plan_child_counts(11, 7) == std::vector<int>{2, 2, 2, 2, 1, 1, 1});
    CHECK(plan_child_counts(13, 11) == std::vector<int>{2, 2, 1, 1, 1, 1, 1, 1, 1, 1, 1});
    CHECK(plan_child_counts(6, 3) == std::vector<int>{2, 2, 2});
    CHECK_THROWS_AS(plan_child_counts(2, 3), ConfigError);
}

TEST_CASE("same seed gives bit-identical bundles") {
    SyntheticConfig config;
    config.n_scenes = 4;
    config.slot_dim = 16;
    config.patch_count = 576;
    config.seed = 7;
    const SlotBundle a = generate_synthetic(config);
    const SlotBundle b = generate_synthetic(config);
    REQUIRE(a.scenes.size() == b.scenes.size());
    for (std::size_t s = 0; s < a.scenes.size(); ++s)
        for (int level : config.levels) {
            CHECK(a.scenes[s].levels.at(level).slots == b.scenes[s].levels.at(level).slots);
            CHECK(a.scenes[s].levels.at(level).masks == b.scenes[s].levels.at(level).masks);
        }

    SyntheticConfig other = config;
    other.seed = 8;
    const SlotBundle c = generate_synthetic(other);
    CHECK(a.scenes[0].levels.at(3).slots != c.scenes[0].levels.at(3).slots);
}

TEST_CASE("mask-derived parents equal the planted map") {
    SyntheticConfig config;
    config.n_scenes = 5;
    config.slot_dim = 12;
    config.patch_count = 576;
    config.seed = 7;
    const SlotBundle bundle = generate_synthetic(config);

    for (const auto& scene : bundle.scenes) {
        std::map<int, Matrix> masks;
        for (const auto& [level, data] : scene.levels) masks.emplace(level, data.masks);
        const auto graph = build_hierarchy(scene.id, masks, config.levels);
        REQUIRE(graph.assignments.size() == 4);
        for (const auto& assignment : graph.assignments) {
            const auto& planted = scene.planted->parents.at(
                {assignment.coarse_level, assignment.fine_level});
            CHECK(assignment.parent_of == planted);
        }
    }
}

TEST_CASE("masks are nested binary partitions") {
    SyntheticConfig config;
    config.n_scenes = 1;
    config.slot_dim = 4;
    config.patch_count = 576;
    const SlotBundle bundle = generate_synthetic(config);
    const auto& scene = bundle.scenes[0];
    for (int level : config.levels) {
        const Matrix& masks = scene.levels.at(level).masks;
        for (std::size_t p = 0; p < masks.cols; ++p) {
            double column = 0.0;
            for (std::size_t i = 0; i < masks.rows; ++i) {
                const double v = masks.at(i, p);
                CHECK((v == 0.0 || v == 1.0));
                column += v;
            }
            CHECK(column == 1.0);  // partition: every patch owned exactly once
        }
    }
}

TEST_CASE("norm profile pins per-level mean slot norms") {
    SyntheticConfig config;
    config.n_scenes = 6;
    config.slot_dim = 32;
    config.patch_count = 576;
    config.seed = 3;
    config.norm_profile = {{3, 1.446}, {5, 1.254}, {7, 1.193}, {11, 1.146}, {13, 1.137}};
    const SlotBundle bundle = generate_synthetic(config);
    for (const auto& scene : bundle.scenes) {
        for (const auto& [level, target] : config.norm_profile) {
            const Matrix& slots = scene.levels.at(level).slots;
            std::vector<double> norms(slots.rows);
            for (std::size_t j = 0; j < slots.rows; ++j) norms[j] = norm(slots.row(j));
            CHECK(mean(norms) == doctest::Approx(target).epsilon(1e-6));
        }
    }
}

TEST_CASE("iid slot model draws independent levels") {
    SyntheticConfig config;
    config.n_scenes = 40;
    config.slot_dim = 24;
    config.patch_count = 576;
    config.seed = 11;
    config.slot_model = SlotModel::IidGaussian;
    const SlotBundle bundle = generate_synthetic(config);

    // Pooled component mean ~ 0 and variance ~ 1.
    std::vector<double> values;
    for (const auto& scene : bundle.scenes)
        for (int level : config.levels)
            for (double v : scene.levels.at(level).slots.data) values.push_back(v);
    CHECK(std::abs(mean(values)) < 0.02);
    const double sd = sample_std(values);
    CHECK(sd == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("impossible nestings are rejected") {
    SyntheticConfig config;
    config.levels = {3, 5};
    config.patch_count = 7;
    CHECK_THROWS_AS(generate_synthetic(config), ConfigError);
    CHECK_THROWS_WITH_AS(generate_synthetic(config), doctest::Contains("does not divide"),
                         ConfigError);

    config.levels = {3, 5, 7, 11, 13};
    config.patch_count = 576;
    config.child_noise = 0.0;
    CHECK_THROWS_AS(generate_synthetic(config), ConfigError);
    config.child_noise = 0.05;
    config.parent_separation = -1.0;
    CHECK_THROWS_AS(generate_synthetic(config), ConfigError);
    config.parent_separation = 1.0;
    config.levels = {5, 3};
    CHECK_THROWS_AS(generate_synthetic(config), ConfigError);
}
