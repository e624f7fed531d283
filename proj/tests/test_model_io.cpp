#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "somefs/ensemble.hpp"
#include "somefs/errors.hpp"
#include "somefs/model_io.hpp"
#include "somefs/synthetic.hpp"

using namespace somefs;
using somefs::testing::random_point;

namespace {

EnsembleModel trained_model(std::uint64_t seed) {
    Dataset raw = make_blob_benchmark(80, 5, seed);
    auto [ds, stats] = standardize(raw);
    LearnerConfig cfg;
    cfg.param_epochs = 6;
    cfg.rule_max = 8;
    return fit(ds, stats, 3, cfg, {}, seed, 1);
}

}  // namespace

TEST_CASE("model JSON round-trip preserves predictions bit-exactly") {
    EnsembleModel model = trained_model(17);
    const std::string text = model_to_json(model);
    EnsembleModel back = model_from_json(text);

    REQUIRE(back.size() == model.size());
    CHECK(back.weights == model.weights);
    CHECK(back.oob_errors == model.oob_errors);
    CHECK(back.feature_stats.mean == model.feature_stats.mean);
    CHECK(back.class_names == model.class_names);
    CHECK(back.ablation == model.ablation);

    auto rng = make_rng(9);
    for (int i = 0; i < 50; ++i) {
        auto x = random_point(5, rng);
        auto a = model.predict(x);
        auto b = back.predict(x);
        CHECK(a.label == b.label);
        for (std::size_t c = 0; c < a.scores.size(); ++c)
            CHECK(a.scores[c] == b.scores[c]); // exact double equality
    }

    // serialization is a fixpoint after one round trip
    CHECK(model_to_json(back) == text);
}

TEST_CASE("save/load through the filesystem") {
    EnsembleModel model = trained_model(3);
    const std::string path = "/tmp/somefs_model_io.json";
    save_model(model, path);
    EnsembleModel back = load_model(path);
    auto rng = make_rng(2);
    auto x = random_point(5, rng);
    CHECK(model.predict(x).label == back.predict(x).label);
    std::remove(path.c_str());
}

TEST_CASE("unknown format_version is rejected") {
    EnsembleModel model = trained_model(5);
    std::string text = model_to_json(model);
    const auto pos = text.find("\"format_version\": 1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, std::string("\"format_version\": 1").size(),
                 "\"format_version\": 999");
    CHECK_THROWS_WITH_AS(model_from_json(text),
                         doctest::Contains("format_version"), DataError);
}

TEST_CASE("malformed model files raise data errors") {
    CHECK_THROWS_AS(model_from_json("not json at all"), DataError);
    CHECK_THROWS_AS(model_from_json("{}"), DataError);
    CHECK_THROWS_AS(load_model("/tmp/absent_somefs_model.json"), DataError);

    // structurally valid JSON with a broken rule shape
    EnsembleModel model = trained_model(7);
    std::string text = model_to_json(model);
    const auto pos = text.find("\"weights\"");
    REQUIRE(pos != std::string::npos);
    std::string broken = text;
    broken.replace(pos, 9, "\"wrong_key\"");
    CHECK_THROWS_AS(model_from_json(broken), DataError);
}

TEST_CASE("atomic_write_text replaces content completely") {
    const std::string path = "/tmp/somefs_atomic.txt";
    atomic_write_text(path, "first");
    atomic_write_text(path, "second");
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    CHECK(content == "second");
    std::remove(path.c_str());
}

TEST_CASE("stable rules serialize with names") {
    StableRule sr;
    sr.items = {{0, LinguisticLabel::kHigh}, {2, LinguisticLabel::kExLow}};
    sr.class_id = 1;
    sr.support = 0.75;
    sr.firing_strength = 0.5;
    const std::string json = stable_rules_to_json(
        {sr}, {"alpha", "beta", "gamma"}, {"neg", "pos"});
    CHECK(json.find("\"alpha\"") != std::string::npos);
    CHECK(json.find("\"gamma\"") != std::string::npos);
    CHECK(json.find("\"pos\"") != std::string::npos);
    CHECK(json.find("ex_low") != std::string::npos);
    CHECK(json.find("0.75") != std::string::npos);
}
