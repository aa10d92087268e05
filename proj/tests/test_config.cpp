#include <catch2/catch_amalgamated.hpp>

#include "seedabsa/config.hpp"
#include "seedabsa/corpus.hpp"

using namespace seedabsa;

static const char* kRestaurantEn = R"(
language: en
aspect food: chicken
aspect service: service
aspect ambience: ambience
aspect drinks: drinks
aspect location: location
positive: excellent
negative: horrible
)";

TEST_CASE("restaurant EN config parses with T = 5") {
    ParsedConfig cfg = parse_config(kRestaurantEn);
    REQUIRE(cfg.seeds.num_topics() == 5);
    CHECK(cfg.seeds.language_tag == "en");
    CHECK(cfg.seeds.aspects[0].name == "food");
    CHECK(cfg.seeds.aspects[0].seeds == std::set<std::string>{"chicken"});
    CHECK(cfg.seeds.aspects[4].name == "location");
    CHECK(cfg.seeds.positive_seeds == std::set<std::string>{"excellent"});
    CHECK(cfg.seeds.negative_seeds == std::set<std::string>{"horrible"});
    // defaults resolved from T
    CHECK(cfg.params.alpha_base == Catch::Approx(50.0 / 5));
    CHECK(cfg.params.delta_base == Catch::Approx(50.0 / 5));
    CHECK(cfg.params.beta_base == 0.01);
    CHECK(cfg.params.iterations == 500);
    CHECK(cfg.params.burn_in == 100);
    CHECK(cfg.params.lag == 10);
    CHECK(cfg.params.num_brown_clusters == 200);
    CHECK(cfg.params.similarity_floor == 0.001);
    CHECK(cfg.params.min_count == 5);
}

TEST_CASE("config with zero aspects is rejected") {
    CHECK_THROWS_WITH(parse_config("language: en\npositive: good\nnegative: bad\n"),
                      Catch::Matchers::ContainsSubstring("no aspects"));
}

TEST_CASE("multi-seed aspects are accepted") {
    ParsedConfig cfg = parse_config(
        "aspect food: food, chicken\n"
        "aspect service: service, staff\n"
        "aspect ambience: ambience, atmosphere\n"
        "positive: excellent\nnegative: horrible\n");
    REQUIRE(cfg.seeds.num_topics() == 3);
    CHECK(cfg.seeds.aspects[0].seeds == std::set<std::string>{"food", "chicken"});
    CHECK(cfg.seeds.aspects[1].seeds == std::set<std::string>{"service", "staff"});
    CHECK(cfg.seeds.aspects[2].seeds == std::set<std::string>{"ambience", "atmosphere"});
    CHECK(cfg.params.alpha_base == Catch::Approx(50.0 / 3));
}

TEST_CASE("config validation errors carry locations") {
    CHECK_THROWS_WITH(parse_config("aspect food: a\naspect food: b\npositive: p\nnegative: n\n"),
                      Catch::Matchers::ContainsSubstring("duplicate aspect name"));
    CHECK_THROWS_WITH(parse_config("aspect food:\npositive: p\nnegative: n\n"),
                      Catch::Matchers::ContainsSubstring("line 1"));
    CHECK_THROWS_WITH(parse_config("aspect a: x\naspect b: x\npositive: p\nnegative: n\n"),
                      Catch::Matchers::ContainsSubstring("appears in aspects"));
    CHECK_THROWS_WITH(parse_config("aspect a: x\npositive: p\nnegative: p\n"),
                      Catch::Matchers::ContainsSubstring("positive and negative"));
    CHECK_THROWS_WITH(parse_config("aspect a: x\npositive: x\nnegative: n\n"),
                      Catch::Matchers::ContainsSubstring("aspect and polarity"));
    CHECK_THROWS_WITH(parse_config("nonsense line without colon"),
                      Catch::Matchers::ContainsSubstring("line 1"));
    CHECK_THROWS_WITH(parse_config("aspect a: x\npositive: p\nnegative: n\n[params]\nbogus = 1\n"),
                      Catch::Matchers::ContainsSubstring("unknown parameter"));
    CHECK_THROWS_WITH(
        parse_config("aspect a: x\npositive: p\nnegative: n\n[params]\niterations = 0\n"),
        Catch::Matchers::ContainsSubstring("positive"));
    CHECK_THROWS_WITH(parse_config("aspect a: x\npositive: p\nnegative: n\n[params]\n"
                                   "iterations = 50\nburn_in = 50\n"),
                      Catch::Matchers::ContainsSubstring("burn_in"));
}

TEST_CASE("params section overrides defaults") {
    ParsedConfig cfg = parse_config(
        "aspect a: x\npositive: p\nnegative: n\n"
        "[params]\n"
        "alpha_base = 2.5\nbeta_base = 0.1\niterations = 50\nburn_in = 10\nlag = 2\n"
        "num_brown_clusters = 16\nembedding_dims = 8\nrng_seed = 42\n");
    CHECK(cfg.params.alpha_base == 2.5);
    CHECK(cfg.params.delta_base == Catch::Approx(50.0)); // still 50/T with T = 1
    CHECK(cfg.params.beta_base == 0.1);
    CHECK(cfg.params.iterations == 50);
    CHECK(cfg.params.num_brown_clusters == 16);
    CHECK(cfg.params.rng_seed == 42);
}

TEST_CASE("seeds are lowercase-normalized at parse time") {
    ParsedConfig cfg = parse_config("aspect food: Chicken, BURGER\npositive: Excktórá\nnegative: n\n");
    CHECK(cfg.seeds.aspects[0].seeds == std::set<std::string>{"chicken", "burger"});
}

TEST_CASE("parse -> serialize -> parse round-trips exactly") {
    auto check_roundtrip = [](const std::string& text) {
        ParsedConfig first = parse_config(text);
        ParsedConfig second = parse_config(serialize_config(first));
        CHECK(first == second);
        // serialization is a fixed point, so default filling is idempotent
        CHECK(serialize_config(first) == serialize_config(second));
    };
    check_roundtrip(kRestaurantEn);
    check_roundtrip(
        "language: es\naspect comida: pollo\npositive: excelente\nnegative: horrible\n"
        "[params]\nalpha_base = 3\niterations = 60\nburn_in = 5\nlag = 5\n");

    // randomized configurations
    Rng rng(321);
    for (int round = 0; round < 40; ++round) {
        std::string text = "language: l" + std::to_string(rng.below(5)) + "\n";
        const int aspects = 1 + static_cast<int>(rng.below(4));
        int word = 0;
        for (int a = 0; a < aspects; ++a) {
            text += "aspect asp" + std::to_string(a) + ":";
            const int seeds = 1 + static_cast<int>(rng.below(3));
            for (int s = 0; s < seeds; ++s) text += " seed" + std::to_string(word++) + ",";
            text.pop_back();
            text += "\n";
        }
        text += "positive: pos0, pos1\nnegative: neg0\n[params]\n";
        if (rng.below(2)) text += "iterations = " + std::to_string(200 + rng.below(100)) + "\n";
        if (rng.below(2)) text += "similarity_floor = 0.01\n";
        if (rng.below(2)) text += "rng_seed = " + std::to_string(rng.below(1000)) + "\n";
        check_roundtrip(text);
    }
}

TEST_CASE("T always equals the aspect list length") {
    for (int t = 1; t <= 6; ++t) {
        std::string text;
        for (int a = 0; a < t; ++a)
            text += "aspect a" + std::to_string(a) + ": s" + std::to_string(a) + "\n";
        text += "positive: p\nnegative: n\n";
        CHECK(parse_config(text).seeds.num_topics() == t);
    }
}

TEST_CASE("vocabulary validation distinguishes warnings from aborts") {
    ParsedConfig cfg = parse_config(
        "aspect food: chicken, burger\naspect service: waiter\npositive: excellent\n"
        "negative: horrible\n");
    Vocabulary vocab;
    for (const char* w : {"chicken", "burger", "waiter", "excellent", "horrible"}) vocab.add(w);

    SECTION("all seeds present: clean report") {
        auto report = validate_against_vocabulary(cfg.seeds, vocab);
        CHECK(report.clean());
    }
    SECTION("one of two aspect seeds missing: warning only") {
        Vocabulary partial;
        for (const char* w : {"chicken", "waiter", "excellent", "horrible"}) partial.add(w);
        auto report = validate_against_vocabulary(cfg.seeds, partial);
        CHECK(report.ok());
        REQUIRE(report.missing.size() == 1);
        CHECK_THAT(report.missing[0], Catch::Matchers::ContainsSubstring("burger"));
    }
    SECTION("whole polarity set missing: fatal") {
        Vocabulary partial;
        for (const char* w : {"chicken", "burger", "waiter", "horrible"}) partial.add(w);
        auto report = validate_against_vocabulary(cfg.seeds, partial);
        CHECK_FALSE(report.ok());
        CHECK_THAT(*report.fatal, Catch::Matchers::ContainsSubstring("positive"));
    }
    SECTION("whole aspect seed set missing: fatal") {
        Vocabulary partial;
        for (const char* w : {"chicken", "burger", "excellent", "horrible"}) partial.add(w);
        auto report = validate_against_vocabulary(cfg.seeds, partial);
        CHECK_FALSE(report.ok());
        CHECK_THAT(*report.fatal, Catch::Matchers::ContainsSubstring("service"));
    }
}
