#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "seedabsa/common.hpp"
#include "seedabsa/text.hpp"

namespace seedabsa {

struct AspectSpec {
    std::string name;
    std::set<std::string> seeds; // lowercase-normalized

    bool operator==(const AspectSpec&) const = default;
};

// The only supervision the system receives: named aspects with seed words
// plus one positive and one negative seed set.
struct SeedConfiguration {
    std::vector<AspectSpec> aspects;
    std::set<std::string> positive_seeds;
    std::set<std::string> negative_seeds;
    std::string language_tag = "en";

    int num_topics() const { return static_cast<int>(aspects.size()); }

    bool operator==(const SeedConfiguration&) const = default;
};

struct RunParameters {
    double alpha_base = 0.0; // resolved to 50/T at parse time unless set
    double beta_base = 0.01;
    double delta_base = 0.0; // resolved to 50/T at parse time unless set
    bool alpha_base_set = false;
    bool delta_base_set = false;
    int iterations = 500;
    int burn_in = 100;
    int lag = 10;
    int num_brown_clusters = 200;
    int embedding_dims = 100;
    int embedding_window = 5;
    int embedding_epochs = 5;
    int embedding_negative_samples = 5;
    double embedding_learning_rate = 0.025;
    int embedding_threads = 1;
    int min_count = 5;
    double similarity_floor = 0.001;
    double maxent_l2 = 1.0;
    int maxent_max_iterations = 500;
    double maxent_tolerance = 1e-6;
    int fold_iterations = 50;
    int fold_burn_in = 20;
    int fold_lag = 5;
    std::uint64_t rng_seed = 1;

    bool operator==(const RunParameters&) const = default;
};

struct ParsedConfig {
    SeedConfiguration seeds;
    RunParameters params;

    bool operator==(const ParsedConfig&) const = default;
};

namespace detail {

inline void parse_param(RunParameters& p, const std::string& key, const std::string& value,
                        int line_no) {
    auto fail = [&](const std::string& why) {
        throw Error("config line " + std::to_string(line_no) + ": " + why + " for '" + key + "'");
    };
    auto as_double = [&]() {
        char* end = nullptr;
        double v = std::strtod(value.c_str(), &end);
        if (end == value.c_str() || *end != '\0') fail("invalid number");
        return v;
    };
    auto as_int = [&]() {
        char* end = nullptr;
        long v = std::strtol(value.c_str(), &end, 10);
        if (end == value.c_str() || *end != '\0') fail("invalid integer");
        return static_cast<int>(v);
    };
    auto positive_int = [&]() {
        int v = as_int();
        if (v <= 0) fail("value must be positive");
        return v;
    };
    auto positive_double = [&]() {
        double v = as_double();
        if (!(v > 0.0)) fail("value must be positive");
        return v;
    };

    if (key == "alpha_base") { p.alpha_base = positive_double(); p.alpha_base_set = true; }
    else if (key == "beta_base") p.beta_base = positive_double();
    else if (key == "delta_base") { p.delta_base = positive_double(); p.delta_base_set = true; }
    else if (key == "iterations") p.iterations = positive_int();
    else if (key == "burn_in") { p.burn_in = as_int(); if (p.burn_in < 0) fail("value must be non-negative"); }
    else if (key == "lag") p.lag = positive_int();
    else if (key == "num_brown_clusters") p.num_brown_clusters = positive_int();
    else if (key == "embedding_dims") p.embedding_dims = positive_int();
    else if (key == "embedding_window") p.embedding_window = positive_int();
    else if (key == "embedding_epochs") p.embedding_epochs = positive_int();
    else if (key == "embedding_negative_samples") p.embedding_negative_samples = positive_int();
    else if (key == "embedding_learning_rate") p.embedding_learning_rate = positive_double();
    else if (key == "embedding_threads") p.embedding_threads = positive_int();
    else if (key == "min_count") p.min_count = positive_int();
    else if (key == "similarity_floor") p.similarity_floor = positive_double();
    else if (key == "maxent_l2") { p.maxent_l2 = as_double(); if (p.maxent_l2 < 0) fail("value must be non-negative"); }
    else if (key == "maxent_max_iterations") p.maxent_max_iterations = positive_int();
    else if (key == "maxent_tolerance") p.maxent_tolerance = positive_double();
    else if (key == "fold_iterations") p.fold_iterations = positive_int();
    else if (key == "fold_burn_in") { p.fold_burn_in = as_int(); if (p.fold_burn_in < 0) fail("value must be non-negative"); }
    else if (key == "fold_lag") p.fold_lag = positive_int();
    else if (key == "rng_seed") {
        char* end = nullptr;
        unsigned long long v = std::strtoull(value.c_str(), &end, 10);
        if (end == value.c_str() || *end != '\0') fail("invalid integer");
        p.rng_seed = v;
    }
    else fail("unknown parameter");
}

inline std::set<std::string> parse_seed_list(const std::string& text, int line_no,
                                             const char* what) {
    std::set<std::string> out;
    for (const auto& piece : split(text, ',')) {
        for (const auto& word : tokenize(piece)) out.insert(word);
    }
    if (out.empty())
        throw Error("config line " + std::to_string(line_no) + ": empty seed list for " +
                    std::string(what));
    return out;
}

} // namespace detail

// Parses the seed-word configuration file. Format:
//
//   language: en
//   aspect food: chicken
//   aspect service: service, staff
//   positive: excellent
//   negative: horrible
//   [params]
//   iterations = 500
//
// Seeds are lowercased; alpha_base/delta_base default to 50/T.
inline ParsedConfig parse_config(const std::string& text) {
    ParsedConfig cfg;
    bool in_params = false;
    bool saw_language = false;
    int line_no = 0;
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(raw);
        if (auto hash = line.find('#'); hash != std::string::npos) line = trim(line.substr(0, hash));
        if (line.empty()) continue;
        if (line == "[params]") { in_params = true; continue; }
        if (in_params) {
            auto eq = line.find('=');
            if (eq == std::string::npos) eq = line.find(':');
            if (eq == std::string::npos)
                throw Error("config line " + std::to_string(line_no) + ": expected 'key = value'");
            detail::parse_param(cfg.params, trim(line.substr(0, eq)), trim(line.substr(eq + 1)),
                                line_no);
            continue;
        }
        auto colon = line.find(':');
        if (colon == std::string::npos)
            throw Error("config line " + std::to_string(line_no) + ": expected 'key: value'");
        std::string head = trim(line.substr(0, colon));
        std::string rest = trim(line.substr(colon + 1));
        if (head == "language") {
            if (saw_language)
                throw Error("config line " + std::to_string(line_no) + ": duplicate language");
            cfg.seeds.language_tag = rest;
            saw_language = true;
        } else if (starts_with(head, "aspect ") || starts_with(head, "aspect\t")) {
            std::string name = trim(head.substr(7));
            if (name.empty())
                throw Error("config line " + std::to_string(line_no) + ": aspect without a name");
            for (const auto& a : cfg.seeds.aspects)
                if (a.name == name)
                    throw Error("config line " + std::to_string(line_no) +
                                ": duplicate aspect name '" + name + "'");
            AspectSpec aspect;
            aspect.name = name;
            aspect.seeds = detail::parse_seed_list(rest, line_no, ("aspect '" + name + "'").c_str());
            cfg.seeds.aspects.push_back(std::move(aspect));
        } else if (head == "positive") {
            cfg.seeds.positive_seeds = detail::parse_seed_list(rest, line_no, "positive");
        } else if (head == "negative") {
            cfg.seeds.negative_seeds = detail::parse_seed_list(rest, line_no, "negative");
        } else {
            throw Error("config line " + std::to_string(line_no) + ": unknown directive '" + head +
                        "'");
        }
    }

    if (cfg.seeds.aspects.empty()) throw Error("config: no aspects defined");
    if (cfg.seeds.positive_seeds.empty()) throw Error("config: no positive seeds defined");
    if (cfg.seeds.negative_seeds.empty()) throw Error("config: no negative seeds defined");

    std::map<std::string, std::string> owner;
    for (const auto& a : cfg.seeds.aspects) {
        for (const auto& s : a.seeds) {
            auto [it, inserted] = owner.emplace(s, a.name);
            if (!inserted)
                throw Error("config: seed '" + s + "' appears in aspects '" + it->second +
                            "' and '" + a.name + "'");
        }
    }
    for (const auto& s : cfg.seeds.positive_seeds) {
        if (cfg.seeds.negative_seeds.count(s))
            throw Error("config: seed '" + s + "' appears in both positive and negative seeds");
        if (owner.count(s))
            throw Error("config: seed '" + s + "' appears as both aspect and polarity seed");
    }
    for (const auto& s : cfg.seeds.negative_seeds)
        if (owner.count(s))
            throw Error("config: seed '" + s + "' appears as both aspect and polarity seed");

    const double by_topics = 50.0 / cfg.seeds.num_topics();
    if (!cfg.params.alpha_base_set) cfg.params.alpha_base = by_topics;
    if (!cfg.params.delta_base_set) cfg.params.delta_base = by_topics;
    if (cfg.params.burn_in >= cfg.params.iterations)
        throw Error("config: burn_in must be smaller than iterations");
    if (cfg.params.fold_burn_in >= cfg.params.fold_iterations)
        throw Error("config: fold_burn_in must be smaller than fold_iterations");
    return cfg;
}

// Canonical text form; parse(serialize(cfg)) == cfg.
inline std::string serialize_config(const ParsedConfig& cfg) {
    std::ostringstream out;
    out << "language: " << cfg.seeds.language_tag << "\n";
    for (const auto& a : cfg.seeds.aspects) {
        out << "aspect " << a.name << ":";
        bool first = true;
        for (const auto& s : a.seeds) { out << (first ? " " : ", ") << s; first = false; }
        out << "\n";
    }
    auto emit_set = [&](const char* label, const std::set<std::string>& seeds) {
        out << label << ":";
        bool first = true;
        for (const auto& s : seeds) { out << (first ? " " : ", ") << s; first = false; }
        out << "\n";
    };
    emit_set("positive", cfg.seeds.positive_seeds);
    emit_set("negative", cfg.seeds.negative_seeds);

    const RunParameters def;
    const RunParameters& p = cfg.params;
    out << "[params]\n";
    if (p.alpha_base_set) out << "alpha_base = " << format_double(p.alpha_base) << "\n";
    if (p.beta_base != def.beta_base) out << "beta_base = " << format_double(p.beta_base) << "\n";
    if (p.delta_base_set) out << "delta_base = " << format_double(p.delta_base) << "\n";
    auto emit_int = [&](const char* k, int v, int d) { if (v != d) out << k << " = " << v << "\n"; };
    auto emit_dbl = [&](const char* k, double v, double d) {
        if (v != d) out << k << " = " << format_double(v) << "\n";
    };
    emit_int("iterations", p.iterations, def.iterations);
    emit_int("burn_in", p.burn_in, def.burn_in);
    emit_int("lag", p.lag, def.lag);
    emit_int("num_brown_clusters", p.num_brown_clusters, def.num_brown_clusters);
    emit_int("embedding_dims", p.embedding_dims, def.embedding_dims);
    emit_int("embedding_window", p.embedding_window, def.embedding_window);
    emit_int("embedding_epochs", p.embedding_epochs, def.embedding_epochs);
    emit_int("embedding_negative_samples", p.embedding_negative_samples,
             def.embedding_negative_samples);
    emit_dbl("embedding_learning_rate", p.embedding_learning_rate, def.embedding_learning_rate);
    emit_int("embedding_threads", p.embedding_threads, def.embedding_threads);
    emit_int("min_count", p.min_count, def.min_count);
    emit_dbl("similarity_floor", p.similarity_floor, def.similarity_floor);
    emit_dbl("maxent_l2", p.maxent_l2, def.maxent_l2);
    emit_int("maxent_max_iterations", p.maxent_max_iterations, def.maxent_max_iterations);
    emit_dbl("maxent_tolerance", p.maxent_tolerance, def.maxent_tolerance);
    emit_int("fold_iterations", p.fold_iterations, def.fold_iterations);
    emit_int("fold_burn_in", p.fold_burn_in, def.fold_burn_in);
    emit_int("fold_lag", p.fold_lag, def.fold_lag);
    if (p.rng_seed != def.rng_seed) out << "rng_seed = " << p.rng_seed << "\n";
    return out.str();
}

inline std::string config_hash(const ParsedConfig& cfg) {
    return hash_hex(fnv1a(serialize_config(cfg)));
}

// All seed words of a configuration, lowercase-normalized.
inline std::set<std::string> all_seed_words(const SeedConfiguration& cfg) {
    std::set<std::string> out;
    for (const auto& a : cfg.aspects) out.insert(a.seeds.begin(), a.seeds.end());
    out.insert(cfg.positive_seeds.begin(), cfg.positive_seeds.end());
    out.insert(cfg.negative_seeds.begin(), cfg.negative_seeds.end());
    return out;
}

} // namespace seedabsa
