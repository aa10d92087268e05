#pragma once

// Synthetic planted-model fixture: three aspects with disjoint term
// vocabularies, shared positive/negative opinion vocabularies, and a
// generator that emits sentences as aspect-term units optionally followed by
// an opinion word of the sentence polarity. Opinion words therefore follow
// aspect terms, which gives the context classifier a learnable signal.

#include <string>
#include <vector>

#include "seedabsa/brown.hpp"
#include "seedabsa/common.hpp"
#include "seedabsa/config.hpp"
#include "seedabsa/corpus.hpp"
#include "seedabsa/embedding.hpp"
#include "seedabsa/separation.hpp"
#include "seedabsa/tmodel.hpp"

namespace fixture {

struct Synthetic {
    seedabsa::ParsedConfig config;
    std::vector<seedabsa::RawDocument> train_docs;
    std::vector<seedabsa::RawDocument> eval_docs; // gold labels filled
    std::vector<std::string> aspect_names;
    std::vector<std::vector<std::string>> aspect_vocab;
    std::vector<std::string> pos_vocab;
    std::vector<std::string> neg_vocab;
};

inline const char* kFixtureConfig = R"(# synthetic fixture configuration
language: en
aspect food: burger
aspect service: waiter
aspect ambience: decor
positive: excellent
negative: horrible

[params]
embedding_dims = 32
embedding_epochs = 8
num_brown_clusters = 12
rng_seed = 7
)";

inline Synthetic make(int num_train = 2000, int num_eval = 400, std::uint64_t seed = 20240901) {
    Synthetic fx;
    fx.aspect_names = {"food", "service", "ambience"};
    fx.aspect_vocab = {
        {"burger", "fries", "steak", "salad", "pasta", "pizza", "soup", "bread"},
        {"waiter", "staff", "manager", "hostess", "crew", "server", "chef", "barman"},
        {"decor", "lighting", "music", "seating", "interior", "patio", "walls", "vibe"},
    };
    fx.pos_vocab = {"excellent", "great", "tasty", "friendly", "lovely", "charming", "superb",
                    "delightful"};
    fx.neg_vocab = {"horrible", "awful", "bland", "rude", "noisy", "dirty", "slow", "bitter"};
    fx.config = seedabsa::parse_config(kFixtureConfig);

    seedabsa::Rng rng(seed);
    auto emit = [&](int index, bool is_eval) {
        const int aspect = static_cast<int>(rng.below(3));
        const int polarity = static_cast<int>(rng.below(2)); // 0 positive, 1 negative
        const auto& opinions = polarity == 0 ? fx.pos_vocab : fx.neg_vocab;
        const int units = 2 + static_cast<int>(rng.below(3));
        std::string text;
        for (int u = 0; u < units; ++u) {
            if (!text.empty()) text += " ";
            text += fx.aspect_vocab[aspect][rng.below(fx.aspect_vocab[aspect].size())];
            if (rng.uniform() < 0.7) {
                text += " ";
                text += opinions[rng.below(opinions.size())];
            }
        }
        text += ".";
        seedabsa::RawDocument doc;
        doc.text = std::move(text);
        doc.doc_id = (is_eval ? "e" : "r") + std::to_string(index);
        if (is_eval) {
            doc.gold_aspect = fx.aspect_names[aspect];
            doc.gold_polarity = polarity == 0 ? "positive" : "negative";
            doc.split = false;
        }
        return doc;
    };
    for (int i = 0; i < num_train; ++i) fx.train_docs.push_back(emit(i + 1, false));
    for (int i = 0; i < num_eval; ++i) fx.eval_docs.push_back(emit(i + 1, true));
    return fx;
}

// Everything the trained fixture pipeline produces, for reuse across checks.
struct Trained {
    seedabsa::Corpus corpus;
    seedabsa::EmbeddingTable table;
    seedabsa::SimilarityCache cache;
    seedabsa::ClusterAssignment clusters;
    seedabsa::SeparationModel separation;
    seedabsa::PriorSet priors;
    seedabsa::GibbsResult gibbs;
    seedabsa::ModelDump dump;
};

inline Trained train(const Synthetic& fx, seedabsa::SamplerMode mode,
                     const seedabsa::SweepObserver& observer = nullptr) {
    Trained tr;
    const auto& params = fx.config.params;
    tr.corpus = seedabsa::build_corpus(fx.train_docs, {}, params.min_count,
                                       seedabsa::all_seed_words(fx.config.seeds), "en");
    tr.table = seedabsa::train_skipgram(tr.corpus, params);
    tr.cache = seedabsa::build_similarity_cache(tr.table, tr.corpus.vocab, fx.config.seeds,
                                                params.similarity_floor);
    tr.clusters = seedabsa::brown_cluster(tr.corpus, params.num_brown_clusters);
    auto bootstrap = seedabsa::bootstrap_instances(tr.corpus, fx.config.seeds, tr.clusters);
    tr.separation = seedabsa::train_maxent(bootstrap, params.maxent_l2, params.maxent_tolerance,
                                           params.maxent_max_iterations);
    tr.priors = seedabsa::compute_priors(tr.corpus, fx.config.seeds.num_topics(), tr.cache, params);
    auto pi = seedabsa::compute_pi(tr.corpus, tr.clusters, tr.separation);
    tr.gibbs = seedabsa::run_gibbs(tr.corpus, tr.priors, pi, params, mode, observer);
    tr.dump = seedabsa::build_model_dump(tr.corpus, fx.config.seeds, tr.cache, tr.gibbs, params,
                                         mode, seedabsa::config_hash(fx.config));
    return tr;
}

// Fold-in classification of the fixture's eval sentences; returns
// (aspect accuracy, polarity accuracy).
inline std::pair<double, double> classify_eval(const Synthetic& fx, const Trained& tr) {
    long long aspect_ok = 0, polarity_ok = 0, total = 0;
    seedabsa::Rng rng(fx.config.params.rng_seed ^ 0x5eedab5au);
    for (const auto& doc : fx.eval_docs) {
        std::vector<int> ids;
        for (const auto& tok : seedabsa::tokenize(doc.text)) {
            int id = tr.dump.id_of(tok);
            if (id >= 0) ids.push_back(id);
        }
        seedabsa::Corpus view;
        view.vocab = tr.corpus.vocab;
        seedabsa::Sentence s;
        s.tokens = ids;
        view.sentences.push_back(std::move(s));
        std::vector<double> pi(ids.size());
        for (std::size_t n = 0; n < ids.size(); ++n)
            pi[n] = seedabsa::predict_pi_aspect(view, tr.clusters, tr.separation, 0,
                                                static_cast<int>(n));
        auto folded = seedabsa::fold_in(tr.dump, ids, pi, fx.config.params, rng);
        if (!folded) continue;
        ++total;
        auto a = seedabsa::classify_argmax(folded->theta.data(), tr.dump.num_topics);
        if (tr.dump.aspect_names[a.index] == doc.gold_aspect) ++aspect_ok;
        auto p = seedabsa::classify_argmax(folded->omega.data(), 2);
        if ((p.index == 0 ? "positive" : "negative") == doc.gold_polarity) ++polarity_ok;
    }
    if (total == 0) throw seedabsa::Error("fixture: no classifiable eval sentences");
    return {static_cast<double>(aspect_ok) / total, static_cast<double>(polarity_ok) / total};
}

} // namespace fixture
