#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <sstream>

#include "seedabsa/brown.hpp"
#include "support/oracle.hpp"
#include "support/tiny.hpp"

using namespace seedabsa;

namespace {

// Interleaved patterns: x and y have identical context distributions. The
// corpus is symmetric (a/c and b/d are also context-identical), so several
// merges tie at zero AMI loss; with x and y on the lowest term ids the
// deterministic tie-break picks the x-y merge first.
Corpus pattern_corpus() {
    // terms: x=0 y=1 a=2 b=3 c=4 d=5
    std::vector<std::vector<int>> sents;
    for (int i = 0; i < 4; ++i) {
        sents.push_back({2, 0, 3}); // a x b
        sents.push_back({2, 1, 3}); // a y b
        sents.push_back({4, 0, 5}); // c x d
        sents.push_back({4, 1, 5}); // c y d
    }
    return tiny::corpus_from_ids(sents, 6);
}

Corpus random_corpus(int V, int sentences, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<int>> sents;
    for (int s = 0; s < sentences; ++s) {
        std::vector<int> toks;
        const int len = 2 + static_cast<int>(rng.below(5));
        for (int i = 0; i < len; ++i) toks.push_back(static_cast<int>(rng.below(V)));
        sents.push_back(std::move(toks));
    }
    return tiny::corpus_from_ids(sents, V);
}

void check_partition(const ClusterAssignment& result, int V) {
    std::set<int> seen;
    for (int w = 0; w < V; ++w) {
        REQUIRE(result.cluster_of[w] >= 0);
        REQUIRE(result.cluster_of[w] < result.num_clusters);
        seen.insert(result.cluster_of[w]);
    }
    CHECK(static_cast<int>(seen.size()) == result.num_clusters);
}

void check_prefix_free(const ClusterAssignment& result) {
    for (std::size_t i = 0; i < result.paths.size(); ++i)
        for (std::size_t j = 0; j < result.paths.size(); ++j) {
            if (i == j) continue;
            INFO(result.paths[i] << " vs " << result.paths[j]);
            CHECK_FALSE(starts_with(result.paths[i], result.paths[j]));
        }
}

// Mirrors the greedy schedule and verifies each recorded merge attains the
// exhaustive-search minimum AMI loss.
void check_against_oracle(const Corpus& corpus, int K) {
    auto err = oracle::verify_brown_greedy(corpus, K);
    if (err) FAIL(*err);
    ClusterAssignment result = brown_cluster(corpus, K);
    check_partition(result, corpus.vocab.size());
    check_prefix_free(result);
}

} // namespace

TEST_CASE("words with identical contexts merge first") {
    Corpus corpus = pattern_corpus();
    std::vector<BrownMergeEvent> trace;
    ClusterAssignment result = brown_cluster(corpus, 4, &trace);
    CHECK(result.num_clusters == 4);
    CHECK(result.cluster_of[0] == result.cluster_of[1]); // x and y together
    // the first assignment-phase merge is exactly {x},{y} at zero loss
    REQUIRE_FALSE(trace.empty());
    CHECK(trace[0].assignment_phase);
    std::set<int> merged(trace[0].left_terms.begin(), trace[0].left_terms.end());
    merged.insert(trace[0].right_terms.begin(), trace[0].right_terms.end());
    CHECK(merged == std::set<int>{0, 1});
    CHECK(trace[0].normalized_loss == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("K >= V keeps every term in its own cluster") {
    Corpus corpus = pattern_corpus();
    std::vector<BrownMergeEvent> trace;
    ClusterAssignment result = brown_cluster(corpus, 10, &trace);
    CHECK(result.num_clusters == 6);
    for (const auto& ev : trace) CHECK_FALSE(ev.assignment_phase);
    std::set<int> ids;
    for (int w = 0; w < 6; ++w) ids.insert(result.cluster_of[w]);
    CHECK(ids.size() == 6);
    check_prefix_free(result);
}

TEST_CASE("cluster count is min(K, V)") {
    Corpus corpus = random_corpus(9, 40, 77);
    CHECK(brown_cluster(corpus, 4).num_clusters == 4);
    CHECK(brown_cluster(corpus, 9).num_clusters == 9);
    CHECK(brown_cluster(corpus, 200).num_clusters == 9);
    CHECK_THROWS_AS(brown_cluster(corpus, 0), Error);
}

TEST_CASE("clustering is deterministic") {
    Corpus corpus = random_corpus(12, 60, 5);
    ClusterAssignment a = brown_cluster(corpus, 5);
    ClusterAssignment b = brown_cluster(corpus, 5);
    CHECK(a.cluster_of == b.cluster_of);
    CHECK(a.paths == b.paths);
}

TEST_CASE("partition and prefix-free properties on random corpora") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        Corpus corpus = random_corpus(10, 50, seed);
        for (int K : {1, 3, 7}) {
            ClusterAssignment result = brown_cluster(corpus, K);
            check_partition(result, corpus.vocab.size());
            check_prefix_free(result);
        }
    }
}

TEST_CASE("greedy choices match the exhaustive AMI oracle (V <= 12)") {
    check_against_oracle(pattern_corpus(), 4);
    check_against_oracle(random_corpus(8, 30, 100), 3);
    check_against_oracle(random_corpus(10, 40, 101), 4);
    check_against_oracle(random_corpus(12, 60, 102), 5);
    check_against_oracle(random_corpus(7, 25, 103), 2);
}

TEST_CASE("singleton vocabulary gets the root path") {
    Corpus corpus = tiny::corpus_from_ids({{0, 0, 0}}, 1);
    ClusterAssignment result = brown_cluster(corpus, 4);
    CHECK(result.num_clusters == 1);
    CHECK(result.paths[0] == "0");
}

TEST_CASE("cluster file round-trips the partition") {
    Corpus corpus = random_corpus(11, 50, 9);
    ClusterAssignment original = brown_cluster(corpus, 4);
    std::ostringstream out;
    save_clusters(original, corpus.vocab, out);
    std::istringstream in(out.str());
    ClusterAssignment loaded = load_clusters(in, corpus.vocab);
    REQUIRE(loaded.num_clusters == original.num_clusters);
    for (int w = 0; w < corpus.vocab.size(); ++w)
        CHECK(loaded.paths[loaded.cluster_of[w]] == original.paths[original.cluster_of[w]]);
}
