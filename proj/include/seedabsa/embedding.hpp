#pragma once

#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "seedabsa/common.hpp"
#include "seedabsa/config.hpp"
#include "seedabsa/corpus.hpp"

namespace seedabsa {

// Dense word vectors over the corpus vocabulary. Unit-normalized copies are
// cached so cosine lookups are dot products.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(int vocab_size, int dims)
        : dims_(dims), raw_(static_cast<std::size_t>(vocab_size) * dims, 0.0f),
          unit_(static_cast<std::size_t>(vocab_size) * dims, 0.0f),
          covered_(vocab_size, 0) {}

    int dims() const { return dims_; }
    int vocab_size() const { return static_cast<int>(covered_.size()); }
    bool covers(int term) const { return covered_[term] != 0; }
    int coverage() const {
        int n = 0;
        for (auto c : covered_) n += c;
        return n;
    }

    const float* vector_of(int term) const { return raw_.data() + static_cast<std::size_t>(term) * dims_; }
    const float* unit_of(int term) const { return unit_.data() + static_cast<std::size_t>(term) * dims_; }

    void set_vector(int term, const std::vector<float>& values) {
        if (static_cast<int>(values.size()) != dims_)
            throw Error("embedding vector has wrong dimension");
        float* dst = raw_.data() + static_cast<std::size_t>(term) * dims_;
        for (int k = 0; k < dims_; ++k) dst[k] = values[k];
        covered_[term] = 1;
    }

    // Validates finiteness and refreshes the normalized copies.
    void finalize() {
        for (int w = 0; w < vocab_size(); ++w) {
            if (!covered_[w]) continue;
            const float* src = vector_of(w);
            double norm = 0.0;
            for (int k = 0; k < dims_; ++k) {
                if (!std::isfinite(src[k])) throw Error("embedding vector contains NaN/Inf");
                norm += static_cast<double>(src[k]) * src[k];
            }
            norm = std::sqrt(norm);
            float* dst = unit_.data() + static_cast<std::size_t>(w) * dims_;
            if (norm == 0.0) {
                covered_[w] = 0; // zero vector carries no similarity information
                continue;
            }
            for (int k = 0; k < dims_; ++k) dst[k] = static_cast<float>(src[k] / norm);
        }
    }

    float* mutable_vector(int term) { return raw_.data() + static_cast<std::size_t>(term) * dims_; }
    void mark_covered(int term) { covered_[term] = 1; }

private:
    int dims_ = 0;
    std::vector<float> raw_;
    std::vector<float> unit_;
    std::vector<unsigned char> covered_;
};

inline double cosine(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size()) throw Error("cosine: dimension mismatch");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        dot += u[k] * v[k];
        nu += u[k] * u[k];
        nv += v[k] * v[k];
    }
    if (nu == 0.0 || nv == 0.0) throw Error("cosine: zero-norm vector");
    double c = dot / (std::sqrt(nu) * std::sqrt(nv));
    if (c > 1.0) c = 1.0;
    if (c < -1.0) c = -1.0;
    return c;
}

namespace detail {

inline double unit_dot(const EmbeddingTable& table, int a, int b) {
    const float* ua = table.unit_of(a);
    const float* ub = table.unit_of(b);
    double dot = 0.0;
    for (int k = 0; k < table.dims(); ++k) dot += static_cast<double>(ua[k]) * ub[k];
    if (dot > 1.0) dot = 1.0;
    if (dot < -1.0) dot = -1.0;
    return dot;
}

} // namespace detail

// sim(w, set) = max over in-vocabulary seeds of cosine(w, seed), clamped to
// [similarity_floor, 1]. Words the table does not cover get the floor.
inline double seed_similarity(const EmbeddingTable& table, int term, const std::vector<int>& seed_ids,
                              double similarity_floor) {
    int usable = 0;
    double best = -2.0;
    for (int seed : seed_ids) {
        if (seed < 0 || !table.covers(seed)) continue;
        ++usable;
        if (term >= 0 && table.covers(term)) {
            double c = seed == term ? 1.0 : detail::unit_dot(table, term, seed);
            if (c > best) best = c;
        }
    }
    if (usable == 0) throw Error("seed_similarity: no in-vocabulary seed in set");
    if (term < 0 || !table.covers(term)) return similarity_floor;
    return best < similarity_floor ? similarity_floor : best;
}

// Precomputed sim(w, ·) for every vocabulary term against each aspect seed
// set plus the positive and negative polarity sets.
struct SimilarityCache {
    int num_aspects = 0;
    int vocab_size = 0;
    std::vector<double> values; // row-major V × (T+2); columns T..T+1 are P, N

    double at(int term, int column) const {
        return values[static_cast<std::size_t>(term) * (num_aspects + 2) + column];
    }
    double aspect(int term, int t) const { return at(term, t); }
    double positive(int term) const { return at(term, num_aspects); }
    double negative(int term) const { return at(term, num_aspects + 1); }
};

inline SimilarityCache build_similarity_cache(const EmbeddingTable& table, const Vocabulary& vocab,
                                              const SeedConfiguration& config,
                                              double similarity_floor) {
    SimilarityCache cache;
    cache.num_aspects = config.num_topics();
    cache.vocab_size = vocab.size();
    cache.values.assign(static_cast<std::size_t>(vocab.size()) * (cache.num_aspects + 2), 0.0);

    std::vector<std::vector<int>> seed_ids;
    for (const auto& a : config.aspects) {
        std::vector<int> ids;
        for (const auto& s : a.seeds) ids.push_back(vocab.id_of(s));
        seed_ids.push_back(std::move(ids));
    }
    auto polarity_ids = [&](const std::set<std::string>& seeds) {
        std::vector<int> ids;
        for (const auto& s : seeds) ids.push_back(vocab.id_of(s));
        return ids;
    };
    seed_ids.push_back(polarity_ids(config.positive_seeds));
    seed_ids.push_back(polarity_ids(config.negative_seeds));

    for (int w = 0; w < vocab.size(); ++w)
        for (int c = 0; c < cache.num_aspects + 2; ++c)
            cache.values[static_cast<std::size_t>(w) * (cache.num_aspects + 2) + c] =
                seed_similarity(table, w, seed_ids[c], similarity_floor);
    return cache;
}

// ---- skip-gram with negative sampling ----

namespace detail {

inline std::vector<int> build_unigram_table(const Vocabulary& vocab, std::size_t table_size) {
    std::vector<int> table(table_size);
    double total = 0.0;
    for (int w = 0; w < vocab.size(); ++w) total += std::pow(vocab.frequencies[w], 0.75);
    int w = 0;
    double cum = std::pow(vocab.frequencies[0], 0.75) / total;
    for (std::size_t i = 0; i < table_size; ++i) {
        table[i] = w;
        if (static_cast<double>(i + 1) / table_size > cum && w + 1 < vocab.size()) {
            ++w;
            cum += std::pow(vocab.frequencies[w], 0.75) / total;
        }
    }
    return table;
}

inline float sigmoidf(float x) { return 1.0f / (1.0f + std::exp(-x)); }

struct SgnsShared {
    int dims;
    int window;
    int negative;
    float lr0;
    long long total_words; // tokens × epochs, for the linear decay
    std::atomic<long long> processed{0};
    std::vector<float>* syn0;
    std::vector<float>* syn1;
    const std::vector<int>* unigram;
    const Corpus* corpus;
};

inline void sgns_worker(SgnsShared& sh, int epochs, std::size_t begin_sent, std::size_t stride,
                        std::uint64_t seed) {
    Rng rng(seed);
    std::vector<float> grad(sh.dims);
    const std::size_t mask = sh.unigram->size() - 1;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        for (std::size_t s = begin_sent; s < sh.corpus->sentences.size(); s += stride) {
            const auto& sent = sh.corpus->sentences[s].tokens;
            const int len = static_cast<int>(sent.size());
            for (int i = 0; i < len; ++i) {
                long long done = sh.processed.fetch_add(1, std::memory_order_relaxed);
                float frac = 1.0f - static_cast<float>(done) / (sh.total_words + 1);
                float lr = sh.lr0 * (frac < 1e-4f ? 1e-4f : frac);
                int shrink = static_cast<int>(rng.below(sh.window));
                for (int j = i - sh.window + shrink; j <= i + sh.window - shrink; ++j) {
                    if (j == i || j < 0 || j >= len) continue;
                    float* input = sh.syn0->data() + static_cast<std::size_t>(sent[j]) * sh.dims;
                    std::fill(grad.begin(), grad.end(), 0.0f);
                    for (int d = 0; d <= sh.negative; ++d) {
                        int target;
                        float label;
                        if (d == 0) {
                            target = sent[i];
                            label = 1.0f;
                        } else {
                            target = (*sh.unigram)[rng.next() & mask];
                            if (target == sent[i]) continue;
                            label = 0.0f;
                        }
                        float* output = sh.syn1->data() + static_cast<std::size_t>(target) * sh.dims;
                        float dot = 0.0f;
                        for (int k = 0; k < sh.dims; ++k) dot += input[k] * output[k];
                        float g = (label - sigmoidf(dot)) * lr;
                        for (int k = 0; k < sh.dims; ++k) grad[k] += g * output[k];
                        for (int k = 0; k < sh.dims; ++k) output[k] += g * input[k];
                    }
                    for (int k = 0; k < sh.dims; ++k) input[k] += grad[k];
                }
            }
        }
    }
}

} // namespace detail

// Trains skip-gram embeddings with negative sampling over the token-id
// sentences. Deterministic with embedding_threads = 1; with more workers the
// updates race in the usual lock-free fashion. out_syn1 receives the output
// (context) matrix when a caller wants to evaluate the training objective.
inline EmbeddingTable train_skipgram(const Corpus& corpus, const RunParameters& params,
                                     std::vector<float>* out_syn1 = nullptr) {
    if (corpus.sentences.empty() || corpus.num_tokens() == 0) throw Error("train_skipgram: empty corpus");
    if (corpus.num_tokens() < params.embedding_window)
        throw Error("train_skipgram: corpus smaller than the context window");
    if (params.embedding_dims <= 0) throw Error("train_skipgram: embedding_dims must be positive");
    const int V = corpus.vocab.size();
    const int dims = params.embedding_dims;

    std::vector<float> syn0(static_cast<std::size_t>(V) * dims);
    std::vector<float> syn1(static_cast<std::size_t>(V) * dims, 0.0f);
    Rng init_rng(params.rng_seed);
    for (auto& x : syn0) x = static_cast<float>((init_rng.uniform() - 0.5) / dims);

    std::vector<int> unigram = detail::build_unigram_table(corpus.vocab, 1u << 20);

    detail::SgnsShared sh;
    sh.dims = dims;
    sh.window = params.embedding_window;
    sh.negative = params.embedding_negative_samples;
    sh.lr0 = static_cast<float>(params.embedding_learning_rate);
    sh.total_words = corpus.num_tokens() * params.embedding_epochs;
    sh.syn0 = &syn0;
    sh.syn1 = &syn1;
    sh.unigram = &unigram;
    sh.corpus = &corpus;

    const int workers = params.embedding_threads;
    if (workers <= 1) {
        detail::sgns_worker(sh, params.embedding_epochs, 0, 1, params.rng_seed ^ 0x9e3779b97f4a7c15ull);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t)
            pool.emplace_back(detail::sgns_worker, std::ref(sh), params.embedding_epochs, t, workers,
                              params.rng_seed ^ (0x9e3779b97f4a7c15ull + t));
        for (auto& th : pool) th.join();
    }

    if (out_syn1) *out_syn1 = syn1;
    EmbeddingTable table(V, dims);
    std::vector<float> row(dims);
    for (int w = 0; w < V; ++w) {
        for (int k = 0; k < dims; ++k) row[k] = syn0[static_cast<std::size_t>(w) * dims + k];
        table.set_vector(w, row);
    }
    table.finalize();
    return table;
}

// ---- embedding file format: first line "V d", then "term v1 ... vd" ----

inline void save_embeddings(const EmbeddingTable& table, const Vocabulary& vocab,
                            std::ostream& out) {
    out << table.coverage() << " " << table.dims() << "\n";
    for (int w = 0; w < vocab.size(); ++w) {
        if (!table.covers(w)) continue;
        out << vocab.terms[w];
        const float* v = table.vector_of(w);
        for (int k = 0; k < table.dims(); ++k) out << " " << format_double(v[k]);
        out << "\n";
    }
}

inline EmbeddingTable load_embeddings(std::istream& in, const Vocabulary& vocab) {
    std::string header;
    if (!std::getline(in, header)) throw Error("embedding file: empty");
    std::istringstream hs(header);
    long long count;
    int dims;
    if (!(hs >> count >> dims) || count < 0 || dims <= 0)
        throw Error("embedding file: bad header (want 'V d')");
    EmbeddingTable table(vocab.size(), dims);
    std::string line;
    std::vector<float> row(dims);
    for (long long i = 0; i < count; ++i) {
        if (!std::getline(in, line)) throw Error("embedding file: truncated");
        std::istringstream ls(line);
        std::string term;
        if (!(ls >> term)) throw Error("embedding file: bad line");
        for (int k = 0; k < dims; ++k)
            if (!(ls >> row[k])) throw Error("embedding file: vector for '" + term + "' too short");
        int id = vocab.id_of(term);
        if (id >= 0) table.set_vector(id, row);
    }
    table.finalize();
    return table;
}

} // namespace seedabsa
