#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "seedabsa/common.hpp"
#include "seedabsa/config.hpp"
#include "seedabsa/corpus.hpp"
#include "seedabsa/embedding.hpp"

namespace seedabsa {

// Word classes inside a topic: aspect terms, positive words, negative words.
inline constexpr int kClassAspect = 0;
inline constexpr int kClassPositive = 1;
inline constexpr int kClassNegative = 2;

// The topic conditional as printed multiplies the word-likelihood ratios of
// all three word classes; the derived variant uses only the ratio of the
// token's current class, which is the form with a well-defined joint (the
// exact-posterior tests run in this mode). The derived variant also carries
// the document-polarity factor in the switch conditional for the same
// reason.
enum class SamplerMode { AsWritten, Derived };

inline SamplerMode parse_mode(const std::string& s) {
    if (s == "as-written") return SamplerMode::AsWritten;
    if (s == "derived") return SamplerMode::Derived;
    throw Error("unknown sampler mode '" + s + "' (want as-written or derived)");
}

inline const char* mode_name(SamplerMode m) {
    return m == SamplerMode::AsWritten ? "as-written" : "derived";
}

// Seed-biased Dirichlet hyperparameters. Per-document α and δ rows are
// normalized so they sum to alpha_base and delta_base; the polarity β are
// shared across topics.
struct PriorSet {
    int num_topics = 0;
    int vocab_size = 0;
    int num_documents = 0;
    double alpha_base = 0.0;
    double beta_base = 0.0;
    double delta_base = 0.0;
    std::vector<double> alpha;           // D×T
    std::vector<double> delta;           // D×2
    std::vector<double> beta_aspect;     // T×V
    std::vector<double> beta_pos;        // V
    std::vector<double> beta_neg;        // V
    std::vector<double> beta_aspect_sum; // T
    double beta_pos_sum = 0.0;
    double beta_neg_sum = 0.0;

    double alpha_at(int d, int t) const { return alpha[static_cast<std::size_t>(d) * num_topics + t]; }
    double delta_at(int d, int q) const { return delta[static_cast<std::size_t>(d) * 2 + q]; }
    double delta_sum(int d) const { return delta_at(d, 0) + delta_at(d, 1); }
    double beta_a(int t, int w) const { return beta_aspect[static_cast<std::size_t>(t) * vocab_size + w]; }
};

inline PriorSet compute_priors(const Corpus& corpus, int num_topics, const SimilarityCache& cache,
                               const RunParameters& params) {
    PriorSet p;
    p.num_topics = num_topics;
    p.vocab_size = corpus.vocab.size();
    p.num_documents = static_cast<int>(corpus.sentences.size());
    p.alpha_base = params.alpha_base;
    p.beta_base = params.beta_base;
    p.delta_base = params.delta_base;

    p.alpha.resize(static_cast<std::size_t>(p.num_documents) * num_topics);
    p.delta.resize(static_cast<std::size_t>(p.num_documents) * 2);
    std::vector<double> row(num_topics);
    for (int d = 0; d < p.num_documents; ++d) {
        const auto& toks = corpus.sentences[d].tokens;
        std::fill(row.begin(), row.end(), 0.0);
        double pos = 0.0, neg = 0.0;
        for (int w : toks) {
            for (int t = 0; t < num_topics; ++t) row[t] += cache.aspect(w, t);
            pos += cache.positive(w);
            neg += cache.negative(w);
        }
        double total = 0.0;
        for (double r : row) total += r;
        for (int t = 0; t < num_topics; ++t)
            p.alpha[static_cast<std::size_t>(d) * num_topics + t] = row[t] / total * p.alpha_base;
        p.delta[static_cast<std::size_t>(d) * 2 + 0] = pos / (pos + neg) * p.delta_base;
        p.delta[static_cast<std::size_t>(d) * 2 + 1] = neg / (pos + neg) * p.delta_base;
    }

    p.beta_aspect.resize(static_cast<std::size_t>(num_topics) * p.vocab_size);
    p.beta_pos.resize(p.vocab_size);
    p.beta_neg.resize(p.vocab_size);
    p.beta_aspect_sum.assign(num_topics, 0.0);
    for (int w = 0; w < p.vocab_size; ++w) {
        for (int t = 0; t < num_topics; ++t) {
            double b = cache.aspect(w, t) * p.beta_base;
            p.beta_aspect[static_cast<std::size_t>(t) * p.vocab_size + w] = b;
            p.beta_aspect_sum[t] += b;
        }
        p.beta_pos[w] = cache.positive(w) * p.beta_base;
        p.beta_neg[w] = cache.negative(w) * p.beta_base;
        p.beta_pos_sum += p.beta_pos[w];
        p.beta_neg_sum += p.beta_neg[w];
    }
    return p;
}

// Per-token assignments and the count matrices the collapsed sampler needs.
// v is kept for every token but only counted while y = O; when y flips back
// to O the stale v is the starting assignment.
struct SamplerState {
    int num_topics = 0;
    int vocab_size = 0;
    std::vector<std::vector<int>> z;        // topic per token
    std::vector<std::vector<uint8_t>> y;    // 0 = aspect term, 1 = opinion word
    std::vector<std::vector<uint8_t>> v;    // 0 = positive, 1 = negative
    std::vector<long long> n_aw, n_pw, n_nw; // T×V word-class counts
    std::vector<long long> n_a, n_p, n_n;    // per-topic row sums
    std::vector<long long> n_dt;             // D×T
    std::vector<long long> n_dq;             // D×2
    std::vector<std::vector<double>> pi_a;   // cached π_A per token
    Rng rng;

    int num_documents() const { return static_cast<int>(z.size()); }
    long long doc_opinion_count(int d) const {
        return n_dq[static_cast<std::size_t>(d) * 2] + n_dq[static_cast<std::size_t>(d) * 2 + 1];
    }
    int token_class(int d, int n) const {
        if (y[d][n] == 0) return kClassAspect;
        return v[d][n] == 0 ? kClassPositive : kClassNegative;
    }

    void apply(const Corpus& corpus, int d, int n, long long sign) {
        const int w = corpus.sentences[d].tokens[n];
        const int t = z[d][n];
        n_dt[static_cast<std::size_t>(d) * num_topics + t] += sign;
        const std::size_t cell = static_cast<std::size_t>(t) * vocab_size + w;
        switch (token_class(d, n)) {
            case kClassAspect: n_aw[cell] += sign; n_a[t] += sign; break;
            case kClassPositive:
                n_pw[cell] += sign;
                n_p[t] += sign;
                n_dq[static_cast<std::size_t>(d) * 2] += sign;
                break;
            default:
                n_nw[cell] += sign;
                n_n[t] += sign;
                n_dq[static_cast<std::size_t>(d) * 2 + 1] += sign;
        }
    }
};

inline SamplerState init_state(const Corpus& corpus, const PriorSet& priors,
                               const std::vector<std::vector<double>>& pi_a,
                               std::uint64_t rng_seed) {
    SamplerState st;
    st.num_topics = priors.num_topics;
    st.vocab_size = priors.vocab_size;
    const int D = priors.num_documents;
    st.z.resize(D);
    st.y.resize(D);
    st.v.resize(D);
    st.pi_a = pi_a;
    st.n_aw.assign(static_cast<std::size_t>(st.num_topics) * st.vocab_size, 0);
    st.n_pw.assign(st.n_aw.size(), 0);
    st.n_nw.assign(st.n_aw.size(), 0);
    st.n_a.assign(st.num_topics, 0);
    st.n_p.assign(st.num_topics, 0);
    st.n_n.assign(st.num_topics, 0);
    st.n_dt.assign(static_cast<std::size_t>(D) * st.num_topics, 0);
    st.n_dq.assign(static_cast<std::size_t>(D) * 2, 0);
    st.rng = Rng(rng_seed);
    for (int d = 0; d < D; ++d) {
        const auto& toks = corpus.sentences[d].tokens;
        st.z[d].resize(toks.size());
        st.y[d].resize(toks.size());
        st.v[d].resize(toks.size());
        for (std::size_t n = 0; n < toks.size(); ++n) {
            st.z[d][n] = static_cast<int>(st.rng.below(st.num_topics));
            st.y[d][n] = st.rng.uniform() < st.pi_a[d][n] ? 0 : 1;
            st.v[d][n] = static_cast<uint8_t>(st.rng.below(2));
            st.apply(corpus, d, static_cast<int>(n), +1);
        }
    }
    return st;
}

namespace detail {

inline double word_ratio(const SamplerState& st, const PriorSet& pr, int cls, int t, int w) {
    const std::size_t cell = static_cast<std::size_t>(t) * pr.vocab_size + w;
    switch (cls) {
        case kClassAspect:
            return (st.n_aw[cell] + pr.beta_a(t, w)) / (st.n_a[t] + pr.beta_aspect_sum[t]);
        case kClassPositive:
            return (st.n_pw[cell] + pr.beta_pos[w]) / (st.n_p[t] + pr.beta_pos_sum);
        default:
            return (st.n_nw[cell] + pr.beta_neg[w]) / (st.n_n[t] + pr.beta_neg_sum);
    }
}

} // namespace detail

// Unnormalized conditionals. The counts must already exclude the token; the
// sweep removes it first, and conditionals_at below handles that for tests.

inline std::vector<double> topic_weights(const SamplerState& st, const PriorSet& pr,
                                         const Corpus& corpus, int d, int n, SamplerMode mode) {
    const int w = corpus.sentences[d].tokens[n];
    std::vector<double> out(pr.num_topics);
    const int cls = st.token_class(d, n);
    for (int t = 0; t < pr.num_topics; ++t) {
        const double doc = st.n_dt[static_cast<std::size_t>(d) * pr.num_topics + t] + pr.alpha_at(d, t);
        if (mode == SamplerMode::AsWritten) {
            out[t] = detail::word_ratio(st, pr, kClassAspect, t, w) *
                     detail::word_ratio(st, pr, kClassPositive, t, w) *
                     detail::word_ratio(st, pr, kClassNegative, t, w) * doc;
        } else {
            out[t] = detail::word_ratio(st, pr, cls, t, w) * doc;
        }
    }
    return out;
}

inline std::array<double, 2> switch_weights(const SamplerState& st, const PriorSet& pr,
                                            const Corpus& corpus, int d, int n, int t,
                                            SamplerMode mode) {
    const int w = corpus.sentences[d].tokens[n];
    const double pi = st.pi_a[d][n];
    const int q = st.v[d][n];
    std::array<double, 2> out;
    out[0] = detail::word_ratio(st, pr, kClassAspect, t, w) * pi;
    out[1] = detail::word_ratio(st, pr, q == 0 ? kClassPositive : kClassNegative, t, w) * (1.0 - pi);
    if (mode == SamplerMode::Derived) {
        // document-polarity factor: choosing y = O adds an opinion token to d
        out[1] *= (st.n_dq[static_cast<std::size_t>(d) * 2 + q] + pr.delta_at(d, q)) /
                  (st.doc_opinion_count(d) + pr.delta_sum(d));
    }
    return out;
}

inline std::array<double, 2> polarity_weights(const SamplerState& st, const PriorSet& pr,
                                              const Corpus& corpus, int d, int n, int t) {
    const int w = corpus.sentences[d].tokens[n];
    std::array<double, 2> out;
    out[0] = detail::word_ratio(st, pr, kClassPositive, t, w) *
             (st.n_dq[static_cast<std::size_t>(d) * 2] + pr.delta_at(d, 0));
    out[1] = detail::word_ratio(st, pr, kClassNegative, t, w) *
             (st.n_dq[static_cast<std::size_t>(d) * 2 + 1] + pr.delta_at(d, 1));
    return out;
}

// All three conditionals for one token at its current assignment, with the
// token excluded from the counts. Test hook; leaves the state unchanged.
struct TokenConditionals {
    std::vector<double> topic;
    std::array<double, 2> word_class;
    std::array<double, 2> polarity;
};

inline TokenConditionals conditionals_at(SamplerState& st, const PriorSet& pr, const Corpus& corpus,
                                         int d, int n, SamplerMode mode) {
    st.apply(corpus, d, n, -1);
    TokenConditionals out;
    out.topic = topic_weights(st, pr, corpus, d, n, mode);
    out.word_class = switch_weights(st, pr, corpus, d, n, st.z[d][n], mode);
    out.polarity = polarity_weights(st, pr, corpus, d, n, st.z[d][n]);
    st.apply(corpus, d, n, +1);
    return out;
}

namespace detail {

inline int sample2(Rng& rng, const std::array<double, 2>& w) {
    const double total = w[0] + w[1];
    if (!(total > 0.0) || !std::isfinite(total))
        throw Error("sampler: conditional does not normalize");
    return rng.uniform() * total < w[0] ? 0 : 1;
}

} // namespace detail

// One full sweep: for every token, remove it from the counts, resample z,
// then y, then (when y = O) v, and put it back.
inline void gibbs_sweep(SamplerState& st, const PriorSet& pr, const Corpus& corpus,
                        SamplerMode mode) {
    for (int d = 0; d < st.num_documents(); ++d) {
        const int len = static_cast<int>(st.z[d].size());
        for (int n = 0; n < len; ++n) {
            st.apply(corpus, d, n, -1);
            st.z[d][n] = static_cast<int>(st.rng.discrete(topic_weights(st, pr, corpus, d, n, mode)));
            st.y[d][n] = static_cast<uint8_t>(
                detail::sample2(st.rng, switch_weights(st, pr, corpus, d, n, st.z[d][n], mode)));
            if (st.y[d][n] == 1)
                st.v[d][n] = static_cast<uint8_t>(
                    detail::sample2(st.rng, polarity_weights(st, pr, corpus, d, n, st.z[d][n])));
            st.apply(corpus, d, n, +1);
        }
    }
}

// Averaged smoothed point estimates over the retained samples.
struct PosteriorSummary {
    int num_topics = 0;
    int vocab_size = 0;
    int num_documents = 0;
    int samples = 0;
    std::vector<double> theta;              // D×T
    std::vector<double> omega;              // D×2
    std::vector<double> phi_a, phi_p, phi_n; // T×V

    double theta_at(int d, int t) const { return theta[static_cast<std::size_t>(d) * num_topics + t]; }
    double omega_at(int d, int q) const { return omega[static_cast<std::size_t>(d) * 2 + q]; }
    const std::vector<double>& phi(int cls) const {
        return cls == kClassAspect ? phi_a : cls == kClassPositive ? phi_p : phi_n;
    }
};

namespace detail {

inline void accumulate_estimates(const SamplerState& st, const PriorSet& pr, const Corpus& corpus,
                                 PosteriorSummary& acc) {
    const int T = pr.num_topics, V = pr.vocab_size, D = pr.num_documents;
    for (int d = 0; d < D; ++d) {
        const double nd = static_cast<double>(corpus.sentences[d].tokens.size());
        for (int t = 0; t < T; ++t)
            acc.theta[static_cast<std::size_t>(d) * T + t] +=
                (st.n_dt[static_cast<std::size_t>(d) * T + t] + pr.alpha_at(d, t)) /
                (nd + pr.alpha_base);
        const double no = static_cast<double>(st.doc_opinion_count(d));
        for (int q = 0; q < 2; ++q)
            acc.omega[static_cast<std::size_t>(d) * 2 + q] +=
                (st.n_dq[static_cast<std::size_t>(d) * 2 + q] + pr.delta_at(d, q)) /
                (no + pr.delta_base);
    }
    for (int t = 0; t < T; ++t) {
        const double da = st.n_a[t] + pr.beta_aspect_sum[t];
        const double dp = st.n_p[t] + pr.beta_pos_sum;
        const double dn = st.n_n[t] + pr.beta_neg_sum;
        for (int w = 0; w < V; ++w) {
            const std::size_t cell = static_cast<std::size_t>(t) * V + w;
            acc.phi_a[cell] += (st.n_aw[cell] + pr.beta_a(t, w)) / da;
            acc.phi_p[cell] += (st.n_pw[cell] + pr.beta_pos[w]) / dp;
            acc.phi_n[cell] += (st.n_nw[cell] + pr.beta_neg[w]) / dn;
        }
    }
    acc.samples += 1;
}

} // namespace detail

struct GibbsResult {
    PosteriorSummary summary;
    SamplerState final_state;
};

using SweepObserver = std::function<void(int sweep, const SamplerState&)>;

inline GibbsResult run_gibbs(const Corpus& corpus, const PriorSet& priors,
                             const std::vector<std::vector<double>>& pi_a,
                             const RunParameters& params, SamplerMode mode,
                             const SweepObserver& observer = nullptr) {
    if (params.burn_in + params.lag > params.iterations)
        throw Error("run_gibbs: burn_in + lag exceeds iterations, no samples would be kept");
    SamplerState st = init_state(corpus, priors, pi_a, params.rng_seed);
    PosteriorSummary acc;
    acc.num_topics = priors.num_topics;
    acc.vocab_size = priors.vocab_size;
    acc.num_documents = priors.num_documents;
    acc.theta.assign(static_cast<std::size_t>(acc.num_documents) * acc.num_topics, 0.0);
    acc.omega.assign(static_cast<std::size_t>(acc.num_documents) * 2, 0.0);
    acc.phi_a.assign(static_cast<std::size_t>(acc.num_topics) * acc.vocab_size, 0.0);
    acc.phi_p.assign(acc.phi_a.size(), 0.0);
    acc.phi_n.assign(acc.phi_a.size(), 0.0);
    for (int sweep = 1; sweep <= params.iterations; ++sweep) {
        gibbs_sweep(st, priors, corpus, mode);
        if (sweep > params.burn_in && (sweep - params.burn_in) % params.lag == 0)
            detail::accumulate_estimates(st, priors, corpus, acc);
        if (observer) observer(sweep, st);
    }
    for (auto& x : acc.theta) x /= acc.samples;
    for (auto& x : acc.omega) x /= acc.samples;
    for (auto& x : acc.phi_a) x /= acc.samples;
    for (auto& x : acc.phi_p) x /= acc.samples;
    for (auto& x : acc.phi_n) x /= acc.samples;
    return {std::move(acc), std::move(st)};
}

// Top-k terms of the (topic, word class) distribution, probability
// descending, ties by term id.
inline std::vector<std::pair<int, double>> top_words(const PosteriorSummary& summary, int topic,
                                                     int cls, int k) {
    if (topic < 0 || topic >= summary.num_topics) throw Error("top_words: unknown topic");
    if (cls != kClassAspect && cls != kClassPositive && cls != kClassNegative)
        throw Error("top_words: unknown word class");
    if (k < 1) throw Error("top_words: k must be >= 1");
    const auto& phi = summary.phi(cls);
    std::vector<std::pair<int, double>> items(summary.vocab_size);
    for (int w = 0; w < summary.vocab_size; ++w)
        items[w] = {w, phi[static_cast<std::size_t>(topic) * summary.vocab_size + w]};
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (k < static_cast<int>(items.size())) items.resize(k);
    return items;
}

// Argmax with deterministic tie handling: lowest index wins, tie flagged.
struct ArgmaxResult {
    int index = 0;
    bool tie = false;
};

inline ArgmaxResult classify_argmax(const double* values, int count) {
    ArgmaxResult r;
    for (int i = 1; i < count; ++i) {
        if (values[i] > values[r.index]) {
            r.index = i;
            r.tie = false;
        } else if (values[i] == values[r.index]) {
            r.tie = true;
        }
    }
    return r;
}

// ---- frozen model for fold-in and the dump file ----

struct ModelDump {
    std::string config_hash;
    std::string language;
    SamplerMode mode = SamplerMode::AsWritten;
    int num_topics = 0;
    int vocab_size = 0;
    double alpha_base = 0.0, beta_base = 0.0, delta_base = 0.0;
    std::vector<std::string> aspect_names;
    std::vector<std::string> terms;
    std::vector<double> sim_aspect;     // T×V similarity columns
    std::vector<double> sim_pos, sim_neg;
    std::vector<long long> n_aw, n_pw, n_nw; // frozen final counts, T×V
    std::vector<double> phi_a, phi_p, phi_n; // averaged, T×V

    // derived
    std::vector<long long> n_a, n_p, n_n;
    std::vector<double> beta_aspect_sum;
    double beta_pos_sum = 0.0, beta_neg_sum = 0.0;
    std::unordered_map<std::string, int> term_index;

    int id_of(const std::string& term) const {
        auto it = term_index.find(term);
        return it == term_index.end() ? -1 : it->second;
    }
    double beta_a(int t, int w) const {
        return sim_aspect[static_cast<std::size_t>(t) * vocab_size + w] * beta_base;
    }
    double beta_p(int w) const { return sim_pos[w] * beta_base; }
    double beta_n(int w) const { return sim_neg[w] * beta_base; }

    void finalize() {
        term_index.clear();
        for (int w = 0; w < vocab_size; ++w) term_index.emplace(terms[w], w);
        n_a.assign(num_topics, 0);
        n_p.assign(num_topics, 0);
        n_n.assign(num_topics, 0);
        beta_aspect_sum.assign(num_topics, 0.0);
        beta_pos_sum = beta_neg_sum = 0.0;
        for (int t = 0; t < num_topics; ++t)
            for (int w = 0; w < vocab_size; ++w) {
                const std::size_t cell = static_cast<std::size_t>(t) * vocab_size + w;
                n_a[t] += n_aw[cell];
                n_p[t] += n_pw[cell];
                n_n[t] += n_nw[cell];
                beta_aspect_sum[t] += beta_a(t, w);
            }
        for (int w = 0; w < vocab_size; ++w) {
            beta_pos_sum += beta_p(w);
            beta_neg_sum += beta_n(w);
        }
    }
};

inline ModelDump build_model_dump(const Corpus& corpus, const SeedConfiguration& config,
                                  const SimilarityCache& cache, const GibbsResult& result,
                                  const RunParameters& params, SamplerMode mode,
                                  const std::string& config_hash_hex) {
    ModelDump dump;
    dump.config_hash = config_hash_hex;
    dump.language = corpus.language;
    dump.mode = mode;
    dump.num_topics = config.num_topics();
    dump.vocab_size = corpus.vocab.size();
    dump.alpha_base = params.alpha_base;
    dump.beta_base = params.beta_base;
    dump.delta_base = params.delta_base;
    for (const auto& a : config.aspects) dump.aspect_names.push_back(a.name);
    dump.terms = corpus.vocab.terms;
    dump.sim_aspect.resize(static_cast<std::size_t>(dump.num_topics) * dump.vocab_size);
    dump.sim_pos.resize(dump.vocab_size);
    dump.sim_neg.resize(dump.vocab_size);
    for (int w = 0; w < dump.vocab_size; ++w) {
        for (int t = 0; t < dump.num_topics; ++t)
            dump.sim_aspect[static_cast<std::size_t>(t) * dump.vocab_size + w] = cache.aspect(w, t);
        dump.sim_pos[w] = cache.positive(w);
        dump.sim_neg[w] = cache.negative(w);
    }
    dump.n_aw = result.final_state.n_aw;
    dump.n_pw = result.final_state.n_pw;
    dump.n_nw = result.final_state.n_nw;
    dump.phi_a = result.summary.phi_a;
    dump.phi_p = result.summary.phi_p;
    dump.phi_n = result.summary.phi_n;
    dump.finalize();
    return dump;
}

namespace detail {

template <typename T, typename Fmt>
void write_matrix(std::ostream& out, const char* name, const std::vector<T>& m, int rows, int cols,
                  Fmt fmt) {
    out << name << "\n";
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) out << (c ? " " : "") << fmt(m[static_cast<std::size_t>(r) * cols + c]);
        out << "\n";
    }
}

template <typename T, typename Parse>
void read_matrix(std::istream& in, const char* name, std::vector<T>& m, int rows, int cols,
                 Parse parse) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != name)
        throw Error(std::string("model dump: expected section ") + name);
    m.resize(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r) {
        if (!std::getline(in, line)) throw Error("model dump: truncated matrix");
        std::istringstream ls(line);
        std::string tok;
        for (int c = 0; c < cols; ++c) {
            if (!(ls >> tok)) throw Error("model dump: short matrix row");
            m[static_cast<std::size_t>(r) * cols + c] = parse(tok);
        }
    }
}

} // namespace detail

inline void save_model_dump(const ModelDump& dump, std::ostream& out) {
    out << "seedabsa-model v1\n";
    out << "config_hash " << dump.config_hash << "\n";
    out << "language " << dump.language << "\n";
    out << "mode " << mode_name(dump.mode) << "\n";
    out << "T " << dump.num_topics << " V " << dump.vocab_size << "\n";
    out << "alpha_base " << format_double(dump.alpha_base) << " beta_base "
        << format_double(dump.beta_base) << " delta_base " << format_double(dump.delta_base)
        << "\n";
    out << "aspects";
    for (const auto& a : dump.aspect_names) out << " " << a;
    out << "\n";
    out << "terms\n";
    for (const auto& t : dump.terms) out << t << "\n";
    auto fmt_ll = [](long long x) { return std::to_string(x); };
    auto fmt_d = [](double x) { return format_double(x); };
    detail::write_matrix(out, "sim_aspect", dump.sim_aspect, dump.num_topics, dump.vocab_size, fmt_d);
    detail::write_matrix(out, "sim_pos", dump.sim_pos, 1, dump.vocab_size, fmt_d);
    detail::write_matrix(out, "sim_neg", dump.sim_neg, 1, dump.vocab_size, fmt_d);
    detail::write_matrix(out, "n_aw", dump.n_aw, dump.num_topics, dump.vocab_size, fmt_ll);
    detail::write_matrix(out, "n_pw", dump.n_pw, dump.num_topics, dump.vocab_size, fmt_ll);
    detail::write_matrix(out, "n_nw", dump.n_nw, dump.num_topics, dump.vocab_size, fmt_ll);
    detail::write_matrix(out, "phi_a", dump.phi_a, dump.num_topics, dump.vocab_size, fmt_d);
    detail::write_matrix(out, "phi_p", dump.phi_p, dump.num_topics, dump.vocab_size, fmt_d);
    detail::write_matrix(out, "phi_n", dump.phi_n, dump.num_topics, dump.vocab_size, fmt_d);
}

inline ModelDump load_model_dump(std::istream& in) {
    ModelDump dump;
    std::string line;
    if (!std::getline(in, line) || trim(line) != "seedabsa-model v1")
        throw Error("model dump: bad header");
    auto read_kv = [&](const char* key) {
        if (!std::getline(in, line) || !starts_with(line, std::string(key) + " "))
            throw Error(std::string("model dump: expected ") + key);
        return trim(line.substr(std::strlen(key) + 1));
    };
    dump.config_hash = read_kv("config_hash");
    dump.language = read_kv("language");
    dump.mode = parse_mode(read_kv("mode"));
    {
        std::istringstream ls(read_kv("T"));
        std::string vtag;
        if (!(ls >> dump.num_topics >> vtag >> dump.vocab_size) || vtag != "V")
            throw Error("model dump: bad dimensions line");
    }
    {
        std::istringstream ls(read_kv("alpha_base"));
        std::string k1, k2;
        if (!(ls >> dump.alpha_base >> k1 >> dump.beta_base >> k2 >> dump.delta_base) ||
            k1 != "beta_base" || k2 != "delta_base")
            throw Error("model dump: bad base hyperparameter line");
    }
    {
        std::istringstream ls(read_kv("aspects"));
        std::string name;
        while (ls >> name) dump.aspect_names.push_back(name);
        if (static_cast<int>(dump.aspect_names.size()) != dump.num_topics)
            throw Error("model dump: aspect name count mismatch");
    }
    if (!std::getline(in, line) || trim(line) != "terms") throw Error("model dump: expected terms");
    dump.terms.resize(dump.vocab_size);
    for (int w = 0; w < dump.vocab_size; ++w)
        if (!std::getline(in, dump.terms[w])) throw Error("model dump: truncated terms");
    auto parse_ll = [](const std::string& s) { return std::stoll(s); };
    auto parse_d = [](const std::string& s) { return std::strtod(s.c_str(), nullptr); };
    detail::read_matrix(in, "sim_aspect", dump.sim_aspect, dump.num_topics, dump.vocab_size, parse_d);
    detail::read_matrix(in, "sim_pos", dump.sim_pos, 1, dump.vocab_size, parse_d);
    detail::read_matrix(in, "sim_neg", dump.sim_neg, 1, dump.vocab_size, parse_d);
    detail::read_matrix(in, "n_aw", dump.n_aw, dump.num_topics, dump.vocab_size, parse_ll);
    detail::read_matrix(in, "n_pw", dump.n_pw, dump.num_topics, dump.vocab_size, parse_ll);
    detail::read_matrix(in, "n_nw", dump.n_nw, dump.num_topics, dump.vocab_size, parse_ll);
    detail::read_matrix(in, "phi_a", dump.phi_a, dump.num_topics, dump.vocab_size, parse_d);
    detail::read_matrix(in, "phi_p", dump.phi_p, dump.num_topics, dump.vocab_size, parse_d);
    detail::read_matrix(in, "phi_n", dump.phi_n, dump.num_topics, dump.vocab_size, parse_d);
    dump.finalize();
    return dump;
}

// ---- fold-in of a held-out sentence against frozen counts ----

struct FoldResult {
    std::vector<double> theta;
    std::array<double, 2> omega{};
    int in_vocab_tokens = 0;
};

// Short Gibbs chain over one sentence holding the dump's topic-word counts
// fixed. token_ids and pi_a cover only the in-vocabulary tokens, in order.
// Returns nothing when the sentence has no in-vocabulary token.
inline std::optional<FoldResult> fold_in(const ModelDump& dump, const std::vector<int>& token_ids,
                                         const std::vector<double>& pi_a,
                                         const RunParameters& params, Rng& rng) {
    if (token_ids.empty()) return std::nullopt;
    const int T = dump.num_topics;
    const int len = static_cast<int>(token_ids.size());

    // sentence priors from the stored similarity columns
    std::vector<double> alpha(T, 0.0);
    double sim_p = 0.0, sim_n = 0.0;
    for (int w : token_ids) {
        for (int t = 0; t < T; ++t)
            alpha[t] += dump.sim_aspect[static_cast<std::size_t>(t) * dump.vocab_size + w];
        sim_p += dump.sim_pos[w];
        sim_n += dump.sim_neg[w];
    }
    double alpha_total = 0.0;
    for (double a : alpha) alpha_total += a;
    for (int t = 0; t < T; ++t) alpha[t] = alpha[t] / alpha_total * dump.alpha_base;
    const std::array<double, 2> delta{sim_p / (sim_p + sim_n) * dump.delta_base,
                                      sim_n / (sim_p + sim_n) * dump.delta_base};

    auto ratio = [&](int cls, int t, int w) {
        const std::size_t cell = static_cast<std::size_t>(t) * dump.vocab_size + w;
        switch (cls) {
            case kClassAspect:
                return (dump.n_aw[cell] + dump.beta_a(t, w)) / (dump.n_a[t] + dump.beta_aspect_sum[t]);
            case kClassPositive:
                return (dump.n_pw[cell] + dump.beta_p(w)) / (dump.n_p[t] + dump.beta_pos_sum);
            default:
                return (dump.n_nw[cell] + dump.beta_n(w)) / (dump.n_n[t] + dump.beta_neg_sum);
        }
    };

    std::vector<int> z(len);
    std::vector<uint8_t> y(len), v(len);
    std::vector<long long> n_dt(T, 0);
    std::array<long long, 2> n_dq{0, 0};
    for (int n = 0; n < len; ++n) {
        z[n] = static_cast<int>(rng.below(T));
        y[n] = rng.uniform() < pi_a[n] ? 0 : 1;
        v[n] = static_cast<uint8_t>(rng.below(2));
        ++n_dt[z[n]];
        if (y[n] == 1) ++n_dq[v[n]];
    }

    FoldResult acc;
    acc.theta.assign(T, 0.0);
    acc.in_vocab_tokens = len;
    int samples = 0;
    std::vector<double> tw(T);
    for (int sweep = 1; sweep <= params.fold_iterations; ++sweep) {
        for (int n = 0; n < len; ++n) {
            const int w = token_ids[n];
            --n_dt[z[n]];
            if (y[n] == 1) --n_dq[v[n]];
            const int cls = y[n] == 0 ? kClassAspect : (v[n] == 0 ? kClassPositive : kClassNegative);
            for (int t = 0; t < T; ++t) {
                const double doc = n_dt[t] + alpha[t];
                tw[t] = dump.mode == SamplerMode::AsWritten
                            ? ratio(kClassAspect, t, w) * ratio(kClassPositive, t, w) *
                                  ratio(kClassNegative, t, w) * doc
                            : ratio(cls, t, w) * doc;
            }
            z[n] = static_cast<int>(rng.discrete(tw));
            const int q = v[n];
            std::array<double, 2> sw{ratio(kClassAspect, z[n], w) * pi_a[n],
                                     ratio(q == 0 ? kClassPositive : kClassNegative, z[n], w) *
                                         (1.0 - pi_a[n])};
            if (dump.mode == SamplerMode::Derived)
                sw[1] *= (n_dq[q] + delta[q]) / (n_dq[0] + n_dq[1] + delta[0] + delta[1]);
            y[n] = static_cast<uint8_t>(detail::sample2(rng, sw));
            if (y[n] == 1) {
                std::array<double, 2> pw{ratio(kClassPositive, z[n], w) * (n_dq[0] + delta[0]),
                                         ratio(kClassNegative, z[n], w) * (n_dq[1] + delta[1])};
                v[n] = static_cast<uint8_t>(detail::sample2(rng, pw));
            }
            ++n_dt[z[n]];
            if (y[n] == 1) ++n_dq[v[n]];
        }
        if (sweep > params.fold_burn_in && (sweep - params.fold_burn_in) % params.fold_lag == 0) {
            for (int t = 0; t < T; ++t) acc.theta[t] += (n_dt[t] + alpha[t]) / (len + dump.alpha_base);
            const double no = static_cast<double>(n_dq[0] + n_dq[1]);
            acc.omega[0] += (n_dq[0] + delta[0]) / (no + dump.delta_base);
            acc.omega[1] += (n_dq[1] + delta[1]) / (no + dump.delta_base);
            ++samples;
        }
    }
    if (samples == 0) throw Error("fold_in: no samples kept; check fold_burn_in/fold_lag");
    for (double& x : acc.theta) x /= samples;
    acc.omega[0] /= samples;
    acc.omega[1] /= samples;
    return acc;
}

} // namespace seedabsa
