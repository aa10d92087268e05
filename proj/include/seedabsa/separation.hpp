#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "seedabsa/brown.hpp"
#include "seedabsa/common.hpp"
#include "seedabsa/config.hpp"
#include "seedabsa/corpus.hpp"

namespace seedabsa {

enum class WordClass : int { Aspect = 0, Opinion = 1 };

// Context features for the aspect-term/opinion-word classifier: the Brown
// cluster paths of the [-2,+2] window, position-tagged, with a distinguished
// padding feature at sentence boundaries. The center word itself is excluded.
struct TrainingInstance {
    WordClass label = WordClass::Aspect;
    std::array<int, 4> features{}; // feature ids, one per relative position
    int sentence = -1;
    int token = -1;
};

struct FeatureSpace {
    std::unordered_map<std::string, int> index;
    std::vector<std::string> names;

    int size() const { return static_cast<int>(names.size()); }
    int add(const std::string& name) {
        auto it = index.find(name);
        if (it != index.end()) return it->second;
        int id = size();
        index.emplace(name, id);
        names.push_back(name);
        return id;
    }
    int lookup(const std::string& name) const {
        auto it = index.find(name);
        return it == index.end() ? -1 : it->second;
    }
};

struct SeparationModel {
    FeatureSpace features;
    std::vector<double> weight_a; // λ_A per feature
    std::vector<double> weight_o; // λ_O per feature
    double bias_a = 0.0;
    double bias_o = 0.0;
};

namespace detail {

inline const std::array<int, 4>& context_positions() {
    static const std::array<int, 4> pos{-2, -1, 1, 2};
    return pos;
}

inline std::string context_feature_name(const Corpus& corpus, const ClusterAssignment& clusters,
                                        int sentence, int token, int offset) {
    const auto& toks = corpus.sentences[sentence].tokens;
    const int j = token + offset;
    std::string name = (offset > 0 ? "+" : "") + std::to_string(offset) + ":";
    if (j < 0 || j >= static_cast<int>(toks.size())) return name + "<pad>";
    const std::string& path = clusters.path_of(toks[j]);
    return name + (path.empty() ? "<unk>" : path);
}

} // namespace detail

struct BootstrapResult {
    std::vector<TrainingInstance> instances;
    FeatureSpace features;
    long long count_aspect = 0;
    long long count_opinion = 0;
};

// Emits one A-labelled instance per aspect-seed occurrence and one
// O-labelled instance per polarity-seed occurrence.
inline BootstrapResult bootstrap_instances(const Corpus& corpus, const SeedConfiguration& config,
                                           const ClusterAssignment& clusters) {
    std::vector<int> label_of(corpus.vocab.size(), -1);
    for (const auto& a : config.aspects)
        for (const auto& s : a.seeds)
            if (int id = corpus.vocab.id_of(s); id >= 0) label_of[id] = 0;
    auto mark_opinion = [&](const std::set<std::string>& seeds) {
        for (const auto& s : seeds)
            if (int id = corpus.vocab.id_of(s); id >= 0) label_of[id] = 1;
    };
    mark_opinion(config.positive_seeds);
    mark_opinion(config.negative_seeds);

    BootstrapResult result;
    for (std::size_t d = 0; d < corpus.sentences.size(); ++d) {
        const auto& toks = corpus.sentences[d].tokens;
        for (int n = 0; n < static_cast<int>(toks.size()); ++n) {
            int label = label_of[toks[n]];
            if (label < 0) continue;
            TrainingInstance inst;
            inst.label = static_cast<WordClass>(label);
            inst.sentence = static_cast<int>(d);
            inst.token = n;
            for (std::size_t k = 0; k < detail::context_positions().size(); ++k)
                inst.features[k] = result.features.add(detail::context_feature_name(
                    corpus, clusters, static_cast<int>(d), n, detail::context_positions()[k]));
            (label == 0 ? result.count_aspect : result.count_opinion) += 1;
            result.instances.push_back(inst);
        }
    }
    if (result.count_aspect == 0) throw Error("bootstrap_instances: no aspect-term instances");
    if (result.count_opinion == 0) throw Error("bootstrap_instances: no opinion-word instances");
    return result;
}

namespace detail {

// Negative L2-regularized log-likelihood and gradient of the two-class
// model, scaled by 1/N so the convergence tolerance is instance-count
// invariant (the optimum is unchanged). Parameter layout:
// [wA | wO | biasA biasO]; biases unregularized.
struct MaxentObjective {
    const std::vector<TrainingInstance>* instances;
    int num_features;
    double l2;

    double eval(const std::vector<double>& x, std::vector<double>& grad) const {
        const int F = num_features;
        std::fill(grad.begin(), grad.end(), 0.0);
        double loss = 0.0;
        for (const auto& inst : *instances) {
            double sa = x[2 * F], so = x[2 * F + 1];
            for (int f : inst.features) {
                sa += x[f];
                so += x[F + f];
            }
            const double m = std::max(sa, so);
            const double lse = m + std::log(std::exp(sa - m) + std::exp(so - m));
            loss -= (inst.label == WordClass::Aspect ? sa : so) - lse;
            const double pa = std::exp(sa - lse);
            const double po = 1.0 - pa;
            const double ga = pa - (inst.label == WordClass::Aspect ? 1.0 : 0.0);
            const double go = po - (inst.label == WordClass::Opinion ? 1.0 : 0.0);
            for (int f : inst.features) {
                grad[f] += ga;
                grad[F + f] += go;
            }
            grad[2 * F] += ga;
            grad[2 * F + 1] += go;
        }
        for (int i = 0; i < 2 * F; ++i) {
            loss += 0.5 * l2 * x[i] * x[i];
            grad[i] += l2 * x[i];
        }
        const double scale = 1.0 / static_cast<double>(instances->size());
        for (double& g : grad) g *= scale;
        return loss * scale;
    }
};

} // namespace detail

// L2-regularized multinomial logistic regression trained with L-BFGS to a
// gradient-norm tolerance. Deterministic: zero start, fixed instance order.
inline SeparationModel train_maxent(const BootstrapResult& bootstrap, double l2 = 1.0,
                                    double tolerance = 1e-6, int max_iterations = 500) {
    if (bootstrap.count_aspect == 0 || bootstrap.count_opinion == 0)
        throw Error("train_maxent: both classes must be represented");
    const int F = bootstrap.features.size();
    const int dim = 2 * F + 2;
    detail::MaxentObjective obj{&bootstrap.instances, F, l2};

    std::vector<double> x(dim, 0.0), grad(dim), new_x(dim), new_grad(dim);
    double fx = obj.eval(x, grad);

    auto inf_norm = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double a : v) m = std::max(m, std::abs(a));
        return m;
    };

    const int history = 8;
    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;
    std::vector<double> direction(dim), q(dim);

    int iter = 0;
    while (inf_norm(grad) > tolerance) {
        if (++iter > max_iterations)
            throw Error("train_maxent: no convergence after " + std::to_string(max_iterations) +
                        " iterations (|grad| = " + format_double(inf_norm(grad)) + ")");
        // two-loop recursion: q ends up as H·grad
        q = grad;
        std::vector<double> alpha(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            double a = 0.0;
            for (int k = 0; k < dim; ++k) a += s_hist[i][k] * q[k];
            a *= rho_hist[i];
            alpha[i] = a;
            for (int k = 0; k < dim; ++k) q[k] -= a * y_hist[i][k];
        }
        double gamma = 1.0;
        if (!s_hist.empty()) {
            double sy = 0.0, yy = 0.0;
            for (int k = 0; k < dim; ++k) {
                sy += s_hist.back()[k] * y_hist.back()[k];
                yy += y_hist.back()[k] * y_hist.back()[k];
            }
            if (yy > 0) gamma = sy / yy;
        }
        for (int k = 0; k < dim; ++k) q[k] *= gamma;
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            double beta = 0.0;
            for (int k = 0; k < dim; ++k) beta += y_hist[i][k] * q[k];
            beta *= rho_hist[i];
            for (int k = 0; k < dim; ++k) q[k] += (alpha[i] - beta) * s_hist[i][k];
        }
        for (int k = 0; k < dim; ++k) direction[k] = -q[k];
        double descent = 0.0;
        for (int k = 0; k < dim; ++k) descent += direction[k] * grad[k];
        if (descent >= 0) { // fall back to steepest descent
            for (int k = 0; k < dim; ++k) direction[k] = -grad[k];
            descent = 0.0;
            for (int k = 0; k < dim; ++k) descent += direction[k] * grad[k];
        }
        // Armijo backtracking
        double step = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 50; ++bt) {
            for (int k = 0; k < dim; ++k) new_x[k] = x[k] + step * direction[k];
            double new_fx = obj.eval(new_x, new_grad);
            if (new_fx <= fx + 1e-4 * step * descent) {
                std::vector<double> s(dim), yv(dim);
                double sy = 0.0;
                for (int k = 0; k < dim; ++k) {
                    s[k] = new_x[k] - x[k];
                    yv[k] = new_grad[k] - grad[k];
                    sy += s[k] * yv[k];
                }
                if (sy > 1e-12) {
                    s_hist.push_back(std::move(s));
                    y_hist.push_back(std::move(yv));
                    rho_hist.push_back(1.0 / sy);
                    if (static_cast<int>(s_hist.size()) > history) {
                        s_hist.pop_front();
                        y_hist.pop_front();
                        rho_hist.pop_front();
                    }
                }
                x.swap(new_x);
                grad.swap(new_grad);
                fx = new_fx;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
            throw Error("train_maxent: line search failed (|grad| = " +
                        format_double(inf_norm(grad)) + ")");
    }

    SeparationModel model;
    model.features = bootstrap.features;
    model.weight_a.assign(x.begin(), x.begin() + F);
    model.weight_o.assign(x.begin() + F, x.begin() + 2 * F);
    model.bias_a = x[2 * F];
    model.bias_o = x[2 * F + 1];
    return model;
}

// π = softmax over the two class scores for one token occurrence; unseen
// features contribute zero score. Returns π_A; π_O = 1 − π_A.
inline double predict_pi_aspect(const Corpus& corpus, const ClusterAssignment& clusters,
                                const SeparationModel& model, int sentence, int token) {
    double sa = model.bias_a, so = model.bias_o;
    for (int offset : detail::context_positions()) {
        int f = model.features.lookup(
            detail::context_feature_name(corpus, clusters, sentence, token, offset));
        if (f < 0) continue;
        sa += model.weight_a[f];
        so += model.weight_o[f];
    }
    return 1.0 / (1.0 + std::exp(so - sa));
}

// π_A for every token of the corpus, in sentence order.
inline std::vector<std::vector<double>> compute_pi(const Corpus& corpus,
                                                   const ClusterAssignment& clusters,
                                                   const SeparationModel& model) {
    std::vector<std::vector<double>> pi(corpus.sentences.size());
    for (std::size_t d = 0; d < corpus.sentences.size(); ++d) {
        pi[d].resize(corpus.sentences[d].tokens.size());
        for (std::size_t n = 0; n < pi[d].size(); ++n)
            pi[d][n] = predict_pi_aspect(corpus, clusters, model, static_cast<int>(d),
                                         static_cast<int>(n));
    }
    return pi;
}

// Model file: header with feature count, then feature<TAB>λ_A<TAB>λ_O lines;
// the biases are stored under the reserved name <bias>.
inline void save_separation_model(const SeparationModel& model, std::ostream& out) {
    out << "seedabsa-separation v1\n";
    out << "features " << model.features.size() << " classes A O\n";
    out << "<bias>\t" << format_double(model.bias_a) << "\t" << format_double(model.bias_o) << "\n";
    for (int f = 0; f < model.features.size(); ++f)
        out << model.features.names[f] << "\t" << format_double(model.weight_a[f]) << "\t"
            << format_double(model.weight_o[f]) << "\n";
}

inline SeparationModel load_separation_model(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "seedabsa-separation v1")
        throw Error("separation model: bad header");
    if (!std::getline(in, line) || !starts_with(line, "features "))
        throw Error("separation model: missing feature count");
    std::istringstream hs(line.substr(9));
    int count;
    if (!(hs >> count) || count < 0) throw Error("separation model: bad feature count");
    SeparationModel model;
    bool saw_bias = false;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto cols = split(line, '\t');
        if (cols.size() != 3) throw Error("separation model: bad weight line");
        double wa = std::strtod(cols[1].c_str(), nullptr);
        double wo = std::strtod(cols[2].c_str(), nullptr);
        if (cols[0] == "<bias>") {
            model.bias_a = wa;
            model.bias_o = wo;
            saw_bias = true;
            continue;
        }
        model.features.add(cols[0]);
        model.weight_a.push_back(wa);
        model.weight_o.push_back(wo);
    }
    if (!saw_bias) throw Error("separation model: missing <bias> line");
    if (model.features.size() != count) throw Error("separation model: feature count mismatch");
    return model;
}

} // namespace seedabsa
