#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "seedabsa/common.hpp"
#include "seedabsa/corpus.hpp"
#include "seedabsa/tmodel.hpp"

namespace seedabsa {

struct ConfusionMatrix {
    std::vector<std::string> labels;          // sorted class label list
    std::vector<long long> counts;            // row = gold, column = predicted
    long long total = 0;

    long long at(int gold, int pred) const {
        return counts[static_cast<std::size_t>(gold) * labels.size() + pred];
    }
    int label_index(const std::string& label) const {
        auto it = std::lower_bound(labels.begin(), labels.end(), label);
        if (it == labels.end() || *it != label) return -1;
        return static_cast<int>(it - labels.begin());
    }
};

struct ClassScore {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct EvalReport {
    ConfusionMatrix confusion;
    double accuracy = 0.0;
    std::vector<ClassScore> per_class;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
};

inline EvalReport score(const std::vector<std::string>& predictions,
                        const std::vector<std::string>& golds) {
    if (predictions.size() != golds.size())
        throw Error("score: prediction/gold length mismatch");
    if (golds.empty()) throw Error("score: nothing to score");

    EvalReport report;
    std::set<std::string> label_set(golds.begin(), golds.end());
    label_set.insert(predictions.begin(), predictions.end());
    report.confusion.labels.assign(label_set.begin(), label_set.end());
    const int k = static_cast<int>(report.confusion.labels.size());
    report.confusion.counts.assign(static_cast<std::size_t>(k) * k, 0);
    report.confusion.total = static_cast<long long>(golds.size());

    long long correct = 0;
    for (std::size_t i = 0; i < golds.size(); ++i) {
        int g = report.confusion.label_index(golds[i]);
        int p = report.confusion.label_index(predictions[i]);
        ++report.confusion.counts[static_cast<std::size_t>(g) * k + p];
        if (g == p) ++correct;
    }
    report.accuracy = static_cast<double>(correct) / report.confusion.total;

    for (int c = 0; c < k; ++c) {
        long long tp = report.confusion.at(c, c);
        long long gold_total = 0, pred_total = 0;
        for (int j = 0; j < k; ++j) {
            gold_total += report.confusion.at(c, j);
            pred_total += report.confusion.at(j, c);
        }
        ClassScore cs;
        cs.label = report.confusion.labels[c];
        cs.precision = pred_total > 0 ? static_cast<double>(tp) / pred_total : 0.0;
        cs.recall = gold_total > 0 ? static_cast<double>(tp) / gold_total : 0.0;
        cs.f1 = (cs.precision + cs.recall) > 0
                    ? 2.0 * cs.precision * cs.recall / (cs.precision + cs.recall)
                    : 0.0;
        report.macro_precision += cs.precision;
        report.macro_recall += cs.recall;
        report.macro_f1 += cs.f1;
        report.per_class.push_back(std::move(cs));
    }
    report.macro_precision /= k;
    report.macro_recall /= k;
    report.macro_f1 /= k;
    return report;
}

// Random balanced subsets: each subset draws exactly per_class items of
// every class, without replacement within the subset.
inline std::vector<std::vector<int>> balanced_subsets(const std::vector<std::string>& labels,
                                                      int per_class, int num_subsets,
                                                      std::uint64_t rng_seed) {
    if (per_class < 1 || num_subsets < 1) throw Error("balanced_subsets: bad arguments");
    std::map<std::string, std::vector<int>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<int>(i));
    for (const auto& [label, items] : by_class)
        if (static_cast<int>(items.size()) < per_class)
            throw Error("balanced_subsets: class '" + label + "' has only " +
                        std::to_string(items.size()) + " items, need " + std::to_string(per_class));
    Rng rng(rng_seed);
    std::vector<std::vector<int>> subsets(num_subsets);
    for (int s = 0; s < num_subsets; ++s) {
        for (auto& [label, items] : by_class) {
            std::vector<int> pool = items;
            rng.shuffle(pool);
            subsets[s].insert(subsets[s].end(), pool.begin(), pool.begin() + per_class);
        }
        std::sort(subsets[s].begin(), subsets[s].end());
    }
    return subsets;
}

// Deterministic shuffled k-fold split; fold of each item.
inline std::vector<int> kfold_assignment(std::size_t count, int folds, std::uint64_t rng_seed) {
    if (folds < 2) throw Error("kfold_assignment: need at least 2 folds");
    std::vector<int> order(count);
    for (std::size_t i = 0; i < count; ++i) order[i] = static_cast<int>(i);
    Rng rng(rng_seed);
    rng.shuffle(order);
    std::vector<int> fold(count);
    for (std::size_t r = 0; r < count; ++r) fold[order[r]] = static_cast<int>(r % folds);
    return fold;
}

// ---- supervised baselines over tokenized sentences ----

struct BaselineDataset {
    std::vector<std::vector<std::string>> documents;
    std::vector<std::string> labels;
};

inline std::string majority_class(const std::vector<std::string>& labels) {
    if (labels.empty()) throw Error("majority_baseline: empty training set");
    std::map<std::string, long long> counts;
    for (const auto& l : labels) ++counts[l];
    std::string best;
    long long best_count = -1;
    for (const auto& [label, count] : counts)
        if (count > best_count) {
            best = label;
            best_count = count;
        }
    return best;
}

inline std::vector<std::string> majority_baseline(const std::vector<std::string>& train_labels,
                                                  std::size_t test_count) {
    return std::vector<std::string>(test_count, majority_class(train_labels));
}

// Multinomial Naive Bayes over tf-idf weighted bag-of-words, vocabulary
// capped at the most frequent terms, additive smoothing 1.0.
class NaiveBayesBaseline {
public:
    static constexpr int kDefaultVocabCap = 80000;

    void train(const BaselineDataset& data, int vocab_cap = kDefaultVocabCap) {
        if (data.documents.empty()) throw Error("naive_bayes: empty training set");
        if (data.documents.size() != data.labels.size())
            throw Error("naive_bayes: document/label mismatch");

        // document frequencies and term selection
        std::unordered_map<std::string, long long> term_freq, doc_freq;
        for (const auto& doc : data.documents) {
            std::unordered_set<std::string> seen;
            for (const auto& tok : doc) {
                ++term_freq[tok];
                if (seen.insert(tok).second) ++doc_freq[tok];
            }
        }
        std::vector<std::pair<std::string, long long>> ranked(term_freq.begin(), term_freq.end());
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (static_cast<int>(ranked.size()) > vocab_cap) ranked.resize(vocab_cap);
        vocab_.clear();
        idf_.clear();
        const double n_docs = static_cast<double>(data.documents.size());
        for (const auto& [term, freq] : ranked) {
            vocab_.emplace(term, static_cast<int>(idf_.size()));
            idf_.push_back(std::log(n_docs / doc_freq[term]));
        }

        std::set<std::string> label_set(data.labels.begin(), data.labels.end());
        classes_.assign(label_set.begin(), label_set.end());
        const int k = static_cast<int>(classes_.size());
        class_prior_.assign(k, 0.0);
        feature_mass_.assign(static_cast<std::size_t>(k) * idf_.size(), 0.0);
        class_mass_.assign(k, 0.0);
        std::map<std::string, int> class_index;
        for (int c = 0; c < k; ++c) class_index[classes_[c]] = c;

        for (std::size_t i = 0; i < data.documents.size(); ++i) {
            const int c = class_index[data.labels[i]];
            class_prior_[c] += 1.0;
            for (const auto& [f, x] : vectorize(data.documents[i])) {
                feature_mass_[static_cast<std::size_t>(c) * idf_.size() + f] += x;
                class_mass_[c] += x;
            }
        }
        for (double& p : class_prior_) p = std::log(p / n_docs);
    }

    std::string predict(const std::vector<std::string>& doc) const {
        const int k = static_cast<int>(classes_.size());
        auto vec = vectorize(doc);
        int best = 0;
        double best_score = -HUGE_VAL;
        for (int c = 0; c < k; ++c) {
            double s = class_prior_[c];
            for (const auto& [f, x] : vec)
                s += x * std::log((feature_mass_[static_cast<std::size_t>(c) * idf_.size() + f] + 1.0) /
                                  (class_mass_[c] + idf_.size()));
            if (s > best_score) {
                best_score = s;
                best = c;
            }
        }
        return classes_[best];
    }

private:
    // tf-idf, L2-normalized
    std::vector<std::pair<int, double>> vectorize(const std::vector<std::string>& doc) const {
        std::unordered_map<int, double> tf;
        for (const auto& tok : doc) {
            auto it = vocab_.find(tok);
            if (it != vocab_.end()) tf[it->second] += 1.0;
        }
        std::vector<std::pair<int, double>> vec(tf.begin(), tf.end());
        std::sort(vec.begin(), vec.end());
        double norm = 0.0;
        for (auto& [f, x] : vec) {
            x *= idf_[f];
            norm += x * x;
        }
        if (norm > 0) {
            norm = std::sqrt(norm);
            for (auto& [f, x] : vec) x /= norm;
        }
        return vec;
    }

    std::unordered_map<std::string, int> vocab_;
    std::vector<double> idf_;
    std::vector<std::string> classes_;
    std::vector<double> class_prior_;
    std::vector<double> feature_mass_; // per class, per feature tf-idf mass
    std::vector<double> class_mass_;
};

inline std::vector<std::string> naive_bayes_baseline(const BaselineDataset& train,
                                                     const std::vector<std::vector<std::string>>& test,
                                                     int vocab_cap = NaiveBayesBaseline::kDefaultVocabCap) {
    NaiveBayesBaseline nb;
    nb.train(train, vocab_cap);
    std::vector<std::string> out;
    out.reserve(test.size());
    for (const auto& doc : test) out.push_back(nb.predict(doc));
    return out;
}

// Average k-fold cross-validation accuracy of a baseline over a labelled set.
template <typename TrainPredict>
double cross_validated_accuracy(const BaselineDataset& data, int folds, std::uint64_t rng_seed,
                                TrainPredict&& run) {
    auto fold_of = kfold_assignment(data.documents.size(), folds, rng_seed);
    double acc_sum = 0.0;
    int used_folds = 0;
    for (int f = 0; f < folds; ++f) {
        BaselineDataset train;
        std::vector<std::vector<std::string>> test_docs;
        std::vector<std::string> test_labels;
        for (std::size_t i = 0; i < data.documents.size(); ++i) {
            if (fold_of[i] == f) {
                test_docs.push_back(data.documents[i]);
                test_labels.push_back(data.labels[i]);
            } else {
                train.documents.push_back(data.documents[i]);
                train.labels.push_back(data.labels[i]);
            }
        }
        if (test_docs.empty() || train.documents.empty()) continue;
        std::vector<std::string> preds = run(train, test_docs);
        acc_sum += score(preds, test_labels).accuracy;
        ++used_folds;
    }
    if (used_folds == 0) throw Error("cross_validated_accuracy: not enough data for folds");
    return acc_sum / used_folds;
}

// ---- aspect-term / opinion-word separation scoring ----

struct SeparationScore {
    double aspect_occurrence = 0.0;  // gold aspect-term occurrences assigned y = A
    double opinion_occurrence = 0.0; // lexicon occurrences assigned y = O
    double aspect_type = 0.0;        // majority vote per term type
    double opinion_type = 0.0;
    long long aspect_occurrences = 0;
    long long opinion_occurrences = 0;
};

// Over all token occurrences of lexicon words: fraction with y = O; over all
// occurrences of gold aspect terms: fraction with y = A. Type-level scores
// use the majority assignment per term.
inline SeparationScore separation_score(const SamplerState& state, const Corpus& corpus,
                                        const std::set<std::string>& opinion_lexicon,
                                        const std::set<std::string>& gold_aspect_terms) {
    std::vector<int> kind(corpus.vocab.size(), 0); // 1 = aspect gold, 2 = opinion lexicon
    long long present = 0;
    for (const auto& term : gold_aspect_terms)
        if (int id = corpus.vocab.id_of(term); id >= 0) {
            kind[id] = 1;
            ++present;
        }
    for (const auto& term : opinion_lexicon)
        if (int id = corpus.vocab.id_of(term); id >= 0) {
            if (kind[id] == 0) kind[id] = 2; // gold aspect terms win on overlap
            ++present;
        }
    if (present == 0) throw Error("separation_score: no lexicon/gold term is in the vocabulary");

    std::vector<long long> as_a(corpus.vocab.size(), 0), as_o(corpus.vocab.size(), 0);
    for (std::size_t d = 0; d < corpus.sentences.size(); ++d)
        for (std::size_t n = 0; n < corpus.sentences[d].tokens.size(); ++n) {
            const int w = corpus.sentences[d].tokens[n];
            if (kind[w] == 0) continue;
            (state.y[d][n] == 0 ? as_a[w] : as_o[w]) += 1;
        }

    SeparationScore s;
    long long aspect_correct = 0, opinion_correct = 0;
    long long aspect_types = 0, opinion_types = 0, aspect_types_ok = 0, opinion_types_ok = 0;
    for (int w = 0; w < corpus.vocab.size(); ++w) {
        const long long occ = as_a[w] + as_o[w];
        if (occ == 0) continue;
        if (kind[w] == 1) {
            s.aspect_occurrences += occ;
            aspect_correct += as_a[w];
            ++aspect_types;
            if (as_a[w] * 2 > occ) ++aspect_types_ok;
        } else if (kind[w] == 2) {
            s.opinion_occurrences += occ;
            opinion_correct += as_o[w];
            ++opinion_types;
            if (as_o[w] * 2 > occ) ++opinion_types_ok;
        }
    }
    if (s.aspect_occurrences == 0 && s.opinion_occurrences == 0)
        throw Error("separation_score: lexicon/gold terms never occur in the corpus");
    s.aspect_occurrence =
        s.aspect_occurrences ? static_cast<double>(aspect_correct) / s.aspect_occurrences : 0.0;
    s.opinion_occurrence =
        s.opinion_occurrences ? static_cast<double>(opinion_correct) / s.opinion_occurrences : 0.0;
    s.aspect_type = aspect_types ? static_cast<double>(aspect_types_ok) / aspect_types : 0.0;
    s.opinion_type = opinion_types ? static_cast<double>(opinion_types_ok) / opinion_types : 0.0;
    return s;
}

inline std::set<std::string> load_lexicon(std::istream& in) {
    std::set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        std::string w = trim(line);
        if (w.empty() || w[0] == ';' || w[0] == '#') continue;
        out.insert(normalize_token(w));
    }
    return out;
}

} // namespace seedabsa
