#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "seedabsa/common.hpp"
#include "seedabsa/corpus.hpp"

namespace seedabsa {

struct ClusterAssignment {
    std::vector<int> cluster_of;    // term id → cluster index, -1 when unassigned
    std::vector<std::string> paths; // cluster index → binary merge path (prefix-free)
    int num_clusters = 0;

    const std::string& path_of(int term) const {
        static const std::string none;
        if (term < 0 || term >= static_cast<int>(cluster_of.size()) || cluster_of[term] < 0)
            return none;
        return paths[cluster_of[term]];
    }
};

// One greedy merge, for oracle tests: the two cluster term sets and the drop
// in average mutual information the merge cost.
struct BrownMergeEvent {
    std::vector<int> left_terms;
    std::vector<int> right_terms;
    double normalized_loss = 0.0;
    bool assignment_phase = true; // false for the path-building merges at the end
};

namespace detail {

struct BrownCluster {
    bool alive = false;
    std::vector<int> terms;
    std::unordered_map<int, long long> out; // this → other bigram counts (self included)
    std::unordered_map<int, long long> in;  // other → this
    long long nl = 0;                       // total count as left element
    long long nr = 0;                       // total count as right element
    int node = -1;                          // current merge-tree node
};

// Unnormalized mutual-information contribution of one cluster bigram cell.
// Merge losses computed from these differ from the normalized AMI loss only
// by the constant bigram mass, so the argmin is identical.
inline double brown_q(long long n, long long nl, long long nr) {
    if (n <= 0) return 0.0;
    return static_cast<double>(n) *
           (std::log(static_cast<double>(n)) - std::log(static_cast<double>(nl)) -
            std::log(static_cast<double>(nr)));
}

struct BrownState {
    std::vector<BrownCluster> slots;
    std::vector<int> alive;        // sorted slot ids
    std::vector<int> slot_of_term; // kept current across merges
    long long total_mass = 0;

    double pair_q(int a, int b) const {
        auto it = slots[a].out.find(b);
        if (it == slots[a].out.end()) return 0.0;
        return brown_q(it->second, slots[a].nl, slots[b].nr);
    }

    // Sum of all q terms involving slot x (the self cell counted once).
    double involvement(int x) const {
        const BrownCluster& c = slots[x];
        double s = 0.0;
        for (const auto& [d, n] : c.out) s += brown_q(n, c.nl, slots[d].nr);
        for (const auto& [o, n] : c.in)
            if (o != x) s += brown_q(n, slots[o].nl, c.nr);
        return s;
    }

    double merge_loss(int a, int b, double s_a, double s_b) const {
        const BrownCluster& ca = slots[a];
        const BrownCluster& cb = slots[b];
        double before = s_a + s_b - pair_q(a, b) - pair_q(b, a);

        const long long nlm = ca.nl + cb.nl;
        const long long nrm = ca.nr + cb.nr;
        auto get = [](const std::unordered_map<int, long long>& m, int k) {
            auto it = m.find(k);
            return it == m.end() ? 0ll : it->second;
        };
        double after = 0.0;
        for (const auto& [d, n] : ca.out) {
            if (d == a || d == b) continue;
            after += brown_q(n + get(cb.out, d), nlm, slots[d].nr);
        }
        for (const auto& [d, n] : cb.out) {
            if (d == a || d == b) continue;
            if (ca.out.count(d)) continue; // already handled above
            after += brown_q(n, nlm, slots[d].nr);
        }
        for (const auto& [o, n] : ca.in) {
            if (o == a || o == b) continue;
            after += brown_q(n + get(cb.in, o), slots[o].nl, nrm);
        }
        for (const auto& [o, n] : cb.in) {
            if (o == a || o == b) continue;
            if (ca.in.count(o)) continue;
            after += brown_q(n, slots[o].nl, nrm);
        }
        long long self = get(ca.out, a) + get(ca.out, b) + get(cb.out, a) + get(cb.out, b);
        if (self > 0) after += brown_q(self, nlm, nrm);
        return before - after;
    }

    // Adds count to the (a → b) cell and the marginals.
    void add_edge(int a, int b, long long n) {
        slots[a].out[b] += n;
        slots[b].in[a] += n;
        slots[a].nl += n;
        slots[b].nr += n;
        total_mass += n;
    }

    // Folds slot b into slot a (a < b) and retires b.
    void merge_into(int a, int b) {
        BrownCluster& ca = slots[a];
        BrownCluster& cb = slots[b];
        auto take = [](std::unordered_map<int, long long>& m, int k) {
            auto it = m.find(k);
            if (it == m.end()) return 0ll;
            long long n = it->second;
            m.erase(it);
            return n;
        };
        // edges that become the merged self cell
        long long self = take(ca.out, b) + take(cb.out, a) + take(cb.out, b);
        take(ca.in, b);
        take(cb.in, a);
        take(cb.in, b);
        if (self > 0) {
            ca.out[a] += self;
            ca.in[a] += self;
        }
        for (const auto& [d, n] : cb.out) {
            ca.out[d] += n;
            slots[d].in.erase(b);
            slots[d].in[a] += n;
        }
        for (const auto& [o, n] : cb.in) {
            ca.in[o] += n;
            slots[o].out.erase(b);
            slots[o].out[a] += n;
        }
        ca.nl += cb.nl;
        ca.nr += cb.nr;
        for (int term : cb.terms) slot_of_term[term] = a;
        ca.terms.insert(ca.terms.end(), cb.terms.begin(), cb.terms.end());
        cb = BrownCluster{};
        alive.erase(std::find(alive.begin(), alive.end(), b));
    }

    // Greedy best merge over alive slots; ties resolved toward the earliest
    // created pair. The pair evaluation parallelizes across rows; the argmin
    // is (loss, i, j)-lexicographic, so the result does not depend on thread
    // scheduling.
    std::pair<int, int> best_pair() const {
        std::vector<double> s(alive.size());
        for (std::size_t i = 0; i < alive.size(); ++i) s[i] = involvement(alive[i]);

        struct Candidate {
            double loss = HUGE_VAL;
            int i = -1, j = -1;
            bool better_than(const Candidate& o) const {
                if (loss != o.loss) return loss < o.loss;
                if (i != o.i) return i < o.i;
                return j < o.j;
            }
        };
        auto scan_rows = [&](std::size_t begin, std::size_t stride) {
            Candidate local;
            for (std::size_t i = begin; i < alive.size(); i += stride)
                for (std::size_t j = i + 1; j < alive.size(); ++j) {
                    Candidate cand{merge_loss(alive[i], alive[j], s[i], s[j]), alive[i], alive[j]};
                    if (cand.better_than(local)) local = cand;
                }
            return local;
        };

        const std::size_t pairs = alive.size() * alive.size() / 2;
        unsigned workers = std::thread::hardware_concurrency();
        if (workers < 2 || pairs < 4096) {
            Candidate only = scan_rows(0, 1);
            return {only.i, only.j};
        }
        if (workers > 8) workers = 8;
        std::vector<Candidate> results(workers);
        std::vector<std::thread> pool;
        for (unsigned t = 1; t < workers; ++t)
            pool.emplace_back([&, t] { results[t] = scan_rows(t, workers); });
        results[0] = scan_rows(0, workers);
        for (auto& th : pool) th.join();
        Candidate best = results[0];
        for (unsigned t = 1; t < workers; ++t)
            if (results[t].better_than(best)) best = results[t];
        return {best.i, best.j};
    }
};

} // namespace detail

// Greedy windowed Brown clustering: the K most frequent terms start as
// singleton clusters; each remaining term (frequency order, ties by term id)
// is inserted as a new cluster and the pair of active clusters whose merge
// loses the least average mutual information is merged. A final merge pass
// over the surviving clusters produces the binary paths.
inline ClusterAssignment brown_cluster(const Corpus& corpus, int K,
                                       std::vector<BrownMergeEvent>* trace = nullptr) {
    if (K < 1) throw Error("brown_cluster: K must be >= 1");
    const int V = corpus.vocab.size();
    if (V == 0) throw Error("brown_cluster: empty corpus");

    // insertion order: frequency descending, term id ascending
    std::vector<int> order(V);
    for (int w = 0; w < V; ++w) order[w] = w;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (corpus.vocab.frequencies[a] != corpus.vocab.frequencies[b])
            return corpus.vocab.frequencies[a] > corpus.vocab.frequencies[b];
        return a < b;
    });

    // per-term bigram neighbours from within-sentence adjacent pairs
    std::vector<std::unordered_map<int, long long>> right_of(V);
    std::vector<std::unordered_map<int, long long>> left_of(V);
    for (const auto& sent : corpus.sentences)
        for (std::size_t i = 0; i + 1 < sent.tokens.size(); ++i)
            ++right_of[sent.tokens[i]][sent.tokens[i + 1]];
    for (int y = 0; y < V; ++y)
        for (const auto& [u, n] : right_of[y]) left_of[u][y] += n;

    detail::BrownState state;
    state.slots.resize(V);
    state.slot_of_term.assign(V, -1);
    std::vector<int>& slot_of_term = state.slot_of_term;

    struct TreeNode {
        int left = -1, right = -1;
    };
    std::vector<TreeNode> nodes;

    auto record = [&](int a, int b, double loss, bool assignment_phase) {
        if (!trace) return;
        BrownMergeEvent ev;
        ev.left_terms = state.slots[a].terms;
        ev.right_terms = state.slots[b].terms;
        std::sort(ev.left_terms.begin(), ev.left_terms.end());
        std::sort(ev.right_terms.begin(), ev.right_terms.end());
        ev.normalized_loss = state.total_mass > 0 ? loss / state.total_mass : 0.0;
        ev.assignment_phase = assignment_phase;
        trace->push_back(std::move(ev));
    };

    auto do_merge = [&](int a, int b, bool assignment_phase) {
        double s_a = state.involvement(a);
        double s_b = state.involvement(b);
        record(a, b, state.merge_loss(a, b, s_a, s_b), assignment_phase);
        nodes.push_back({state.slots[a].node, state.slots[b].node});
        state.merge_into(a, b);
        state.slots[a].node = static_cast<int>(nodes.size()) - 1;
    };

    int next_slot = 0;
    for (int rank = 0; rank < V; ++rank) {
        const int x = order[rank];
        const int slot = next_slot++;
        detail::BrownCluster& c = state.slots[slot];
        c.alive = true;
        c.terms = {x};
        nodes.push_back({});
        c.node = static_cast<int>(nodes.size()) - 1;
        state.alive.push_back(slot);
        slot_of_term[x] = slot;
        // connect bigrams whose other endpoint is already inserted
        for (const auto& [u, n] : right_of[x])
            if (slot_of_term[u] >= 0) state.add_edge(slot, slot_of_term[u], n);
        for (const auto& [y, n] : left_of[x])
            if (slot_of_term[y] >= 0 && y != x) state.add_edge(slot_of_term[y], slot, n);
        if (static_cast<int>(state.alive.size()) > K) {
            auto [a, b] = state.best_pair();
            do_merge(a, b, true);
        }
    }

    // assignment is fixed now
    ClusterAssignment result;
    result.num_clusters = static_cast<int>(state.alive.size());
    result.cluster_of.assign(V, -1);
    std::vector<int> leaf_node(result.num_clusters);
    for (int i = 0; i < result.num_clusters; ++i) {
        const int slot = state.alive[i];
        leaf_node[i] = state.slots[slot].node;
        for (int term : state.slots[slot].terms) result.cluster_of[term] = i;
    }

    // remaining merges only build the path hierarchy
    while (state.alive.size() > 1) {
        auto [a, b] = state.best_pair();
        do_merge(a, b, false);
    }

    result.paths.assign(result.num_clusters, "");
    if (result.num_clusters == 1) {
        result.paths[0] = "0";
    } else {
        std::unordered_map<int, int> leaf_index;
        for (int i = 0; i < result.num_clusters; ++i) leaf_index.emplace(leaf_node[i], i);
        // iterative DFS from the root, appending 0 for the earlier-created child
        std::vector<std::pair<int, std::string>> stack{{state.slots[state.alive[0]].node, ""}};
        while (!stack.empty()) {
            auto [node, path] = std::move(stack.back());
            stack.pop_back();
            auto it = leaf_index.find(node);
            if (it != leaf_index.end()) {
                result.paths[it->second] = path.empty() ? "0" : path;
                continue;
            }
            stack.emplace_back(nodes[node].left, path + "0");
            stack.emplace_back(nodes[node].right, path + "1");
        }
    }
    return result;
}

// Cluster file: merge-path<TAB>term<TAB>frequency, sorted by (path, term).
inline void save_clusters(const ClusterAssignment& clusters, const Vocabulary& vocab,
                          std::ostream& out) {
    std::vector<int> order;
    for (int w = 0; w < vocab.size(); ++w)
        if (clusters.cluster_of[w] >= 0) order.push_back(w);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const std::string& pa = clusters.paths[clusters.cluster_of[a]];
        const std::string& pb = clusters.paths[clusters.cluster_of[b]];
        if (pa != pb) return pa < pb;
        return vocab.terms[a] < vocab.terms[b];
    });
    for (int w : order)
        out << clusters.paths[clusters.cluster_of[w]] << "\t" << vocab.terms[w] << "\t"
            << vocab.frequencies[w] << "\n";
}

inline ClusterAssignment load_clusters(std::istream& in, const Vocabulary& vocab) {
    ClusterAssignment result;
    result.cluster_of.assign(vocab.size(), -1);
    std::map<std::string, int> by_path;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cols = split(line, '\t');
        if (cols.size() < 2)
            throw Error("cluster file line " + std::to_string(line_no) +
                        ": expected path<TAB>term[<TAB>freq]");
        auto [it, inserted] = by_path.emplace(cols[0], static_cast<int>(by_path.size()));
        if (inserted) result.paths.push_back(cols[0]);
        int id = vocab.id_of(cols[1]);
        if (id >= 0) result.cluster_of[id] = it->second;
    }
    result.num_clusters = static_cast<int>(result.paths.size());
    return result;
}

} // namespace seedabsa
