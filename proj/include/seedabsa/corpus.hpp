#pragma once

#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "seedabsa/common.hpp"
#include "seedabsa/config.hpp"
#include "seedabsa/text.hpp"

namespace seedabsa {

struct Vocabulary {
    std::vector<std::string> terms;       // id → term
    std::vector<long long> frequencies;   // id → corpus frequency
    std::unordered_map<std::string, int> index;

    int size() const { return static_cast<int>(terms.size()); }

    int id_of(const std::string& term) const {
        auto it = index.find(term);
        return it == index.end() ? -1 : it->second;
    }

    int add(const std::string& term) {
        auto it = index.find(term);
        if (it != index.end()) return it->second;
        int id = size();
        index.emplace(term, id);
        terms.push_back(term);
        frequencies.push_back(0);
        return id;
    }
};

// One model document. The topic model treats every sentence as a document.
struct Sentence {
    std::vector<int> tokens;
    std::string raw;
    std::string doc_id;
    std::string gold_aspect;   // empty when unlabelled
    std::string gold_polarity; // empty when unlabelled

    int length() const { return static_cast<int>(tokens.size()); }
};

struct Corpus {
    std::vector<Sentence> sentences;
    Vocabulary vocab;
    std::string language = "en";

    std::size_t num_documents() const { return sentences.size(); }
    long long num_tokens() const {
        long long n = 0;
        for (const auto& s : sentences) n += s.length();
        return n;
    }
};

struct RawDocument {
    std::string text;
    std::string doc_id;
    std::string gold_aspect;
    std::string gold_polarity;
    bool split = true; // labelled evaluation rows stay whole
};

struct RatedReview {
    std::string text;
    bool positive = false;
};

using StopwordSet = std::unordered_set<std::string>;

inline StopwordSet load_stopwords(std::istream& in) {
    StopwordSet out;
    std::string line;
    while (std::getline(in, line)) {
        std::string w = trim(line);
        if (auto hash = w.find('#'); hash != std::string::npos) w = trim(w.substr(0, hash));
        if (!w.empty()) out.insert(normalize_token(w));
    }
    return out;
}

inline StopwordSet load_stopwords_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open stopword file: " + path);
    return load_stopwords(in);
}

// Builds the corpus: sentence split, tokenize, stopword filter, min_count
// filter (protected terms exempt), drop empty sentences, dense vocabulary
// ids in first-occurrence order.
inline Corpus build_corpus(const std::vector<RawDocument>& docs, const StopwordSet& stopwords,
                           int min_count, const std::set<std::string>& protected_terms = {},
                           const std::string& language = "en") {
    if (docs.empty()) throw Error("empty corpus");

    struct PendingSentence {
        std::vector<std::string> tokens;
        std::string raw;
        const RawDocument* source;
    };
    std::vector<PendingSentence> pending;
    std::unordered_map<std::string, long long> counts;
    for (const auto& doc : docs) {
        std::vector<std::string> parts =
            doc.split ? split_sentences(doc.text) : std::vector<std::string>{doc.text};
        for (auto& part : parts) {
            PendingSentence ps;
            ps.raw = part;
            ps.source = &doc;
            for (auto& tok : tokenize(part)) {
                if (stopwords.count(tok)) continue;
                ++counts[tok];
                ps.tokens.push_back(std::move(tok));
            }
            if (!ps.tokens.empty()) pending.push_back(std::move(ps));
        }
    }

    Corpus corpus;
    corpus.language = language;
    for (auto& ps : pending) {
        Sentence sent;
        sent.raw = std::move(ps.raw);
        sent.doc_id = ps.source->doc_id;
        sent.gold_aspect = ps.source->gold_aspect;
        sent.gold_polarity = ps.source->gold_polarity;
        for (auto& tok : ps.tokens) {
            long long freq = counts[tok];
            if (freq < min_count && !protected_terms.count(tok)) continue;
            int id = corpus.vocab.add(tok);
            corpus.vocab.frequencies[id] += 1;
            sent.tokens.push_back(id);
        }
        if (!sent.tokens.empty()) corpus.sentences.push_back(std::move(sent));
    }
    if (corpus.sentences.empty()) throw Error("empty corpus");
    return corpus;
}

// ---- input loaders ----

inline std::vector<RawDocument> load_plain_lines(std::istream& in) {
    std::vector<RawDocument> docs;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        std::string text = trim(line);
        if (text.empty()) continue;
        RawDocument doc;
        doc.text = std::move(text);
        doc.doc_id = "r" + std::to_string(n);
        docs.push_back(std::move(doc));
    }
    return docs;
}

// text<TAB>aspect<TAB>polarity; one evaluation sentence per row, not split.
inline std::vector<RawDocument> load_labeled_tsv(std::istream& in) {
    std::vector<RawDocument> docs;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (trim(line).empty()) continue;
        auto cols = split(trim(line), '\t');
        if (cols.size() < 3)
            throw Error("labelled TSV line " + std::to_string(n) +
                        ": expected text<TAB>aspect<TAB>polarity");
        RawDocument doc;
        doc.text = trim(cols[0]);
        doc.gold_aspect = trim(cols[1]);
        doc.gold_polarity = trim(cols[2]);
        doc.doc_id = "e" + std::to_string(n);
        doc.split = false;
        if (doc.gold_aspect == "-") doc.gold_aspect.clear();
        if (doc.gold_polarity == "-") doc.gold_polarity.clear();
        docs.push_back(std::move(doc));
    }
    return docs;
}

// text<TAB>rating where rating is pos/neg or a 1..5 star value
// (1-2 negative, 4-5 positive, 3 dropped).
inline std::vector<RatedReview> load_rated_tsv(std::istream& in) {
    std::vector<RatedReview> reviews;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (trim(line).empty()) continue;
        auto cols = split(trim(line), '\t');
        if (cols.size() < 2)
            throw Error("rated TSV line " + std::to_string(n) + ": expected text<TAB>rating");
        std::string tag = trim(cols[1]);
        RatedReview r;
        r.text = trim(cols[0]);
        if (tag == "pos" || tag == "positive" || tag == "4" || tag == "5") r.positive = true;
        else if (tag == "neg" || tag == "negative" || tag == "1" || tag == "2") r.positive = false;
        else if (tag == "3") continue;
        else throw Error("rated TSV line " + std::to_string(n) + ": unknown rating '" + tag + "'");
        reviews.push_back(std::move(r));
    }
    return reviews;
}

namespace detail {

inline std::string xml_unescape(std::string s) {
    static const std::pair<const char*, const char*> ents[] = {
        {"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""}, {"&apos;", "'"}, {"&amp;", "&"}};
    for (const auto& [ent, ch] : ents) {
        std::size_t pos = 0;
        while ((pos = s.find(ent, pos)) != std::string::npos) {
            s.replace(pos, std::strlen(ent), ch);
            pos += std::strlen(ch);
        }
    }
    return s;
}

inline std::optional<std::string> xml_attr(const std::string& tag, const std::string& name) {
    std::size_t pos = 0;
    while ((pos = tag.find(name, pos)) != std::string::npos) {
        std::size_t eq = pos + name.size();
        while (eq < tag.size() && (tag[eq] == ' ' || tag[eq] == '\t')) ++eq;
        if (eq >= tag.size() || tag[eq] != '=') { pos += name.size(); continue; }
        ++eq;
        while (eq < tag.size() && (tag[eq] == ' ' || tag[eq] == '\t')) ++eq;
        if (eq >= tag.size() || (tag[eq] != '"' && tag[eq] != '\'')) { pos += name.size(); continue; }
        char quote = tag[eq];
        std::size_t end = tag.find(quote, eq + 1);
        if (end == std::string::npos) return std::nullopt;
        return xml_unescape(tag.substr(eq + 1, end - eq - 1));
    }
    return std::nullopt;
}

} // namespace detail

// Reduces a SemEval-style ABSA XML file to (sentence, category, polarity)
// rows. Categories of the form ENTITY#ATTRIBUTE are reduced to the entity,
// lowercased. Only sentences with a single category label are kept; the
// polarity is kept when all opinions agree on positive or negative.
inline std::vector<RawDocument> load_semeval_xml(std::istream& in) {
    std::string xml((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<RawDocument> docs;
    std::size_t pos = 0;
    int auto_id = 0;
    while (true) {
        std::size_t open = xml.find("<sentence", pos);
        if (open == std::string::npos) break;
        // skip the <sentences> wrapper tag
        const char after = open + 9 < xml.size() ? xml[open + 9] : '\0';
        if (after != ' ' && after != '\t' && after != '\n' && after != '\r' && after != '>') {
            pos = open + 9;
            continue;
        }
        std::size_t open_end = xml.find('>', open);
        if (open_end == std::string::npos) break;
        std::size_t close = xml.find("</sentence>", open_end);
        if (close == std::string::npos) break;
        std::string head = xml.substr(open, open_end - open);
        std::string body = xml.substr(open_end + 1, close - open_end - 1);
        pos = close + 11;
        ++auto_id;

        std::size_t t0 = body.find("<text>");
        std::size_t t1 = body.find("</text>");
        if (t0 == std::string::npos || t1 == std::string::npos || t1 < t0) continue;
        std::string text = trim(detail::xml_unescape(body.substr(t0 + 6, t1 - t0 - 6)));
        if (text.empty()) continue;

        std::set<std::string> categories;
        std::set<std::string> polarities;
        std::size_t op = 0;
        while ((op = body.find("<Opinion", op)) != std::string::npos) {
            std::size_t op_end = body.find('>', op);
            if (op_end == std::string::npos) break;
            std::string tag = body.substr(op, op_end - op);
            op = op_end + 1;
            if (auto cat = detail::xml_attr(tag, "category")) {
                std::string coarse = *cat;
                if (auto hash = coarse.find('#'); hash != std::string::npos)
                    coarse = coarse.substr(0, hash);
                categories.insert(normalize_token(coarse));
            }
            if (auto pol = detail::xml_attr(tag, "polarity")) polarities.insert(normalize_token(*pol));
        }
        if (categories.size() != 1) continue;

        RawDocument doc;
        doc.text = std::move(text);
        doc.gold_aspect = *categories.begin();
        if (polarities.size() == 1 &&
            (*polarities.begin() == "positive" || *polarities.begin() == "negative"))
            doc.gold_polarity = *polarities.begin();
        doc.doc_id = detail::xml_attr(head, "id").value_or("x" + std::to_string(auto_id));
        doc.split = false;
        docs.push_back(std::move(doc));
    }
    return docs;
}

// Oversamples the minority class (whole reviews, uniformly at random) until
// the class counts are equal.
inline std::vector<RatedReview> balance_by_rating(const std::vector<RatedReview>& reviews,
                                                  Rng& rng) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < reviews.size(); ++i)
        (reviews[i].positive ? pos : neg).push_back(i);
    if (pos.empty()) throw Error("balance_by_rating: no positive reviews");
    if (neg.empty()) throw Error("balance_by_rating: no negative reviews");
    std::vector<RatedReview> out = reviews;
    const auto& minority = pos.size() < neg.size() ? pos : neg;
    std::size_t deficit = pos.size() < neg.size() ? neg.size() - pos.size() : pos.size() - neg.size();
    for (std::size_t k = 0; k < deficit; ++k)
        out.push_back(reviews[minority[rng.below(minority.size())]]);
    return out;
}

// ---- corpus cache file ----

namespace detail {

inline std::string escape_field(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '\\') out += "\\\\";
        else if (c == '\t') out += "\\t";
        else if (c == '\n') out += "\\n";
        else if (c == '\r') out += "\\r";
        else out += c;
    }
    return out;
}

inline std::string unescape_field(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\' || i + 1 == s.size()) { out += s[i]; continue; }
        ++i;
        switch (s[i]) {
            case 't': out += '\t'; break;
            case 'n': out += '\n'; break;
            case 'r': out += '\r'; break;
            default: out += s[i];
        }
    }
    return out;
}

} // namespace detail

inline void save_corpus(const Corpus& corpus, std::ostream& out) {
    out << "seedabsa-corpus v1\n";
    out << "language " << corpus.language << "\n";
    out << "V " << corpus.vocab.size() << "\n";
    for (int w = 0; w < corpus.vocab.size(); ++w)
        out << corpus.vocab.terms[w] << "\t" << corpus.vocab.frequencies[w] << "\n";
    out << "D " << corpus.sentences.size() << "\n";
    for (const auto& s : corpus.sentences) {
        out << detail::escape_field(s.doc_id) << "\t"
            << detail::escape_field(s.gold_aspect.empty() ? "-" : s.gold_aspect) << "\t"
            << detail::escape_field(s.gold_polarity.empty() ? "-" : s.gold_polarity) << "\t";
        for (std::size_t i = 0; i < s.tokens.size(); ++i)
            out << (i ? " " : "") << s.tokens[i];
        out << "\t" << detail::escape_field(s.raw) << "\n";
    }
}

inline Corpus load_corpus(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "seedabsa-corpus v1")
        throw Error("corpus cache: bad header");
    Corpus corpus;
    if (!std::getline(in, line) || !starts_with(line, "language "))
        throw Error("corpus cache: missing language");
    corpus.language = trim(line.substr(9));
    if (!std::getline(in, line) || !starts_with(line, "V ")) throw Error("corpus cache: missing V");
    int v_count = std::stoi(line.substr(2));
    for (int w = 0; w < v_count; ++w) {
        if (!std::getline(in, line)) throw Error("corpus cache: truncated vocabulary");
        auto cols = split(line, '\t');
        if (cols.size() != 2) throw Error("corpus cache: bad vocabulary line");
        int id = corpus.vocab.add(cols[0]);
        corpus.vocab.frequencies[id] = std::stoll(cols[1]);
    }
    if (!std::getline(in, line) || !starts_with(line, "D ")) throw Error("corpus cache: missing D");
    std::size_t d_count = std::stoull(line.substr(2));
    for (std::size_t d = 0; d < d_count; ++d) {
        if (!std::getline(in, line)) throw Error("corpus cache: truncated sentences");
        auto cols = split(line, '\t');
        if (cols.size() != 5) throw Error("corpus cache: bad sentence line");
        Sentence s;
        s.doc_id = detail::unescape_field(cols[0]);
        s.gold_aspect = detail::unescape_field(cols[1]);
        s.gold_polarity = detail::unescape_field(cols[2]);
        if (s.gold_aspect == "-") s.gold_aspect.clear();
        if (s.gold_polarity == "-") s.gold_polarity.clear();
        std::istringstream toks(cols[3]);
        int id;
        while (toks >> id) {
            if (id < 0 || id >= corpus.vocab.size()) throw Error("corpus cache: token id out of range");
            s.tokens.push_back(id);
        }
        if (s.tokens.empty()) throw Error("corpus cache: empty sentence");
        s.raw = detail::unescape_field(cols[4]);
        corpus.sentences.push_back(std::move(s));
    }
    return corpus;
}

// ---- seed/vocabulary reconciliation ----

struct SeedVocabularyReport {
    std::vector<std::string> missing;      // human-readable warnings
    std::optional<std::string> fatal;      // set when the run cannot proceed

    bool ok() const { return !fatal.has_value(); }
    bool clean() const { return missing.empty() && ok(); }
};

// Reports seeds missing from the vocabulary. The run can proceed unless an
// entire aspect seed set or an entire polarity set is out of vocabulary.
inline SeedVocabularyReport validate_against_vocabulary(const SeedConfiguration& cfg,
                                                        const Vocabulary& vocab) {
    SeedVocabularyReport report;
    auto check_set = [&](const std::string& label, const std::set<std::string>& seeds) {
        int present = 0;
        for (const auto& s : seeds) {
            if (vocab.id_of(s) >= 0) ++present;
            else report.missing.push_back(label + ": seed '" + s + "' not in vocabulary");
        }
        return present;
    };
    for (const auto& a : cfg.aspects)
        if (check_set("aspect '" + a.name + "'", a.seeds) == 0 && !report.fatal)
            report.fatal = "all seeds of aspect '" + a.name + "' are out of vocabulary";
    if (check_set("positive", cfg.positive_seeds) == 0 && !report.fatal)
        report.fatal = "all positive seeds are out of vocabulary";
    if (check_set("negative", cfg.negative_seeds) == 0 && !report.fatal)
        report.fatal = "all negative seeds are out of vocabulary";
    return report;
}

} // namespace seedabsa
