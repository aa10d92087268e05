#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "seedabsa/brown.hpp"
#include "seedabsa/common.hpp"
#include "seedabsa/config.hpp"
#include "seedabsa/corpus.hpp"
#include "seedabsa/embedding.hpp"
#include "seedabsa/eval.hpp"
#include "seedabsa/separation.hpp"
#include "seedabsa/tmodel.hpp"

// Subcommand pipeline with cached artifacts under an output directory and a
// manifest for staleness checks and reproducibility.

namespace seedabsa {

struct PipelineOptions {
    std::string config_path;
    std::string corpus_path;
    std::string out_dir = ".";
    std::string corpus_format = "lines"; // lines | tsv | semeval | rated
    std::string input_path;              // classify / eval gold input
    std::string pred_path;               // eval predictions
    std::string output_path;             // classify/top-words output override
    std::string stopwords_path;
    std::string embeddings_path;         // pretrained vectors instead of training
    std::string lexicon_path;            // separation eval
    std::string aspect_terms_path;       // separation eval
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> mode_override;
    int top_k = 10;
    bool balance = false;
    int balanced_per_class = 0; // when > 0, evaluate on balanced subsets
    int balanced_num_subsets = 5;
    bool quiet = false;
};

namespace pipeline_detail {

namespace fs = std::filesystem;
using nlohmann::json;

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out << content;
}

inline std::string file_hash(const std::string& path) { return hash_hex(fnv1a(read_file(path))); }

inline std::string artifact_path(const PipelineOptions& opts, const char* name) {
    return (fs::path(opts.out_dir) / name).string();
}

inline json params_json(const RunParameters& p) {
    json j;
    j["alpha_base"] = p.alpha_base;
    j["beta_base"] = p.beta_base;
    j["delta_base"] = p.delta_base;
    j["iterations"] = p.iterations;
    j["burn_in"] = p.burn_in;
    j["lag"] = p.lag;
    j["num_brown_clusters"] = p.num_brown_clusters;
    j["embedding_dims"] = p.embedding_dims;
    j["embedding_window"] = p.embedding_window;
    j["embedding_epochs"] = p.embedding_epochs;
    j["embedding_negative_samples"] = p.embedding_negative_samples;
    j["embedding_learning_rate"] = p.embedding_learning_rate;
    j["embedding_threads"] = p.embedding_threads;
    j["min_count"] = p.min_count;
    j["similarity_floor"] = p.similarity_floor;
    j["maxent_l2"] = p.maxent_l2;
    j["maxent_max_iterations"] = p.maxent_max_iterations;
    j["maxent_tolerance"] = p.maxent_tolerance;
    j["fold_iterations"] = p.fold_iterations;
    j["fold_burn_in"] = p.fold_burn_in;
    j["fold_lag"] = p.fold_lag;
    j["rng_seed"] = p.rng_seed;
    return j;
}

struct Manifest {
    json data;

    static std::string path_for(const PipelineOptions& opts) {
        return artifact_path(opts, "manifest.json");
    }
    static Manifest load(const PipelineOptions& opts) {
        Manifest m;
        const std::string path = path_for(opts);
        if (!fs::exists(path)) throw Error("missing manifest.json in " + opts.out_dir + "; run prepare first");
        m.data = json::parse(read_file(path));
        return m;
    }
    void save(const PipelineOptions& opts) const {
        write_file(path_for(opts), data.dump(2) + "\n");
    }

    void record_artifact(const std::string& name, const std::string& path) {
        data["artifacts"][name] = {{"path", fs::path(path).filename().string()},
                                   {"hash", file_hash(path)}};
    }

    std::string require_artifact(const PipelineOptions& opts, const std::string& name,
                                 const std::string& producer) const {
        if (!data.contains("artifacts") || !data["artifacts"].contains(name))
            throw Error("missing " + name + " artifact; run " + producer + " first");
        const auto& entry = data["artifacts"][name];
        std::string path = (fs::path(opts.out_dir) / entry["path"].get<std::string>()).string();
        if (!fs::exists(path))
            throw Error("missing " + name + " artifact file " + path + "; run " + producer + " first");
        if (file_hash(path) != entry["hash"].get<std::string>())
            throw Error("stale " + name + " artifact (hash mismatch); re-run " + producer);
        return path;
    }

    void check_config(const std::string& hash) const {
        if (data["config_hash"].get<std::string>() != hash)
            throw Error("config changed since prepare (hash mismatch); re-run prepare");
    }

    void record_timing(const std::string& step, long long ms) { data["timings_ms"][step] = ms; }
};

class StepTimer {
public:
    explicit StepTimer(std::string step) : step_(std::move(step)), start_(clock::now()) {}
    long long elapsed_ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - start_).count();
    }
    const std::string& step() const { return step_; }

private:
    using clock = std::chrono::steady_clock;
    std::string step_;
    clock::time_point start_;
};

// The staleness hash covers the configuration file as written; a --seed
// override changes only the effective rng seed of the run.
struct LoadedConfig {
    ParsedConfig config;
    std::string hash;
};

inline LoadedConfig load_config(const PipelineOptions& opts) {
    if (opts.config_path.empty()) throw Error("--config is required");
    LoadedConfig loaded;
    loaded.config = parse_config(read_file(opts.config_path));
    loaded.hash = config_hash(loaded.config);
    if (opts.seed_override) loaded.config.params.rng_seed = *opts.seed_override;
    return loaded;
}

inline SamplerMode resolve_mode(const PipelineOptions& opts, const std::string& fallback) {
    return parse_mode(opts.mode_override.value_or(fallback));
}

inline StopwordSet resolve_stopwords(const PipelineOptions& opts, const std::string& language) {
    if (!opts.stopwords_path.empty()) return load_stopwords_file(opts.stopwords_path);
    const fs::path bundled = fs::path("data") / "stopwords" / (language + ".txt");
    if (fs::exists(bundled)) return load_stopwords_file(bundled.string());
    if (!opts.quiet)
        std::cerr << "warning: no stopword list found for language '" << language
                  << "' (looked for " << bundled.string() << "); proceeding without stopwords\n";
    return {};
}

inline Corpus load_cached_corpus(const PipelineOptions& opts, const Manifest& manifest) {
    std::string path = manifest.require_artifact(opts, "corpus", "prepare");
    std::ifstream in(path, std::ios::binary);
    return load_corpus(in);
}

inline std::vector<RawDocument> load_input_documents(const std::string& path,
                                                     const std::string& format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open input: " + path);
    if (format == "lines") return load_plain_lines(in);
    if (format == "tsv") return load_labeled_tsv(in);
    if (format == "semeval") return load_semeval_xml(in);
    throw Error("unknown corpus format '" + format + "' (want lines, tsv, semeval or rated)");
}

} // namespace pipeline_detail

// ---- prepare ----

inline void run_prepare(const PipelineOptions& opts) {
    namespace pd = pipeline_detail;
    pd::StepTimer timer("prepare");
    auto [cfg, cfg_hash] = pd::load_config(opts);
    if (opts.corpus_path.empty()) throw Error("--corpus is required for prepare");
    std::filesystem::create_directories(opts.out_dir);

    std::vector<RawDocument> docs;
    if (opts.corpus_format == "rated") {
        std::ifstream in(opts.corpus_path, std::ios::binary);
        if (!in) throw Error("cannot open input: " + opts.corpus_path);
        std::vector<RatedReview> rated = load_rated_tsv(in);
        if (opts.balance) {
            Rng rng(cfg.params.rng_seed);
            rated = balance_by_rating(rated, rng);
        }
        for (std::size_t i = 0; i < rated.size(); ++i) {
            RawDocument doc;
            doc.text = rated[i].text;
            doc.doc_id = "r" + std::to_string(i + 1);
            docs.push_back(std::move(doc));
        }
    } else {
        if (opts.balance) throw Error("--balance requires --format rated");
        docs = pd::load_input_documents(opts.corpus_path, opts.corpus_format);
    }

    StopwordSet stopwords = pd::resolve_stopwords(opts, cfg.seeds.language_tag);
    Corpus corpus = build_corpus(docs, stopwords, cfg.params.min_count, all_seed_words(cfg.seeds),
                                 cfg.seeds.language_tag);

    SeedVocabularyReport report = validate_against_vocabulary(cfg.seeds, corpus.vocab);
    for (const auto& warning : report.missing)
        if (!opts.quiet) std::cerr << "warning: " << warning << "\n";
    if (!report.ok()) throw Error(*report.fatal);

    const std::string cache_path = pd::artifact_path(opts, "corpus.cache");
    {
        std::ostringstream out;
        save_corpus(corpus, out);
        pd::write_file(cache_path, out.str());
    }

    pd::Manifest manifest;
    manifest.data["version"] = 1;
    manifest.data["config_hash"] = cfg_hash;
    manifest.data["language"] = cfg.seeds.language_tag;
    manifest.data["rng_seed"] = cfg.params.rng_seed;
    manifest.data["params"] = pd::params_json(cfg.params);
    manifest.data["inputs"]["corpus"] = {{"path", opts.corpus_path},
                                         {"hash", pd::file_hash(opts.corpus_path)},
                                         {"format", opts.corpus_format}};
    manifest.data["corpus_stats"] = {{"documents", corpus.sentences.size()},
                                     {"vocabulary", corpus.vocab.size()},
                                     {"tokens", corpus.num_tokens()}};
    manifest.record_artifact("corpus", cache_path);
    manifest.record_timing(timer.step(), timer.elapsed_ms());
    manifest.save(opts);
    if (!opts.quiet)
        std::cout << "prepared corpus: " << corpus.sentences.size() << " sentences, V = "
                  << corpus.vocab.size() << "\n";
}

// ---- embed ----

inline void run_embed(const PipelineOptions& opts) {
    namespace pd = pipeline_detail;
    pd::StepTimer timer("embed");
    auto [cfg, cfg_hash] = pd::load_config(opts);
    pd::Manifest manifest = pd::Manifest::load(opts);
    manifest.check_config(cfg_hash);
    Corpus corpus = pd::load_cached_corpus(opts, manifest);

    EmbeddingTable table = opts.embeddings_path.empty()
                               ? train_skipgram(corpus, cfg.params)
                               : [&] {
                                     std::ifstream in(opts.embeddings_path, std::ios::binary);
                                     if (!in) throw Error("cannot open embeddings: " + opts.embeddings_path);
                                     return load_embeddings(in, corpus.vocab);
                                 }();

    const std::string path = pd::artifact_path(opts, "embeddings.txt");
    {
        std::ostringstream out;
        save_embeddings(table, corpus.vocab, out);
        pd::write_file(path, out.str());
    }
    manifest.record_artifact("embeddings", path);
    manifest.data["embedding_stats"] = {{"dims", table.dims()}, {"covered", table.coverage()}};
    manifest.record_timing(timer.step(), timer.elapsed_ms());
    manifest.save(opts);
    if (!opts.quiet)
        std::cout << "embeddings: " << table.coverage() << " vectors of dimension " << table.dims()
                  << "\n";
}

// ---- cluster ----

inline void run_cluster(const PipelineOptions& opts) {
    namespace pd = pipeline_detail;
    pd::StepTimer timer("cluster");
    auto [cfg, cfg_hash] = pd::load_config(opts);
    pd::Manifest manifest = pd::Manifest::load(opts);
    manifest.check_config(cfg_hash);
    Corpus corpus = pd::load_cached_corpus(opts, manifest);

    ClusterAssignment clusters = brown_cluster(corpus, cfg.params.num_brown_clusters);
    const std::string path = pd::artifact_path(opts, "clusters.txt");
    {
        std::ostringstream out;
        save_clusters(clusters, corpus.vocab, out);
        pd::write_file(path, out.str());
    }
    manifest.record_artifact("clusters", path);
    manifest.data["cluster_stats"] = {{"clusters", clusters.num_clusters}};
    manifest.record_timing(timer.step(), timer.elapsed_ms());
    manifest.save(opts);
    if (!opts.quiet) std::cout << "brown clusters: " << clusters.num_clusters << "\n";
}

// ---- separate ----

inline void run_separate(const PipelineOptions& opts) {
    namespace pd = pipeline_detail;
    pd::StepTimer timer("separate");
    auto [cfg, cfg_hash] = pd::load_config(opts);
    pd::Manifest manifest = pd::Manifest::load(opts);
    manifest.check_config(cfg_hash);
    Corpus corpus = pd::load_cached_corpus(opts, manifest);
    ClusterAssignment clusters = [&] {
        std::ifstream in(manifest.require_artifact(opts, "clusters", "cluster"), std::ios::binary);
        return load_clusters(in, corpus.vocab);
    }();

    BootstrapResult bootstrap = bootstrap_instances(corpus, cfg.seeds, clusters);
    SeparationModel model = train_maxent(bootstrap, cfg.params.maxent_l2, cfg.params.maxent_tolerance,
                                         cfg.params.maxent_max_iterations);

    const std::string path = pd::artifact_path(opts, "separation.model");
    {
        std::ostringstream out;
        save_separation_model(model, out);
        pd::write_file(path, out.str());
    }
    manifest.record_artifact("separation", path);
    manifest.data["separation_stats"] = {{"instances_aspect", bootstrap.count_aspect},
                                         {"instances_opinion", bootstrap.count_opinion},
                                         {"features", model.features.size()}};
    manifest.record_timing(timer.step(), timer.elapsed_ms());
    manifest.save(opts);
    if (!opts.quiet)
        std::cout << "separation model: " << bootstrap.count_aspect << " A / "
                  << bootstrap.count_opinion << " O instances, " << model.features.size()
                  << " features\n";
}

// ---- train ----

namespace pipeline_detail {

inline std::string topwords_tsv(const ModelDump& dump, int k) {
    std::ostringstream out;
    PosteriorSummary view;
    view.num_topics = dump.num_topics;
    view.vocab_size = dump.vocab_size;
    view.phi_a = dump.phi_a;
    view.phi_p = dump.phi_p;
    view.phi_n = dump.phi_n;
    const char* class_names = "APN";
    for (int t = 0; t < dump.num_topics; ++t) {
        for (int cls = 0; cls < 3; ++cls) {
            auto ranked = top_words(view, t, cls, k);
            for (std::size_t r = 0; r < ranked.size(); ++r)
                out << dump.aspect_names[t] << "\t" << class_names[cls] << "\t" << (r + 1) << "\t"
                    << dump.terms[ranked[r].first] << "\t" << format_double(ranked[r].second)
                    << "\n";
        }
    }
    return out.str();
}

inline std::string assignments_tsv(const Corpus& corpus, const SamplerState& state) {
    std::ostringstream out;
    for (std::size_t d = 0; d < corpus.sentences.size(); ++d)
        for (std::size_t n = 0; n < corpus.sentences[d].tokens.size(); ++n) {
            out << d << "\t" << corpus.sentences[d].doc_id << "\t" << n << "\t"
                << corpus.vocab.terms[corpus.sentences[d].tokens[n]] << "\t" << state.z[d][n] << "\t"
                << (state.y[d][n] == 0 ? "A" : "O") << "\t";
            if (state.y[d][n] == 0) out << "-";
            else out << (state.v[d][n] == 0 ? "P" : "N");
            out << "\n";
        }
    return out.str();
}

} // namespace pipeline_detail

inline void run_train(const PipelineOptions& opts) {
    namespace pd = pipeline_detail;
    pd::StepTimer timer("train");
    auto [cfg, cfg_hash] = pd::load_config(opts);
    pd::Manifest manifest = pd::Manifest::load(opts);
    manifest.check_config(cfg_hash);
    Corpus corpus = pd::load_cached_corpus(opts, manifest);

    EmbeddingTable table = [&] {
        std::ifstream in(manifest.require_artifact(opts, "embeddings", "embed"), std::ios::binary);
        return load_embeddings(in, corpus.vocab);
    }();
    ClusterAssignment clusters = [&] {
        std::ifstream in(manifest.require_artifact(opts, "clusters", "cluster"), std::ios::binary);
        return load_clusters(in, corpus.vocab);
    }();
    SeparationModel sep = [&] {
        std::ifstream in(manifest.require_artifact(opts, "separation", "separate"), std::ios::binary);
        return load_separation_model(in);
    }();

    const SamplerMode mode = pd::resolve_mode(opts, "as-written");
    SimilarityCache cache =
        build_similarity_cache(table, corpus.vocab, cfg.seeds, cfg.params.similarity_floor);
    PriorSet priors = compute_priors(corpus, cfg.seeds.num_topics(), cache, cfg.params);
    std::vector<std::vector<double>> pi = compute_pi(corpus, clusters, sep);
    GibbsResult result = run_gibbs(corpus, priors, pi, cfg.params, mode);

    ModelDump dump =
        build_model_dump(corpus, cfg.seeds, cache, result, cfg.params, mode, cfg_hash);
    const std::string model_path = pd::artifact_path(opts, "model.dump");
    {
        std::ostringstream out;
        save_model_dump(dump, out);
        pd::write_file(model_path, out.str());
    }
    const std::string top_path = pd::artifact_path(opts, "topwords.tsv");
    pd::write_file(top_path, pd::topwords_tsv(dump, opts.top_k));
    const std::string assign_path = pd::artifact_path(opts, "assignments.tsv");
    pd::write_file(assign_path, pd::assignments_tsv(corpus, result.final_state));

    manifest.record_artifact("model", model_path);
    manifest.record_artifact("topwords", top_path);
    manifest.record_artifact("assignments", assign_path);
    manifest.data["mode"] = mode_name(mode);
    manifest.data["rng_seed"] = cfg.params.rng_seed;
    manifest.data["train_stats"] = {{"samples", result.summary.samples}};
    manifest.record_timing(timer.step(), timer.elapsed_ms());
    manifest.save(opts);
    if (!opts.quiet)
        std::cout << "trained model: " << result.summary.samples << " posterior samples ("
                  << mode_name(mode) << " mode)\n";
}

// ---- classify ----

struct ClassifiedSentence {
    std::string doc_id;
    std::string raw;
    std::string aspect = "-";
    std::string polarity = "-";
    bool aspect_tie = false;
    bool polarity_tie = false;
    bool unclassifiable = false;
    std::vector<double> theta;
    std::array<double, 2> omega{};
};

// Fold-in classification of arbitrary sentences against a trained dump.
inline std::vector<ClassifiedSentence> classify_sentences(
    const ModelDump& dump, const ClusterAssignment& clusters, const SeparationModel& sep,
    const std::vector<RawDocument>& docs, const RunParameters& params) {
    // one-sentence corpus view reused for π feature extraction; term ids
    // align with the dump
    Corpus view;
    view.vocab.terms = dump.terms;
    view.vocab.frequencies.assign(dump.terms.size(), 0);
    view.sentences.resize(1);

    std::vector<ClassifiedSentence> results;
    Rng rng(params.rng_seed ^ 0x5eedab5au);
    for (const auto& doc : docs) {
        ClassifiedSentence out;
        out.doc_id = doc.doc_id;
        out.raw = doc.text;
        std::vector<int> ids;
        for (const auto& tok : tokenize(doc.text)) {
            int id = dump.id_of(tok);
            if (id >= 0) ids.push_back(id);
        }
        view.sentences[0].tokens = ids;
        std::vector<double> pi(ids.size());
        for (std::size_t n = 0; n < ids.size(); ++n)
            pi[n] = predict_pi_aspect(view, clusters, sep, 0, static_cast<int>(n));

        auto folded = fold_in(dump, ids, pi, params, rng);
        if (!folded) {
            out.unclassifiable = true;
            results.push_back(std::move(out));
            continue;
        }
        out.theta = folded->theta;
        out.omega = folded->omega;
        ArgmaxResult a = classify_argmax(out.theta.data(), dump.num_topics);
        out.aspect = dump.aspect_names[a.index];
        out.aspect_tie = a.tie;
        ArgmaxResult p = classify_argmax(out.omega.data(), 2);
        out.polarity = p.index == 0 ? "positive" : "negative";
        out.polarity_tie = p.tie;
        results.push_back(std::move(out));
    }
    return results;
}

inline std::string classification_tsv(const std::vector<ClassifiedSentence>& rows, int num_topics) {
    std::ostringstream out;
    for (const auto& row : rows) {
        out << row.doc_id << "\t" << row.aspect << "\t" << row.polarity;
        for (int t = 0; t < num_topics; ++t)
            out << "\t" << (row.unclassifiable ? "-" : format_double(row.theta[t]));
        for (int q = 0; q < 2; ++q)
            out << "\t" << (row.unclassifiable ? "-" : format_double(row.omega[q]));
        std::string flags;
        if (row.unclassifiable) flags = "unclassifiable";
        if (row.aspect_tie) flags += flags.empty() ? "aspect_tie" : "|aspect_tie";
        if (row.polarity_tie) flags += flags.empty() ? "polarity_tie" : "|polarity_tie";
        out << "\t" << (flags.empty() ? "-" : flags) << "\n";
    }
    return out.str();
}

inline std::string run_classify(const PipelineOptions& opts) {
    namespace pd = pipeline_detail;
    pd::StepTimer timer("classify");
    pd::Manifest manifest = pd::Manifest::load(opts);
    if (opts.input_path.empty()) throw Error("--input is required for classify");

    ModelDump dump = [&] {
        std::ifstream in(manifest.require_artifact(opts, "model", "train"), std::ios::binary);
        return load_model_dump(in);
    }();
    Vocabulary dump_vocab;
    for (const auto& t : dump.terms) dump_vocab.add(t);
    ClusterAssignment clusters = [&] {
        std::ifstream in(manifest.require_artifact(opts, "clusters", "cluster"), std::ios::binary);
        return load_clusters(in, dump_vocab);
    }();
    SeparationModel sep = [&] {
        std::ifstream in(manifest.require_artifact(opts, "separation", "separate"), std::ios::binary);
        return load_separation_model(in);
    }();

    RunParameters params;
    const auto& pj = manifest.data["params"];
    params.fold_iterations = pj["fold_iterations"].get<int>();
    params.fold_burn_in = pj["fold_burn_in"].get<int>();
    params.fold_lag = pj["fold_lag"].get<int>();
    params.rng_seed = opts.seed_override.value_or(pj["rng_seed"].get<std::uint64_t>());

    std::string format = opts.corpus_format == "rated" ? "lines" : opts.corpus_format;
    std::vector<RawDocument> docs = pd::load_input_documents(opts.input_path, format);
    std::vector<ClassifiedSentence> rows = classify_sentences(dump, clusters, sep, docs, params);

    const std::string out_path =
        opts.output_path.empty() ? pd::artifact_path(opts, "classified.tsv") : opts.output_path;
    pd::write_file(out_path, classification_tsv(rows, dump.num_topics));
    manifest.record_artifact("classified", out_path);
    manifest.record_timing(timer.step(), timer.elapsed_ms());
    manifest.save(opts);
    if (!opts.quiet) std::cout << "classified " << rows.size() << " sentences -> " << out_path << "\n";
    return out_path;
}

// ---- top-words ----

inline std::string run_topwords(const PipelineOptions& opts) {
    namespace pd = pipeline_detail;
    pd::Manifest manifest = pd::Manifest::load(opts);
    ModelDump dump = [&] {
        std::ifstream in(manifest.require_artifact(opts, "model", "train"), std::ios::binary);
        return load_model_dump(in);
    }();
    const std::string out_path =
        opts.output_path.empty() ? pd::artifact_path(opts, "topwords.tsv") : opts.output_path;
    pd::write_file(out_path, pd::topwords_tsv(dump, opts.top_k));
    if (!opts.quiet) std::cout << "top words -> " << out_path << "\n";
    return out_path;
}

// ---- eval ----

namespace pipeline_detail {

// classified.tsv rows keyed by doc id, in file order
struct PredictionRow {
    std::string doc_id;
    std::string aspect;
    std::string polarity;
};

inline std::vector<PredictionRow> load_predictions(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open predictions: " + path);
    std::vector<PredictionRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto cols = split(line, '\t');
        if (cols.size() < 3) throw Error("bad prediction row: " + line);
        rows.push_back({cols[0], cols[1], cols[2]});
    }
    return rows;
}

inline json report_json(const EvalReport& r) {
    json j;
    j["accuracy"] = r.accuracy;
    j["macro_precision"] = r.macro_precision;
    j["macro_recall"] = r.macro_recall;
    j["macro_f1"] = r.macro_f1;
    j["classes"] = json::object();
    for (const auto& c : r.per_class)
        j["classes"][c.label] = {{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}};
    j["labels"] = r.confusion.labels;
    std::vector<std::vector<long long>> matrix;
    const int k = static_cast<int>(r.confusion.labels.size());
    for (int g = 0; g < k; ++g) {
        std::vector<long long> row(k);
        for (int p = 0; p < k; ++p) row[p] = r.confusion.at(g, p);
        matrix.push_back(std::move(row));
    }
    j["confusion"] = matrix;
    return j;
}

struct TaskEval {
    std::vector<std::string> golds;
    std::vector<std::string> preds;
    std::vector<std::vector<std::string>> docs; // tokenized, for baselines
};

inline json evaluate_task(const TaskEval& task, const PipelineOptions& opts, std::uint64_t seed) {
    json out;
    EvalReport direct = score(task.preds, task.golds);
    out["model"] = report_json(direct);

    BaselineDataset data{task.docs, task.golds};
    out["baselines"]["majority"] =
        cross_validated_accuracy(data, 10, seed, [](const BaselineDataset& train, const auto& test) {
            return majority_baseline(train.labels, test.size());
        });
    out["baselines"]["naive_bayes"] =
        cross_validated_accuracy(data, 10, seed, [](const BaselineDataset& train, const auto& test) {
            return naive_bayes_baseline(train, test);
        });

    if (opts.balanced_per_class > 0) {
        auto subsets = balanced_subsets(task.golds, opts.balanced_per_class,
                                        opts.balanced_num_subsets, seed);
        std::vector<double> accs;
        for (const auto& subset : subsets) {
            std::vector<std::string> g, p;
            for (int i : subset) {
                g.push_back(task.golds[i]);
                p.push_back(task.preds[i]);
            }
            accs.push_back(score(p, g).accuracy);
        }
        double mean = 0.0;
        for (double a : accs) mean += a;
        mean /= accs.size();
        double var = 0.0;
        for (double a : accs) var += (a - mean) * (a - mean);
        out["balanced_subsets"] = {{"per_class", opts.balanced_per_class},
                                   {"subsets", accs},
                                   {"mean_accuracy", mean},
                                   {"stddev", accs.size() > 1 ? std::sqrt(var / (accs.size() - 1)) : 0.0}};
    }
    return out;
}

} // namespace pipeline_detail

inline nlohmann::json run_eval(const PipelineOptions& opts) {
    namespace pd = pipeline_detail;
    pd::StepTimer timer("eval");
    pd::Manifest manifest = pd::Manifest::load(opts);
    nlohmann::json report;

    const std::uint64_t seed =
        opts.seed_override.value_or(manifest.data["rng_seed"].get<std::uint64_t>());

    if (!opts.input_path.empty()) {
        std::string format = opts.corpus_format == "lines" ? "tsv" : opts.corpus_format;
        std::vector<RawDocument> gold_docs = pd::load_input_documents(opts.input_path, format);
        std::string pred_path =
            opts.pred_path.empty() ? manifest.require_artifact(opts, "classified", "classify")
                                   : opts.pred_path;
        std::vector<pd::PredictionRow> preds = pd::load_predictions(pred_path);
        if (preds.size() != gold_docs.size())
            throw Error("eval: gold file has " + std::to_string(gold_docs.size()) +
                        " rows but predictions have " + std::to_string(preds.size()));

        pd::TaskEval aspect_task, polarity_task;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            if (preds[i].doc_id != gold_docs[i].doc_id)
                throw Error("eval: prediction row " + std::to_string(i + 1) +
                            " id mismatch (gold " + gold_docs[i].doc_id + ", pred " +
                            preds[i].doc_id + ")");
            auto tokens = tokenize(gold_docs[i].text);
            if (!gold_docs[i].gold_aspect.empty() && preds[i].aspect != "-") {
                aspect_task.golds.push_back(gold_docs[i].gold_aspect);
                aspect_task.preds.push_back(preds[i].aspect);
                aspect_task.docs.push_back(tokens);
            }
            if (!gold_docs[i].gold_polarity.empty() && preds[i].polarity != "-") {
                polarity_task.golds.push_back(gold_docs[i].gold_polarity);
                polarity_task.preds.push_back(preds[i].polarity);
                polarity_task.docs.push_back(tokens);
            }
        }
        if (!aspect_task.golds.empty())
            report["aspect"] = pd::evaluate_task(aspect_task, opts, seed);
        if (!polarity_task.golds.empty())
            report["polarity"] = pd::evaluate_task(polarity_task, opts, seed);
    }

    if (!opts.lexicon_path.empty() || !opts.aspect_terms_path.empty()) {
        if (opts.lexicon_path.empty() || opts.aspect_terms_path.empty())
            throw Error("separation eval needs both --lexicon and --aspect-terms");
        Corpus corpus = pd::load_cached_corpus(opts, manifest);
        std::string assign_path = manifest.require_artifact(opts, "assignments", "train");

        // rebuild a sampler-state view holding just the y assignments
        SamplerState state;
        state.num_topics = 1;
        state.vocab_size = corpus.vocab.size();
        state.y.resize(corpus.sentences.size());
        state.z.resize(corpus.sentences.size());
        state.v.resize(corpus.sentences.size());
        for (std::size_t d = 0; d < corpus.sentences.size(); ++d) {
            state.y[d].assign(corpus.sentences[d].tokens.size(), 0);
            state.z[d].assign(corpus.sentences[d].tokens.size(), 0);
            state.v[d].assign(corpus.sentences[d].tokens.size(), 0);
        }
        std::ifstream in(assign_path, std::ios::binary);
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            auto cols = split(line, '\t');
            if (cols.size() != 7) throw Error("bad assignments row: " + line);
            std::size_t d = std::stoull(cols[0]);
            std::size_t n = std::stoull(cols[2]);
            if (d >= state.y.size() || n >= state.y[d].size())
                throw Error("assignments row out of range: " + line);
            state.y[d][n] = cols[5] == "A" ? 0 : 1;
        }

        std::ifstream lex_in(opts.lexicon_path);
        if (!lex_in) throw Error("cannot open lexicon: " + opts.lexicon_path);
        std::ifstream gold_in(opts.aspect_terms_path);
        if (!gold_in) throw Error("cannot open aspect terms: " + opts.aspect_terms_path);
        SeparationScore s =
            separation_score(state, corpus, load_lexicon(lex_in), load_lexicon(gold_in));
        report["separation"] = {{"aspect_occurrence", s.aspect_occurrence},
                                {"opinion_occurrence", s.opinion_occurrence},
                                {"aspect_type", s.aspect_type},
                                {"opinion_type", s.opinion_type},
                                {"aspect_occurrences", s.aspect_occurrences},
                                {"opinion_occurrences", s.opinion_occurrences}};
    }

    if (report.empty())
        throw Error("eval: nothing to evaluate (need --gold, or --lexicon and --aspect-terms)");

    const std::string json_path = pd::artifact_path(opts, "eval.json");
    pd::write_file(json_path, report.dump(2) + "\n");

    std::ostringstream tsv;
    for (const char* task : {"aspect", "polarity"}) {
        if (!report.contains(task)) continue;
        tsv << task << "\taccuracy\t" << format_double(report[task]["model"]["accuracy"].get<double>())
            << "\n";
        tsv << task << "\tmacro_f1\t" << format_double(report[task]["model"]["macro_f1"].get<double>())
            << "\n";
        tsv << task << "\tmajority_baseline\t"
            << format_double(report[task]["baselines"]["majority"].get<double>()) << "\n";
        tsv << task << "\tnaive_bayes_baseline\t"
            << format_double(report[task]["baselines"]["naive_bayes"].get<double>()) << "\n";
    }
    if (report.contains("separation")) {
        tsv << "separation\taspect_occurrence\t"
            << format_double(report["separation"]["aspect_occurrence"].get<double>()) << "\n";
        tsv << "separation\topinion_occurrence\t"
            << format_double(report["separation"]["opinion_occurrence"].get<double>()) << "\n";
    }
    pd::write_file(pd::artifact_path(opts, "eval.tsv"), tsv.str());

    manifest.record_timing(timer.step(), timer.elapsed_ms());
    manifest.save(opts);
    if (!opts.quiet) std::cout << report.dump(2) << "\n";
    return report;
}

} // namespace seedabsa
