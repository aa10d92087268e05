// Command-line pipeline: prepare | embed | cluster | separate | train |
// classify | top-words | eval, with cached artifacts under --out-dir.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "seedabsa/pipeline.hpp"

namespace {

void add_common(CLI::App* cmd, seedabsa::PipelineOptions& opts, std::optional<std::uint64_t>& seed,
                std::optional<std::string>& mode) {
    cmd->add_option("--config", opts.config_path, "seed/parameter configuration file");
    cmd->add_option("--out-dir", opts.out_dir, "artifact directory (default .)");
    cmd->add_option("--seed", seed, "override the configured rng seed");
    cmd->add_option("--mode", mode, "sampler mode: as-written | derived");
    cmd->add_flag("--quiet", opts.quiet, "suppress progress output");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"seed-guided aspect/sentiment modelling pipeline"};
    app.require_subcommand(1);

    seedabsa::PipelineOptions opts;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;

    auto* prepare = app.add_subcommand("prepare", "build the corpus cache from raw reviews");
    prepare->add_option("--corpus", opts.corpus_path, "input reviews")->required();
    prepare->add_option("--format", opts.corpus_format, "lines | tsv | semeval | rated");
    prepare->add_option("--stopwords", opts.stopwords_path, "stopword list (one word per line)");
    prepare->add_flag("--balance", opts.balance, "oversample the minority rating class");
    add_common(prepare, opts, seed, mode);

    auto* embed = app.add_subcommand("embed", "train or import word embeddings");
    embed->add_option("--embeddings", opts.embeddings_path, "pretrained vectors instead of training");
    add_common(embed, opts, seed, mode);

    auto* cluster = app.add_subcommand("cluster", "compute Brown clusters");
    add_common(cluster, opts, seed, mode);

    auto* separate = app.add_subcommand("separate", "train the aspect-term/opinion-word classifier");
    add_common(separate, opts, seed, mode);

    auto* train = app.add_subcommand("train", "run the Gibbs sampler and dump the model");
    train->add_option("--k", opts.top_k, "top words per aspect/class in the report");
    add_common(train, opts, seed, mode);

    auto* classify = app.add_subcommand("classify", "fold in new sentences and label them");
    classify->add_option("--input", opts.input_path, "sentences to classify")->required();
    classify->add_option("--format", opts.corpus_format, "lines | tsv | semeval");
    classify->add_option("--out", opts.output_path, "output TSV path");
    add_common(classify, opts, seed, mode);

    auto* topwords = app.add_subcommand("top-words", "emit the ranked per-aspect word lists");
    topwords->add_option("--k", opts.top_k, "words per aspect/class");
    topwords->add_option("--out", opts.output_path, "output TSV path");
    add_common(topwords, opts, seed, mode);

    auto* eval = app.add_subcommand("eval", "score predictions against gold labels");
    eval->add_option("--gold", opts.input_path, "gold labelled file (tsv or semeval)");
    eval->add_option("--format", opts.corpus_format, "tsv | semeval");
    eval->add_option("--pred", opts.pred_path, "predictions TSV (default: last classify output)");
    eval->add_option("--lexicon", opts.lexicon_path, "opinion lexicon for separation scoring");
    eval->add_option("--aspect-terms", opts.aspect_terms_path, "gold aspect terms for separation scoring");
    eval->add_option("--balanced-n", opts.balanced_per_class, "balanced subset size per class");
    eval->add_option("--balanced-subsets", opts.balanced_num_subsets, "number of balanced subsets");
    add_common(eval, opts, seed, mode);

    CLI11_PARSE(app, argc, argv);
    opts.seed_override = seed;
    opts.mode_override = mode;

    try {
        if (prepare->parsed()) seedabsa::run_prepare(opts);
        else if (embed->parsed()) seedabsa::run_embed(opts);
        else if (cluster->parsed()) seedabsa::run_cluster(opts);
        else if (separate->parsed()) seedabsa::run_separate(opts);
        else if (train->parsed()) seedabsa::run_train(opts);
        else if (classify->parsed()) seedabsa::run_classify(opts);
        else if (topwords->parsed()) seedabsa::run_topwords(opts);
        else if (eval->parsed()) seedabsa::run_eval(opts);
    } catch (const std::exception& e) {
        nlohmann::json err{{"error", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
