// Command-line front end: preprocess, embed, train, evaluate, predict,
// report. Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric
// failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "reliance/bundle.hpp"
#include "reliance/config.hpp"
#include "reliance/corpus.hpp"
#include "reliance/embed.hpp"
#include "reliance/errors.hpp"
#include "reliance/experiment.hpp"
#include "reliance/model_io.hpp"
#include "reliance/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace reliance;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

std::string resolve_stopwords(const std::string& configured) {
    if (fs::exists(configured)) return configured;
#ifdef RELIANCE_DATA_DIR
    const std::string fallback = std::string(RELIANCE_DATA_DIR) + "/stopwords_en.txt";
    if (fs::exists(fallback)) return fallback;
#endif
    return configured;  // let the loader report the failure
}

void apply_seed_override(cli::RunConfig& cfg) {
    if (const char* env = std::getenv("RELIANCE_SEED")) {
        cfg.seed = std::strtoull(env, nullptr, 10);
        cfg.experiment.master_seed = cfg.seed;
    }
}

cli::RunConfig load_config(const std::string& path) {
    cli::RunConfig cfg = cli::RunConfig::from_file(path);
    cfg.stopwords = resolve_stopwords(cfg.stopwords);
    cfg.experiment.stopwords_path = cfg.stopwords;
    apply_seed_override(cfg);
    return cfg;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    out << text;
}

std::string bundle_timestamp(int threads) {
    // Deterministic runs pin the manifest timestamp so reruns are bit-equal.
    return threads == 0 ? "1970-01-01T00:00:00Z" : eval::timestamp_utc();
}

int cmd_preprocess(const std::string& input, const std::string& output,
                   const std::string& stopwords_path, bool unlabeled) {
    auto stopwords = corpus::StopwordList::load(resolve_stopwords(stopwords_path));
    auto records = corpus::load_dataset(input, !unlabeled);
    std::vector<corpus::Document> docs;
    std::size_t dropped = 0;
    for (const auto& rec : records) {
        if (!rec.body.has_value()) {
            ++dropped;
            continue;
        }
        docs.push_back(corpus::preprocess(rec, stopwords));
    }
    corpus::write_cache(docs, output);
    std::printf("preprocessed %zu records (%zu dropped for missing text) -> %s\n", docs.size(),
                dropped, output.c_str());
    return 0;
}

int cmd_embed(const std::string& config_path, const std::string& cache_path,
              const std::string& output) {
    cli::RunConfig cfg = load_config(config_path);
    auto docs = corpus::read_cache(cache_path);
    embed::Doc2VecConfig d2v = cfg.experiment.doc2vec;
    d2v.seed = derive_seed(cfg.seed, 1);
    auto model = embed::train_doc2vec(docs, d2v, cfg.threads);

    cli::Bundle bundle;
    bundle.created_at = bundle_timestamp(cfg.threads);
    bundle.config_digest = cfg.digest();
    bundle.components.push_back({"doc2vec", cli::encode_doc2vec(model)});
    bundle.save(output);
    std::printf("trained doc2vec on %zu documents (V=%d, dim=%d) -> %s\n", docs.size(),
                model.vocab.size(), model.config.dim, output.c_str());
    return 0;
}

int cmd_train(const std::string& config_path, std::string output) {
    cli::RunConfig cfg = load_config(config_path);
    cfg.experiment.stage_hook = [](const std::string& name, double seconds) {
        std::printf("stage %-12s %8.2f s\n", name.c_str(), seconds);
        std::fflush(stdout);
    };
    eval::ExperimentResult result = eval::run_experiment(cfg.experiment);

    fs::create_directories(cfg.output_dir);
    if (output.empty()) output = cfg.output_dir + "/model.rlnc";

    corpus::StopwordList stopwords;
    if (fs::exists(cfg.stopwords)) stopwords = corpus::StopwordList::load(cfg.stopwords);
    cli::Bundle bundle = cli::make_stack_bundle(result.doc2vec, result.stack, stopwords,
                                                cfg.digest(), bundle_timestamp(cfg.threads));
    bundle.save(output);
    std::printf("bundle -> %s\n", output.c_str());

    result.config_digest = cfg.digest();
    write_text(cfg.output_dir + "/train_report.json", eval::report_json(result));
    std::fputs(eval::report_csv(result).c_str(), stdout);
    return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& bundle_path,
                 std::string out_dir) {
    cli::RunConfig cfg = load_config(config_path);
    if (out_dir.empty()) out_dir = cfg.output_dir;
    cfg.experiment.stage_hook = [](const std::string& name, double seconds) {
        std::printf("stage %-12s %8.2f s\n", name.c_str(), seconds);
        std::fflush(stdout);
    };

    eval::ExperimentResult result;
    if (bundle_path.empty()) {
        result = eval::run_experiment(cfg.experiment);
    } else {
        cli::Bundle bundle = cli::Bundle::load(bundle_path);
        if (bundle.config_digest != cfg.digest())
            std::fprintf(stderr,
                         "warning: bundle was trained under config digest %s, scoring with %s\n",
                         bundle.config_digest.c_str(), cfg.digest().c_str());
        auto loaded = cli::load_stack_bundle(bundle);
        result = eval::score_experiment(cfg.experiment, loaded.doc2vec, loaded.stack);
    }
    result.config_digest = cfg.digest();

    fs::create_directories(out_dir);
    write_text(out_dir + "/report.csv", eval::report_csv(result));
    write_text(out_dir + "/report.md", eval::report_markdown(result));
    write_text(out_dir + "/report.json", eval::report_json(result));
    std::fputs(eval::report_csv(result).c_str(), stdout);
    std::printf("reports -> %s/report.{csv,md,json}\n", out_dir.c_str());
    return 0;
}

json prediction_to_json(std::int64_t id, const ensemble::StackPrediction& pred) {
    json base = json::array();
    for (int k = 0; k < models::kNumBaseModels; ++k)
        base.push_back(
            {{"model", models::kind_name(models::kBaseModelOrder[static_cast<std::size_t>(k)])},
             {"score", pred.base_scores[static_cast<std::size_t>(k)]}});
    return json{{"id", id},
                {"probability", pred.probability},
                {"label", pred.label},
                {"base_scores", base}};
}

int cmd_predict(const std::string& bundle_path, const std::string& input_path,
                const std::string& text, int infer_steps) {
    auto loaded = cli::load_stack_bundle(cli::Bundle::load(bundle_path));
    const std::uint64_t seed = [] {
        const char* env = std::getenv("RELIANCE_SEED");
        return env ? std::strtoull(env, nullptr, 10) : std::uint64_t(42);
    }();

    std::vector<corpus::RawRecord> records;
    if (!text.empty()) {
        corpus::RawRecord rec;
        rec.id = 0;
        rec.body = text;
        records.push_back(std::move(rec));
    } else {
        records = corpus::load_dataset(input_path, /*expect_labels=*/false);
    }

    const int max_seq = loaded.stack.base.bilstm.config.max_seq_len;
    for (const auto& rec : records) {
        if (!rec.body.has_value()) {
            // reported per record, not fatal for batch input
            std::printf("%s\n", json{{"id", rec.id}, {"error", "missing text"}}.dump().c_str());
            continue;
        }
        auto doc = corpus::preprocess(rec, loaded.stopwords);
        auto features =
            embed::infer_vector(loaded.doc2vec, doc.tokens, infer_steps,
                                derive_seed(seed, 3, static_cast<std::uint64_t>(doc.id)));
        embed::l2_normalize(features);

        nn::SeqView seq;
        std::vector<int> rows;
        for (const auto& t : doc.tokens) {
            if (static_cast<int>(rows.size()) >= max_seq) break;
            const int idx = loaded.doc2vec.vocab.index_of(t);
            if (idx >= 0) rows.push_back(idx);
        }
        for (int r : rows) seq.push_back(loaded.doc2vec.word_in.row_span(r));

        models::PredictInput input;
        input.features = features;
        input.sequence = seq;
        const auto pred = ensemble::predict(loaded.stack, input);
        std::printf("%s\n", prediction_to_json(rec.id, pred).dump().c_str());
    }
    return 0;
}

int cmd_report(const std::string& json_path, const std::string& out_dir) {
    std::ifstream in(json_path);
    if (!in) throw DataError("cannot open report: " + json_path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    fs::create_directories(out_dir);
    write_text(out_dir + "/report.csv", eval::rerender_csv(text));
    write_text(out_dir + "/report.md", eval::rerender_markdown(text));
    std::printf("reports -> %s/report.{csv,md}\n", out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stacked-ensemble news credibility classifier"};
    app.require_subcommand(1);

    auto* preprocess = app.add_subcommand("preprocess", "CSV corpus -> token cache");
    std::string pp_input, pp_output, pp_stopwords = "data/stopwords_en.txt";
    bool pp_unlabeled = false;
    preprocess->add_option("--input", pp_input, "dataset CSV")->required();
    preprocess->add_option("--output", pp_output, "cache file to write")->required();
    preprocess->add_option("--stopwords", pp_stopwords, "stopword list path");
    preprocess->add_flag("--unlabeled", pp_unlabeled, "input has no label column");

    auto* embed_cmd = app.add_subcommand("embed", "train document embeddings from a cache");
    std::string em_config, em_cache, em_output;
    embed_cmd->add_option("--config", em_config, "run config JSON")->required();
    embed_cmd->add_option("--corpus", em_cache, "preprocessed cache file")->required();
    embed_cmd->add_option("--output", em_output, "bundle to write")->required();

    auto* train = app.add_subcommand("train", "full training pipeline -> model bundle");
    std::string tr_config, tr_output;
    train->add_option("--config", tr_config, "run config JSON")->required();
    train->add_option("--output", tr_output,
                      "bundle to write (default <output_dir>/model.rlnc)");

    auto* evaluate = app.add_subcommand("evaluate", "run the experiment and write reports");
    std::string ev_config, ev_bundle, ev_out;
    evaluate->add_option("--config", ev_config, "run config JSON")->required();
    evaluate->add_option("--bundle", ev_bundle, "score an existing bundle instead of training");
    evaluate->add_option("--out-dir", ev_out, "report directory (default from config)");

    auto* predict = app.add_subcommand("predict",
                                       "score documents; one JSON line per document. A "
                                       "probability of exactly 0.5 classifies as fake.");
    std::string pr_bundle, pr_input, pr_text;
    int pr_steps = 50;
    predict->add_option("--bundle", pr_bundle, "model bundle")->required();
    predict->add_option("--input", pr_input, "CSV of records to score");
    predict->add_option("--text", pr_text, "score a single text passed inline");
    predict->add_option("--infer-steps", pr_steps, "embedding inference passes");

    auto* report = app.add_subcommand("report", "re-render a stored JSON report");
    std::string rp_json, rp_out = "out";
    report->add_option("--json", rp_json, "report.json produced by evaluate")->required();
    report->add_option("--out-dir", rp_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (preprocess->parsed())
            return cmd_preprocess(pp_input, pp_output, pp_stopwords, pp_unlabeled);
        if (embed_cmd->parsed()) return cmd_embed(em_config, em_cache, em_output);
        if (train->parsed()) return cmd_train(tr_config, tr_output);
        if (evaluate->parsed()) return cmd_evaluate(ev_config, ev_bundle, ev_out);
        if (predict->parsed()) {
            if (pr_input.empty() == pr_text.empty()) {
                std::fprintf(stderr, "predict: provide exactly one of --input or --text\n");
                return kExitUsage;
            }
            return cmd_predict(pr_bundle, pr_input, pr_text, pr_steps);
        }
        if (report->parsed()) return cmd_report(rp_json, rp_out);
    } catch (const StageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.kind == StageError::Kind::Data ? kExitData : kExitNumeric;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    } catch (const DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    }
    return 0;
}
