// Command-line front end: synthetic data generation, masked-LM pretraining,
// fine-tuning, evaluation, prediction and confusion-matrix scoring.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "edos/checkpoint.hpp"
#include "edos/cleaning.hpp"
#include "edos/dataset.hpp"
#include "edos/experiment.hpp"
#include "edos/infer.hpp"
#include "edos/metrics.hpp"
#include "edos/pretrain.hpp"
#include "edos/synthetic.hpp"
#include "edos/trainer.hpp"
#include "edos/vocab.hpp"

namespace {

using namespace edos;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("EDOS_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw std::runtime_error("EDOS_SEED is not an integer: " + std::string(env));
        }
    }
    return 42;
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

int cmd_gen_data(const std::string& out_dir, std::size_t total, std::uint64_t seed,
                 double pattern_strength, std::size_t unlabeled) {
    std::filesystem::create_directories(out_dir);
    SyntheticSpec spec = SyntheticSpec::with_defaults(total, seed, pattern_strength);
    const auto examples = generate_synthetic(spec);
    const DatasetSplit split = split_dataset(examples, kDefaultSplitRatios, seed);
    save_dataset(out_dir + "/train.csv", split.train);
    save_dataset(out_dir + "/dev.csv", split.dev);
    save_dataset(out_dir + "/test.csv", split.test);
    std::printf("wrote %zu/%zu/%zu examples to %s\n", split.train.size(), split.dev.size(),
                split.test.size(), out_dir.c_str());
    if (unlabeled > 0) {
        save_corpus(out_dir + "/unlabeled.txt", generate_unlabeled(spec, unlabeled));
        std::printf("wrote %zu unlabeled lines to %s/unlabeled.txt\n", unlabeled, out_dir.c_str());
    }
    return 0;
}

int cmd_pretrain(const std::string& corpus_path, const std::string& config_path,
                 const std::string& out_path, std::optional<int> epochs, std::uint64_t seed,
                 const std::string& log_path, std::size_t min_freq, std::size_t max_vocab,
                 const std::string& kind) {
    const auto corpus = load_corpus(corpus_path);
    if (corpus.empty()) throw std::runtime_error("empty corpus: " + corpus_path);
    const Vocabulary vocab = Vocabulary::build(corpus, min_freq, max_vocab);

    EncoderConfig enc = EncoderConfig::toy(vocab.size(), attention_kind_from_name(kind));
    DaptConfig dapt;
    dapt.seed = seed;
    if (!config_path.empty()) {
        const nlohmann::json file = read_json_file(config_path);
        if (file.contains("encoder")) {
            nlohmann::json j = encoder_to_json(enc);
            j.update(file.at("encoder"));
            enc = encoder_from_json(j);
            enc.vocab_size = vocab.size();
        }
        if (file.contains("dapt")) {
            const auto& d = file.at("dapt");
            if (d.contains("epochs")) dapt.epochs = d.at("epochs").get<int>();
            if (d.contains("learning_rate")) dapt.learning_rate = d.at("learning_rate").get<double>();
            if (d.contains("batch_size")) dapt.batch_size = d.at("batch_size").get<std::size_t>();
            if (d.contains("mask_rate")) dapt.mask_rate = d.at("mask_rate").get<double>();
            if (d.contains("eval_fraction"))
                dapt.eval_fraction = d.at("eval_fraction").get<double>();
            if (d.contains("stop_below_eval_perplexity"))
                dapt.stop_below_eval_perplexity =
                    d.at("stop_below_eval_perplexity").get<double>();
        }
    }
    if (epochs) dapt.epochs = *epochs;
    enc.validate();

    MlmModel model = make_mlm_model(enc, seed);
    const DaptResult result = dapt_run(corpus, model, vocab, dapt);
    save_checkpoint(out_path, *model.store, mlm_info(enc, seed), vocab);
    if (!log_path.empty()) save_dapt_log(log_path, result);
    if (!result.log.empty()) {
        const auto& last = result.log.back();
        std::printf("epoch %d: train_loss %.4f eval_loss %.4f perplexity %.4f\n", last.epoch,
                    last.train_loss, last.eval_loss, last.eval_perplexity);
    }
    std::printf("checkpoint written to %s\n", out_path.c_str());
    return 0;
}

int cmd_train(const std::string& data_dir, int experiment, const std::string& task_name_arg,
              const std::vector<std::string>& init_paths, const std::string& out_path,
              const std::string& config_path, std::optional<int> epochs, std::uint64_t seed,
              const std::string& log_path, bool rewire_id) {
    if (experiment_forces_joint(experiment) && task_select_from_name(task_name_arg) != TaskSelect::B)
        throw std::runtime_error("experiment 7 is joint learning for task B; pass --task B");
    if (experiment_requires_dapt(experiment) && init_paths.empty())
        throw std::runtime_error("experiment " + std::to_string(experiment) +
                                 " uses domain-adaptive pretraining; pass --init with the "
                                 "pretraining checkpoint(s)");

    LoadOptions load_opts;
    load_opts.rewire_id = rewire_id;
    DatasetSplit split;
    split.train = load_dataset(data_dir + "/train.csv", load_opts);
    split.dev = load_dataset(data_dir + "/dev.csv", load_opts);
    if (std::filesystem::exists(data_dir + "/test.csv"))
        split.test = load_dataset(data_dir + "/test.csv", load_opts);

    std::vector<LoadedCheckpoint> inits;
    for (const auto& p : init_paths) inits.push_back(load_checkpoint(p));
    Vocabulary vocab;
    if (!inits.empty()) {
        vocab = inits[0].vocab;
        for (std::size_t i = 1; i < inits.size(); ++i)
            if (!(inits[i].vocab == vocab))
                throw std::runtime_error("init checkpoints carry different vocabularies");
    } else {
        std::vector<std::string> texts;
        for (const auto& ex : split.train) texts.push_back(ex.text);
        vocab = Vocabulary::build(texts);
    }

    ExperimentConfig config =
        make_experiment_config(experiment, task_select_from_name(task_name_arg), vocab.size());
    if (!config_path.empty()) apply_config_overrides(config, read_json_file(config_path));
    if (epochs) config.train.epochs = *epochs;
    config.train.seed = seed;
    config.encoder_a.vocab_size = vocab.size();
    if (config.encoder_b) config.encoder_b->vocab_size = vocab.size();
    config.validate();

    ModelBundle<float> bundle = make_bundle_from_config(config, seed);
    for (const auto& ckpt : inits) init_encoder_from_dapt(bundle, ckpt);

    const TrainLog log = train(bundle, split, vocab, config.train);
    save_checkpoint(out_path, *bundle.store, classifier_info(config, seed), vocab);
    if (!log_path.empty()) save_train_log(log_path, log);
    if (log.best_epoch >= 0)
        std::printf("best epoch %d: dev macro F1 %.4f\n", log.best_epoch, log.best_dev_macro_f1);
    std::printf("checkpoint written to %s\n", out_path.c_str());
    return 0;
}

EvalReport eval_bundle_on(const LoadedBundle& loaded, const std::vector<LabeledExample>& examples,
                          const std::string& task_name_arg) {
    const TaskSelect requested = task_select_from_name(task_name_arg);
    const ModelBundle<float>& bundle = loaded.bundle;
    const bool joint_as_b = bundle.task == TaskSelect::B_joint && requested == TaskSelect::B;
    if (bundle.task != requested && !joint_as_b)
        throw std::runtime_error(std::string("checkpoint task ") +
                                 std::string(task_select_name(bundle.task)) +
                                 " does not match requested task " +
                                 std::string(task_select_name(requested)));

    const TaskSelection sel = select_training_set(examples, requested);
    std::vector<TextRow> rows;
    for (const auto& ex : sel.examples) rows.push_back({ex.id, ex.text});
    const auto preds = predict(bundle, rows, loaded.vocab);
    std::vector<int> pred_labels;
    pred_labels.reserve(preds.size());
    for (const auto& p : preds)
        pred_labels.push_back(joint_as_b ? joint_b_predict(p.probs) : p.label_index);
    const std::vector<int> golds(sel.labels.begin(), sel.labels.end());
    const Task task = requested == TaskSelect::A ? Task::A
                      : requested == TaskSelect::C ? Task::C
                                                   : Task::B;
    return evaluate(golds, pred_labels, TaskLabelSet::for_task(task));
}

int cmd_eval(const std::string& data_dir, const std::string& task_name_arg,
             const std::string& model_path, const std::string& report_path,
             const std::string& csv_path, const std::string& split_name, bool rewire_id) {
    const LoadedBundle loaded = bundle_from_checkpoint(load_checkpoint(model_path));
    LoadOptions opts;
    opts.rewire_id = rewire_id;
    const auto examples = load_dataset(data_dir + "/" + split_name + ".csv", opts);
    const EvalReport report = eval_bundle_on(loaded, examples, task_name_arg);
    const std::string text = format_report_text(report);
    if (!report_path.empty()) write_text_file(report_path, text);
    if (!csv_path.empty()) write_text_file(csv_path, format_report_csv(report));
    std::fputs(text.c_str(), stdout);
    return 0;
}

int cmd_predict(const std::string& in_path, const std::string& model_path,
                const std::string& out_path, bool probs, bool rewire_id) {
    const LoadedBundle loaded = bundle_from_checkpoint(load_checkpoint(model_path));
    LoadOptions opts;
    opts.rewire_id = rewire_id;
    const auto rows = load_texts(in_path, opts);
    const auto predictions = predict(loaded.bundle, rows, loaded.vocab);
    save_predictions_csv(out_path, predictions, probs);
    std::printf("wrote %zu predictions to %s\n", predictions.size(), out_path.c_str());
    return 0;
}

int cmd_hier_predict(const std::string& model_a, const std::string& model_b,
                     const std::string& model_c, const std::string& in_path,
                     const std::string& out_path, bool rewire_id) {
    const LoadedBundle a = bundle_from_checkpoint(load_checkpoint(model_a));
    const LoadedBundle b = bundle_from_checkpoint(load_checkpoint(model_b));
    const LoadedBundle c = bundle_from_checkpoint(load_checkpoint(model_c));
    LoadOptions opts;
    opts.rewire_id = rewire_id;
    const auto rows = load_texts(in_path, opts);
    const auto preds =
        hierarchical_predict(a.bundle, a.vocab, b.bundle, b.vocab, c.bundle, c.vocab, rows);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + out_path);
    out << "id,label_sexist,label_category,label_vector\n";
    for (const auto& p : preds) {
        auto quote = [](const std::string& s) {
            if (s.find_first_of(",\"") == std::string::npos) return s;
            std::string q = "\"";
            for (char ch : s) {
                if (ch == '"') q += "\"\"";
                else q.push_back(ch);
            }
            q.push_back('"');
            return q;
        };
        out << p.id << ',' << quote(p.label_sexist) << ',' << quote(p.label_category) << ','
            << quote(p.label_vector) << '\n';
    }
    std::printf("wrote %zu predictions to %s\n", preds.size(), out_path.c_str());
    return 0;
}

int cmd_score_matrix(const std::string& matrix_path) {
    const ConfusionMatrix cm = load_matrix_csv(matrix_path);
    const EvalReport report = evaluate_matrix(cm);
    std::printf("macro F1: %.4f\n", report.macro_f1);
    std::printf("\nmisclassification rates (row-normalized, descending):\n");
    for (const auto& e : report.errors.rates) {
        if (e.count == 0) continue;
        std::printf("  %s -> %s: %.4f (%lld/%lld)\n", cm.labels()[e.actual].c_str(),
                    cm.labels()[e.predicted].c_str(), e.rate, static_cast<long long>(e.count),
                    static_cast<long long>(cm.row_sum(e.actual)));
    }
    for (std::size_t g : report.errors.omitted_rows)
        std::printf("  note: class '%s' has no examples; row omitted\n", cm.labels()[g].c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale dual-encoder sexism-detection stack"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed_flag;

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate synthetic dataset splits");
    std::string gen_out;
    std::size_t gen_total = 20000, gen_unlabeled = 0;
    double gen_strength = 1.0;
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--total", gen_total, "total labeled examples");
    gen->add_option("--seed", seed_flag, "rng seed (default: EDOS_SEED or 42)");
    gen->add_option("--pattern-strength", gen_strength, "marker token probability in [0,1]");
    gen->add_option("--unlabeled", gen_unlabeled, "also write this many unlabeled lines");

    // pretrain
    auto* pre = app.add_subcommand("pretrain", "masked-LM domain-adaptive pretraining");
    std::string pre_corpus, pre_config, pre_out, pre_log, pre_kind = "absolute";
    std::optional<int> pre_epochs;
    std::size_t pre_min_freq = 1, pre_max_vocab = 0;
    pre->add_option("--corpus", pre_corpus, "unlabeled corpus, one document per line")->required();
    pre->add_option("--config", pre_config, "JSON config file");
    pre->add_option("--out", pre_out, "output checkpoint")->required();
    pre->add_option("--epochs", pre_epochs, "override epoch count");
    pre->add_option("--seed", seed_flag, "rng seed");
    pre->add_option("--log", pre_log, "per-epoch loss/perplexity log");
    pre->add_option("--encoder-kind", pre_kind, "absolute|disentangled")
        ->check(CLI::IsMember({"absolute", "disentangled"}));
    pre->add_option("--min-freq", pre_min_freq, "vocabulary frequency threshold");
    pre->add_option("--max-vocab", pre_max_vocab, "vocabulary size cap (0 = unlimited)");

    // train
    auto* tr = app.add_subcommand("train", "fine-tune a classifier");
    std::string tr_data, tr_task, tr_out, tr_config, tr_log;
    int tr_experiment = 1;
    std::vector<std::string> tr_init;
    std::optional<int> tr_epochs;
    bool tr_rewire = false;
    tr->add_option("--data", tr_data, "directory with train.csv/dev.csv")->required();
    tr->add_option("--experiment", tr_experiment, "experiment id 1..8")->required();
    tr->add_option("--task", tr_task, "A|B|C")->required();
    tr->add_option("--init", tr_init, "pretraining checkpoint(s) for encoder init");
    tr->add_option("--out", tr_out, "output checkpoint")->required();
    tr->add_option("--config", tr_config, "JSON config file");
    tr->add_option("--epochs", tr_epochs, "override epoch count");
    tr->add_option("--seed", seed_flag, "rng seed");
    tr->add_option("--log", tr_log, "per-epoch train log");
    tr->add_flag("--rewire-id", tr_rewire, "accept rewire_id as the id column");

    // eval
    auto* ev = app.add_subcommand("eval", "score a checkpoint on a dataset split");
    std::string ev_data, ev_task, ev_model, ev_report, ev_csv, ev_split = "test";
    bool ev_rewire = false;
    ev->add_option("--data", ev_data, "dataset directory")->required();
    ev->add_option("--task", ev_task, "A|B|C")->required();
    ev->add_option("--model", ev_model, "classifier checkpoint")->required();
    ev->add_option("--report", ev_report, "plain-text report output")->required();
    ev->add_option("--csv", ev_csv, "machine-readable CSV report");
    ev->add_option("--split", ev_split, "train|dev|test")
        ->check(CLI::IsMember({"train", "dev", "test"}));
    ev->add_flag("--rewire-id", ev_rewire, "accept rewire_id as the id column");

    // predict
    auto* pr = app.add_subcommand("predict", "write a predictions CSV");
    std::string pr_in, pr_model, pr_out;
    bool pr_probs = false, pr_rewire = false;
    pr->add_option("--in", pr_in, "input CSV with id,text")->required();
    pr->add_option("--model", pr_model, "classifier checkpoint")->required();
    pr->add_option("--out", pr_out, "output CSV")->required();
    pr->add_flag("--probs", pr_probs, "include per-class probabilities");
    pr->add_flag("--rewire-id", pr_rewire, "accept rewire_id as the id column");

    // hier-predict
    auto* hp = app.add_subcommand("hier-predict", "gated A->B/C predictions");
    std::string hp_a, hp_b, hp_c, hp_in, hp_out;
    bool hp_rewire = false;
    hp->add_option("--model-a", hp_a, "task A checkpoint")->required();
    hp->add_option("--model-b", hp_b, "task B (or joint) checkpoint")->required();
    hp->add_option("--model-c", hp_c, "task C checkpoint")->required();
    hp->add_option("--in", hp_in, "input CSV with id,text")->required();
    hp->add_option("--out", hp_out, "output CSV")->required();
    hp->add_flag("--rewire-id", hp_rewire, "accept rewire_id as the id column");

    // score-matrix
    auto* sm = app.add_subcommand("score-matrix", "macro F1 and error report from a matrix CSV");
    std::string sm_matrix;
    sm->add_option("--matrix", sm_matrix, "square integer confusion matrix CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const std::uint64_t seed = resolve_seed(seed_flag);
        if (gen->parsed())
            return cmd_gen_data(gen_out, gen_total, seed, gen_strength, gen_unlabeled);
        if (pre->parsed())
            return cmd_pretrain(pre_corpus, pre_config, pre_out, pre_epochs, seed, pre_log,
                                pre_min_freq, pre_max_vocab, pre_kind);
        if (tr->parsed())
            return cmd_train(tr_data, tr_experiment, tr_task, tr_init, tr_out, tr_config, tr_epochs,
                             seed, tr_log, tr_rewire);
        if (ev->parsed())
            return cmd_eval(ev_data, ev_task, ev_model, ev_report, ev_csv, ev_split, ev_rewire);
        if (pr->parsed()) return cmd_predict(pr_in, pr_model, pr_out, pr_probs, pr_rewire);
        if (hp->parsed()) return cmd_hier_predict(hp_a, hp_b, hp_c, hp_in, hp_out, hp_rewire);
        if (sm->parsed()) return cmd_score_matrix(sm_matrix);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
