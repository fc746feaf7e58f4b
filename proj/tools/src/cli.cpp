#include "nanoreg/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "nanoreg/csv.hpp"
#include "nanoreg/dataset.hpp"
#include "nanoreg/eval.hpp"
#include "nanoreg/explain.hpp"
#include "nanoreg/model.hpp"
#include "nanoreg/oversample.hpp"
#include "nanoreg/rng.hpp"

namespace nanoreg {

namespace {

using nlohmann::ordered_json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Every randomized stage draws its own sub-seed from the global seed, so one
// seed reproduces the whole run and stages stay independent of each other.
constexpr std::uint64_t kSynthStream = 11;
constexpr std::uint64_t kSmoteStream = 12;
constexpr std::uint64_t kTrainStream = 13;
constexpr std::uint64_t kCvStream = 14;
constexpr std::uint64_t kLimeStream = 15;
constexpr std::uint64_t kHoldoutStream = 16;

constexpr const char* kSynthCsv = "synth_data.csv";
constexpr const char* kAugmentedCsv = "augmented.csv";
constexpr const char* kModelFile = "model.txt";
constexpr const char* kCvJson = "cv_report.json";
constexpr const char* kCvCsv = "cv_report.csv";
constexpr const char* kHoldoutCsv = "holdout.csv";
constexpr const char* kPredictionsCsv = "predictions.csv";
constexpr const char* kWeightsCsv = "weights.csv";
constexpr const char* kRunSummary = "run_summary.json";

// Effective settings for one run: defaults, overlaid by the JSON config,
// overlaid by command-line flags.
struct RunConfig {
    std::uint64_t seed = 42;
    std::string out_dir = "out";
    std::string input;       // input CSV where a command needs one
    std::string model_path;  // defaults to <out>/model.txt when empty
    std::string target = "length";
    std::vector<std::string> feature_columns;  // empty = benchmark schema

    std::size_t synth_n = 28;
    std::size_t holdout_n = 3;

    SmoteConfig smote;
    double dedup_tol = 0.0;
    TrainConfig train_cfg;
    LimeConfig lime;

    std::size_t k_folds = 10;
    OriginalEval original_eval = OriginalEval::out_of_fold;
    bool cv_augment = false;  // cv: oversample the input before splitting
};

std::vector<std::string> effective_feature_columns(const RunConfig& rc) {
    if (!rc.feature_columns.empty()) return rc.feature_columns;
    return {kCoreEdgeColumn, kCoreAmountColumn, kSAmountColumn};
}

// The three named targets map to benchmark columns; anything else is taken
// verbatim as a column name in the input CSV.
std::string effective_target_column(const RunConfig& rc) {
    if (rc.target == "length") return kLengthColumn;
    if (rc.target == "width") return kWidthColumn;
    if (rc.target == "aspect_ratio") return kAspectRatioColumn;
    return rc.target;
}

std::string out_path(const RunConfig& rc, const char* name) {
    return (std::filesystem::path(rc.out_dir) / name).generic_string();
}

std::string effective_model_path(const RunConfig& rc) {
    return rc.model_path.empty() ? out_path(rc, kModelFile) : rc.model_path;
}

// --- config file -----------------------------------------------------------

void check_keys(const ordered_json& obj, std::initializer_list<const char*> allowed,
                const char* where) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ConfigError("config: unknown key \"" + item.key() + "\" in " + where);
        }
    }
}

void apply_config_json(const ordered_json& doc, RunConfig& rc) {
    if (!doc.is_object()) throw ConfigError("config: top level must be a JSON object");
    check_keys(doc,
               {"seed", "out", "input", "model", "target", "feature_columns", "synth", "smote",
                "train", "cv", "lime"},
               "the top-level object");

    if (doc.contains("seed")) rc.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("out")) rc.out_dir = doc.at("out").get<std::string>();
    if (doc.contains("input")) rc.input = doc.at("input").get<std::string>();
    if (doc.contains("model")) rc.model_path = doc.at("model").get<std::string>();
    if (doc.contains("target")) rc.target = doc.at("target").get<std::string>();
    if (doc.contains("feature_columns")) {
        rc.feature_columns = doc.at("feature_columns").get<std::vector<std::string>>();
    }

    if (doc.contains("synth")) {
        const auto& s = doc.at("synth");
        check_keys(s, {"n", "holdout_n"}, "\"synth\"");
        if (s.contains("n")) rc.synth_n = s.at("n").get<std::size_t>();
        if (s.contains("holdout_n")) rc.holdout_n = s.at("holdout_n").get<std::size_t>();
    }
    if (doc.contains("smote")) {
        const auto& s = doc.at("smote");
        check_keys(s, {"t", "n_percent", "k", "dedup_tol"}, "\"smote\"");
        if (s.contains("t")) rc.smote.t = s.at("t").get<std::size_t>();
        if (s.contains("n_percent")) rc.smote.n_percent = s.at("n_percent").get<std::size_t>();
        if (s.contains("k")) rc.smote.k = s.at("k").get<std::size_t>();
        if (s.contains("dedup_tol")) rc.dedup_tol = s.at("dedup_tol").get<double>();
    }
    if (doc.contains("train")) {
        const auto& t = doc.at("train");
        check_keys(t, {"learning_rate", "epochs", "batch_size", "optimizer", "standardize_target"},
                   "\"train\"");
        if (t.contains("learning_rate")) rc.train_cfg.learning_rate = t.at("learning_rate").get<double>();
        if (t.contains("epochs")) rc.train_cfg.epochs = t.at("epochs").get<std::size_t>();
        if (t.contains("batch_size")) rc.train_cfg.batch_size = t.at("batch_size").get<std::size_t>();
        if (t.contains("optimizer")) {
            const std::string name = t.at("optimizer").get<std::string>();
            if (name == "adam")
                rc.train_cfg.optimizer = TrainConfig::Optimizer::adam;
            else if (name == "sgd")
                rc.train_cfg.optimizer = TrainConfig::Optimizer::sgd;
            else
                throw ConfigError("config: optimizer must be \"adam\" or \"sgd\", got \"" + name + "\"");
        }
        if (t.contains("standardize_target")) {
            rc.train_cfg.standardize_target = t.at("standardize_target").get<bool>();
        }
    }
    if (doc.contains("cv")) {
        const auto& c = doc.at("cv");
        check_keys(c, {"k", "original_eval", "augment"}, "\"cv\"");
        if (c.contains("k")) rc.k_folds = c.at("k").get<std::size_t>();
        if (c.contains("original_eval")) {
            const std::string mode = c.at("original_eval").get<std::string>();
            if (mode == "out_of_fold")
                rc.original_eval = OriginalEval::out_of_fold;
            else if (mode == "in_training")
                rc.original_eval = OriginalEval::in_training;
            else
                throw ConfigError(
                    "config: original_eval must be \"out_of_fold\" or \"in_training\", got \"" + mode +
                    "\"");
        }
        if (c.contains("augment")) rc.cv_augment = c.at("augment").get<bool>();
    }
    if (doc.contains("lime")) {
        const auto& l = doc.at("lime");
        check_keys(l, {"n_perturb", "perturb_scale", "kernel_width", "ridge_lambda"}, "\"lime\"");
        if (l.contains("n_perturb")) rc.lime.n_perturb = l.at("n_perturb").get<std::size_t>();
        if (l.contains("perturb_scale")) rc.lime.perturb_scale = l.at("perturb_scale").get<double>();
        if (l.contains("kernel_width")) {
            if (l.at("kernel_width").is_null())
                rc.lime.kernel_width.reset();
            else
                rc.lime.kernel_width = l.at("kernel_width").get<double>();
        }
        if (l.contains("ridge_lambda")) rc.lime.ridge_lambda = l.at("ridge_lambda").get<double>();
    }
}

void load_config_file(const std::string& path, RunConfig& rc) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
    apply_config_json(doc, rc);
}

// The echoed config is itself a valid config file: rerunning any command
// with it reproduces the run byte for byte.
ordered_json config_echo(const RunConfig& rc) {
    ordered_json j;
    j["seed"] = rc.seed;
    j["out"] = rc.out_dir;
    j["input"] = rc.input;
    j["model"] = effective_model_path(rc);
    j["target"] = rc.target;
    j["feature_columns"] = effective_feature_columns(rc);
    j["synth"] = {{"n", rc.synth_n}, {"holdout_n", rc.holdout_n}};
    j["smote"] = {{"t", rc.smote.t},
                  {"n_percent", rc.smote.n_percent},
                  {"k", rc.smote.k},
                  {"dedup_tol", rc.dedup_tol}};
    j["train"] = {
        {"learning_rate", rc.train_cfg.learning_rate},
        {"epochs", rc.train_cfg.epochs},
        {"batch_size", rc.train_cfg.batch_size},
        {"optimizer", rc.train_cfg.optimizer == TrainConfig::Optimizer::adam ? "adam" : "sgd"},
        {"standardize_target", rc.train_cfg.standardize_target}};
    j["cv"] = {{"k", rc.k_folds},
               {"original_eval",
                rc.original_eval == OriginalEval::out_of_fold ? "out_of_fold" : "in_training"},
               {"augment", rc.cv_augment}};
    j["lime"] = {{"n_perturb", rc.lime.n_perturb},
                 {"perturb_scale", rc.lime.perturb_scale},
                 {"kernel_width",
                  rc.lime.kernel_width ? ordered_json(*rc.lime.kernel_width) : ordered_json(nullptr)},
                 {"ridge_lambda", rc.lime.ridge_lambda}};
    return j;
}

// Nested-config validation, scoped to what the command actually uses so a
// bad setting for some other command cannot block this one.
void validate_for(const std::string& command, const RunConfig& rc) {
    try {
        if (command == "augment" || command == "pipeline" || (command == "cv" && rc.cv_augment)) {
            rc.smote.check_valid();
            if (!(rc.dedup_tol >= 0.0)) throw std::invalid_argument("smote: dedup_tol must be >= 0");
        }
        if (command == "train" || command == "cv" || command == "pipeline") {
            rc.train_cfg.check_valid();
        }
        if (command == "cv" || command == "pipeline") {
            if (rc.k_folds < 2) throw std::invalid_argument("cv: k must be >= 2");
        }
        if (command == "explain" || command == "pipeline") {
            rc.lime.check_valid();
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

// --- shared plumbing --------------------------------------------------------

void ensure_out_dir(const RunConfig& rc) {
    std::error_code ec;
    std::filesystem::create_directories(rc.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + rc.out_dir + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

void write_benchmark_csv(const std::vector<BenchmarkRow>& rows, const std::string& path) {
    CsvTable table;
    table.header = {kCoreEdgeColumn, kCoreAmountColumn, kSAmountColumn,
                    kLengthColumn,   kWidthColumn,      kAspectRatioColumn};
    table.rows.reserve(rows.size());
    for (const BenchmarkRow& r : rows) {
        table.rows.push_back({format_double(r.core_edge_nm), format_double(r.core_amount_nmol),
                              format_double(r.s_amount_mg), format_double(r.length_nm),
                              format_double(r.width_nm), format_double(r.aspect_ratio)});
    }
    write_csv_table(path, table);
}

bool csv_has_column(const std::string& path, const std::string& column) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string header;
    if (!std::getline(in, header)) return false;
    if (!header.empty() && header.back() == '\r') header.pop_back();
    std::stringstream line(header);
    std::string cell;
    while (std::getline(line, cell, ',')) {
        if (cell == column) return true;
    }
    return false;
}

// Loads the command's input CSV, keeping origin tags when the file carries
// the augmented-output provenance columns.
Dataset load_input(const RunConfig& rc) {
    if (rc.input.empty()) {
        throw UsageError("this command needs an input CSV (--input or config \"input\")");
    }
    const std::vector<std::string> features = effective_feature_columns(rc);
    const std::string target_col = effective_target_column(rc);
    if (csv_has_column(rc.input, "parent_index")) {
        return read_augmented_csv(rc.input, features, target_col).dataset;
    }
    return load_csv(rc.input, features, target_col);
}

ordered_json metrics_json(const Metrics& m) {
    ordered_json j;
    j["mae"] = m.mae;
    j["mse"] = m.mse;
    j["r2"] = m.r2 ? ordered_json(*m.r2) : ordered_json(nullptr);
    return j;
}

// --- commands ---------------------------------------------------------------
// Each returns the command-specific summary block (sub_seeds, counts,
// metrics, outputs); the runner prepends command/seed/config and writes
// run_summary.json.

ordered_json cmd_synth_data(const RunConfig& rc) {
    if (rc.synth_n == 0) throw UsageError("synth-data: row count must be >= 1");
    const std::uint64_t sub_seed = mix_seed(rc.seed, kSynthStream);
    const std::vector<BenchmarkRow> rows = synth_benchmark_rows(rc.synth_n, sub_seed);
    const std::string path = out_path(rc, kSynthCsv);
    write_benchmark_csv(rows, path);

    ordered_json j;
    j["sub_seeds"]["synth"] = sub_seed;
    j["counts"]["rows"] = rows.size();
    j["outputs"]["synth_data_csv"] = path;
    return j;
}

ordered_json cmd_augment(const RunConfig& rc) {
    const Dataset input = load_input(rc);
    SmoteConfig cfg = rc.smote;
    cfg.seed = mix_seed(rc.seed, kSmoteStream);
    const AugmentResult result = smote_reg(input, cfg, rc.dedup_tol);
    const std::string path = out_path(rc, kAugmentedCsv);
    write_augmented_csv(result, path);

    ordered_json j;
    j["sub_seeds"]["smote"] = cfg.seed;
    j["counts"]["originals"] = result.original_count;
    j["counts"]["splits"] = result.split_count;
    j["counts"]["synthetic_before_dedup"] = result.synthetic_count_before_dedup;
    j["counts"]["duplicates_removed"] = result.duplicates_removed;
    j["counts"]["total"] = result.dataset.size();
    j["outputs"]["augmented_csv"] = path;
    return j;
}

ordered_json cmd_train(const RunConfig& rc) {
    const Dataset input = load_input(rc);
    TrainConfig cfg = rc.train_cfg;
    cfg.seed = mix_seed(rc.seed, kTrainStream);
    const TrainResult run = train(input, cfg);
    const std::string path = out_path(rc, kModelFile);
    save_model(run.model, path);
    const Metrics in_sample = evaluate_holdout(run.model, input);

    ordered_json j;
    j["sub_seeds"]["train"] = cfg.seed;
    j["counts"]["rows"] = input.size();
    j["metrics"]["final_epoch_loss"] = run.report.loss_history.back();
    j["metrics"]["in_sample"] = metrics_json(in_sample);
    j["outputs"]["model"] = path;
    return j;
}

ordered_json cmd_cv(const RunConfig& rc) {
    Dataset data = load_input(rc);
    ordered_json j;
    std::uint64_t smote_seed = 0;
    if (rc.cv_augment) {
        SmoteConfig cfg = rc.smote;
        cfg.seed = smote_seed = mix_seed(rc.seed, kSmoteStream);
        data = smote_reg(data, cfg, rc.dedup_tol).dataset;
    }
    if (rc.k_folds > data.size()) {
        throw UsageError("cv: k = " + std::to_string(rc.k_folds) + " exceeds " +
                         std::to_string(data.size()) + " rows");
    }
    const std::uint64_t cv_seed = mix_seed(rc.seed, kCvStream);
    const CvReport report = cross_validate(data, rc.k_folds, rc.train_cfg, cv_seed, rc.original_eval);

    const std::string json_path = out_path(rc, kCvJson);
    const std::string csv_path = out_path(rc, kCvCsv);
    write_text(json_path, cv_report_to_json(report));
    write_text(csv_path, cv_report_to_csv(report));

    if (rc.cv_augment) j["sub_seeds"]["smote"] = smote_seed;
    j["sub_seeds"]["cv"] = cv_seed;
    j["counts"]["rows"] = data.size();
    j["report"] = ordered_json::parse(cv_report_to_json(report));
    j["outputs"]["cv_report_json"] = json_path;
    j["outputs"]["cv_report_csv"] = csv_path;
    return j;
}

ordered_json cmd_predict(const RunConfig& rc) {
    const Dataset input = load_input(rc);
    const MlpModel model = load_model(effective_model_path(rc));
    if (input.feature_count() != model.input_size()) {
        throw std::invalid_argument("predict: input has " + std::to_string(input.feature_count()) +
                                    " features, model expects " + std::to_string(model.input_size()));
    }
    const std::vector<double> preds = predict_all(model, input);
    std::vector<double> actuals;
    actuals.reserve(input.size());
    for (const Sample& s : input.samples) actuals.push_back(s.target);

    CsvTable table;
    table.header = {"sample_id", "actual", "predicted", "abs_error", "sq_error"};
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double err = preds[i] - actuals[i];
        table.rows.push_back({std::to_string(i + 1), format_double(actuals[i]), format_double(preds[i]),
                              format_double(std::abs(err)), format_double(err * err)});
    }
    const std::string path = out_path(rc, kPredictionsCsv);
    write_csv_table(path, table);
    const Metrics m = compute_metrics(preds, actuals);

    ordered_json j;
    j["counts"]["rows"] = input.size();
    j["metrics"] = metrics_json(m);
    j["outputs"]["predictions_csv"] = path;
    return j;
}

ordered_json cmd_explain(const RunConfig& rc) {
    const Dataset input = load_input(rc);
    const MlpModel model = load_model(effective_model_path(rc));
    if (input.feature_count() != model.input_size()) {
        throw std::invalid_argument("explain: input has " + std::to_string(input.feature_count()) +
                                    " features, model expects " + std::to_string(model.input_size()));
    }
    LimeConfig cfg = rc.lime;
    cfg.seed = mix_seed(rc.seed, kLimeStream);
    const Matrix weights = weight_matrix(model, input, cfg);
    const std::string path = out_path(rc, kWeightsCsv);
    write_weight_matrix_csv(weights, input, path);

    ordered_json j;
    j["sub_seeds"]["lime"] = cfg.seed;
    j["counts"]["rows"] = input.size();
    j["counts"]["features"] = input.feature_count();
    j["outputs"]["weights_csv"] = path;
    return j;
}

// synth-data -> augment -> cv -> train -> predict (fresh holdout) -> explain,
// each stage consuming the previous stage's file exactly as the standalone
// commands would.
ordered_json cmd_pipeline(const RunConfig& rc) {
    if (rc.holdout_n == 0) throw UsageError("pipeline: holdout row count must be >= 1");
    ordered_json stages;
    stages["synth_data"] = cmd_synth_data(rc);

    RunConfig step = rc;
    step.input = out_path(rc, kSynthCsv);
    stages["augment"] = cmd_augment(step);

    step.input = out_path(rc, kAugmentedCsv);
    stages["cv"] = cmd_cv(step);
    stages["train"] = cmd_train(step);

    const std::uint64_t holdout_seed = mix_seed(rc.seed, kHoldoutStream);
    const std::string holdout_path = out_path(rc, kHoldoutCsv);
    write_benchmark_csv(synth_benchmark_rows(rc.holdout_n, holdout_seed), holdout_path);
    step.input = holdout_path;
    stages["predict"] = cmd_predict(step);

    step.input = out_path(rc, kSynthCsv);
    stages["explain"] = cmd_explain(step);

    ordered_json j;
    j["sub_seeds"]["holdout"] = holdout_seed;
    j["counts"]["holdout_rows"] = rc.holdout_n;
    j["stages"] = stages;
    j["outputs"]["holdout_csv"] = holdout_path;
    return j;
}

// --- driver ------------------------------------------------------------------

void emit_error(const char* category, const std::string& message) {
    nlohmann::json j;
    j["category"] = category;
    j["message"] = message;
    std::fputs((j.dump() + "\n").c_str(), stderr);
}

struct FlagValues {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> target;
    std::optional<std::string> input;
    std::optional<std::string> model;
    std::optional<std::size_t> synth_n;
    std::optional<std::size_t> k_folds;
    bool cv_augment = false;
    bool cv_in_training = false;
};

int dispatch(const std::string& command, const FlagValues& fl) {
    RunConfig rc;
    if (!fl.config_path.empty()) load_config_file(fl.config_path, rc);
    if (fl.seed) rc.seed = *fl.seed;
    if (fl.out_dir) rc.out_dir = *fl.out_dir;
    if (fl.target) rc.target = *fl.target;
    if (fl.input) rc.input = *fl.input;
    if (fl.model) rc.model_path = *fl.model;
    if (fl.synth_n) rc.synth_n = *fl.synth_n;
    if (fl.k_folds) rc.k_folds = *fl.k_folds;
    if (fl.cv_augment) rc.cv_augment = true;
    if (fl.cv_in_training) rc.original_eval = OriginalEval::in_training;

    validate_for(command, rc);
    ensure_out_dir(rc);

    ordered_json summary;
    summary["command"] = command;
    summary["seed"] = rc.seed;
    summary["config"] = config_echo(rc);
    if (command == "synth-data")
        summary.update(cmd_synth_data(rc));
    else if (command == "augment")
        summary.update(cmd_augment(rc));
    else if (command == "train")
        summary.update(cmd_train(rc));
    else if (command == "cv")
        summary.update(cmd_cv(rc));
    else if (command == "predict")
        summary.update(cmd_predict(rc));
    else if (command == "explain")
        summary.update(cmd_explain(rc));
    else
        summary.update(cmd_pipeline(rc));

    summary["outputs"][kRunSummary] = out_path(rc, kRunSummary);
    write_text(out_path(rc, kRunSummary), summary.dump(2) + "\n");
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Small-data regression toolkit: oversample a tiny tabular dataset, train a"
                 " feed-forward regressor, cross-validate, and explain predictions."};
    app.name("nanoreg");
    app.require_subcommand(1);

    FlagValues fl;
    auto add_common = [&fl](CLI::App* cmd) {
        cmd->add_option("--config", fl.config_path, "JSON config file; flags override its fields");
        cmd->add_option("--seed", fl.seed, "global seed; every stage derives its own sub-seed");
        cmd->add_option("--out", fl.out_dir, "output directory (created if missing)");
        cmd->add_option("--target", fl.target,
                        "length, width, aspect_ratio, or a target column name");
        return cmd;
    };

    CLI::App* synth = add_common(app.add_subcommand(
        "synth-data", "Generate the synthetic nanorod benchmark dataset as CSV"));
    synth->add_option("--n", fl.synth_n, "number of rows");

    CLI::App* augment = add_common(
        app.add_subcommand("augment", "Oversample a small dataset by subset-wise interpolation"));
    augment->add_option("--input", fl.input, "input CSV");

    CLI::App* train_cmd =
        add_common(app.add_subcommand("train", "Train the feed-forward regressor and save it"));
    train_cmd->add_option("--input", fl.input, "training CSV");

    CLI::App* cv = add_common(app.add_subcommand("cv", "k-fold cross-validation report"));
    cv->add_option("--input", fl.input, "input CSV (typically a pre-augmented file)");
    cv->add_option("--k", fl.k_folds, "number of folds");
    cv->add_flag("--augment", fl.cv_augment, "oversample the input before splitting");
    cv->add_flag("--in-training", fl.cv_in_training,
                 "score original rows with a model trained on all data instead of out-of-fold");

    CLI::App* predict =
        add_common(app.add_subcommand("predict", "Predict a CSV with a saved model"));
    predict->add_option("--input", fl.input, "holdout CSV with actual targets");
    predict->add_option("--model", fl.model, "saved model file");

    CLI::App* explain_cmd = add_common(
        app.add_subcommand("explain", "Per-sample local feature weights for a saved model"));
    explain_cmd->add_option("--input", fl.input, "CSV of samples to explain");
    explain_cmd->add_option("--model", fl.model, "saved model file");

    CLI::App* pipeline = add_common(app.add_subcommand(
        "pipeline", "Full run: synth-data, augment, cv, train, predict, explain"));
    pipeline->add_option("--n", fl.synth_n, "benchmark rows to generate");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error("usage", e.what());
        return kExitUsage;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return dispatch(command, fl);
    } catch (const UsageError& e) {
        emit_error("usage", e.what());
        return kExitUsage;
    } catch (const ConfigError& e) {
        emit_error("config", e.what());
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        emit_error("config", e.what());
        return kExitConfig;
    } catch (const CsvError& e) {
        emit_error("data", e.what());
        return kExitData;
    } catch (const IoError& e) {
        emit_error("io", e.what());
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        emit_error("data", e.what());
        return kExitData;
    } catch (const std::out_of_range& e) {
        emit_error("data", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        emit_error("internal", e.what());
        return kExitInternal;
    }
}

}  // namespace nanoreg
