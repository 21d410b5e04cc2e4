// tabml: generate, preprocess, train, predict, compare, radar.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 some algorithms failed.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tabml/eval.hpp"
#include "tabml/experiment.hpp"
#include "tabml/model_io.hpp"
#include "tabml/preprocess.hpp"
#include "tabml/syngen.hpp"

namespace fs = std::filesystem;
using namespace tabml;

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kPartial = 3;

std::vector<std::string> comma_list(const std::string& s) {
    std::vector<std::string> out;
    for (auto part : split(s, ',')) {
        part = trim(part);
        if (!part.empty()) out.emplace_back(part);
    }
    return out;
}

fs::path sidecar_schema(const fs::path& csv) {
    fs::path p = csv;
    p.replace_extension(".schema");
    return p;
}

int cmd_generate(const syngen::GenSpec& spec, const fs::path& out, const std::optional<fs::path>& schema_out) {
    const Dataset d = syngen::generate(spec);
    write_text_file(out, to_csv(d));
    const fs::path schema_path = schema_out.value_or(sidecar_schema(out));
    write_text_file(schema_path, d.schema().declaration());
    fmt::print("wrote {} instances to {} (schema {})\n", d.size(), out.string(), schema_path.string());
    return 0;
}

int cmd_preprocess(const fs::path& data, const fs::path& schema_path, const preprocess::Options& options,
                   const fs::path& out) {
    const Schema schema = read_schema_file(schema_path);
    const Dataset raw = read_csv_file(data, schema);
    const auto result = preprocess::run_pipeline(raw, options);
    write_text_file(out / "clean.csv", to_csv(result.dataset));
    write_text_file(out / "clean.schema", result.dataset.schema().declaration());
    write_text_file(out / "preprocess_report.txt", result.report.summary());
    write_text_file(out / "cut_points.csv", result.report.cut_points_csv());
    fmt::print("{}", result.report.summary());
    return 0;
}

int cmd_train(const fs::path& data, const fs::path& schema_path, const std::string& algorithm, std::uint64_t seed,
              const fs::path& out) {
    const auto spec = experiment::parse_algorithm(algorithm);
    const auto trainer = experiment::make_trainer(spec, seed);
    const Schema schema = read_schema_file(schema_path);
    const Dataset d = read_csv_file(data, schema);
    const eval::Model model = trainer(d);
    write_model_file(out, model);
    const auto e = eval::evaluate(model, d, eval::class_prior(d));
    fmt::print("{}: trained on {} instances, training-set accuracy {} %\nmodel written to {}\n", spec.name, d.size(),
               format_number(e.metrics.accuracy), out.string());
    return 0;
}

int cmd_predict(const fs::path& model_path, const fs::path& data, const std::optional<fs::path>& out) {
    const eval::Model model = read_model_file(model_path);
    const Schema& schema = eval::model_schema(model);
    const Dataset d = read_csv_file(data, schema);
    const auto& labels = schema.class_attribute().labels();
    std::string csv = "instance,actual,predicted";
    for (const auto& l : labels) csv += ",p(" + l + ")";
    csv += '\n';
    std::size_t correct = 0, labelled = 0;
    for (std::size_t r = 0; r < d.size(); ++r) {
        const auto dist = eval::classify(model, d.row(r));
        const std::size_t predicted = eval::argmax(dist);
        const Cell& actual = d.at(r, schema.class_index());
        csv += fmt::format("{},{},{}", r + 1, actual.is_missing() ? "?" : labels[actual.index()], labels[predicted]);
        for (double p : dist) csv += ',' + format_number(p);
        csv += '\n';
        if (!actual.is_missing()) {
            ++labelled;
            correct += actual.index() == predicted ? 1 : 0;
        }
    }
    if (out) {
        write_text_file(*out, csv);
        if (labelled > 0)
            fmt::print("{} predictions written to {}; accuracy on labelled rows {} %\n", d.size(), out->string(),
                       format_number(100.0 * static_cast<double>(correct) / static_cast<double>(labelled)));
    } else {
        std::cout << csv;
    }
    return 0;
}

int cmd_compare(const std::optional<fs::path>& config_path, const std::vector<std::pair<std::string, std::string>>& flags) {
    experiment::ExperimentConfig config = experiment::default_config();
    if (config_path) {
        try {
            experiment::apply_config_text(config, read_text_file(*config_path));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(fmt::format("{}: {}", config_path->string(), e.what()));
        }
    }
    for (const auto& [key, value] : flags) experiment::apply_setting(config, key, value);
    experiment::validate(config);
    const auto report = experiment::run_compare(config);
    experiment::write_outputs(config, report);
    if (auto b = report.best())
        fmt::print("best by accuracy: {} ({} %)\n", report.results[*b].spec.name,
                   format_number(report.results[*b].evaluation->metrics.accuracy));
    for (const auto& r : report.results)
        if (!r.evaluation) fmt::print(stderr, "algorithm {} failed: {}\n", r.spec.name, r.error);
    fmt::print("outputs in {}\n", config.out.string());
    return report.partial_failure() ? kPartial : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tabular classification toolkit: tree and Bayesian learners, evaluation, comparison"};
    app.require_subcommand(1);

    // generate
    syngen::GenSpec gen;
    fs::path gen_out;
    std::optional<fs::path> gen_schema;
    std::string gen_proportions;
    auto* generate = app.add_subcommand("generate", "Write a synthetic graduate-profile dataset");
    generate->add_option("--n", gen.n, "Number of instances")->capture_default_str();
    generate->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
    generate->add_option("--noise", gen.noise, "Probability a row's informative attributes ignore the class")
        ->capture_default_str();
    generate->add_option("--missing-rate", gen.missing_rate, "Probability a non-class cell is blanked")
        ->capture_default_str();
    generate->add_option("--duplicate-rate", gen.duplicate_rate, "Probability a row is followed by a duplicate")
        ->capture_default_str();
    generate->add_option("--proportions", gen_proportions, "Class proportions Employed,Unemployed,Undetermined");
    generate->add_flag("--raw-status", gen.raw_status, "Emit raw multi-valued Status labels");
    generate->add_option("--out", gen_out, "CSV output path")->required();
    generate->add_option("--schema-out", gen_schema, "Schema output path (default: CSV path with .schema)");

    // preprocess
    fs::path pre_data, pre_schema, pre_out;
    std::string pre_critical, pre_discretize;
    std::size_t pre_bins = 10;
    auto* pre = app.add_subcommand("preprocess", "Clean, impute, deduplicate and discretize a dataset");
    pre->add_option("--data", pre_data, "Input CSV")->required();
    pre->add_option("--schema", pre_schema, "Schema declaration file")->required();
    pre->add_option("--critical", pre_critical, "Comma-separated attributes whose missing rows are dropped");
    pre->add_option("--bins", pre_bins, "Equal-frequency bins for numeric attributes (0 keeps them numeric)")
        ->capture_default_str();
    pre->add_option("--discretize", pre_discretize, "Comma-separated numeric attributes to discretize (default all)");
    pre->add_option("--out", pre_out, "Output directory")->required();

    // train
    fs::path train_data, train_schema, train_out;
    std::string train_algorithm;
    std::uint64_t train_seed = 1;
    auto* train = app.add_subcommand("train", "Fit one algorithm on a clean dataset and save the model");
    train->add_option("--data", train_data, "Training CSV (no missing cells)")->required();
    train->add_option("--schema", train_schema, "Schema declaration file")->required();
    train->add_option("--algorithm", train_algorithm, "Algorithm, e.g. C4.5 or AODE:frequency_limit=2")->required();
    train->add_option("--seed", train_seed, "Seed for learners that shuffle")->capture_default_str();
    train->add_option("--out", train_out, "Model file")->required();

    // predict
    fs::path predict_model, predict_data;
    std::optional<fs::path> predict_out;
    auto* predict = app.add_subcommand("predict", "Classify a CSV with a saved model");
    predict->add_option("--model", predict_model, "Model file")->required();
    predict->add_option("--data", predict_data, "CSV over the model's schema")->required();
    predict->add_option("--out", predict_out, "Output CSV (default: stdout)");

    // compare
    std::optional<fs::path> config_path;
    std::map<std::string, std::string> compare_values;
    std::vector<std::string> compare_order;
    auto* compare = app.add_subcommand("compare", "Evaluate several algorithms under one protocol");
    compare->add_option("--config", config_path, "Config file ([section] / key = value)");
    const std::vector<std::pair<std::string, std::string>> compare_flags = {
        {"data", "Input CSV"},
        {"schema", "Schema declaration file"},
        {"test-data", "Supplied test CSV (mode test-set)"},
        {"algorithms", "Comma-separated algorithms, Name[:key=value...]"},
        {"mode", "train-set | test-set | cv | split"},
        {"k", "Folds for cv"},
        {"split-fraction", "Training fraction for split"},
        {"seed", "Seed for folds, splits, generator and learners"},
        {"critical", "Comma-separated critical attributes"},
        {"bins", "Equal-frequency bins (0 disables)"},
        {"discretize", "Numeric attributes to discretize, or 'all'"},
        {"out", "Output directory"},
        {"metric", "Radar chart metric column"},
        {"n", "Generate data: instance count"},
        {"noise", "Generate data: noise"},
        {"missing-rate", "Generate data: missing-cell rate"},
        {"duplicate-rate", "Generate data: duplicate rate"},
        {"proportions", "Generate data: class proportions"},
    };
    for (const auto& [key, help] : compare_flags) {
        const std::string k = key;
        compare->add_option_function<std::string>(
            "--" + key,
            [&compare_values, &compare_order, k](const std::string& v) {
                if (!compare_values.contains(k)) compare_order.push_back(k);
                compare_values[k] = v;
            },
            help);
    }

    // radar
    fs::path radar_data, radar_out;
    std::string radar_metric = "rmse";
    auto* radar = app.add_subcommand("radar", "Draw a radar chart from a comparison CSV");
    radar->add_option("--data", radar_data, "Comparison CSV (report.csv)")->required();
    radar->add_option("--metric", radar_metric, "Metric column")->capture_default_str();
    radar->add_option("--out", radar_out, "SVG output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    try {
        if (generate->parsed()) {
            if (!gen_proportions.empty()) {
                const auto items = comma_list(gen_proportions);
                if (items.size() != 3) throw std::invalid_argument("--proportions needs three values");
                for (std::size_t i = 0; i < 3; ++i) {
                    auto v = parse_number(items[i]);
                    if (!v) throw std::invalid_argument(fmt::format("--proportions: '{}' is not a number", items[i]));
                    gen.class_proportions[i] = *v;
                }
            }
            return cmd_generate(gen, gen_out, gen_schema);
        }
        if (pre->parsed()) {
            preprocess::Options options;
            options.critical_attributes = comma_list(pre_critical);
            options.bins = pre_bins;
            if (!pre_discretize.empty() && pre_discretize != "all") options.discretize_attributes = comma_list(pre_discretize);
            return cmd_preprocess(pre_data, pre_schema, options, pre_out);
        }
        if (train->parsed()) return cmd_train(train_data, train_schema, train_algorithm, train_seed, train_out);
        if (predict->parsed()) return cmd_predict(predict_model, predict_data, predict_out);
        if (compare->parsed()) {
            std::vector<std::pair<std::string, std::string>> flags;
            for (const auto& k : compare_order) flags.emplace_back(k, compare_values[k]);
            return cmd_compare(config_path, flags);
        }
        if (radar->parsed()) {
            experiment::render_radar_file(radar_data, radar_out, radar_metric);
            fmt::print("wrote {}\n", radar_out.string());
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kUsage;
    } catch (const DataError& e) {
        fmt::print(stderr, "data error: {}\n", e.what());
        return kData;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kData;
    }
    return kUsage;
}
