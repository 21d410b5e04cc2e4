#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tabml/eval.hpp"
#include "tabml/preprocess.hpp"
#include "tabml/syngen.hpp"

namespace tabml::experiment {

enum class Mode { TrainingSet, SuppliedTest, CrossValidation, PercentageSplit };

std::string_view mode_name(Mode mode);  // train-set, test-set, cv, split
std::optional<Mode> parse_mode(std::string_view name);

enum class Family { Tree, Bayes };

/// One algorithm entry, written `Name` or `Name:key=value:key=value`.
struct AlgorithmSpec {
    std::string name;  // as written, e.g. "J48"
    std::map<std::string, std::string> params;

    Family family() const;
    friend bool operator==(const AlgorithmSpec&, const AlgorithmSpec&) = default;
};

/// Throws std::invalid_argument for unknown algorithm names or malformed parameters.
AlgorithmSpec parse_algorithm(std::string_view text);
std::vector<AlgorithmSpec> parse_algorithm_list(std::string_view comma_separated);

/// The ten algorithms, tree family first.
std::string_view default_algorithm_list();

/// Builds a trainer. Parameter values are checked here, so a bad value fails
/// before any data is touched. `seed` feeds the learners that shuffle.
eval::Trainer make_trainer(const AlgorithmSpec& spec, std::uint64_t seed);

struct ExperimentConfig {
    std::filesystem::path data;
    std::filesystem::path schema;
    std::filesystem::path test_data;
    /// Used when `data` is empty.
    std::optional<syngen::GenSpec> generator;

    preprocess::Options preprocessing;
    std::vector<AlgorithmSpec> algorithms;
    Mode mode = Mode::CrossValidation;
    std::size_t k = 10;
    double split_fraction = 0.66;
    std::uint64_t seed = 1;

    std::filesystem::path out = "results";
    std::string radar_metric = "rmse";
};

ExperimentConfig default_config();

/// Sets one key (the config-file key, which is also the flag name without `--`).
/// Throws std::invalid_argument for unknown keys or bad values.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Config text: `[section]` headers, `key = value` lines, `#` comments.
/// Sections: data, generate, preprocess, experiment, output.
void apply_config_text(ExperimentConfig& config, std::string_view text);

/// Throws std::invalid_argument when the config cannot describe a run.
void validate(const ExperimentConfig& config);

struct AlgorithmResult {
    AlgorithmSpec spec;
    std::optional<eval::Evaluation> evaluation;
    /// Trained on all preprocessed training data (the cross-validation folds'
    /// models are not kept).
    std::optional<eval::Model> model;
    std::string error;
};

struct ComparisonReport {
    /// Tree family first, then Bayes; config order within each family.
    std::vector<AlgorithmResult> results;
    preprocess::Report preprocessing;
    std::vector<std::string> class_labels;
    std::size_t instances = 0;

    bool partial_failure() const;
    /// Index into results of the most accurate algorithm (first on ties).
    std::optional<std::size_t> best() const;

    std::string csv() const;
    std::string text(const ExperimentConfig& config) const;
};

/// Preprocesses once, then evaluates every listed algorithm under the same mode and seed.
/// A failing algorithm is recorded and the others continue.
ComparisonReport run_compare(const ExperimentConfig& config);

/// Writes report.csv, report.txt, radar.svg, preprocess_report.txt, cut_points.csv
/// and models/<algorithm>.model under config.out. The radar is skipped (with a note
/// in report.txt) when fewer than three algorithms succeeded.
void write_outputs(const ExperimentConfig& config, const ComparisonReport& report);

/// Radar chart of one metric column of a comparison CSV.
/// Throws DataError for fewer than 3 rows, an unknown metric, or an undefined value.
std::string render_radar(std::string_view comparison_csv, std::string_view metric = "rmse");
void render_radar_file(const std::filesystem::path& csv, const std::filesystem::path& svg,
                       std::string_view metric = "rmse");

}  // namespace tabml::experiment
