#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tabml/tabular.hpp"

namespace tabml::preprocess {

/// Bookkeeping for one pipeline run. Each step fills in its own counters;
/// merge() accumulates fragments in pipeline order.
struct Report {
    std::size_t instances_in = 0;
    std::size_t instances_out = 0;
    std::size_t out_of_range_cells = 0;
    std::size_t imputed_cells = 0;
    std::size_t dropped_missing_critical = 0;
    std::size_t dropped_duplicates = 0;
    std::map<std::string, std::vector<double>> per_attribute_cut_points;

    /// instances_out == instances_in - dropped_missing_critical - dropped_duplicates
    bool balanced() const;

    std::string summary() const;
    /// `attribute,cut1,cut2,...` one line per discretized attribute.
    std::string cut_points_csv() const;
};

template <typename T>
struct Result {
    T dataset;
    Report report;
};

/// Numeric cells outside their attribute's declared range become Missing.
Result<Dataset> mask_out_of_range(const Dataset& dataset);

/// Removes rows missing a value in any critical attribute or in the class.
Result<Dataset> drop_missing_critical(const Dataset& dataset, const std::vector<std::string>& critical_attributes);

/// Numeric gaps get the attribute mean, nominal gaps its mode (lowest index on ties).
Result<Dataset> impute_missing(const Dataset& dataset);

/// Drops exact duplicate rows, keeping first occurrences.
Result<Dataset> dedup(const Dataset& dataset);

/// Cut points for one column of values (missing cells excluded by the caller).
/// Walks the sorted distinct values and closes a bin whenever its count is
/// closer to the remaining-count / remaining-bins target than it would be
/// after absorbing the next distinct value. Equal values never straddle a cut.
std::vector<double> equal_frequency_cuts(std::vector<double> values, std::size_t bins);

/// Interval labels "(-inf..c1]", "(c1..c2]", ..., "(ck..+inf)"; "(-inf..+inf)" when there
/// are no cuts. ".." separates the bounds so labels stay CSV-safe.
std::vector<std::string> interval_labels(const std::vector<double>& cuts);

/// Converts the named numeric attributes (all numeric ones when `attribute_names`
/// is nullopt) to nominal interval attributes.
Result<Dataset> discretize_equal_frequency(const Dataset& dataset, std::size_t bins,
                                           const std::optional<std::vector<std::string>>& attribute_names);

/// Applies precomputed cut points (e.g. learned on a training set) to another dataset
/// whose schema matches the undiscretized one.
Dataset apply_cut_points(const Dataset& dataset, const std::map<std::string, std::vector<double>>& cuts);

struct Options {
    std::vector<std::string> critical_attributes;
    /// 0 disables discretization.
    std::size_t bins = 10;
    /// nullopt: every numeric attribute.
    std::optional<std::vector<std::string>> discretize_attributes;
};

/// range mask -> drop_missing_critical -> impute_missing -> dedup -> discretize.
Result<Dataset> run_pipeline(const Dataset& dataset, const Options& options);

}  // namespace tabml::preprocess
