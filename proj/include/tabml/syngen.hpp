#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tabml/tabular.hpp"

namespace tabml::syngen {

/// Graduate-profile generator settings. Class order: Employed, Unemployed, Undetermined.
struct GenSpec {
    std::size_t n = 1000;
    std::uint64_t seed = 1;
    std::array<double, 3> class_proportions{0.60, 0.25, 0.15};
    /// Probability that a row's informative attributes are drawn from their
    /// class-independent marginals instead of the class-conditional tables.
    double noise = 0.0;
    double missing_rate = 0.0;
    double duplicate_rate = 0.0;
    /// Emit the multi-valued raw Status labels instead of the three outcomes.
    bool raw_status = false;
};

/// Throws std::invalid_argument on proportions that are negative or do not sum to 1,
/// or rates outside their ranges.
void validate(const GenSpec& spec);

inline constexpr std::size_t kStatusIndex = 9;

/// The 21-attribute graduate schema (Status is the class; GPA is numeric[0,4]).
Schema graduate_schema(bool raw_status = false);

/// Rows are drawn one at a time: class, then each attribute in schema order,
/// then the missing-cell mask; each row is followed, with probability
/// duplicate_rate, by a copy of a uniformly chosen earlier row.
Dataset generate(const GenSpec& spec);

/// Raw Status label -> outcome. Isolated here so the assumption can be changed in one place.
const std::vector<std::pair<std::string, std::string>>& status_mapping();

/// Replaces raw Status labels by the three outcomes using `mapping`. Unmapped labels are a DataError.
Dataset collapse_status(const Dataset& raw,
                        const std::vector<std::pair<std::string, std::string>>& mapping = status_mapping());

/// Accuracy of the Bayes-optimal classifier on rows from `spec` before missing
/// cells are injected, computed exactly from the generator's tables
/// (GPA is rounded to 0.01, so its distribution is discrete).
double bayes_rate(const GenSpec& spec);

/// Conditional tables for the informative attributes, exposed for documentation and tests.
struct InformativeTables {
    std::vector<std::vector<double>> faculty;        // [class][value]
    std::vector<std::vector<double>> period;         // PeriodTimeFindwork
    std::vector<std::vector<double>> work_direct;    // WorkDirectGraduate
    std::array<std::pair<double, double>, 3> gpa;    // (mean, sd) before truncation to [0,4]
};
const InformativeTables& informative_tables();

}  // namespace tabml::syngen
