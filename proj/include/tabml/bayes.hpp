#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tabml/tabular.hpp"

namespace tabml::bayes {

enum class Variant { NaiveBayes, AODE, WAODE, HNB, TAN };

std::string_view variant_name(Variant v);
std::optional<Variant> parse_variant(std::string_view name);

/// Sufficient statistics for every Bayesian learner here: N, N(c), N(c, a_i=v)
/// and N(c, a_i=v, a_j=w) over the nominal, non-class attributes ("tracked"
/// attributes). Missing cells are not counted. Values are flattened: attribute
/// i occupies slots [offset(i), offset(i) + values(i)).
class FrequencyCube {
public:
    FrequencyCube() = default;
    /// `with_pairs` = false skips the attribute-pair table (NaiveBayes needs only singles).
    explicit FrequencyCube(const Schema& schema, bool with_pairs = true);

    static FrequencyCube count(const Dataset& dataset, bool with_pairs = true);
    static FrequencyCube count(const Dataset& dataset, std::span<const std::size_t> rows, bool with_pairs = true);

    void add(Row row);

    std::size_t class_count() const { return classes_; }
    std::size_t attribute_count() const { return values_.size(); }
    bool tracked(std::size_t i) const { return values_[i] > 0; }
    std::size_t values(std::size_t i) const { return values_[i]; }
    std::size_t offset(std::size_t i) const { return offsets_[i]; }
    std::size_t slots() const { return slots_; }
    bool has_pairs() const { return with_pairs_; }

    double total() const { return total_; }
    double class_total(std::size_t c) const { return class_[c]; }
    double count(std::size_t c, std::size_t i, std::size_t v) const { return single_[c * slots_ + offsets_[i] + v]; }
    double value_total(std::size_t i, std::size_t v) const;
    double pair_count(std::size_t c, std::size_t i, std::size_t v, std::size_t j, std::size_t w) const {
        return pair_[(c * slots_ + offsets_[i] + v) * slots_ + offsets_[j] + w];
    }

    // Raw storage, for serialization.
    const std::vector<double>& class_counts() const { return class_; }
    const std::vector<double>& single_counts() const { return single_; }
    const std::vector<double>& pair_counts() const { return pair_; }
    static FrequencyCube from_raw(const Schema& schema, double total, std::vector<double> class_counts,
                                  std::vector<double> single, std::vector<double> pair);

    friend bool operator==(const FrequencyCube&, const FrequencyCube&) = default;

private:
    std::size_t classes_ = 0;
    std::size_t class_index_ = 0;
    std::vector<std::size_t> values_;
    std::vector<std::size_t> offsets_;
    std::size_t slots_ = 0;
    bool with_pairs_ = true;
    double total_ = 0.0;
    std::vector<double> class_;
    std::vector<double> single_;
    std::vector<double> pair_;
};

struct Gaussian {
    double mean = 0.0;
    double variance = 1.0;
    friend bool operator==(const Gaussian&, const Gaussian&) = default;
};

inline constexpr double kVarianceFloor = 1e-6;

/// A trained Bayesian classifier. Fields not used by a variant stay empty.
struct BayesModel {
    Variant variant = Variant::NaiveBayes;
    std::shared_ptr<const Schema> schema;
    FrequencyCube cube;
    double laplace = 1.0;
    /// AODE/WAODE: a parent value must have been seen this many times.
    std::size_t frequency_limit = 1;
    /// WAODE: I(A_j; C) per attribute (0 for untracked attributes).
    std::vector<double> parent_weights;
    /// HNB: hidden-parent mixing weights W[i][j], rows sum to 1 over tracked j != i.
    std::vector<std::vector<double>> hidden_weights;
    /// TAN: tree parent per attribute; nullopt for the root and untracked attributes.
    std::vector<std::optional<std::size_t>> tree_parents;
    /// NaiveBayes: per numeric attribute, one Gaussian per class (empty for other attributes).
    std::vector<std::vector<Gaussian>> gaussians;

    /// Class distribution for one row over the model's schema (class cell ignored).
    std::vector<double> distribution(Row row) const;

    friend bool operator==(const BayesModel& a, const BayesModel& b);
};

BayesModel train_naive_bayes(const Dataset& dataset, double laplace = 1.0);
/// Row-subset form used by NBTree leaves.
BayesModel train_naive_bayes(const Dataset& dataset, std::span<const std::size_t> rows, double laplace = 1.0);
BayesModel train_aode(const Dataset& dataset, double laplace = 1.0, std::size_t frequency_limit = 1);
BayesModel train_waode(const Dataset& dataset, double laplace = 1.0);
BayesModel train_hnb(const Dataset& dataset, double laplace = 1.0);
BayesModel train_tan(const Dataset& dataset, double laplace = 1.0);

/// I(A_i; C) in bits from Laplace-smoothed joint frequencies.
double mutual_information(const FrequencyCube& cube, std::size_t i, double laplace);
/// I(A_i; A_j | C) in bits from Laplace-smoothed joint frequencies.
double conditional_mutual_information(const FrequencyCube& cube, std::size_t i, std::size_t j, double laplace);

/// Maximum-weight spanning tree over `nodes` (Kruskal; ties prefer the lower
/// (i, j) pair), oriented away from nodes.front(). Returns parent per attribute index.
std::vector<std::optional<std::size_t>> maximum_spanning_tree(
    std::size_t attribute_count, std::span<const std::size_t> nodes,
    const std::vector<std::vector<double>>& weights);

}  // namespace tabml::bayes
