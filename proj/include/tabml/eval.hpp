#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tabml/bayes.hpp"
#include "tabml/tabular.hpp"
#include "tabml/trees.hpp"

namespace tabml::eval {

using Model = std::variant<bayes::BayesModel, trees::TreeModel>;

const Schema& model_schema(const Model& model);
std::string model_name(const Model& model);

/// Class distribution for one instance. Throws DataError when the row does not
/// fit the model's schema (arity or cell kinds); Missing cells are allowed.
std::vector<double> classify(const Model& model, Row instance);

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> distribution);

struct Prediction {
    std::vector<double> distribution;
    std::size_t predicted_index = 0;
    std::size_t actual_index = 0;

    friend bool operator==(const Prediction&, const Prediction&) = default;
};

Prediction make_prediction(std::vector<double> distribution, std::size_t actual_index);

/// K x K counts indexed (actual, predicted).
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t classes) : k_(classes), cells_(classes * classes, 0) {}

    std::size_t classes() const { return k_; }
    std::size_t at(std::size_t actual, std::size_t predicted) const { return cells_[actual * k_ + predicted]; }
    void add(std::size_t actual, std::size_t predicted, std::size_t times = 1) { cells_[actual * k_ + predicted] += times; }

    std::size_t total() const;
    std::size_t correct() const;
    std::size_t row_total(std::size_t actual) const;
    std::size_t column_total(std::size_t predicted) const;

    ConfusionMatrix& operator+=(const ConfusionMatrix& other);
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::size_t k_ = 0;
    std::vector<std::size_t> cells_;
};

ConfusionMatrix confusion_of(std::span<const Prediction> predictions, std::size_t classes);

struct Metrics {
    double accuracy = 0.0;    // percent
    double error_rate = 0.0;  // percent, 100 - accuracy
    double kappa = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
    /// Percent; nullopt when the prior predictor makes no error at all.
    std::optional<double> rae;
    std::optional<double> rrse;

    friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// The seven-column record. `prior` is the baseline distribution for rae/rrse.
Metrics compute_metrics(std::span<const Prediction> predictions, std::span<const double> prior);

/// Training-set class frequencies with add-1 smoothing.
std::vector<double> class_prior(const Dataset& training);

struct Evaluation {
    ConfusionMatrix confusion;
    Metrics metrics;
    std::vector<double> prior;
    std::vector<Prediction> predictions;
    /// Cross-validation only, in fold order.
    std::vector<Metrics> per_fold_metrics;
    std::vector<ConfusionMatrix> per_fold_confusion;

    friend bool operator==(const Evaluation&, const Evaluation&) = default;
};

Evaluation evaluate(const Model& model, const Dataset& test, std::vector<double> prior);

using Trainer = std::function<Model(const Dataset&)>;

/// Stratified k-fold: each fold is predicted by a model trained on the other k-1;
/// metrics are computed once on the pooled predictions with the full-dataset prior.
Evaluation cross_validate(const Trainer& trainer, const Dataset& dataset, std::size_t k = 10, std::uint64_t seed = 1);

/// `algorithm,accuracy,error_rate,kappa,mae,rmse,rae,rrse`
std::string_view csv_header();
std::string csv_row(std::string_view algorithm, const Metrics& metrics);
/// Text used in CSV/report cells for an undefined rae/rrse.
inline constexpr std::string_view kUndefined = "undefined";

/// Multi-line human-readable summary: instance counts, the metrics, then the confusion matrix.
std::string format_report(std::string_view algorithm, const Evaluation& evaluation,
                          const std::vector<std::string>& class_labels);

}  // namespace tabml::eval
