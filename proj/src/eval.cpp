#include "tabml/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace tabml::eval {

const Schema& model_schema(const Model& model) {
    return *std::visit([](const auto& m) -> const std::shared_ptr<const Schema>& { return m.schema; }, model);
}

std::string model_name(const Model& model) {
    return std::visit([](const auto& m) { return std::string(variant_name(m.variant)); }, model);
}

std::vector<double> classify(const Model& model, Row instance) {
    const Schema& schema = model_schema(model);
    if (instance.size() != schema.size())
        throw DataError(fmt::format("instance has {} cells, model expects {}", instance.size(), schema.size()));
    for (std::size_t i = 0; i < schema.size(); ++i) check_cell(schema.attribute(i), instance[i]);
    return std::visit([&](const auto& m) { return m.distribution(instance); }, model);
}

std::size_t argmax(std::span<const double> distribution) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < distribution.size(); ++c)
        if (distribution[c] > distribution[best]) best = c;
    return best;
}

Prediction make_prediction(std::vector<double> distribution, std::size_t actual_index) {
    Prediction p;
    p.predicted_index = argmax(distribution);
    p.distribution = std::move(distribution);
    p.actual_index = actual_index;
    return p;
}

std::size_t ConfusionMatrix::total() const { return std::accumulate(cells_.begin(), cells_.end(), std::size_t{0}); }

std::size_t ConfusionMatrix::correct() const {
    std::size_t s = 0;
    for (std::size_t c = 0; c < k_; ++c) s += at(c, c);
    return s;
}

std::size_t ConfusionMatrix::row_total(std::size_t actual) const {
    std::size_t s = 0;
    for (std::size_t p = 0; p < k_; ++p) s += at(actual, p);
    return s;
}

std::size_t ConfusionMatrix::column_total(std::size_t predicted) const {
    std::size_t s = 0;
    for (std::size_t a = 0; a < k_; ++a) s += at(a, predicted);
    return s;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    if (other.k_ != k_) throw std::invalid_argument("confusion matrices of different sizes");
    for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] += other.cells_[i];
    return *this;
}

ConfusionMatrix confusion_of(std::span<const Prediction> predictions, std::size_t classes) {
    ConfusionMatrix m(classes);
    for (const Prediction& p : predictions) {
        if (p.actual_index >= classes || p.predicted_index >= classes)
            throw std::invalid_argument("prediction class index out of range");
        m.add(p.actual_index, p.predicted_index);
    }
    return m;
}

Metrics compute_metrics(std::span<const Prediction> predictions, std::span<const double> prior) {
    if (predictions.empty()) throw std::invalid_argument("compute_metrics: no predictions");
    const std::size_t K = prior.size();
    if (K == 0) throw std::invalid_argument("compute_metrics: empty prior");
    const double prior_sum = std::accumulate(prior.begin(), prior.end(), 0.0);
    if (std::abs(prior_sum - 1.0) > 1e-9) throw std::invalid_argument("compute_metrics: prior does not sum to 1");
    for (const Prediction& p : predictions)
        if (p.distribution.size() != K) throw std::invalid_argument("compute_metrics: distribution size != K");

    const ConfusionMatrix cm = confusion_of(predictions, K);
    const auto n = static_cast<double>(predictions.size());

    Metrics m;
    m.accuracy = 100.0 * static_cast<double>(cm.correct()) / n;
    m.error_rate = 100.0 - m.accuracy;

    const double p_o = static_cast<double>(cm.correct()) / n;
    double p_e = 0.0;
    for (std::size_t c = 0; c < K; ++c)
        p_e += static_cast<double>(cm.row_total(c)) * static_cast<double>(cm.column_total(c));
    p_e /= n * n;
    m.kappa = p_e == 1.0 ? 0.0 : (p_o - p_e) / (1.0 - p_e);

    double abs_err = 0.0, sq_err = 0.0, abs_base = 0.0, sq_base = 0.0;
    for (const Prediction& p : predictions) {
        for (std::size_t c = 0; c < K; ++c) {
            const double t = c == p.actual_index ? 1.0 : 0.0;
            const double d = p.distribution[c] - t;
            const double b = prior[c] - t;
            abs_err += std::abs(d);
            sq_err += d * d;
            abs_base += std::abs(b);
            sq_base += b * b;
        }
    }
    const double cells = n * static_cast<double>(K);
    m.mae = abs_err / cells;
    m.rmse = std::sqrt(sq_err / cells);
    if (abs_base > 0.0) m.rae = 100.0 * abs_err / abs_base;
    if (sq_base > 0.0) m.rrse = 100.0 * std::sqrt(sq_err / sq_base);
    return m;
}

std::vector<double> class_prior(const Dataset& training) {
    const auto counts = training.class_counts();
    const double total =
        static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}) + counts.size());
    std::vector<double> prior;
    prior.reserve(counts.size());
    for (std::size_t c : counts) prior.push_back((static_cast<double>(c) + 1.0) / total);
    return prior;
}

namespace {

void require_same_schema(const Schema& model, const Schema& data) {
    if (!(model == data)) throw DataError("test set schema does not match the model's schema");
}

}  // namespace

Evaluation evaluate(const Model& model, const Dataset& test, std::vector<double> prior) {
    require_same_schema(model_schema(model), test.schema());
    if (test.empty()) throw DataError("test set is empty");
    Evaluation e;
    e.predictions.reserve(test.size());
    for (std::size_t r = 0; r < test.size(); ++r)
        e.predictions.push_back(make_prediction(classify(model, test.row(r)), test.class_of(r)));
    e.confusion = confusion_of(e.predictions, test.schema().class_count());
    e.metrics = compute_metrics(e.predictions, prior);
    e.prior = std::move(prior);
    return e;
}

Evaluation cross_validate(const Trainer& trainer, const Dataset& dataset, std::size_t k, std::uint64_t seed) {
    const auto folds = stratified_kfold(dataset, k, seed);
    const std::size_t K = dataset.schema().class_count();
    Evaluation e;
    e.prior = class_prior(dataset);
    e.confusion = ConfusionMatrix(K);
    e.predictions.reserve(dataset.size());
    for (std::size_t f = 0; f < folds.size(); ++f) {
        Model model;
        try {
            model = trainer(folds[f].train);
        } catch (const DataError& ex) {
            throw DataError(fmt::format("fold {}: {}", f, ex.what()));
        } catch (const std::invalid_argument& ex) {
            throw std::invalid_argument(fmt::format("fold {}: {}", f, ex.what()));
        } catch (const std::exception& ex) {
            throw std::runtime_error(fmt::format("fold {}: {}", f, ex.what()));
        }
        const Evaluation fold = evaluate(model, folds[f].test, class_prior(folds[f].train));
        e.confusion += fold.confusion;
        e.per_fold_confusion.push_back(fold.confusion);
        e.per_fold_metrics.push_back(fold.metrics);
        e.predictions.insert(e.predictions.end(), fold.predictions.begin(), fold.predictions.end());
    }
    e.metrics = compute_metrics(e.predictions, e.prior);
    return e;
}

std::string_view csv_header() { return "algorithm,accuracy,error_rate,kappa,mae,rmse,rae,rrse"; }

namespace {

std::string optional_number(const std::optional<double>& v) {
    return v ? format_number(*v) : std::string(kUndefined);
}

}  // namespace

std::string csv_row(std::string_view algorithm, const Metrics& m) {
    if (algorithm.find_first_of(",\n\r") != std::string_view::npos)
        throw std::invalid_argument("algorithm name must not contain commas or line breaks");
    return fmt::format("{},{},{},{},{},{},{},{}", algorithm, format_number(m.accuracy), format_number(m.error_rate),
                       format_number(m.kappa), format_number(m.mae), format_number(m.rmse), optional_number(m.rae),
                       optional_number(m.rrse));
}

std::string format_report(std::string_view algorithm, const Evaluation& e,
                          const std::vector<std::string>& class_labels) {
    const Metrics& m = e.metrics;
    const std::size_t n = e.confusion.total();
    auto percent = [](const std::optional<double>& v) {
        return v ? fmt::format("{:.4f} %", *v) : std::string(kUndefined);
    };
    std::string out = fmt::format("=== {} ===\n\n", algorithm);
    out += fmt::format("Correctly Classified Instances     {:>8} {:>10.4f} %\n", e.confusion.correct(), m.accuracy);
    out += fmt::format("Incorrectly Classified Instances   {:>8} {:>10.4f} %\n", n - e.confusion.correct(),
                       m.error_rate);
    out += fmt::format("Kappa statistic                    {:>8.4f}\n", m.kappa);
    out += fmt::format("Mean absolute error                {:>8.4f}\n", m.mae);
    out += fmt::format("Root mean squared error            {:>8.4f}\n", m.rmse);
    out += fmt::format("Relative absolute error            {}\n", percent(m.rae));
    out += fmt::format("Root relative squared error        {}\n", percent(m.rrse));
    out += fmt::format("Total Number of Instances          {:>8}\n", n);
    if (!e.per_fold_metrics.empty()) {
        double lo = 100.0, hi = 0.0;
        for (const Metrics& f : e.per_fold_metrics) {
            lo = std::min(lo, f.accuracy);
            hi = std::max(hi, f.accuracy);
        }
        out += fmt::format("Folds                              {:>8}   (fold accuracy {:.2f} .. {:.2f} %)\n",
                           e.per_fold_metrics.size(), lo, hi);
    }

    out += "\n=== Confusion Matrix ===\n\n";
    const std::size_t K = e.confusion.classes();
    std::size_t width = 4;
    for (std::size_t a = 0; a < K; ++a)
        for (std::size_t p = 0; p < K; ++p) width = std::max(width, fmt::formatted_size("{}", e.confusion.at(a, p)) + 1);
    auto letter = [](std::size_t c) {
        std::string s;
        do {
            s.insert(s.begin(), static_cast<char>('a' + c % 26));
            c /= 26;
        } while (c-- > 0);
        return s;
    };
    for (std::size_t p = 0; p < K; ++p) out += fmt::format("{:>{}}", letter(p), width);
    out += "   <-- classified as\n";
    for (std::size_t a = 0; a < K; ++a) {
        for (std::size_t p = 0; p < K; ++p) out += fmt::format("{:>{}}", e.confusion.at(a, p), width);
        out += fmt::format(" | {} = {}\n", letter(a), a < class_labels.size() ? class_labels[a] : "?");
    }
    return out;
}

}  // namespace tabml::eval
