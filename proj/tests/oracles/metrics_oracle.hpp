#pragma once

// Reference implementation of the seven comparison metrics, written from the
// formulas alone: plain loops, long double accumulation, no shared helpers
// with the library.

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace oracle {

struct PredictionRecord {
    std::vector<double> p;  // distribution
    std::size_t actual;
};

struct MetricValues {
    double accuracy, error_rate, kappa, mae, rmse;
    std::optional<double> rae, rrse;
};

inline std::size_t first_max(const std::vector<double>& p) {
    std::size_t best = 0;
    for (std::size_t c = 0; c < p.size(); ++c)
        if (p[c] > p[best]) best = c;
    return best;
}

inline MetricValues metrics(const std::vector<PredictionRecord>& preds, const std::vector<double>& prior) {
    const std::size_t n = preds.size();
    const std::size_t k = prior.size();

    long double hits = 0;
    for (const auto& r : preds)
        if (first_max(r.p) == r.actual) hits += 1;

    // p_e: for every class, fraction of actuals times fraction of predictions.
    long double pe = 0;
    for (std::size_t c = 0; c < k; ++c) {
        long double actual_c = 0, predicted_c = 0;
        for (const auto& r : preds) {
            if (r.actual == c) actual_c += 1;
            if (first_max(r.p) == c) predicted_c += 1;
        }
        pe += (actual_c / n) * (predicted_c / n);
    }
    const long double po = hits / n;

    long double abs_sum = 0, sq_sum = 0, abs_prior = 0, sq_prior = 0;
    for (const auto& r : preds)
        for (std::size_t c = 0; c < k; ++c) {
            const long double t = (c == r.actual) ? 1.0L : 0.0L;
            abs_sum += std::fabs(static_cast<long double>(r.p[c]) - t);
            sq_sum += (r.p[c] - t) * (r.p[c] - t);
            abs_prior += std::fabs(static_cast<long double>(prior[c]) - t);
            sq_prior += (prior[c] - t) * (prior[c] - t);
        }

    MetricValues m;
    m.accuracy = static_cast<double>(100.0L * hits / n);
    m.error_rate = static_cast<double>(100.0L - 100.0L * hits / n);
    m.kappa = (pe == 1.0L) ? 0.0 : static_cast<double>((po - pe) / (1.0L - pe));
    m.mae = static_cast<double>(abs_sum / (n * k));
    m.rmse = static_cast<double>(std::sqrt(sq_sum / (n * k)));
    if (abs_prior != 0) m.rae = static_cast<double>(100.0L * abs_sum / abs_prior);
    if (sq_prior != 0) m.rrse = static_cast<double>(100.0L * std::sqrt(sq_sum / sq_prior));
    return m;
}

}  // namespace oracle
