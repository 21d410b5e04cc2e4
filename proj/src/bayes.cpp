#include "tabml/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>

namespace tabml::bayes {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

double log_sum_exp(std::span<const double> terms) {
    double hi = kNegInf;
    for (double t : terms) hi = std::max(hi, t);
    if (hi == kNegInf) return kNegInf;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - hi);
    return hi + std::log(s);
}

/// Max-subtracted softmax; uniform when every class is impossible.
std::vector<double> normalize_log_scores(std::vector<double> scores) {
    const double hi = *std::max_element(scores.begin(), scores.end());
    if (hi == kNegInf) {
        std::fill(scores.begin(), scores.end(), 1.0 / static_cast<double>(scores.size()));
        return scores;
    }
    double sum = 0.0;
    for (double& s : scores) {
        s = std::exp(s - hi);
        sum += s;
    }
    for (double& s : scores) s /= sum;
    return scores;
}

}  // namespace

std::string_view variant_name(Variant v) {
    switch (v) {
        case Variant::NaiveBayes: return "NaiveBayes";
        case Variant::AODE: return "AODE";
        case Variant::WAODE: return "WAODE";
        case Variant::HNB: return "HNB";
        case Variant::TAN: return "TAN";
    }
    return "?";
}

std::optional<Variant> parse_variant(std::string_view name) {
    for (Variant v : {Variant::NaiveBayes, Variant::AODE, Variant::WAODE, Variant::HNB, Variant::TAN})
        if (variant_name(v) == name) return v;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// FrequencyCube

FrequencyCube::FrequencyCube(const Schema& schema, bool with_pairs)
    : classes_(schema.class_count()), class_index_(schema.class_index()), with_pairs_(with_pairs) {
    values_.resize(schema.size(), 0);
    offsets_.resize(schema.size(), 0);
    for (std::size_t i = 0; i < schema.size(); ++i) {
        offsets_[i] = slots_;
        if (i != class_index_ && schema.attribute(i).is_nominal()) {
            values_[i] = schema.attribute(i).value_count();
            slots_ += values_[i];
        }
    }
    class_.assign(classes_, 0.0);
    single_.assign(classes_ * slots_, 0.0);
    if (with_pairs_) pair_.assign(classes_ * slots_ * slots_, 0.0);
}

FrequencyCube FrequencyCube::count(const Dataset& dataset, bool with_pairs) {
    FrequencyCube cube(dataset.schema(), with_pairs);
    for (std::size_t r = 0; r < dataset.size(); ++r) cube.add(dataset.row(r));
    return cube;
}

FrequencyCube FrequencyCube::count(const Dataset& dataset, std::span<const std::size_t> rows, bool with_pairs) {
    FrequencyCube cube(dataset.schema(), with_pairs);
    for (std::size_t r : rows) cube.add(dataset.row(r));
    return cube;
}

void FrequencyCube::add(Row row) {
    const Cell& cls = row[class_index_];
    if (cls.is_missing()) return;
    const std::size_t c = cls.index();
    total_ += 1.0;
    class_[c] += 1.0;
    std::vector<std::size_t> slots;
    slots.reserve(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (values_[i] > 0 && row[i].is_nominal()) slots.push_back(offsets_[i] + row[i].index());
    double* single = single_.data() + c * slots_;
    for (std::size_t a : slots) single[a] += 1.0;
    if (!with_pairs_) return;
    double* pair = pair_.data() + c * slots_ * slots_;
    for (std::size_t a : slots)
        for (std::size_t b : slots) pair[a * slots_ + b] += 1.0;
}

double FrequencyCube::value_total(std::size_t i, std::size_t v) const {
    double s = 0.0;
    for (std::size_t c = 0; c < classes_; ++c) s += count(c, i, v);
    return s;
}

FrequencyCube FrequencyCube::from_raw(const Schema& schema, double total, std::vector<double> class_counts,
                                      std::vector<double> single, std::vector<double> pair) {
    FrequencyCube cube(schema, !pair.empty());
    if (class_counts.size() != cube.class_.size() || single.size() != cube.single_.size() ||
        pair.size() != cube.pair_.size())
        throw DataError("frequency table sizes do not match the schema");
    cube.total_ = total;
    cube.class_ = std::move(class_counts);
    cube.single_ = std::move(single);
    cube.pair_ = std::move(pair);
    return cube;
}

bool operator==(const BayesModel& a, const BayesModel& b) {
    const bool same_schema = (a.schema == b.schema) || (a.schema && b.schema && *a.schema == *b.schema);
    return same_schema && a.variant == b.variant && a.cube == b.cube && a.laplace == b.laplace &&
           a.frequency_limit == b.frequency_limit && a.parent_weights == b.parent_weights &&
           a.hidden_weights == b.hidden_weights && a.tree_parents == b.tree_parents && a.gaussians == b.gaussians;
}

// ---------------------------------------------------------------------------
// Information measures

double mutual_information(const FrequencyCube& cube, std::size_t i, double laplace) {
    const std::size_t K = cube.class_count();
    const std::size_t V = cube.values(i);
    const double denom = cube.total() + laplace * static_cast<double>(K * V);
    if (!(denom > 0.0)) return 0.0;
    std::vector<double> joint(K * V), pv(V, 0.0), pc(K, 0.0);
    for (std::size_t c = 0; c < K; ++c)
        for (std::size_t v = 0; v < V; ++v) {
            const double p = (cube.count(c, i, v) + laplace) / denom;
            joint[c * V + v] = p;
            pv[v] += p;
            pc[c] += p;
        }
    double mi = 0.0;
    for (std::size_t c = 0; c < K; ++c)
        for (std::size_t v = 0; v < V; ++v) {
            const double p = joint[c * V + v];
            if (p > 0.0) mi += p * std::log2(p / (pv[v] * pc[c]));
        }
    return std::max(mi, 0.0);
}

double conditional_mutual_information(const FrequencyCube& cube, std::size_t i, std::size_t j, double laplace) {
    const std::size_t K = cube.class_count();
    const std::size_t Vi = cube.values(i);
    const std::size_t Vj = cube.values(j);
    const double denom = cube.total() + laplace * static_cast<double>(K * Vi * Vj);
    if (!(denom > 0.0)) return 0.0;
    double cmi = 0.0;
    std::vector<double> joint(Vi * Vj), pi(Vi), pj(Vj);
    for (std::size_t c = 0; c < K; ++c) {
        std::fill(pi.begin(), pi.end(), 0.0);
        std::fill(pj.begin(), pj.end(), 0.0);
        double pc = 0.0;
        for (std::size_t v = 0; v < Vi; ++v)
            for (std::size_t w = 0; w < Vj; ++w) {
                const double p = (cube.pair_count(c, i, v, j, w) + laplace) / denom;
                joint[v * Vj + w] = p;
                pi[v] += p;
                pj[w] += p;
                pc += p;
            }
        for (std::size_t v = 0; v < Vi; ++v)
            for (std::size_t w = 0; w < Vj; ++w) {
                const double p = joint[v * Vj + w];
                if (p > 0.0) cmi += p * std::log2(p * pc / (pi[v] * pj[w]));
            }
    }
    return std::max(cmi, 0.0);
}

std::vector<std::optional<std::size_t>> maximum_spanning_tree(std::size_t attribute_count,
                                                              std::span<const std::size_t> nodes,
                                                              const std::vector<std::vector<double>>& weights) {
    std::vector<std::optional<std::size_t>> parent(attribute_count);
    if (nodes.size() < 2) return parent;

    struct Edge {
        std::size_t i, j;
        double w;
    };
    std::vector<Edge> edges;
    for (std::size_t a = 0; a < nodes.size(); ++a)
        for (std::size_t b = a + 1; b < nodes.size(); ++b)
            edges.push_back({nodes[a], nodes[b], weights[nodes[a]][nodes[b]]});
    std::stable_sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
        if (x.w != y.w) return x.w > y.w;
        return std::tie(x.i, x.j) < std::tie(y.i, y.j);
    });

    std::vector<std::size_t> root(attribute_count);
    std::iota(root.begin(), root.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (root[x] != x) x = root[x] = root[root[x]];
        return x;
    };
    std::vector<std::vector<std::size_t>> adjacent(attribute_count);
    std::size_t taken = 0;
    for (const Edge& e : edges) {
        const auto ri = find(e.i), rj = find(e.j);
        if (ri == rj) continue;
        root[ri] = rj;
        adjacent[e.i].push_back(e.j);
        adjacent[e.j].push_back(e.i);
        if (++taken == nodes.size() - 1) break;
    }

    std::vector<bool> seen(attribute_count, false);
    std::vector<std::size_t> queue{nodes.front()};
    seen[nodes.front()] = true;
    for (std::size_t q = 0; q < queue.size(); ++q) {
        auto next = adjacent[queue[q]];
        std::sort(next.begin(), next.end());
        for (std::size_t n : next)
            if (!seen[n]) {
                seen[n] = true;
                parent[n] = queue[q];
                queue.push_back(n);
            }
    }
    return parent;
}

// ---------------------------------------------------------------------------
// Training

namespace {

void require_trainable(const Dataset& dataset, bool numeric_ok, std::string_view who) {
    if (dataset.empty()) throw DataError(fmt::format("{}: training set is empty", who));
    if (dataset.has_missing())
        throw DataError(fmt::format("{}: training set has missing cells; run preprocessing first", who));
    if (!numeric_ok) {
        const Schema& s = dataset.schema();
        for (std::size_t i = 0; i < s.size(); ++i)
            if (s.attribute(i).is_numeric())
                throw DataError(fmt::format("{}: attribute '{}' is numeric; discretize it first", who,
                                            s.attribute(i).name()));
    }
}

void require_laplace(double laplace) {
    if (!(laplace >= 0.0) || !std::isfinite(laplace))
        throw std::invalid_argument("Laplace constant must be finite and >= 0");
}

std::vector<std::size_t> tracked_attributes(const FrequencyCube& cube) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < cube.attribute_count(); ++i)
        if (cube.tracked(i)) out.push_back(i);
    return out;
}

BayesModel base_model(const Dataset& dataset, Variant variant, double laplace) {
    BayesModel m;
    m.variant = variant;
    m.schema = dataset.schema_ptr();
    m.cube = FrequencyCube::count(dataset);
    m.laplace = laplace;
    return m;
}

std::vector<std::vector<double>> cmi_matrix(const FrequencyCube& cube, std::span<const std::size_t> nodes,
                                            double laplace) {
    std::vector<std::vector<double>> w(cube.attribute_count(), std::vector<double>(cube.attribute_count(), 0.0));
    for (std::size_t a = 0; a < nodes.size(); ++a)
        for (std::size_t b = a + 1; b < nodes.size(); ++b) {
            const double v = conditional_mutual_information(cube, nodes[a], nodes[b], laplace);
            w[nodes[a]][nodes[b]] = w[nodes[b]][nodes[a]] = v;
        }
    return w;
}

}  // namespace

BayesModel train_naive_bayes(const Dataset& dataset, std::span<const std::size_t> rows, double laplace) {
    require_laplace(laplace);
    if (rows.empty()) throw DataError("NaiveBayes: training set is empty");
    const Schema& schema = dataset.schema();
    for (std::size_t r : rows)
        for (const Cell& c : dataset.row(r))
            if (c.is_missing()) throw DataError("NaiveBayes: training set has missing cells; run preprocessing first");

    BayesModel m;
    m.variant = Variant::NaiveBayes;
    m.schema = dataset.schema_ptr();
    m.cube = FrequencyCube::count(dataset, rows, false);
    m.laplace = laplace;
    m.gaussians.resize(schema.size());
    const std::size_t K = schema.class_count();
    for (std::size_t a = 0; a < schema.size(); ++a) {
        if (!schema.attribute(a).is_numeric()) continue;
        std::vector<double> sum(K, 0.0), n(K, 0.0);
        double pooled_sum = 0.0;
        for (std::size_t r : rows) {
            const std::size_t c = dataset.class_of(r);
            sum[c] += dataset.at(r, a).number();
            n[c] += 1.0;
            pooled_sum += dataset.at(r, a).number();
        }
        const double pooled_n = static_cast<double>(rows.size());
        const double pooled_mean = pooled_sum / pooled_n;
        std::vector<double> ss(K, 0.0);
        double pooled_ss = 0.0;
        for (std::size_t r : rows) {
            const std::size_t c = dataset.class_of(r);
            const double x = dataset.at(r, a).number();
            const double d = x - sum[c] / n[c];
            ss[c] += d * d;
            pooled_ss += (x - pooled_mean) * (x - pooled_mean);
        }
        auto& g = m.gaussians[a];
        g.resize(K);
        for (std::size_t c = 0; c < K; ++c) {
            if (n[c] == 0.0) {
                // Class unseen here: fall back to the pooled estimate.
                g[c].mean = pooled_mean;
                g[c].variance = std::max(pooled_n > 1 ? pooled_ss / (pooled_n - 1) : 0.0, kVarianceFloor);
            } else {
                g[c].mean = sum[c] / n[c];
                g[c].variance = std::max(n[c] > 1 ? ss[c] / (n[c] - 1) : 0.0, kVarianceFloor);
            }
        }
    }
    return m;
}

BayesModel train_naive_bayes(const Dataset& dataset, double laplace) {
    require_trainable(dataset, true, "NaiveBayes");
    std::vector<std::size_t> rows(dataset.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return train_naive_bayes(dataset, rows, laplace);
}

BayesModel train_aode(const Dataset& dataset, double laplace, std::size_t frequency_limit) {
    require_laplace(laplace);
    require_trainable(dataset, false, "AODE");
    BayesModel m = base_model(dataset, Variant::AODE, laplace);
    m.frequency_limit = frequency_limit;
    return m;
}

BayesModel train_waode(const Dataset& dataset, double laplace) {
    require_laplace(laplace);
    require_trainable(dataset, false, "WAODE");
    BayesModel m = base_model(dataset, Variant::WAODE, laplace);
    m.parent_weights.assign(m.cube.attribute_count(), 0.0);
    for (std::size_t j : tracked_attributes(m.cube)) m.parent_weights[j] = mutual_information(m.cube, j, laplace);
    return m;
}

BayesModel train_hnb(const Dataset& dataset, double laplace) {
    require_laplace(laplace);
    require_trainable(dataset, false, "HNB");
    BayesModel m = base_model(dataset, Variant::HNB, laplace);
    const auto nodes = tracked_attributes(m.cube);
    const auto cmi = cmi_matrix(m.cube, nodes, laplace);
    const std::size_t n = m.cube.attribute_count();
    m.hidden_weights.assign(n, std::vector<double>(n, 0.0));
    if (nodes.size() < 2) return m;
    for (std::size_t i : nodes) {
        double sum = 0.0;
        for (std::size_t j : nodes)
            if (j != i) sum += cmi[i][j];
        for (std::size_t j : nodes) {
            if (j == i) continue;
            m.hidden_weights[i][j] = sum > 0.0 ? cmi[i][j] / sum : 1.0 / static_cast<double>(nodes.size() - 1);
        }
    }
    return m;
}

BayesModel train_tan(const Dataset& dataset, double laplace) {
    require_laplace(laplace);
    require_trainable(dataset, false, "TAN");
    BayesModel m = base_model(dataset, Variant::TAN, laplace);
    const auto nodes = tracked_attributes(m.cube);
    m.tree_parents = maximum_spanning_tree(m.cube.attribute_count(), nodes, cmi_matrix(m.cube, nodes, laplace));
    return m;
}

// ---------------------------------------------------------------------------
// Scoring

namespace {

class Scorer {
public:
    Scorer(const BayesModel& model, Row row) : m_(model), cube_(model.cube), l_(model.laplace) {
        const Schema& schema = *model.schema;
        if (row.size() != schema.size())
            throw DataError(fmt::format("instance has {} cells, model schema has {}", row.size(), schema.size()));
        for (std::size_t i = 0; i < row.size(); ++i) {
            check_cell(schema.attribute(i), row[i]);
            if (i == schema.class_index()) continue;
            if (cube_.tracked(i) && row[i].is_nominal() && cube_.value_total(i, row[i].index()) > 0.0) {
                observed_.push_back(i);
                value_.push_back(row[i].index());
            }
            if (schema.attribute(i).is_numeric() && row[i].is_number()) numeric_.emplace_back(i, row[i].number());
        }
    }

    std::vector<double> run() {
        const std::size_t K = cube_.class_count();
        std::vector<double> scores(K);
        for (std::size_t c = 0; c < K; ++c) {
            switch (m_.variant) {
                case Variant::NaiveBayes: scores[c] = naive(c); break;
                case Variant::AODE: scores[c] = aode(c, false); break;
                case Variant::WAODE: scores[c] = aode(c, true); break;
                case Variant::HNB: scores[c] = hnb(c); break;
                case Variant::TAN: scores[c] = tan(c); break;
            }
        }
        return normalize_log_scores(std::move(scores));
    }

private:
    double log_prior(std::size_t c) const {
        return safe_log(ratio(cube_.class_total(c) + l_, cube_.total() + l_ * static_cast<double>(cube_.class_count())));
    }

    // P(x_i | c)
    double log_cond(std::size_t c, std::size_t k) const {
        const std::size_t i = observed_[k];
        return safe_log(ratio(cube_.count(c, i, value_[k]) + l_,
                              cube_.class_total(c) + l_ * static_cast<double>(cube_.values(i))));
    }

    // P(x_i | c, x_j)
    double cond2(std::size_t c, std::size_t k, std::size_t p) const {
        const std::size_t i = observed_[k], j = observed_[p];
        return ratio(cube_.pair_count(c, i, value_[k], j, value_[p]) + l_,
                     cube_.count(c, j, value_[p]) + l_ * static_cast<double>(cube_.values(i)));
    }

    double naive(std::size_t c) const {
        if (m_.laplace == 0.0 && cube_.class_total(c) == 0.0)
            throw std::domain_error(fmt::format(
                "NaiveBayes: class '{}' has no training instances and the Laplace constant is 0",
                m_.schema->class_attribute().labels()[c]));
        double s = log_prior(c);
        if (s == kNegInf) return s;
        for (std::size_t k = 0; k < observed_.size(); ++k) s += log_cond(c, k);
        for (const auto& [a, x] : numeric_) {
            const Gaussian& g = m_.gaussians[a][c];
            s += -0.5 * std::log(2.0 * std::numbers::pi * g.variance) - (x - g.mean) * (x - g.mean) / (2.0 * g.variance);
        }
        return s;
    }

    double aode(std::size_t c, bool weighted) const {
        const std::size_t K = cube_.class_count();
        std::vector<double> terms;
        std::vector<double> log_w;
        for (std::size_t p = 0; p < observed_.size(); ++p) {
            const std::size_t j = observed_[p];
            if (cube_.value_total(j, value_[p]) < static_cast<double>(m_.frequency_limit)) continue;
            double t = safe_log(ratio(cube_.count(c, j, value_[p]) + l_,
                                      cube_.total() + l_ * static_cast<double>(K * cube_.values(j))));
            for (std::size_t k = 0; k < observed_.size(); ++k)
                if (k != p) t += safe_log(cond2(c, k, p));
            terms.push_back(t);
            log_w.push_back(weighted ? safe_log(m_.parent_weights[j]) : 0.0);
        }
        if (terms.empty()) return naive(c);
        if (weighted) {
            const bool any_weight = std::any_of(log_w.begin(), log_w.end(), [](double w) { return w != kNegInf; });
            if (any_weight)
                for (std::size_t t = 0; t < terms.size(); ++t) terms[t] += log_w[t];
        }
        return log_sum_exp(terms);
    }

    double hnb(std::size_t c) const {
        double s = log_prior(c);
        if (s == kNegInf) return s;
        for (std::size_t k = 0; k < observed_.size(); ++k) {
            const std::size_t i = observed_[k];
            double mix = 0.0, weight = 0.0;
            for (std::size_t p = 0; p < observed_.size(); ++p) {
                if (p == k) continue;
                const double w = m_.hidden_weights[i][observed_[p]];
                if (w <= 0.0) continue;
                mix += w * cond2(c, k, p);
                weight += w;
            }
            s += weight > 0.0 ? safe_log(mix / weight) : log_cond(c, k);
        }
        return s;
    }

    double tan(std::size_t c) const {
        double s = log_prior(c);
        if (s == kNegInf) return s;
        for (std::size_t k = 0; k < observed_.size(); ++k) {
            const auto& parent = m_.tree_parents[observed_[k]];
            std::optional<std::size_t> p;
            if (parent) {
                auto it = std::find(observed_.begin(), observed_.end(), *parent);
                if (it != observed_.end()) p = static_cast<std::size_t>(it - observed_.begin());
            }
            s += p ? safe_log(cond2(c, k, *p)) : log_cond(c, k);
        }
        return s;
    }

    const BayesModel& m_;
    const FrequencyCube& cube_;
    double l_;
    // Attributes whose value was seen in training; unseen values count as missing.
    std::vector<std::size_t> observed_;
    std::vector<std::size_t> value_;
    std::vector<std::pair<std::size_t, double>> numeric_;
};

}  // namespace

std::vector<double> BayesModel::distribution(Row row) const { return Scorer(*this, row).run(); }

}  // namespace tabml::bayes
