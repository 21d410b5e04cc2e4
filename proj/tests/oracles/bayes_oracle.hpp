#pragma once

// Brute-force reference for the five Bayesian posteriors. Every probability is
// recomputed by scanning the raw training rows for each query; scores are
// plain products (no logs) normalized at the end. Shares no code with the library.

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace oracle {

/// Training data over nominal attributes only; the class is kept separately.
struct Table {
    int classes = 2;
    std::vector<int> values;              // value count per attribute
    std::vector<std::vector<int>> rows;   // attribute values, no missing
    std::vector<int> labels;              // class per row
};

inline constexpr int kMissing = -1;

namespace detail {

inline double n_rows(const Table& t) { return static_cast<double>(t.rows.size()); }

inline double n_class(const Table& t, int c) {
    double n = 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) n += t.labels[r] == c;
    return n;
}

inline double n_value(const Table& t, int i, int v) {
    double n = 0;
    for (const auto& row : t.rows) n += row[i] == v;
    return n;
}

inline double n_cv(const Table& t, int c, int i, int v) {
    double n = 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) n += t.labels[r] == c && t.rows[r][i] == v;
    return n;
}

inline double n_cvw(const Table& t, int c, int i, int v, int j, int w) {
    double n = 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) n += t.labels[r] == c && t.rows[r][i] == v && t.rows[r][j] == w;
    return n;
}

inline double prior(const Table& t, int c, double l) { return (n_class(t, c) + l) / (n_rows(t) + l * t.classes); }

inline double p_given_c(const Table& t, int c, int i, int v, double l) {
    return (n_cv(t, c, i, v) + l) / (n_class(t, c) + l * t.values[i]);
}

inline double p_given_c_parent(const Table& t, int c, int i, int v, int j, int w, double l) {
    return (n_cvw(t, c, i, v, j, w) + l) / (n_cv(t, c, j, w) + l * t.values[i]);
}

inline std::vector<int> usable(const Table& t, const std::vector<int>& q) {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(q.size()); ++i)
        if (q[i] != kMissing && n_value(t, i, q[i]) > 0) out.push_back(i);
    return out;
}

inline std::vector<double> normalize(std::vector<long double> s) {
    long double total = 0;
    for (auto x : s) total += x;
    std::vector<double> out(s.size());
    for (std::size_t c = 0; c < s.size(); ++c)
        out[c] = total > 0 ? static_cast<double>(s[c] / total) : 1.0 / static_cast<double>(s.size());
    return out;
}

inline long double nb_score(const Table& t, const std::vector<int>& q, int c, double l) {
    long double s = prior(t, c, l);
    for (int i : usable(t, q)) s *= p_given_c(t, c, i, q[i], l);
    return s;
}

inline long double spode(const Table& t, const std::vector<int>& q, const std::vector<int>& obs, int c, int p,
                         double l) {
    long double s = (n_cv(t, c, p, q[p]) + l) / (n_rows(t) + l * t.classes * t.values[p]);
    for (int k : obs)
        if (k != p) s *= p_given_c_parent(t, c, k, q[k], p, q[p], l);
    return s;
}

}  // namespace detail

inline std::vector<double> naive_bayes(const Table& t, const std::vector<int>& q, double l) {
    std::vector<long double> s(t.classes);
    for (int c = 0; c < t.classes; ++c) s[c] = detail::nb_score(t, q, c, l);
    return detail::normalize(s);
}

inline std::vector<double> aode(const Table& t, const std::vector<int>& q, double l, int m) {
    const auto obs = detail::usable(t, q);
    std::vector<int> parents;
    for (int p : obs)
        if (detail::n_value(t, p, q[p]) >= m) parents.push_back(p);
    if (parents.empty()) return naive_bayes(t, q, l);
    std::vector<long double> s(t.classes, 0);
    for (int c = 0; c < t.classes; ++c)
        for (int p : parents) s[c] += detail::spode(t, q, obs, c, p, l);
    return detail::normalize(s);
}

/// I(A_i; C) in bits from the smoothed joint (N(c,v)+l)/(N+l*K*V).
inline double mutual_info(const Table& t, int i, double l) {
    const double denom = detail::n_rows(t) + l * t.classes * t.values[i];
    double total = 0;
    for (int c = 0; c < t.classes; ++c)
        for (int v = 0; v < t.values[i]; ++v) {
            const double pcv = (detail::n_cv(t, c, i, v) + l) / denom;
            double pc = 0, pv = 0;
            for (int w = 0; w < t.values[i]; ++w) pc += (detail::n_cv(t, c, i, w) + l) / denom;
            for (int d = 0; d < t.classes; ++d) pv += (detail::n_cv(t, d, i, v) + l) / denom;
            if (pcv > 0) total += pcv * std::log2(pcv / (pc * pv));
        }
    return total > 0 ? total : 0.0;
}

/// I(A_i; A_j | C) in bits from the smoothed joint (N(c,v,w)+l)/(N+l*K*Vi*Vj).
inline double cond_mutual_info(const Table& t, int i, int j, double l) {
    const double denom = detail::n_rows(t) + l * t.classes * t.values[i] * t.values[j];
    auto p = [&](int c, int v, int w) { return (detail::n_cvw(t, c, i, v, j, w) + l) / denom; };
    double total = 0;
    for (int c = 0; c < t.classes; ++c) {
        double pc = 0;
        for (int v = 0; v < t.values[i]; ++v)
            for (int w = 0; w < t.values[j]; ++w) pc += p(c, v, w);
        for (int v = 0; v < t.values[i]; ++v)
            for (int w = 0; w < t.values[j]; ++w) {
                double pcv = 0, pcw = 0;
                for (int x = 0; x < t.values[j]; ++x) pcv += p(c, v, x);
                for (int x = 0; x < t.values[i]; ++x) pcw += p(c, x, w);
                const double pj = p(c, v, w);
                if (pj > 0) total += pj * std::log2(pj * pc / (pcv * pcw));
            }
    }
    return total > 0 ? total : 0.0;
}

inline std::vector<double> waode(const Table& t, const std::vector<int>& q, double l) {
    const auto obs = detail::usable(t, q);
    std::vector<int> parents;
    for (int p : obs)
        if (detail::n_value(t, p, q[p]) >= 1) parents.push_back(p);
    if (parents.empty()) return naive_bayes(t, q, l);
    double weight_sum = 0;
    for (int p : parents) weight_sum += mutual_info(t, p, l);
    std::vector<long double> s(t.classes, 0);
    for (int c = 0; c < t.classes; ++c)
        for (int p : parents) {
            const double w = weight_sum > 0 ? mutual_info(t, p, l) : 1.0;
            s[c] += w * detail::spode(t, q, obs, c, p, l);
        }
    return detail::normalize(s);
}

/// W[i][j] = CMI(i,j) / sum_k CMI(i,k); uniform when the row of CMIs is all zero.
inline std::vector<std::vector<double>> hnb_weights(const Table& t, double l) {
    const int n = static_cast<int>(t.values.size());
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    if (n < 2) return w;
    for (int i = 0; i < n; ++i) {
        double sum = 0;
        for (int j = 0; j < n; ++j)
            if (j != i) sum += cond_mutual_info(t, i, j, l);
        for (int j = 0; j < n; ++j)
            if (j != i) w[i][j] = sum > 0 ? cond_mutual_info(t, i, j, l) / sum : 1.0 / (n - 1);
    }
    return w;
}

inline std::vector<double> hnb(const Table& t, const std::vector<int>& q, const std::vector<std::vector<double>>& w,
                               double l) {
    const auto obs = detail::usable(t, q);
    std::vector<long double> s(t.classes);
    for (int c = 0; c < t.classes; ++c) {
        long double score = detail::prior(t, c, l);
        for (int i : obs) {
            long double mix = 0, wsum = 0;
            for (int j : obs) {
                if (j == i || w[i][j] <= 0) continue;
                mix += w[i][j] * detail::p_given_c_parent(t, c, i, q[i], j, q[j], l);
                wsum += w[i][j];
            }
            score *= wsum > 0 ? mix / wsum : detail::p_given_c(t, c, i, q[i], l);
        }
        s[c] = score;
    }
    return detail::normalize(s);
}

inline std::vector<double> hnb(const Table& t, const std::vector<int>& q, double l) {
    return hnb(t, q, hnb_weights(t, l), l);
}

using Edge = std::pair<int, int>;

/// All spanning trees of the complete graph on n nodes (n <= 5), as edge lists.
inline std::vector<std::vector<Edge>> spanning_trees(int n) {
    std::vector<Edge> all;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) all.emplace_back(i, j);
    std::vector<std::vector<Edge>> out;
    if (n < 2) {
        out.emplace_back();
        return out;
    }
    for (unsigned mask = 0; mask < (1u << all.size()); ++mask) {
        std::vector<Edge> pick;
        for (std::size_t e = 0; e < all.size(); ++e)
            if (mask >> e & 1u) pick.push_back(all[e]);
        if (static_cast<int>(pick.size()) != n - 1) continue;
        std::vector<int> comp(n);
        for (int v = 0; v < n; ++v) comp[v] = v;
        bool cycle = false;
        for (auto [a, b] : pick) {
            const int ca = comp[a], cb = comp[b];
            if (ca == cb) {
                cycle = true;
                break;
            }
            for (int& x : comp)
                if (x == cb) x = ca;
        }
        if (!cycle) out.push_back(pick);
    }
    return out;
}

inline double tree_weight(const Table& t, const std::vector<Edge>& edges, double l) {
    double w = 0;
    for (auto [a, b] : edges) w += cond_mutual_info(t, a, b, l);
    return w;
}

inline double best_tree_weight(const Table& t, double l) {
    double best = -1;
    for (const auto& tree : spanning_trees(static_cast<int>(t.values.size())))
        best = std::max(best, tree_weight(t, tree, l));
    return best;
}

/// Parent of every node when the tree is hung from node 0 (-1 for the root).
inline std::vector<int> orient(int n, const std::vector<Edge>& edges) {
    std::vector<int> parent(n, -1), frontier{0};
    std::vector<bool> seen(n, false);
    if (n > 0) seen[0] = true;
    while (!frontier.empty()) {
        std::vector<int> next;
        for (int u : frontier)
            for (auto [a, b] : edges) {
                const int v = a == u ? b : (b == u ? a : -1);
                if (v >= 0 && !seen[v]) {
                    seen[v] = true;
                    parent[v] = u;
                    next.push_back(v);
                }
            }
        frontier = next;
    }
    return parent;
}

inline std::vector<double> tan(const Table& t, const std::vector<int>& q, const std::vector<int>& parent, double l) {
    const auto obs = detail::usable(t, q);
    auto observed = [&](int a) {
        for (int o : obs)
            if (o == a) return true;
        return false;
    };
    std::vector<long double> s(t.classes);
    for (int c = 0; c < t.classes; ++c) {
        long double score = detail::prior(t, c, l);
        for (int i : obs) {
            const int p = parent[i];
            score *= (p >= 0 && observed(p)) ? detail::p_given_c_parent(t, c, i, q[i], p, q[p], l)
                                             : detail::p_given_c(t, c, i, q[i], l);
        }
        s[c] = score;
    }
    return detail::normalize(s);
}

}  // namespace oracle
