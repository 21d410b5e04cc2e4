#include "tabml/trees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "tabml/rng.hpp"

namespace tabml::trees {

std::string_view variant_name(Variant v) {
    switch (v) {
        case Variant::ID3: return "ID3";
        case Variant::C45: return "C4.5";
        case Variant::REPTree: return "REPTree";
        case Variant::BFTree: return "BFTree";
        case Variant::NBTree: return "NBTree";
    }
    return "?";
}

std::optional<Variant> parse_variant(std::string_view name) {
    for (Variant v : {Variant::ID3, Variant::C45, Variant::REPTree, Variant::BFTree, Variant::NBTree})
        if (variant_name(v) == name) return v;
    if (name == "J48") return Variant::C45;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Split measures

double entropy(std::span<const double> counts) {
    const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (n <= 0.0) return 0.0;
    double h = 0.0;
    for (double c : counts)
        if (c > 0.0) h -= (c / n) * std::log2(c / n);
    return h;
}

double gini(std::span<const double> counts) {
    const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (n <= 0.0) return 0.0;
    double g = 1.0;
    for (double c : counts) g -= (c / n) * (c / n);
    return g;
}

namespace {

double total(std::span<const double> counts) { return std::accumulate(counts.begin(), counts.end(), 0.0); }

template <typename Impurity>
double impurity_reduction(std::span<const double> parent, const std::vector<std::vector<double>>& children,
                          Impurity impurity) {
    const double n = total(parent);
    if (n <= 0.0) return 0.0;
    double after = 0.0;
    for (const auto& child : children) after += total(child) / n * impurity(child);
    return std::max(impurity(parent) - after, 0.0);
}

}  // namespace

double information_gain(std::span<const double> parent, const std::vector<std::vector<double>>& children) {
    return impurity_reduction(parent, children, [](std::span<const double> c) { return entropy(c); });
}

double split_information(const std::vector<std::vector<double>>& children) {
    std::vector<double> sizes;
    sizes.reserve(children.size());
    for (const auto& child : children) sizes.push_back(total(child));
    return entropy(sizes);
}

double gain_ratio(std::span<const double> parent, const std::vector<std::vector<double>>& children) {
    const double si = split_information(children);
    if (si <= 0.0) return 0.0;
    return information_gain(parent, children) / si;
}

double pessimistic_extra_errors(double n, double errors, double confidence) {
    if (!(confidence > 0.0 && confidence <= 0.5))
        throw std::invalid_argument("pruning confidence must lie in (0, 0.5]");
    if (n <= 0.0) return 0.0;
    if (errors < 1.0) {
        const double base = n * (1.0 - std::pow(confidence, 1.0 / n));
        if (errors == 0.0) return base;
        return base + errors * (pessimistic_extra_errors(n, 1.0, confidence) - base);
    }
    if (errors + 0.5 >= n) return std::max(n - errors, 0.0);
    const double z = boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - confidence);
    const double f = (errors + 0.5) / n;
    const double r =
        (f + z * z / (2.0 * n) + z * std::sqrt(f / n - f * f / n + z * z / (4.0 * n * n))) / (1.0 + z * z / n);
    return r * n - errors;
}

// ---------------------------------------------------------------------------
// TreeModel

std::size_t TreeModel::route(Row row) const {
    if (row.size() != schema->size())
        throw DataError(fmt::format("instance has {} cells, tree schema has {}", row.size(), schema->size()));
    std::size_t at = 0;
    while (!nodes[at].is_leaf()) {
        const Node& n = nodes[at];
        const Cell& cell = row[n.attribute];
        check_cell(schema->attribute(n.attribute), cell);
        if (cell.is_missing()) return at;
        switch (n.test) {
            case TestKind::Nominal: at = n.children[cell.index()]; break;
            case TestKind::Threshold: at = n.children[cell.number() <= n.threshold ? 0 : 1]; break;
            case TestKind::Subset: at = n.children[n.subset[cell.index()] ? 0 : 1]; break;
        }
    }
    return at;
}

std::vector<double> TreeModel::distribution(Row row) const {
    const Node& n = nodes[route(row)];
    if (n.is_leaf() && n.leaf_model) return leaf_models[*n.leaf_model].distribution(row);
    return n.distribution;
}

void TreeModel::recount() {
    node_count = leaf_count = depth = 0;
    if (nodes.empty()) return;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [at, d] = stack.back();
        stack.pop_back();
        ++node_count;
        depth = std::max(depth, d);
        if (nodes[at].is_leaf()) ++leaf_count;
        for (std::size_t c : nodes[at].children) stack.emplace_back(c, d + 1);
    }
}

bool operator==(const TreeModel& a, const TreeModel& b) {
    const bool same_schema = (a.schema == b.schema) || (a.schema && b.schema && *a.schema == *b.schema);
    return same_schema && a.variant == b.variant && a.nodes == b.nodes && a.leaf_models == b.leaf_models &&
           a.node_count == b.node_count && a.leaf_count == b.leaf_count && a.depth == b.depth &&
           a.expansion_trace == b.expansion_trace;
}

// ---------------------------------------------------------------------------
// Shared growing machinery

namespace {

using Rows = std::vector<std::size_t>;
using ChildCounts = std::vector<std::vector<double>>;

std::size_t argmax(std::span<const double> v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

bool is_pure(std::span<const double> counts) {
    return std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
}

void require_trainable(const Dataset& dataset, bool nominal_only, std::string_view who) {
    if (dataset.empty()) throw DataError(fmt::format("{}: training set is empty", who));
    if (dataset.has_missing())
        throw DataError(fmt::format("{}: training set has missing cells; run preprocessing first", who));
    if (nominal_only) {
        const Schema& s = dataset.schema();
        for (std::size_t i = 0; i < s.size(); ++i)
            if (s.attribute(i).is_numeric())
                throw DataError(
                    fmt::format("{}: attribute '{}' is numeric; discretize it first", who, s.attribute(i).name()));
    }
}

Rows all_rows(const Dataset& ds) {
    Rows r(ds.size());
    std::iota(r.begin(), r.end(), std::size_t{0});
    return r;
}

/// A concrete test at a node together with the class counts it produces.
struct Split {
    std::size_t attribute = 0;
    TestKind test = TestKind::Nominal;
    double threshold = 0.0;
    std::vector<bool> subset;
    ChildCounts children;
    double gain = 0.0;
    double score = 0.0;  // criterion used for ranking (gain ratio, utility, ...)
};

class Grower {
public:
    Grower(const Dataset& ds, Variant variant) : ds_(ds), K_(ds.schema().class_count()) {
        model_.variant = variant;
        model_.schema = ds.schema_ptr();
    }

    const Dataset& data() const { return ds_; }
    std::size_t classes() const { return K_; }
    TreeModel& model() { return model_; }
    Node& node(std::size_t i) { return model_.nodes[i]; }

    std::vector<double> counts(std::span<const std::size_t> rows) const {
        std::vector<double> c(K_, 0.0);
        for (std::size_t r : rows) c[ds_.class_of(r)] += 1.0;
        return c;
    }

    std::size_t add_node(std::span<const std::size_t> rows, const std::vector<double>& fallback) {
        Node n;
        n.class_counts = counts(rows);
        n.count = static_cast<double>(rows.size());
        if (rows.empty()) {
            n.distribution = fallback;
        } else {
            n.distribution = n.class_counts;
            for (double& p : n.distribution) p /= n.count;
        }
        model_.nodes.push_back(std::move(n));
        return model_.nodes.size() - 1;
    }

    /// Per-value class counts of a nominal attribute.
    ChildCounts nominal_counts(std::span<const std::size_t> rows, std::size_t a) const {
        ChildCounts out(ds_.schema().attribute(a).value_count(), std::vector<double>(K_, 0.0));
        for (std::size_t r : rows) out[ds_.at(r, a).index()][ds_.class_of(r)] += 1.0;
        return out;
    }

    /// Best binary threshold on a numeric attribute under `criterion(parent, children)`;
    /// both sides must hold at least min_leaf rows. Ties keep the smallest threshold.
    template <typename Criterion>
    std::optional<Split> best_threshold(std::span<const std::size_t> rows, std::size_t a, std::size_t min_leaf,
                                        Criterion criterion) const {
        std::vector<std::pair<double, std::size_t>> vc;
        vc.reserve(rows.size());
        for (std::size_t r : rows) vc.emplace_back(ds_.at(r, a).number(), ds_.class_of(r));
        std::sort(vc.begin(), vc.end());
        const std::vector<double> parent = counts(rows);
        ChildCounts sides{std::vector<double>(K_, 0.0), parent};
        std::optional<Split> best;
        const double lo = static_cast<double>(std::max<std::size_t>(min_leaf, 1));
        for (std::size_t p = 0; p + 1 < vc.size(); ++p) {
            sides[0][vc[p].second] += 1.0;
            sides[1][vc[p].second] -= 1.0;
            if (vc[p].first == vc[p + 1].first) continue;
            const double left = static_cast<double>(p + 1);
            const double right = static_cast<double>(vc.size()) - left;
            if (left < lo || right < lo) continue;
            const double score = criterion(parent, sides);
            if (!best || score > best->score) {
                Split s;
                s.attribute = a;
                s.test = TestKind::Threshold;
                s.threshold = (vc[p].first + vc[p + 1].first) / 2.0;
                s.children = sides;
                s.score = score;
                best = std::move(s);
            }
        }
        return best;
    }

    std::vector<Rows> partition(std::span<const std::size_t> rows, const Split& s) const {
        std::vector<Rows> out(s.children.size());
        for (std::size_t r : rows) {
            const Cell& c = ds_.at(r, s.attribute);
            switch (s.test) {
                case TestKind::Nominal: out[c.index()].push_back(r); break;
                case TestKind::Threshold: out[c.number() <= s.threshold ? 0 : 1].push_back(r); break;
                case TestKind::Subset: out[s.subset[c.index()] ? 0 : 1].push_back(r); break;
            }
        }
        return out;
    }

    /// Turns node `at` into a split and creates its (leaf) children.
    std::vector<std::size_t> apply(std::size_t at, const Split& s, const std::vector<Rows>& parts) {
        const std::vector<double> fallback = node(at).distribution;
        std::vector<std::size_t> kids;
        for (const auto& part : parts) kids.push_back(add_node(part, fallback));
        Node& n = node(at);
        n.test = s.test;
        n.attribute = s.attribute;
        n.threshold = s.threshold;
        n.subset = s.subset;
        n.children = kids;
        return kids;
    }

    /// Old-to-new node index map produced by the last finish().
    const std::vector<std::size_t>& remap() const { return remap_; }

    /// Drops unreachable nodes (left behind by pruning) and recounts.
    TreeModel finish() {
        std::vector<Node> kept;
        std::vector<std::size_t> order{0};
        std::vector<std::size_t> remap(model_.nodes.size(), 0);
        for (std::size_t q = 0; q < order.size(); ++q) {
            remap[order[q]] = q;
            for (std::size_t c : model_.nodes[order[q]].children) order.push_back(c);
        }
        for (std::size_t old : order) {
            Node n = std::move(model_.nodes[old]);
            for (std::size_t& c : n.children) c = remap[c];
            kept.push_back(std::move(n));
        }
        model_.nodes = std::move(kept);
        model_.recount();
        remap_ = std::move(remap);
        return std::move(model_);
    }

private:
    const Dataset& ds_;
    std::size_t K_;
    TreeModel model_;
    std::vector<std::size_t> remap_;
};

double errors_as_leaf(const Node& n) {
    if (n.count <= 0.0) return 0.0;
    return n.count - n.class_counts[argmax(n.distribution)];
}

std::size_t nonempty_at_least(const ChildCounts& children, double min_size) {
    return static_cast<std::size_t>(std::count_if(children.begin(), children.end(), [&](const auto& c) {
        const double n = total(c);
        return n > 0.0 && n >= min_size;
    }));
}

}  // namespace

// ---------------------------------------------------------------------------
// ID3

namespace {

void grow_id3(Grower& g, std::size_t at, const Rows& rows, std::vector<bool>& used) {
    if (rows.empty() || is_pure(g.node(at).class_counts)) return;
    const Schema& schema = g.data().schema();
    const std::vector<double> parent = g.node(at).class_counts;
    std::optional<Split> best;
    for (std::size_t a = 0; a < schema.size(); ++a) {
        if (a == schema.class_index() || used[a]) continue;
        Split s;
        s.attribute = a;
        s.children = g.nominal_counts(rows, a);
        s.gain = s.score = information_gain(parent, s.children);
        if (!best || s.score > best->score) best = std::move(s);
    }
    if (!best) return;
    const auto parts = g.partition(rows, *best);
    const auto kids = g.apply(at, *best, parts);
    used[best->attribute] = true;
    for (std::size_t k = 0; k < kids.size(); ++k) grow_id3(g, kids[k], parts[k], used);
    used[best->attribute] = false;
}

}  // namespace

TreeModel train_id3(const Dataset& dataset) {
    require_trainable(dataset, true, "ID3");
    Grower g(dataset, Variant::ID3);
    const Rows rows = all_rows(dataset);
    const auto root = g.add_node(rows, {});
    std::vector<bool> used(dataset.schema().size(), false);
    grow_id3(g, root, rows, used);
    return g.finish();
}

// ---------------------------------------------------------------------------
// C4.5

namespace {

struct C45Grower {
    Grower& g;
    const C45Options& opt;

    std::optional<Split> choose(const Rows& rows, const std::vector<bool>& used) {
        const Schema& schema = g.data().schema();
        const std::vector<double> parent = g.counts(rows);
        const double min_leaf = static_cast<double>(opt.min_leaf);
        std::vector<Split> candidates;
        for (std::size_t a = 0; a < schema.size(); ++a) {
            if (a == schema.class_index()) continue;
            if (schema.attribute(a).is_nominal()) {
                if (used[a]) continue;
                Split s;
                s.attribute = a;
                s.children = g.nominal_counts(rows, a);
                if (nonempty_at_least(s.children, min_leaf) < 2) continue;
                s.gain = information_gain(parent, s.children);
                candidates.push_back(std::move(s));
            } else {
                auto s = g.best_threshold(rows, a, opt.min_leaf,
                                          [](const auto& p, const auto& c) { return information_gain(p, c); });
                if (!s) continue;
                s->gain = s->score;
                candidates.push_back(std::move(*s));
            }
        }
        if (candidates.empty()) return std::nullopt;
        double average = 0.0;
        for (const auto& s : candidates) average += s.gain;
        average /= static_cast<double>(candidates.size());
        std::optional<Split> best;
        for (auto& s : candidates) {
            if (s.gain < average - 1e-12) continue;
            s.score = gain_ratio(parent, s.children);
            if (!best || s.score > best->score) best = s;
        }
        return best;
    }

    void grow(std::size_t at, const Rows& rows, std::vector<bool>& used) {
        if (rows.empty() || is_pure(g.node(at).class_counts)) return;
        if (rows.size() < 2 * std::max<std::size_t>(opt.min_leaf, 1)) return;
        auto best = choose(rows, used);
        if (!best) return;
        const auto parts = g.partition(rows, *best);
        const auto kids = g.apply(at, *best, parts);
        const bool nominal = best->test == TestKind::Nominal;
        if (nominal) used[best->attribute] = true;
        for (std::size_t k = 0; k < kids.size(); ++k) grow(kids[k], parts[k], used);
        if (nominal) used[best->attribute] = false;
    }

    /// Returns the pessimistic error estimate of the (possibly pruned) subtree.
    double prune(std::size_t at) {
        Node& n = g.node(at);
        const double leaf_errors = errors_as_leaf(n);
        const double as_leaf = leaf_errors + pessimistic_extra_errors(n.count, leaf_errors, opt.prune_confidence);
        if (n.is_leaf()) return as_leaf;
        double subtree = 0.0;
        const auto kids = n.children;
        for (std::size_t c : kids) subtree += prune(c);
        if (as_leaf <= subtree + 1e-9) {
            g.node(at).children.clear();
            return as_leaf;
        }
        return subtree;
    }
};

}  // namespace

TreeModel train_c45(const Dataset& dataset, const C45Options& options) {
    require_trainable(dataset, false, "C4.5");
    if (options.prune && !(options.prune_confidence > 0.0 && options.prune_confidence <= 0.5))
        throw std::invalid_argument("C4.5: prune_confidence must lie in (0, 0.5]");
    Grower g(dataset, Variant::C45);
    const Rows rows = all_rows(dataset);
    const auto root = g.add_node(rows, {});
    std::vector<bool> used(dataset.schema().size(), false);
    C45Grower c45{g, options};
    c45.grow(root, rows, used);
    if (options.prune) c45.prune(root);
    return g.finish();
}

// ---------------------------------------------------------------------------
// REPTree

namespace {

struct RepGrower {
    Grower& g;
    std::size_t min_leaf;

    void grow(std::size_t at, const Rows& rows, std::vector<bool>& used) {
        if (rows.empty() || is_pure(g.node(at).class_counts)) return;
        if (rows.size() < 2 * std::max<std::size_t>(min_leaf, 1)) return;
        const Schema& schema = g.data().schema();
        const std::vector<double> parent = g.counts(rows);
        std::optional<Split> best;
        for (std::size_t a = 0; a < schema.size(); ++a) {
            if (a == schema.class_index()) continue;
            std::optional<Split> s;
            if (schema.attribute(a).is_nominal()) {
                if (used[a]) continue;
                Split n;
                n.attribute = a;
                n.children = g.nominal_counts(rows, a);
                if (nonempty_at_least(n.children, static_cast<double>(min_leaf)) < 2) continue;
                n.score = information_gain(parent, n.children);
                s = std::move(n);
            } else {
                s = g.best_threshold(rows, a, min_leaf,
                                     [](const auto& p, const auto& c) { return information_gain(p, c); });
            }
            if (s && (!best || s->score > best->score)) best = std::move(s);
        }
        if (!best || best->score <= 1e-12) return;
        const auto parts = g.partition(rows, *best);
        const auto kids = g.apply(at, *best, parts);
        const bool nominal = best->test == TestKind::Nominal;
        if (nominal) used[best->attribute] = true;
        for (std::size_t k = 0; k < kids.size(); ++k) grow(kids[k], parts[k], used);
        if (nominal) used[best->attribute] = false;
    }
};

/// Bottom-up reduced-error pruning; `errors[i]` is the prune-set error of node i
/// used as a leaf. Returns the prune-set error of the (possibly pruned) subtree.
double reduced_error_prune(Grower& g, std::size_t at, const std::vector<double>& leaf_errors) {
    if (g.node(at).is_leaf()) return leaf_errors[at];
    double subtree = 0.0;
    const auto kids = g.node(at).children;
    for (std::size_t c : kids) subtree += reduced_error_prune(g, c, leaf_errors);
    if (leaf_errors[at] <= subtree) {
        g.node(at).children.clear();
        return leaf_errors[at];
    }
    return subtree;
}

}  // namespace

TreeModel train_reptree_holdout(const Dataset& grow, const Dataset& prune, std::size_t min_leaf, bool prune_tree) {
    require_trainable(grow, false, "REPTree");
    if (prune_tree && prune.empty()) throw DataError("REPTree: prune set is empty");
    if (!(grow.schema() == prune.schema())) throw DataError("REPTree: grow and prune sets have different schemas");
    Grower g(grow, Variant::REPTree);
    const Rows rows = all_rows(grow);
    const auto root = g.add_node(rows, {});
    std::vector<bool> used(grow.schema().size(), false);
    RepGrower{g, min_leaf}.grow(root, rows, used);
    if (prune_tree) {
        // Route every prune instance through the grown tree, charging each node it
        // passes whose leaf prediction would be wrong.
        const TreeModel& m = g.model();
        std::vector<double> errors(m.nodes.size(), 0.0);
        std::vector<std::size_t> predicted(m.nodes.size());
        for (std::size_t i = 0; i < m.nodes.size(); ++i) predicted[i] = argmax(m.nodes[i].distribution);
        for (std::size_t r = 0; r < prune.size(); ++r) {
            const auto row = prune.row(r);
            const std::size_t actual = prune.class_of(r);
            std::size_t at = 0;
            while (true) {
                const Node& n = m.nodes[at];
                if (predicted[at] != actual) errors[at] += 1.0;
                if (n.is_leaf()) break;
                const Cell& c = row[n.attribute];
                if (c.is_missing()) break;
                switch (n.test) {
                    case TestKind::Nominal: at = n.children[c.index()]; break;
                    case TestKind::Threshold: at = n.children[c.number() <= n.threshold ? 0 : 1]; break;
                    case TestKind::Subset: at = n.children[n.subset[c.index()] ? 0 : 1]; break;
                }
            }
        }
        reduced_error_prune(g, root, errors);
    }
    return g.finish();
}

TreeModel train_reptree(const Dataset& dataset, const REPTreeOptions& options) {
    require_trainable(dataset, false, "REPTree");
    if (!(options.prune_fraction > 0.0 && options.prune_fraction < 1.0))
        throw std::invalid_argument("REPTree: prune_fraction must lie in (0, 1)");
    // Stratified hold-out: per class, the first round(f * n_c) shuffled members prune.
    std::vector<std::size_t> order = all_rows(dataset);
    Rng rng(options.seed);
    rng.shuffle(std::span<std::size_t>(order));
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dataset.class_of(a) < dataset.class_of(b); });
    const auto per_class = dataset.class_counts();
    Rows grow_rows, prune_rows;
    std::size_t pos = 0;
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        const auto n_prune =
            static_cast<std::size_t>(std::llround(options.prune_fraction * static_cast<double>(per_class[c])));
        for (std::size_t k = 0; k < per_class[c]; ++k, ++pos)
            (k < n_prune ? prune_rows : grow_rows).push_back(order[pos]);
    }
    if (prune_rows.empty()) throw DataError("REPTree: prune set is empty; dataset too small for the prune fraction");
    if (grow_rows.empty()) throw DataError("REPTree: grow set is empty; dataset too small for the prune fraction");
    std::sort(grow_rows.begin(), grow_rows.end());
    std::sort(prune_rows.begin(), prune_rows.end());
    TreeModel m = train_reptree_holdout(dataset.subset(grow_rows), dataset.subset(prune_rows), options.min_leaf,
                                        options.prune);
    m.schema = dataset.schema_ptr();
    return m;
}

// ---------------------------------------------------------------------------
// BFTree

namespace {

struct BestFirst {
    Grower& g;
    std::size_t min_leaf;
    double total_rows;

    std::optional<Split> subset_split(const Rows& rows, std::size_t a, const std::vector<double>& parent) {
        const ChildCounts per_value = g.nominal_counts(rows, a);
        std::vector<std::size_t> present;
        for (std::size_t v = 0; v < per_value.size(); ++v)
            if (total(per_value[v]) > 0.0) present.push_back(v);
        if (present.size() < 2) return std::nullopt;

        auto evaluate = [&](const std::vector<bool>& in) -> std::optional<Split> {
            ChildCounts sides{std::vector<double>(g.classes(), 0.0), std::vector<double>(g.classes(), 0.0)};
            for (std::size_t v = 0; v < per_value.size(); ++v)
                for (std::size_t c = 0; c < g.classes(); ++c) sides[in[v] ? 0 : 1][c] += per_value[v][c];
            const double lo = static_cast<double>(std::max<std::size_t>(min_leaf, 1));
            if (total(sides[0]) < lo || total(sides[1]) < lo) return std::nullopt;
            Split s;
            s.attribute = a;
            s.test = TestKind::Subset;
            s.subset = in;
            s.score = impurity_reduction(parent, sides, [](std::span<const double> c) { return gini(c); });
            s.children = std::move(sides);
            return s;
        };

        // Best single value against the rest, then greedily grow the subset while it helps.
        std::optional<Split> best;
        for (std::size_t v : present) {
            std::vector<bool> in(per_value.size(), false);
            in[v] = true;
            auto s = evaluate(in);
            if (s && (!best || s->score > best->score)) best = std::move(s);
        }
        if (!best) return std::nullopt;
        while (true) {
            std::optional<Split> improved;
            for (std::size_t v : present) {
                if (best->subset[v]) continue;
                auto in = best->subset;
                in[v] = true;
                const bool rest_nonempty =
                    std::any_of(present.begin(), present.end(), [&](std::size_t u) { return !in[u]; });
                if (!rest_nonempty) continue;
                auto s = evaluate(in);
                if (s && s->score > best->score + 1e-12 && (!improved || s->score > improved->score))
                    improved = std::move(s);
            }
            if (!improved) break;
            best = std::move(improved);
        }
        return best;
    }

    std::optional<Split> best_split(const Rows& rows) {
        const std::vector<double> parent = g.counts(rows);
        if (is_pure(parent) || rows.size() < 2 * std::max<std::size_t>(min_leaf, 1)) return std::nullopt;
        const Schema& schema = g.data().schema();
        std::optional<Split> best;
        for (std::size_t a = 0; a < schema.size(); ++a) {
            if (a == schema.class_index()) continue;
            std::optional<Split> s;
            if (schema.attribute(a).is_nominal())
                s = subset_split(rows, a, parent);
            else
                s = g.best_threshold(rows, a, min_leaf, [](const auto& p, const auto& c) {
                    return impurity_reduction(p, c, [](std::span<const double> x) { return gini(x); });
                });
            if (s && (!best || s->score > best->score)) best = std::move(s);
        }
        if (best) best->gain = best->score * static_cast<double>(rows.size()) / total_rows;
        return best;
    }
};

}  // namespace

TreeModel train_bftree(const Dataset& dataset, const BFTreeOptions& options) {
    require_trainable(dataset, false, "BFTree");
    Grower g(dataset, Variant::BFTree);
    const Rows rows = all_rows(dataset);
    const auto root = g.add_node(rows, {});
    BestFirst bf{g, options.min_leaf, static_cast<double>(dataset.size())};

    struct Frontier {
        std::size_t node;
        Rows rows;
        Split split;
    };
    std::vector<Frontier> frontier;
    auto offer = [&](std::size_t node, Rows r) {
        if (auto s = bf.best_split(r)) frontier.push_back({node, std::move(r), std::move(*s)});
    };
    offer(root, rows);

    std::size_t expansions = 0;
    while (!frontier.empty() && (!options.max_expansions || expansions < *options.max_expansions)) {
        // Largest global Gini reduction first; ties go to the earliest-created node.
        std::size_t pick = 0;
        for (std::size_t f = 1; f < frontier.size(); ++f) {
            const auto& a = frontier[f];
            const auto& b = frontier[pick];
            if (a.split.gain > b.split.gain || (a.split.gain == b.split.gain && a.node < b.node)) pick = f;
        }
        Frontier chosen = std::move(frontier[pick]);
        frontier.erase(frontier.begin() + static_cast<std::ptrdiff_t>(pick));
        const auto parts = g.partition(chosen.rows, chosen.split);
        const auto kids = g.apply(chosen.node, chosen.split, parts);
        g.model().expansion_trace.emplace_back(chosen.node, chosen.split.gain);
        ++expansions;
        for (std::size_t k = 0; k < kids.size(); ++k) offer(kids[k], parts[k]);
    }
    TreeModel m = g.finish();
    // Trace entries were recorded with creation-order indices; finish() renumbers.
    for (auto& [node, gain] : m.expansion_trace) node = g.remap()[node];
    return m;
}

// ---------------------------------------------------------------------------
// NBTree

namespace {

struct NBTreeGrower {
    Grower& g;
    const NBTreeOptions& opt;

    /// Stratified cv_folds-fold accuracy of naive Bayes restricted to `rows`;
    /// nodes with fewer than 2 rows cannot be cross-validated and score 0.
    double cv_accuracy(const Rows& rows) const {
        if (rows.size() < 2) return 0.0;
        const Dataset& ds = g.data();
        const std::size_t folds = std::min(opt.cv_folds, rows.size());
        Rows order = rows;
        Rng rng(opt.seed);
        rng.shuffle(std::span<std::size_t>(order));
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return ds.class_of(a) < ds.class_of(b); });
        std::size_t correct = 0;
        Rows train, test;
        for (std::size_t f = 0; f < folds; ++f) {
            train.clear();
            test.clear();
            for (std::size_t p = 0; p < order.size(); ++p) (p % folds == f ? test : train).push_back(order[p]);
            const auto nb = bayes::train_naive_bayes(ds, train, 1.0);
            for (std::size_t r : test) {
                const auto d = nb.distribution(ds.row(r));
                if (argmax(d) == ds.class_of(r)) ++correct;
            }
        }
        return static_cast<double>(correct) / static_cast<double>(rows.size());
    }

    void make_leaf(std::size_t at, const Rows& rows, const Rows& parent_rows) {
        const Rows& source = rows.empty() ? parent_rows : rows;
        g.model().leaf_models.push_back(bayes::train_naive_bayes(g.data(), source, 1.0));
        g.node(at).leaf_model = g.model().leaf_models.size() - 1;
    }

    void grow(std::size_t at, const Rows& rows, const Rows& parent_rows, std::vector<bool>& used) {
        const std::size_t min_rows = std::max<std::size_t>(opt.min_split, 2);
        if (rows.size() < min_rows || is_pure(g.node(at).class_counts)) {
            make_leaf(at, rows, parent_rows);
            return;
        }
        const Schema& schema = g.data().schema();
        const std::vector<double> parent = g.counts(rows);
        const double leaf_utility = cv_accuracy(rows);

        std::optional<Split> best;
        std::vector<Rows> best_parts;
        for (std::size_t a = 0; a < schema.size(); ++a) {
            if (a == schema.class_index()) continue;
            std::optional<Split> s;
            if (schema.attribute(a).is_nominal()) {
                if (used[a]) continue;
                Split n;
                n.attribute = a;
                n.children = g.nominal_counts(rows, a);
                if (nonempty_at_least(n.children, 1.0) < 2) continue;
                s = std::move(n);
            } else {
                s = g.best_threshold(rows, a, 1, [](const auto& p, const auto& c) { return information_gain(p, c); });
            }
            if (!s) continue;
            auto parts = g.partition(rows, *s);
            double utility = 0.0;
            for (const auto& part : parts)
                if (!part.empty())
                    utility += static_cast<double>(part.size()) / static_cast<double>(rows.size()) * cv_accuracy(part);
            s->score = utility;
            if (!best || s->score > best->score) {
                best = std::move(s);
                best_parts = std::move(parts);
            }
        }

        const double leaf_error = 1.0 - leaf_utility;
        const bool split = best && leaf_error > 0.0 &&
                           (leaf_error - (1.0 - best->score)) / leaf_error >= opt.improvement_threshold;
        if (!split) {
            make_leaf(at, rows, parent_rows);
            return;
        }
        const auto kids = g.apply(at, *best, best_parts);
        const bool nominal = best->test == TestKind::Nominal;
        if (nominal) used[best->attribute] = true;
        for (std::size_t k = 0; k < kids.size(); ++k) grow(kids[k], best_parts[k], rows, used);
        if (nominal) used[best->attribute] = false;
    }
};

}  // namespace

TreeModel train_nbtree(const Dataset& dataset, const NBTreeOptions& options) {
    require_trainable(dataset, false, "NBTree");
    if (options.cv_folds < 2) throw std::invalid_argument("NBTree: cv_folds must be >= 2");
    Grower g(dataset, Variant::NBTree);
    const Rows rows = all_rows(dataset);
    const auto root = g.add_node(rows, {});
    std::vector<bool> used(dataset.schema().size(), false);
    NBTreeGrower{g, options}.grow(root, rows, rows, used);
    return g.finish();
}

}  // namespace tabml::trees
