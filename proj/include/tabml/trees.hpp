#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabml/bayes.hpp"
#include "tabml/tabular.hpp"

namespace tabml::trees {

enum class Variant { ID3, C45, REPTree, BFTree, NBTree };

std::string_view variant_name(Variant v);
std::optional<Variant> parse_variant(std::string_view name);

enum class TestKind : std::uint8_t {
    Nominal,    ///< one child per attribute value
    Threshold,  ///< child 0: value <= threshold, child 1: value > threshold
    Subset,     ///< child 0: value in subset, child 1: the rest
};

struct Node {
    /// Training class counts reaching this node.
    std::vector<double> class_counts;
    /// Normalized class distribution (the parent's when no training instance reached the node).
    std::vector<double> distribution;
    double count = 0.0;

    TestKind test = TestKind::Nominal;
    std::size_t attribute = 0;
    double threshold = 0.0;
    std::vector<bool> subset;
    std::vector<std::size_t> children;

    /// NBTree leaves: index into TreeModel::leaf_models.
    std::optional<std::size_t> leaf_model;

    bool is_leaf() const { return children.empty(); }
    friend bool operator==(const Node&, const Node&) = default;
};

/// A trained decision tree. nodes[0] is the root; children are indices into `nodes`.
struct TreeModel {
    Variant variant = Variant::ID3;
    std::shared_ptr<const Schema> schema;
    std::vector<Node> nodes;
    std::vector<bayes::BayesModel> leaf_models;

    std::size_t node_count = 0;
    std::size_t leaf_count = 0;
    /// Edges on the longest root-to-leaf path (a lone leaf has depth 0).
    std::size_t depth = 0;

    /// BFTree: (node index, global Gini reduction) per expansion, in expansion order.
    std::vector<std::pair<std::size_t, double>> expansion_trace;

    /// Index of the node where routing stops: a leaf, or the first node whose
    /// tested value is missing.
    std::size_t route(Row row) const;

    std::vector<double> distribution(Row row) const;

    /// Recomputes node_count, leaf_count and depth from the node graph.
    void recount();

    friend bool operator==(const TreeModel& a, const TreeModel& b);
};

struct C45Options {
    std::size_t min_leaf = 2;
    double prune_confidence = 0.25;
    bool prune = true;
};

struct REPTreeOptions {
    double prune_fraction = 1.0 / 3.0;
    std::uint64_t seed = 1;
    std::size_t min_leaf = 2;
    bool prune = true;
};

struct BFTreeOptions {
    /// nullopt: expand until no leaf can be split.
    std::optional<std::size_t> max_expansions;
    std::size_t min_leaf = 2;
};

struct NBTreeOptions {
    std::size_t cv_folds = 5;
    std::size_t min_split = 30;
    double improvement_threshold = 0.05;
    std::uint64_t seed = 1;
};

TreeModel train_id3(const Dataset& dataset);
TreeModel train_c45(const Dataset& dataset, const C45Options& options = {});
TreeModel train_reptree(const Dataset& dataset, const REPTreeOptions& options = {});
/// Grows on `grow` and prunes against `prune` (both over the same schema).
TreeModel train_reptree_holdout(const Dataset& grow, const Dataset& prune, std::size_t min_leaf = 2,
                                bool prune_tree = true);
TreeModel train_bftree(const Dataset& dataset, const BFTreeOptions& options = {});
TreeModel train_nbtree(const Dataset& dataset, const NBTreeOptions& options = {});

// Split measures (log base 2, 0 log 0 = 0), exposed for testing.
double entropy(std::span<const double> counts);
double gini(std::span<const double> counts);
/// Information gain of partitioning `parent` into `children` (count vectors per child).
double information_gain(std::span<const double> parent, const std::vector<std::vector<double>>& children);
/// Entropy of the partition sizes.
double split_information(const std::vector<std::vector<double>>& children);
/// Gain / split info; 0 when the split information is 0.
double gain_ratio(std::span<const double> parent, const std::vector<std::vector<double>>& children);

/// Extra errors C4.5 adds to `errors` observed among `n` instances: the upper
/// limit of the binomial confidence interval at `confidence`, minus `errors`.
double pessimistic_extra_errors(double n, double errors, double confidence);

/// Indented text rendering. Tests print as `attr = value`, `attr <= t` / `attr > t`
/// or `attr in {a|b}` / `attr not in {a|b}`; leaves as `-> class (count)`,
/// with ` [nb]` appended for naive Bayes leaves.
std::string render(const TreeModel& model);

/// Rebuilds a tree from render() output. Leaves become one-hot on their printed
/// class; naive Bayes leaves lose their model and predict the printed class.
TreeModel parse_rendered(std::string_view text, std::shared_ptr<const Schema> schema, Variant variant);

}  // namespace tabml::trees
