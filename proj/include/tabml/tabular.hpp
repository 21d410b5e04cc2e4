#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tabml/text.hpp"

namespace tabml {

enum class AttributeKind : std::uint8_t { Nominal, Numeric };

/// Closed interval a numeric attribute's values are expected to lie in.
struct NumericRange {
    double lo = 0.0;
    double hi = 0.0;
    friend bool operator==(const NumericRange&, const NumericRange&) = default;
};

class Attribute {
public:
    static Attribute nominal(std::string name, std::vector<std::string> labels);
    static Attribute numeric(std::string name, std::optional<NumericRange> range = std::nullopt);

    const std::string& name() const { return name_; }
    AttributeKind kind() const { return kind_; }
    bool is_nominal() const { return kind_ == AttributeKind::Nominal; }
    bool is_numeric() const { return kind_ == AttributeKind::Numeric; }

    /// Nominal value labels in declaration order (empty for numeric attributes).
    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t value_count() const { return labels_.size(); }
    std::optional<std::size_t> find_label(std::string_view label) const;

    const std::optional<NumericRange>& range() const { return range_; }

    friend bool operator==(const Attribute&, const Attribute&) = default;

private:
    Attribute() = default;

    std::string name_;
    AttributeKind kind_ = AttributeKind::Numeric;
    std::vector<std::string> labels_;
    std::optional<NumericRange> range_;
};

class Schema {
public:
    /// Throws DataError on duplicate names, an out-of-range class index or a
    /// numeric class attribute.
    Schema(std::vector<Attribute> attributes, std::size_t class_index);

    const std::vector<Attribute>& attributes() const { return attributes_; }
    const Attribute& attribute(std::size_t i) const { return attributes_.at(i); }
    std::size_t size() const { return attributes_.size(); }
    std::size_t class_index() const { return class_index_; }
    const Attribute& class_attribute() const { return attributes_[class_index_]; }
    std::size_t class_count() const { return class_attribute().value_count(); }
    std::optional<std::size_t> find(std::string_view name) const;

    /// Canonical declaration text, one attribute per line; parse_schema(declaration())
    /// reproduces this schema.
    std::string declaration() const;

    /// FNV-1a 64 hash of declaration().
    std::uint64_t fingerprint() const;

    friend bool operator==(const Schema&, const Schema&) = default;

private:
    std::vector<Attribute> attributes_;
    std::size_t class_index_;
};

/// One cell of a row: a nominal value index, a finite number, or missing.
class Cell {
public:
    enum class Kind : std::uint8_t { Missing, Nominal, Number };

    constexpr Cell() = default;
    static constexpr Cell missing() { return Cell(); }
    static Cell nominal(std::size_t index) { return Cell(Kind::Nominal, static_cast<double>(index)); }
    /// Throws DataError when value is not finite.
    static Cell number(double value);

    Kind kind() const { return kind_; }
    bool is_missing() const { return kind_ == Kind::Missing; }
    bool is_nominal() const { return kind_ == Kind::Nominal; }
    bool is_number() const { return kind_ == Kind::Number; }

    std::size_t index() const { return static_cast<std::size_t>(value_); }
    double number() const { return value_; }

    friend bool operator==(const Cell& a, const Cell& b) {
        return a.kind_ == b.kind_ && (a.kind_ == Kind::Missing || a.value_ == b.value_);
    }

private:
    constexpr Cell(Kind kind, double value) : kind_(kind), value_(value) {}

    Kind kind_ = Kind::Missing;
    double value_ = 0.0;
};

using Row = std::span<const Cell>;

/// Rows of cells bound to a shared, immutable schema. Every row is validated
/// on insertion: arity, cell kind against attribute kind, nominal bounds.
class Dataset {
public:
    explicit Dataset(std::shared_ptr<const Schema> schema);
    explicit Dataset(Schema schema);

    const Schema& schema() const { return *schema_; }
    const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }

    std::size_t size() const { return rows_; }
    bool empty() const { return rows_ == 0; }
    std::size_t width() const { return schema_->size(); }

    Row row(std::size_t i) const { return {cells_.data() + i * width(), width()}; }
    const Cell& at(std::size_t row, std::size_t attr) const { return cells_[row * width() + attr]; }

    /// Class value index of row i; throws DataError if the class cell is missing.
    std::size_t class_of(std::size_t i) const;

    void add_row(std::span<const Cell> cells);
    void reserve(std::size_t rows) { cells_.reserve(rows * width()); }

    /// New dataset (same schema object) holding the given rows, in the given order.
    Dataset subset(std::span<const std::size_t> rows) const;

    /// Per-class instance counts; rows with a missing class are not counted.
    std::vector<std::size_t> class_counts() const;

    bool has_missing() const;
    std::size_t missing_count() const;

    friend bool operator==(const Dataset& a, const Dataset& b) {
        return *a.schema_ == *b.schema_ && a.rows_ == b.rows_ && a.cells_ == b.cells_;
    }

private:
    std::shared_ptr<const Schema> schema_;
    std::vector<Cell> cells_;
    std::size_t rows_ = 0;
};

/// Validates one cell against an attribute; throws DataError with a readable reason.
void check_cell(const Attribute& attribute, const Cell& cell);

/// Parses `name: nominal(v1|v2|...)`, `name: numeric`, `name: numeric[lo,hi]`
/// and `class: name` entries separated by newlines or ';'. `#` starts a comment.
Schema parse_schema(std::string_view declaration_text);
Schema read_schema_file(const std::filesystem::path& path);

Dataset parse_csv(std::string_view text, const Schema& schema, std::string_view missing_marker = "?");
Dataset read_csv_file(const std::filesystem::path& path, const Schema& schema,
                      std::string_view missing_marker = "?");

/// Header plus one line per row. Throws DataError if a name or label would not
/// survive re-parsing (contains a comma, a line break, or equals the missing marker).
std::string to_csv(const Dataset& dataset, std::string_view missing_marker = "?");

struct TrainTest {
    Dataset train;
    Dataset test;
};

/// Test-fold row indices for stratified k-fold CV. The rows are shuffled by
/// seed, grouped by class (stable, class index order) and dealt round-robin
/// across folds, so fold sizes and per-class fold counts each differ by at most one.
std::vector<std::vector<std::size_t>> stratified_fold_indices(const Dataset& dataset, std::size_t k,
                                                              std::uint64_t seed);

std::vector<TrainTest> stratified_kfold(const Dataset& dataset, std::size_t k, std::uint64_t seed);

/// Shuffles by seed and keeps the first floor(fraction * N) rows for training.
TrainTest percentage_split(const Dataset& dataset, double train_fraction, std::uint64_t seed);

}  // namespace tabml
