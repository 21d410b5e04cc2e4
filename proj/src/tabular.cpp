#include "tabml/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include <fmt/format.h>

#include "tabml/rng.hpp"

namespace tabml {

// ---------------------------------------------------------------------------
// Attribute / Schema

Attribute Attribute::nominal(std::string name, std::vector<std::string> labels) {
    if (name.empty()) throw DataError("attribute name is empty");
    if (labels.empty()) throw DataError(fmt::format("nominal attribute '{}' has no values", name));
    std::unordered_set<std::string> seen;
    for (const auto& label : labels) {
        if (label.empty()) throw DataError(fmt::format("attribute '{}' has an empty value label", name));
        if (!seen.insert(label).second)
            throw DataError(fmt::format("attribute '{}' declares value '{}' twice", name, label));
    }
    Attribute a;
    a.name_ = std::move(name);
    a.kind_ = AttributeKind::Nominal;
    a.labels_ = std::move(labels);
    return a;
}

Attribute Attribute::numeric(std::string name, std::optional<NumericRange> range) {
    if (name.empty()) throw DataError("attribute name is empty");
    if (range && !(range->lo <= range->hi))
        throw DataError(fmt::format("attribute '{}' has an empty numeric range", name));
    Attribute a;
    a.name_ = std::move(name);
    a.kind_ = AttributeKind::Numeric;
    a.range_ = range;
    return a;
}

std::optional<std::size_t> Attribute::find_label(std::string_view label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == label) return i;
    return std::nullopt;
}

Schema::Schema(std::vector<Attribute> attributes, std::size_t class_index)
    : attributes_(std::move(attributes)), class_index_(class_index) {
    if (class_index_ >= attributes_.size())
        throw DataError(fmt::format("class index {} out of range for {} attributes", class_index_,
                                    attributes_.size()));
    std::unordered_set<std::string> names;
    for (const auto& a : attributes_)
        if (!names.insert(a.name()).second)
            throw DataError(fmt::format("duplicate attribute name '{}'", a.name()));
    if (!attributes_[class_index_].is_nominal())
        throw DataError(fmt::format("class attribute '{}' must be nominal", attributes_[class_index_].name()));
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
    for (std::size_t i = 0; i < attributes_.size(); ++i)
        if (attributes_[i].name() == name) return i;
    return std::nullopt;
}

std::string Schema::declaration() const {
    std::string out;
    for (const auto& a : attributes_) {
        out += a.name();
        if (a.is_nominal()) {
            out += ": nominal(";
            for (std::size_t i = 0; i < a.labels().size(); ++i) {
                if (i) out += '|';
                out += a.labels()[i];
            }
            out += ")\n";
        } else if (a.range()) {
            out += fmt::format(": numeric[{},{}]\n", format_number(a.range()->lo), format_number(a.range()->hi));
        } else {
            out += ": numeric\n";
        }
    }
    out += "class: " + class_attribute().name() + "\n";
    return out;
}

std::uint64_t Schema::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : declaration()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Cell / Dataset

Cell Cell::number(double value) {
    if (!std::isfinite(value)) throw DataError("numeric cell must be finite");
    return Cell(Kind::Number, value);
}

void check_cell(const Attribute& attribute, const Cell& cell) {
    switch (cell.kind()) {
        case Cell::Kind::Missing:
            return;
        case Cell::Kind::Nominal:
            if (!attribute.is_nominal())
                throw DataError(fmt::format("attribute '{}' is numeric but got a nominal cell", attribute.name()));
            if (cell.index() >= attribute.value_count())
                throw DataError(fmt::format("value index {} out of range for attribute '{}'", cell.index(),
                                            attribute.name()));
            return;
        case Cell::Kind::Number:
            if (!attribute.is_numeric())
                throw DataError(fmt::format("attribute '{}' is nominal but got a numeric cell", attribute.name()));
            return;
    }
}

Dataset::Dataset(std::shared_ptr<const Schema> schema) : schema_(std::move(schema)) {
    if (!schema_) throw std::invalid_argument("Dataset: null schema");
}

Dataset::Dataset(Schema schema) : Dataset(std::make_shared<const Schema>(std::move(schema))) {}

std::size_t Dataset::class_of(std::size_t i) const {
    const Cell& c = at(i, schema_->class_index());
    if (c.is_missing()) throw DataError(fmt::format("row {} has a missing class value", i));
    return c.index();
}

void Dataset::add_row(std::span<const Cell> cells) {
    if (cells.size() != width())
        throw DataError(fmt::format("row has {} cells, schema has {} attributes", cells.size(), width()));
    for (std::size_t a = 0; a < cells.size(); ++a) check_cell(schema_->attribute(a), cells[a]);
    cells_.insert(cells_.end(), cells.begin(), cells.end());
    ++rows_;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset out(schema_);
    out.cells_.reserve(rows.size() * width());
    for (std::size_t r : rows) {
        if (r >= rows_) throw std::out_of_range("Dataset::subset: row index out of range");
        auto src = row(r);
        out.cells_.insert(out.cells_.end(), src.begin(), src.end());
    }
    out.rows_ = rows.size();
    return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(schema_->class_count(), 0);
    const std::size_t ci = schema_->class_index();
    for (std::size_t r = 0; r < rows_; ++r) {
        const Cell& c = at(r, ci);
        if (!c.is_missing()) ++counts[c.index()];
    }
    return counts;
}

bool Dataset::has_missing() const {
    return std::any_of(cells_.begin(), cells_.end(), [](const Cell& c) { return c.is_missing(); });
}

std::size_t Dataset::missing_count() const {
    return static_cast<std::size_t>(
        std::count_if(cells_.begin(), cells_.end(), [](const Cell& c) { return c.is_missing(); }));
}

// ---------------------------------------------------------------------------
// Schema declaration parsing

namespace {

std::string_view strip_comment(std::string_view line) {
    const auto hash = line.find('#');
    return hash == std::string_view::npos ? line : line.substr(0, hash);
}

bool starts_with_keyword(std::string_view s, std::string_view keyword) {
    if (!s.starts_with(keyword)) return false;
    if (s.size() == keyword.size()) return true;
    const char next = s[keyword.size()];
    return next == '(' || next == '[' || next == ' ' || next == '\t';
}

}  // namespace

Schema parse_schema(std::string_view declaration_text) {
    std::vector<Attribute> attributes;
    std::optional<std::string> class_name;
    std::size_t line_no = 0;
    for (auto raw_line : split_lines(declaration_text)) {
        ++line_no;
        for (auto entry : split(strip_comment(raw_line), ';')) {
            entry = trim(entry);
            if (entry.empty()) continue;
            const auto colon = entry.find(':');
            if (colon == std::string_view::npos)
                throw DataError(fmt::format("schema line {}: expected 'name: type', got '{}'", line_no, entry));
            const std::string name(trim(entry.substr(0, colon)));
            const std::string_view type = trim(entry.substr(colon + 1));
            if (name.empty()) throw DataError(fmt::format("schema line {}: empty attribute name", line_no));

            if (starts_with_keyword(type, "nominal")) {
                const auto open = type.find('(');
                const auto close = type.rfind(')');
                if (open == std::string_view::npos || close == std::string_view::npos || close < open ||
                    !trim(type.substr(close + 1)).empty())
                    throw DataError(fmt::format("schema line {}: malformed nominal list for '{}'", line_no, name));
                std::vector<std::string> labels;
                for (auto label : split(type.substr(open + 1, close - open - 1), '|'))
                    labels.emplace_back(trim(label));
                attributes.push_back(Attribute::nominal(name, std::move(labels)));
            } else if (starts_with_keyword(type, "numeric")) {
                auto rest = trim(type.substr(7));
                std::optional<NumericRange> range;
                if (!rest.empty()) {
                    if (rest.front() != '[' || rest.back() != ']')
                        throw DataError(fmt::format("schema line {}: malformed numeric range for '{}'", line_no, name));
                    auto bounds = split(rest.substr(1, rest.size() - 2), ',');
                    std::optional<double> lo, hi;
                    if (bounds.size() == 2) {
                        lo = parse_number(bounds[0]);
                        hi = parse_number(bounds[1]);
                    }
                    if (!lo || !hi)
                        throw DataError(fmt::format("schema line {}: malformed numeric range for '{}'", line_no, name));
                    range = NumericRange{*lo, *hi};
                }
                attributes.push_back(Attribute::numeric(name, range));
            } else if (name == "class") {
                if (class_name) throw DataError(fmt::format("schema line {}: class declared twice", line_no));
                class_name = std::string(type);
            } else {
                throw DataError(fmt::format("schema line {}: unknown type '{}' for '{}'", line_no, type, name));
            }
        }
    }
    if (!class_name) throw DataError("schema declares no class attribute");
    std::optional<std::size_t> class_index;
    for (std::size_t i = 0; i < attributes.size(); ++i)
        if (attributes[i].name() == *class_name) class_index = i;
    if (!class_index) throw DataError(fmt::format("class attribute '{}' not declared", *class_name));
    if (!attributes[*class_index].is_nominal())
        throw DataError(fmt::format("class attribute '{}' is numeric; classification needs a nominal class",
                                    *class_name));
    return Schema(std::move(attributes), *class_index);
}

Schema read_schema_file(const std::filesystem::path& path) {
    try {
        return parse_schema(read_text_file(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// CSV

Dataset parse_csv(std::string_view text, const Schema& schema, std::string_view missing_marker) {
    auto lines = split_lines(text);
    std::size_t line_no = 0;
    auto next_nonblank = [&]() -> std::optional<std::string_view> {
        while (line_no < lines.size()) {
            auto line = lines[line_no++];
            if (!trim(line).empty()) return line;
        }
        return std::nullopt;
    };

    auto header = next_nonblank();
    if (!header) throw DataError("CSV is empty: missing header line");
    auto names = split(*header, ',');
    if (names.size() != schema.size())
        throw DataError(fmt::format("CSV header has {} columns, schema has {} attributes", names.size(),
                                    schema.size()));
    for (std::size_t i = 0; i < names.size(); ++i)
        if (trim(names[i]) != schema.attribute(i).name())
            throw DataError(fmt::format("CSV header column {} is '{}', schema expects '{}'", i + 1,
                                        trim(names[i]), schema.attribute(i).name()));

    Dataset out(std::make_shared<const Schema>(schema));
    std::vector<Cell> cells(schema.size());
    while (auto line = next_nonblank()) {
        auto fields = split(*line, ',');
        if (fields.size() != schema.size())
            throw DataError(fmt::format("line {}: expected {} fields, got {}", line_no, schema.size(), fields.size()));
        for (std::size_t a = 0; a < fields.size(); ++a) {
            const auto field = trim(fields[a]);
            const Attribute& attr = schema.attribute(a);
            if (field == missing_marker) {
                cells[a] = Cell::missing();
            } else if (attr.is_nominal()) {
                auto idx = attr.find_label(field);
                if (!idx)
                    throw DataError(fmt::format("line {}: value '{}' is not declared for attribute '{}'", line_no,
                                                field, attr.name()));
                cells[a] = Cell::nominal(*idx);
            } else {
                auto v = parse_number(field);
                if (!v)
                    throw DataError(fmt::format("line {}: cannot parse '{}' as a number for attribute '{}'", line_no,
                                                field, attr.name()));
                cells[a] = Cell::number(*v);
            }
        }
        out.add_row(cells);
    }
    return out;
}

Dataset read_csv_file(const std::filesystem::path& path, const Schema& schema, std::string_view missing_marker) {
    try {
        return parse_csv(read_text_file(path), schema, missing_marker);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string to_csv(const Dataset& dataset, std::string_view missing_marker) {
    const Schema& schema = dataset.schema();
    auto check_token = [&](const std::string& s, std::string_view what) {
        if (s.find_first_of(",\n\r") != std::string::npos)
            throw DataError(fmt::format("{} '{}' contains a comma or line break; cannot write CSV", what, s));
        if (s == missing_marker)
            throw DataError(fmt::format("{} '{}' collides with the missing marker", what, s));
        if (trim(s) != s) throw DataError(fmt::format("{} '{}' has surrounding whitespace", what, s));
    };
    std::string out;
    for (std::size_t a = 0; a < schema.size(); ++a) {
        const Attribute& attr = schema.attribute(a);
        check_token(attr.name(), "attribute name");
        for (const auto& label : attr.labels()) check_token(label, "value label");
        if (a) out += ',';
        out += attr.name();
    }
    out += '\n';
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        for (std::size_t a = 0; a < schema.size(); ++a) {
            if (a) out += ',';
            const Cell& c = dataset.at(r, a);
            if (c.is_missing())
                out += missing_marker;
            else if (c.is_nominal())
                out += schema.attribute(a).labels()[c.index()];
            else
                out += format_number(c.number());
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Splitting

std::vector<std::vector<std::size_t>> stratified_fold_indices(const Dataset& dataset, std::size_t k,
                                                              std::uint64_t seed) {
    if (k < 2 || k > dataset.size())
        throw std::invalid_argument(
            fmt::format("fold count k={} must satisfy 2 <= k <= {} (instance count)", k, dataset.size()));
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t r : order) (void)dataset.class_of(r);  // rejects missing class values up front
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dataset.class_of(a) < dataset.class_of(b); });
    std::vector<std::vector<std::size_t>> folds(k);
    for (std::size_t p = 0; p < order.size(); ++p) folds[p % k].push_back(order[p]);
    return folds;
}

std::vector<TrainTest> stratified_kfold(const Dataset& dataset, std::size_t k, std::uint64_t seed) {
    auto folds = stratified_fold_indices(dataset, k, seed);
    std::vector<TrainTest> out;
    out.reserve(k);
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<std::size_t> train;
        train.reserve(dataset.size() - folds[f].size());
        for (std::size_t g = 0; g < k; ++g)
            if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
        std::sort(train.begin(), train.end());
        out.push_back({dataset.subset(train), dataset.subset(folds[f])});
    }
    return out;
}

TrainTest percentage_split(const Dataset& dataset, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument(fmt::format("train fraction {} must lie in (0, 1)", train_fraction));
    const std::size_t n = dataset.size();
    // The epsilon keeps products such as 0.7 * 10 from flooring to 6.
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 1e-9));
    if (n_train == 0 || n_train >= n)
        throw std::invalid_argument(fmt::format(
            "train fraction {} on {} instances leaves an empty train or test side", train_fraction, n));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
    std::span<const std::size_t> all(order);
    return {dataset.subset(all.first(n_train)), dataset.subset(all.subspan(n_train))};
}

}  // namespace tabml
