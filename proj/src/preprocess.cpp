#include "tabml/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <unordered_map>

#include <fmt/format.h>

namespace tabml::preprocess {

bool Report::balanced() const {
    return instances_out + dropped_missing_critical + dropped_duplicates == instances_in;
}

std::string Report::summary() const {
    std::string out;
    out += fmt::format("instances in:                 {}\n", instances_in);
    out += fmt::format("out-of-range cells masked:    {}\n", out_of_range_cells);
    out += fmt::format("dropped (missing critical):   {}\n", dropped_missing_critical);
    out += fmt::format("imputed cells:                {}\n", imputed_cells);
    out += fmt::format("dropped (duplicates):         {}\n", dropped_duplicates);
    out += fmt::format("instances out:                {}\n", instances_out);
    for (const auto& [name, cuts] : per_attribute_cut_points)
        out += fmt::format("discretized {}: {} bins\n", name, cuts.size() + 1);
    return out;
}

std::string Report::cut_points_csv() const {
    std::string out;
    for (const auto& [name, cuts] : per_attribute_cut_points) {
        out += name;
        for (double c : cuts) out += "," + format_number(c);
        out += '\n';
    }
    return out;
}

namespace {

Report fresh_report(const Dataset& in) {
    Report r;
    r.instances_in = in.size();
    r.instances_out = in.size();
    return r;
}

}  // namespace

Result<Dataset> mask_out_of_range(const Dataset& dataset) {
    const Schema& schema = dataset.schema();
    Report report = fresh_report(dataset);
    Dataset out(dataset.schema_ptr());
    out.reserve(dataset.size());
    std::vector<Cell> row;
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        auto src = dataset.row(r);
        row.assign(src.begin(), src.end());
        for (std::size_t a = 0; a < row.size(); ++a) {
            const auto& range = schema.attribute(a).range();
            if (range && row[a].is_number() && (row[a].number() < range->lo || row[a].number() > range->hi)) {
                row[a] = Cell::missing();
                ++report.out_of_range_cells;
            }
        }
        out.add_row(row);
    }
    return {std::move(out), std::move(report)};
}

Result<Dataset> drop_missing_critical(const Dataset& dataset, const std::vector<std::string>& critical_attributes) {
    const Schema& schema = dataset.schema();
    std::vector<std::size_t> critical{schema.class_index()};
    for (const auto& name : critical_attributes) {
        auto idx = schema.find(name);
        if (!idx) throw DataError(fmt::format("critical attribute '{}' is not in the schema", name));
        critical.push_back(*idx);
    }
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        const bool ok = std::none_of(critical.begin(), critical.end(),
                                     [&](std::size_t a) { return dataset.at(r, a).is_missing(); });
        if (ok) keep.push_back(r);
    }
    Report report = fresh_report(dataset);
    report.dropped_missing_critical = dataset.size() - keep.size();
    report.instances_out = keep.size();
    return {dataset.subset(keep), std::move(report)};
}

Result<Dataset> impute_missing(const Dataset& dataset) {
    const Schema& schema = dataset.schema();
    const std::size_t width = schema.size();
    std::vector<Cell> fill(width);
    std::vector<bool> needs(width, false);
    for (std::size_t a = 0; a < width; ++a) {
        const Attribute& attr = schema.attribute(a);
        std::size_t present = 0, missing = 0;
        double sum = 0.0;
        std::vector<std::size_t> freq(attr.value_count(), 0);
        for (std::size_t r = 0; r < dataset.size(); ++r) {
            const Cell& c = dataset.at(r, a);
            if (c.is_missing()) {
                ++missing;
            } else {
                ++present;
                if (c.is_number()) sum += c.number();
                else ++freq[c.index()];
            }
        }
        if (missing == 0) continue;
        if (a == schema.class_index())
            throw DataError(fmt::format(
                "class attribute '{}' has {} missing cells; drop them before imputing", attr.name(), missing));
        if (present == 0)
            throw DataError(fmt::format("attribute '{}' is entirely missing; nothing to impute from", attr.name()));
        needs[a] = true;
        if (attr.is_numeric()) {
            fill[a] = Cell::number(sum / static_cast<double>(present));
        } else {
            // max_element returns the first maximum, i.e. the lowest index on ties.
            fill[a] = Cell::nominal(static_cast<std::size_t>(std::max_element(freq.begin(), freq.end()) - freq.begin()));
        }
    }

    Report report = fresh_report(dataset);
    Dataset out(dataset.schema_ptr());
    out.reserve(dataset.size());
    std::vector<Cell> row;
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        auto src = dataset.row(r);
        row.assign(src.begin(), src.end());
        for (std::size_t a = 0; a < width; ++a)
            if (needs[a] && row[a].is_missing()) {
                row[a] = fill[a];
                ++report.imputed_cells;
            }
        out.add_row(row);
    }
    return {std::move(out), std::move(report)};
}

Result<Dataset> dedup(const Dataset& dataset) {
    auto hash_row = [](Row row) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (const Cell& c : row) {
            std::uint64_t bits = 0;
            if (!c.is_missing()) {
                const double v = c.number() + 0.0;  // -0 and +0 compare equal, hash them alike
                std::memcpy(&bits, &v, sizeof bits);
            }
            h ^= static_cast<std::uint64_t>(c.kind());
            h *= 0x100000001b3ULL;
            h ^= bits;
            h *= 0x100000001b3ULL;
        }
        return h;
    };
    std::unordered_multimap<std::uint64_t, std::size_t> seen;
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        const auto row = dataset.row(r);
        const auto h = hash_row(row);
        auto [lo, hi] = seen.equal_range(h);
        const bool duplicate = std::any_of(lo, hi, [&](const auto& entry) {
            return std::ranges::equal(dataset.row(entry.second), row);
        });
        if (duplicate) continue;
        seen.emplace(h, r);
        keep.push_back(r);
    }
    Report report = fresh_report(dataset);
    report.dropped_duplicates = dataset.size() - keep.size();
    report.instances_out = keep.size();
    return {dataset.subset(keep), std::move(report)};
}

std::vector<double> equal_frequency_cuts(std::vector<double> values, std::size_t bins) {
    if (bins < 2) throw std::invalid_argument("equal-frequency discretization needs at least 2 bins");
    std::sort(values.begin(), values.end());
    // Distinct values with their multiplicities.
    std::vector<std::pair<double, std::size_t>> runs;
    for (double v : values) {
        if (!runs.empty() && runs.back().first == v) ++runs.back().second;
        else runs.emplace_back(v, 1);
    }
    std::vector<double> cuts;
    std::size_t remaining = values.size();
    std::size_t bins_left = bins;
    std::size_t acc = 0;
    for (std::size_t i = 0; i + 1 < runs.size() && bins_left > 1; ++i) {
        acc += runs[i].second;
        const double target = static_cast<double>(remaining) / static_cast<double>(bins_left);
        const double here = std::abs(static_cast<double>(acc) - target);
        const double with_next = std::abs(static_cast<double>(acc + runs[i + 1].second) - target);
        if (here <= with_next) {
            cuts.push_back((runs[i].first + runs[i + 1].first) / 2.0);
            remaining -= acc;
            --bins_left;
            acc = 0;
        }
    }
    return cuts;
}

std::vector<std::string> interval_labels(const std::vector<double>& cuts) {
    if (cuts.empty()) return {"(-inf..+inf)"};
    std::vector<std::string> labels;
    labels.reserve(cuts.size() + 1);
    labels.push_back("(-inf.." + format_number(cuts.front()) + "]");
    for (std::size_t i = 1; i < cuts.size(); ++i)
        labels.push_back("(" + format_number(cuts[i - 1]) + ".." + format_number(cuts[i]) + "]");
    labels.push_back("(" + format_number(cuts.back()) + "..+inf)");
    return labels;
}

namespace {

std::size_t bin_of(const std::vector<double>& cuts, double v) {
    // First cut >= v; values equal to a cut fall in the lower (closed) interval.
    return static_cast<std::size_t>(std::lower_bound(cuts.begin(), cuts.end(), v) - cuts.begin());
}

Dataset convert(const Dataset& dataset, const std::map<std::size_t, std::vector<double>>& cuts_by_index) {
    const Schema& schema = dataset.schema();
    std::vector<Attribute> attrs = schema.attributes();
    for (const auto& [a, cuts] : cuts_by_index)
        attrs[a] = Attribute::nominal(attrs[a].name(), interval_labels(cuts));
    Dataset out(Schema(std::move(attrs), schema.class_index()));
    out.reserve(dataset.size());
    std::vector<Cell> row;
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        auto src = dataset.row(r);
        row.assign(src.begin(), src.end());
        for (const auto& [a, cuts] : cuts_by_index)
            if (row[a].is_number()) row[a] = Cell::nominal(bin_of(cuts, row[a].number()));
        out.add_row(row);
    }
    return out;
}

}  // namespace

Result<Dataset> discretize_equal_frequency(const Dataset& dataset, std::size_t bins,
                                           const std::optional<std::vector<std::string>>& attribute_names) {
    if (bins < 2) throw std::invalid_argument("equal-frequency discretization needs at least 2 bins");
    const Schema& schema = dataset.schema();
    std::vector<std::size_t> targets;
    if (attribute_names) {
        for (const auto& name : *attribute_names) {
            auto idx = schema.find(name);
            if (!idx) throw DataError(fmt::format("cannot discretize unknown attribute '{}'", name));
            if (!schema.attribute(*idx).is_numeric())
                throw DataError(fmt::format("cannot discretize '{}': attribute is not numeric", name));
            targets.push_back(*idx);
        }
    } else {
        for (std::size_t a = 0; a < schema.size(); ++a)
            if (schema.attribute(a).is_numeric()) targets.push_back(a);
    }

    Report report = fresh_report(dataset);
    std::map<std::size_t, std::vector<double>> cuts_by_index;
    for (std::size_t a : targets) {
        std::vector<double> values;
        values.reserve(dataset.size());
        for (std::size_t r = 0; r < dataset.size(); ++r)
            if (dataset.at(r, a).is_number()) values.push_back(dataset.at(r, a).number());
        auto cuts = equal_frequency_cuts(std::move(values), bins);
        report.per_attribute_cut_points[schema.attribute(a).name()] = cuts;
        cuts_by_index[a] = std::move(cuts);
    }
    if (cuts_by_index.empty()) return {dataset, std::move(report)};
    return {convert(dataset, cuts_by_index), std::move(report)};
}

Dataset apply_cut_points(const Dataset& dataset, const std::map<std::string, std::vector<double>>& cuts) {
    std::map<std::size_t, std::vector<double>> by_index;
    for (const auto& [name, c] : cuts) {
        auto idx = dataset.schema().find(name);
        if (!idx || !dataset.schema().attribute(*idx).is_numeric())
            throw DataError(fmt::format("cut points given for '{}', which is not a numeric attribute", name));
        by_index[*idx] = c;
    }
    return convert(dataset, by_index);
}

Result<Dataset> run_pipeline(const Dataset& dataset, const Options& options) {
    Report report = fresh_report(dataset);

    auto masked = mask_out_of_range(dataset);
    report.out_of_range_cells = masked.report.out_of_range_cells;

    auto dropped = drop_missing_critical(masked.dataset, options.critical_attributes);
    report.dropped_missing_critical = dropped.report.dropped_missing_critical;

    auto imputed = impute_missing(dropped.dataset);
    report.imputed_cells = imputed.report.imputed_cells;

    auto unique = dedup(imputed.dataset);
    report.dropped_duplicates = unique.report.dropped_duplicates;

    Dataset result = std::move(unique.dataset);
    if (options.bins > 0) {
        auto disc = discretize_equal_frequency(result, options.bins, options.discretize_attributes);
        report.per_attribute_cut_points = std::move(disc.report.per_attribute_cut_points);
        result = std::move(disc.dataset);
    }
    report.instances_out = result.size();
    return {std::move(result), std::move(report)};
}

}  // namespace tabml::preprocess
