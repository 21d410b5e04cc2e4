#include "tabml/experiment.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "tabml/model_io.hpp"

namespace tabml::experiment {

std::string_view mode_name(Mode mode) {
    switch (mode) {
        case Mode::TrainingSet: return "train-set";
        case Mode::SuppliedTest: return "test-set";
        case Mode::CrossValidation: return "cv";
        case Mode::PercentageSplit: return "split";
    }
    return "?";
}

std::optional<Mode> parse_mode(std::string_view name) {
    for (Mode m : {Mode::TrainingSet, Mode::SuppliedTest, Mode::CrossValidation, Mode::PercentageSplit})
        if (mode_name(m) == name) return m;
    return std::nullopt;
}

namespace {

struct Resolved {
    std::optional<trees::Variant> tree;
    std::optional<bayes::Variant> bayes;
};

Resolved resolve(std::string_view name) {
    if (name == "BayesNet") return {std::nullopt, bayes::Variant::TAN};
    if (name == "TAN") return {};  // internal name only; the ten use BayesNet
    if (auto t = trees::parse_variant(name)) return {t, std::nullopt};
    if (auto b = bayes::parse_variant(name)) return {std::nullopt, b};
    return {};
}

/// Reads typed parameters and rejects any the algorithm does not know.
class Params {
public:
    Params(const AlgorithmSpec& spec) : spec_(spec) {}

    double real(const std::string& key, double fallback) {
        used_.insert(key);
        auto it = spec_.params.find(key);
        if (it == spec_.params.end()) return fallback;
        auto v = parse_number(it->second);
        if (!v) bad(key, it->second);
        return *v;
    }

    std::size_t size(const std::string& key, std::size_t fallback) {
        used_.insert(key);
        auto it = spec_.params.find(key);
        if (it == spec_.params.end()) return fallback;
        auto v = parse_integer(it->second);
        if (!v || *v < 0) bad(key, it->second);
        return static_cast<std::size_t>(*v);
    }

    std::optional<std::size_t> optional_size(const std::string& key) {
        if (!spec_.params.contains(key)) {
            used_.insert(key);
            return std::nullopt;
        }
        return size(key, 0);
    }

    bool flag(const std::string& key, bool fallback) {
        used_.insert(key);
        auto it = spec_.params.find(key);
        if (it == spec_.params.end()) return fallback;
        if (it->second == "true" || it->second == "yes" || it->second == "1") return true;
        if (it->second == "false" || it->second == "no" || it->second == "0") return false;
        bad(key, it->second);
    }

    void finish() const {
        for (const auto& [key, value] : spec_.params)
            if (!used_.contains(key))
                throw std::invalid_argument(fmt::format("{}: unknown parameter '{}'", spec_.name, key));
    }

private:
    [[noreturn]] void bad(const std::string& key, const std::string& value) const {
        throw std::invalid_argument(fmt::format("{}: bad value '{}' for parameter '{}'", spec_.name, value, key));
    }

    const AlgorithmSpec& spec_;
    std::set<std::string> used_;
};

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    for (auto part : split(text, ',')) {
        part = trim(part);
        if (!part.empty()) out.emplace_back(part);
    }
    return out;
}

}  // namespace

Family AlgorithmSpec::family() const {
    const Resolved r = resolve(name);
    if (r.tree) return Family::Tree;
    if (r.bayes) return Family::Bayes;
    throw std::invalid_argument(fmt::format("unknown algorithm '{}'", name));
}

AlgorithmSpec parse_algorithm(std::string_view text) {
    const auto parts = split(trim(text), ':');
    AlgorithmSpec spec;
    spec.name = std::string(trim(parts[0]));
    const Resolved r = resolve(spec.name);
    if (!r.tree && !r.bayes)
        throw std::invalid_argument(fmt::format(
            "unknown algorithm '{}' (expected one of {})", spec.name, default_algorithm_list()));
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const auto eq = parts[i].find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument(fmt::format("{}: parameter '{}' is not key=value", spec.name, parts[i]));
        std::string key(trim(parts[i].substr(0, eq)));
        std::string value(trim(parts[i].substr(eq + 1)));
        if (key.empty() || value.empty())
            throw std::invalid_argument(fmt::format("{}: empty parameter in '{}'", spec.name, parts[i]));
        if (!spec.params.emplace(key, value).second)
            throw std::invalid_argument(fmt::format("{}: parameter '{}' given twice", spec.name, key));
    }
    return spec;
}

std::vector<AlgorithmSpec> parse_algorithm_list(std::string_view comma_separated) {
    std::vector<AlgorithmSpec> out;
    std::set<std::string> seen;
    for (const auto& item : split_list(comma_separated)) {
        auto spec = parse_algorithm(item);
        if (!seen.insert(spec.name).second)
            throw std::invalid_argument(fmt::format("algorithm '{}' listed twice", spec.name));
        out.push_back(std::move(spec));
    }
    if (out.empty()) throw std::invalid_argument("no algorithms listed");
    return out;
}

std::string_view default_algorithm_list() {
    return "ID3,C4.5,BFTree,NBTree,REPTree,AODE,BayesNet,HNB,NaiveBayes,WAODE";
}

eval::Trainer make_trainer(const AlgorithmSpec& spec, std::uint64_t seed) {
    const Resolved r = resolve(spec.name);
    Params p(spec);
    eval::Trainer trainer;
    if (r.tree) {
        switch (*r.tree) {
            case trees::Variant::ID3:
                trainer = [](const Dataset& d) -> eval::Model { return trees::train_id3(d); };
                break;
            case trees::Variant::C45: {
                trees::C45Options o;
                o.min_leaf = p.size("min_leaf", o.min_leaf);
                o.prune_confidence = p.real("prune_confidence", o.prune_confidence);
                o.prune = p.flag("prune", o.prune);
                if (o.prune && !(o.prune_confidence > 0.0 && o.prune_confidence <= 0.5))
                    throw std::invalid_argument(fmt::format("{}: prune_confidence must lie in (0, 0.5]", spec.name));
                trainer = [o](const Dataset& d) -> eval::Model { return trees::train_c45(d, o); };
                break;
            }
            case trees::Variant::REPTree: {
                trees::REPTreeOptions o;
                o.seed = seed;
                o.prune_fraction = p.real("prune_fraction", o.prune_fraction);
                o.min_leaf = p.size("min_leaf", o.min_leaf);
                o.prune = p.flag("prune", o.prune);
                o.seed = p.size("seed", o.seed);
                if (!(o.prune_fraction > 0.0 && o.prune_fraction < 1.0))
                    throw std::invalid_argument(fmt::format("{}: prune_fraction must lie in (0, 1)", spec.name));
                trainer = [o](const Dataset& d) -> eval::Model { return trees::train_reptree(d, o); };
                break;
            }
            case trees::Variant::BFTree: {
                trees::BFTreeOptions o;
                o.max_expansions = p.optional_size("max_expansions");
                o.min_leaf = p.size("min_leaf", o.min_leaf);
                trainer = [o](const Dataset& d) -> eval::Model { return trees::train_bftree(d, o); };
                break;
            }
            case trees::Variant::NBTree: {
                trees::NBTreeOptions o;
                o.seed = seed;
                o.cv_folds = p.size("cv_folds", o.cv_folds);
                o.min_split = p.size("min_split", o.min_split);
                o.improvement_threshold = p.real("improvement_threshold", o.improvement_threshold);
                o.seed = p.size("seed", o.seed);
                if (o.cv_folds < 2) throw std::invalid_argument(fmt::format("{}: cv_folds must be >= 2", spec.name));
                trainer = [o](const Dataset& d) -> eval::Model { return trees::train_nbtree(d, o); };
                break;
            }
        }
    } else {
        const double l = p.real("laplace", 1.0);
        if (!(l >= 0.0)) throw std::invalid_argument(fmt::format("{}: laplace must be >= 0", spec.name));
        switch (*r.bayes) {
            case bayes::Variant::NaiveBayes:
                trainer = [l](const Dataset& d) -> eval::Model { return bayes::train_naive_bayes(d, l); };
                break;
            case bayes::Variant::AODE: {
                const std::size_t m = p.size("frequency_limit", 1);
                trainer = [l, m](const Dataset& d) -> eval::Model { return bayes::train_aode(d, l, m); };
                break;
            }
            case bayes::Variant::WAODE:
                trainer = [l](const Dataset& d) -> eval::Model { return bayes::train_waode(d, l); };
                break;
            case bayes::Variant::HNB:
                trainer = [l](const Dataset& d) -> eval::Model { return bayes::train_hnb(d, l); };
                break;
            case bayes::Variant::TAN:
                trainer = [l](const Dataset& d) -> eval::Model { return bayes::train_tan(d, l); };
                break;
        }
    }
    p.finish();
    return trainer;
}

// ---------------------------------------------------------------------------
// Configuration

ExperimentConfig default_config() {
    ExperimentConfig c;
    c.algorithms = parse_algorithm_list(default_algorithm_list());
    return c;
}

namespace {

const std::map<std::string, std::string, std::less<>>& key_sections() {
    static const std::map<std::string, std::string, std::less<>> keys = {
        {"data", "data"},           {"schema", "data"},          {"test-data", "data"},
        {"n", "generate"},          {"noise", "generate"},       {"missing-rate", "generate"},
        {"duplicate-rate", "generate"}, {"proportions", "generate"},
        {"critical", "preprocess"}, {"bins", "preprocess"},      {"discretize", "preprocess"},
        {"algorithms", "experiment"}, {"mode", "experiment"},    {"k", "experiment"},
        {"split-fraction", "experiment"}, {"seed", "experiment"},
        {"out", "output"},          {"metric", "output"},
    };
    return keys;
}

double real_value(std::string_view key, std::string_view value) {
    auto v = parse_number(value);
    if (!v) throw std::invalid_argument(fmt::format("{}: '{}' is not a number", key, value));
    return *v;
}

std::size_t count_value(std::string_view key, std::string_view value) {
    auto v = parse_integer(value);
    if (!v || *v < 0) throw std::invalid_argument(fmt::format("{}: '{}' is not a non-negative integer", key, value));
    return static_cast<std::size_t>(*v);
}

syngen::GenSpec& generator(ExperimentConfig& c) {
    if (!c.generator) c.generator = syngen::GenSpec{};
    return *c.generator;
}

}  // namespace

void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view raw_value) {
    const std::string_view value = trim(raw_value);
    if (!key_sections().contains(key)) throw std::invalid_argument(fmt::format("unknown setting '{}'", key));
    if (key == "data") c.data = std::string(value);
    else if (key == "schema") c.schema = std::string(value);
    else if (key == "test-data") c.test_data = std::string(value);
    else if (key == "n") generator(c).n = count_value(key, value);
    else if (key == "noise") generator(c).noise = real_value(key, value);
    else if (key == "missing-rate") generator(c).missing_rate = real_value(key, value);
    else if (key == "duplicate-rate") generator(c).duplicate_rate = real_value(key, value);
    else if (key == "proportions") {
        const auto items = split_list(value);
        if (items.size() != 3) throw std::invalid_argument("proportions: expected three comma-separated values");
        for (std::size_t i = 0; i < 3; ++i) generator(c).class_proportions[i] = real_value(key, items[i]);
    } else if (key == "critical") c.preprocessing.critical_attributes = split_list(value);
    else if (key == "bins") c.preprocessing.bins = count_value(key, value);
    else if (key == "discretize") {
        if (value == "all") c.preprocessing.discretize_attributes.reset();
        else c.preprocessing.discretize_attributes = split_list(value);
    } else if (key == "algorithms") c.algorithms = parse_algorithm_list(value);
    else if (key == "mode") {
        auto m = parse_mode(value);
        if (!m) throw std::invalid_argument(fmt::format("mode: '{}' is not one of train-set, test-set, cv, split", value));
        c.mode = *m;
    } else if (key == "k") c.k = count_value(key, value);
    else if (key == "split-fraction") c.split_fraction = real_value(key, value);
    else if (key == "seed") c.seed = count_value(key, value);
    else if (key == "out") c.out = std::string(value);
    else if (key == "metric") c.radar_metric = std::string(value);
}

void apply_config_text(ExperimentConfig& c, std::string_view text) {
    std::string section;
    std::size_t number = 0;
    for (std::string_view raw : split_lines(text)) {
        ++number;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        try {
            if (line.front() == '[') {
                if (line.back() != ']') throw std::invalid_argument("unterminated section header");
                section = std::string(trim(line.substr(1, line.size() - 2)));
                static const std::set<std::string> sections = {"data", "generate", "preprocess", "experiment",
                                                               "output"};
                if (!sections.contains(section))
                    throw std::invalid_argument(fmt::format("unknown section [{}]", section));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw std::invalid_argument("expected key = value");
            const std::string_view key = trim(line.substr(0, eq));
            auto it = key_sections().find(key);
            if (it == key_sections().end()) throw std::invalid_argument(fmt::format("unknown setting '{}'", key));
            if (it->second != section)
                throw std::invalid_argument(fmt::format("'{}' belongs in section [{}]", key, it->second));
            apply_setting(c, key, line.substr(eq + 1));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(fmt::format("config line {}: {}", number, e.what()));
        }
    }
}

void validate(const ExperimentConfig& c) {
    if (c.data.empty() && !c.generator)
        throw std::invalid_argument("no dataset: give --data and --schema, or generator settings");
    if (!c.data.empty() && c.schema.empty()) throw std::invalid_argument("--data needs --schema");
    if (c.generator) syngen::validate(*c.generator);
    if (c.algorithms.empty()) throw std::invalid_argument("no algorithms listed");
    for (const auto& a : c.algorithms) (void)make_trainer(a, c.seed);
    switch (c.mode) {
        case Mode::SuppliedTest:
            if (c.test_data.empty()) throw std::invalid_argument("mode test-set needs --test-data");
            if (c.data.empty()) throw std::invalid_argument("mode test-set needs --data and --schema");
            break;
        case Mode::CrossValidation:
            if (c.k < 2) throw std::invalid_argument("k must be >= 2");
            break;
        case Mode::PercentageSplit:
            if (!(c.split_fraction > 0.0 && c.split_fraction < 1.0))
                throw std::invalid_argument("split-fraction must lie in (0, 1)");
            break;
        case Mode::TrainingSet: break;
    }
    if (c.out.empty()) throw std::invalid_argument("output directory is empty");
}

// ---------------------------------------------------------------------------
// Running

bool ComparisonReport::partial_failure() const {
    return std::any_of(results.begin(), results.end(), [](const auto& r) { return !r.evaluation; });
}

std::optional<std::size_t> ComparisonReport::best() const {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < results.size(); ++i)
        if (results[i].evaluation &&
            (!best || results[i].evaluation->metrics.accuracy > results[*best].evaluation->metrics.accuracy))
            best = i;
    return best;
}

std::string ComparisonReport::csv() const {
    std::string out(eval::csv_header());
    out += '\n';
    for (const auto& r : results)
        if (r.evaluation) out += eval::csv_row(r.spec.name, r.evaluation->metrics) + '\n';
    return out;
}

namespace {

std::string describe_source(const ExperimentConfig& c) {
    if (!c.data.empty()) return c.data.string();
    const auto& g = *c.generator;
    return fmt::format("synthetic graduate profiles (n={}, seed={}, noise={}, missing_rate={}, duplicate_rate={})",
                       g.n, c.seed, format_number(g.noise), format_number(g.missing_rate),
                       format_number(g.duplicate_rate));
}

std::string describe_mode(const ExperimentConfig& c) {
    switch (c.mode) {
        case Mode::TrainingSet: return "training set";
        case Mode::SuppliedTest: return fmt::format("supplied test set {}", c.test_data.string());
        case Mode::CrossValidation: return fmt::format("{}-fold stratified cross-validation, seed {}", c.k, c.seed);
        case Mode::PercentageSplit:
            return fmt::format("percentage split, {} % train, seed {}", format_number(100.0 * c.split_fraction), c.seed);
    }
    return "?";
}

}  // namespace

std::string ComparisonReport::text(const ExperimentConfig& c) const {
    std::string out = "Classifier comparison\n\n";
    out += fmt::format("Dataset:     {}\n", describe_source(c));
    out += fmt::format("Instances:   {} after preprocessing\n", instances);
    out += fmt::format("Evaluation:  {}\n\n", describe_mode(c));

    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < results.size(); ++i)
        if (results[i].evaluation) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return results[a].evaluation->metrics.accuracy > results[b].evaluation->metrics.accuracy;
    });
    if (auto b = best()) {
        out += fmt::format("Best algorithm by accuracy: {} ({:.2f} %)\n\n", results[*b].spec.name,
                           results[*b].evaluation->metrics.accuracy);
    } else {
        out += "No algorithm completed.\n\n";
    }
    out += "Ranking by accuracy:\n";
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const auto& r = results[order[rank]];
        out += fmt::format("  {:>2}. {:<12} {:>8.2f} %  ({})\n", rank + 1, r.spec.name, r.evaluation->metrics.accuracy,
                           r.spec.family() == Family::Tree ? "tree" : "Bayes");
    }
    for (const auto& r : results)
        if (!r.evaluation) out += fmt::format("  failed: {}: {}\n", r.spec.name, r.error);
    out += '\n';
    for (const auto& r : results)
        if (r.evaluation) out += eval::format_report(r.spec.name, *r.evaluation, class_labels) + '\n';
    return out;
}

ComparisonReport run_compare(const ExperimentConfig& c) {
    validate(c);
    std::shared_ptr<const Schema> raw_schema;
    Dataset raw = [&] {
        if (!c.data.empty()) {
            raw_schema = std::make_shared<const Schema>(read_schema_file(c.schema));
            return read_csv_file(c.data, *raw_schema);
        }
        syngen::GenSpec g = *c.generator;
        g.seed = c.seed;
        Dataset d = syngen::generate(g);
        raw_schema = d.schema_ptr();
        return d;
    }();

    ComparisonReport report;
    auto cleaned = preprocess::run_pipeline(raw, c.preprocessing);
    const Dataset& data = cleaned.dataset;
    report.preprocessing = cleaned.report;
    report.instances = data.size();
    report.class_labels = data.schema().class_attribute().labels();
    if (data.empty()) throw DataError("no instances left after preprocessing");

    std::optional<Dataset> test;
    if (c.mode == Mode::SuppliedTest) {
        Dataset t = read_csv_file(c.test_data, *raw_schema);
        t = preprocess::mask_out_of_range(t).dataset;
        t = preprocess::drop_missing_critical(t, {}).dataset;
        t = preprocess::apply_cut_points(t, cleaned.report.per_attribute_cut_points);
        if (t.empty()) throw DataError(fmt::format("{}: no labelled test instances", c.test_data.string()));
        test = std::move(t);
    }
    std::optional<TrainTest> split;
    if (c.mode == Mode::PercentageSplit) split = percentage_split(data, c.split_fraction, c.seed);

    std::vector<AlgorithmSpec> ordered;
    for (Family f : {Family::Tree, Family::Bayes})
        for (const auto& a : c.algorithms)
            if (a.family() == f) ordered.push_back(a);

    for (const auto& spec : ordered) {
        AlgorithmResult result;
        result.spec = spec;
        try {
            const eval::Trainer trainer = make_trainer(spec, c.seed);
            switch (c.mode) {
                case Mode::TrainingSet:
                    result.model = trainer(data);
                    result.evaluation = eval::evaluate(*result.model, data, eval::class_prior(data));
                    break;
                case Mode::SuppliedTest:
                    result.model = trainer(data);
                    result.evaluation = eval::evaluate(*result.model, *test, eval::class_prior(data));
                    break;
                case Mode::CrossValidation:
                    result.evaluation = eval::cross_validate(trainer, data, c.k, c.seed);
                    result.model = trainer(data);
                    break;
                case Mode::PercentageSplit:
                    result.model = trainer(split->train);
                    result.evaluation = eval::evaluate(*result.model, split->test, eval::class_prior(split->train));
                    break;
            }
        } catch (const std::exception& e) {
            result.evaluation.reset();
            result.model.reset();
            result.error = e.what();
        }
        report.results.push_back(std::move(result));
    }
    return report;
}

void write_outputs(const ExperimentConfig& c, const ComparisonReport& report) {
    const std::string csv = report.csv();
    std::string text = report.text(c);
    write_text_file(c.out / "report.csv", csv);
    write_text_file(c.out / "preprocess_report.txt", report.preprocessing.summary());
    write_text_file(c.out / "cut_points.csv", report.preprocessing.cut_points_csv());
    for (const auto& r : report.results)
        if (r.model) write_model_file(c.out / "models" / (r.spec.name + ".model"), *r.model);
    std::size_t rows = 0;
    for (const auto& r : report.results) rows += r.evaluation ? 1 : 0;
    if (rows >= 3) {
        write_text_file(c.out / "radar.svg", render_radar(csv, c.radar_metric));
    } else {
        text += fmt::format("Radar chart skipped: only {} algorithm(s) completed; a bar chart suits so few.\n", rows);
    }
    write_text_file(c.out / "report.txt", text);
}

}  // namespace tabml::experiment
