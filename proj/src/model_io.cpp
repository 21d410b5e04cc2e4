#include "tabml/model_io.hpp"

#include <fmt/format.h>

namespace tabml {

namespace {

constexpr std::string_view kMagic = "tabml-model 1";

void put_vector(std::string& out, std::string_view key, const std::vector<double>& v) {
    out += fmt::format("{} {}", key, v.size());
    for (double x : v) {
        out += ' ';
        out += format_number(x);
    }
    out += '\n';
}

void put_bayes(std::string& out, const bayes::BayesModel& m) {
    out += fmt::format("laplace {}\n", format_number(m.laplace));
    out += fmt::format("frequency_limit {}\n", m.frequency_limit);
    out += fmt::format("total {}\n", format_number(m.cube.total()));
    put_vector(out, "class", m.cube.class_counts());
    put_vector(out, "single", m.cube.single_counts());
    put_vector(out, "pair", m.cube.pair_counts());
    put_vector(out, "parent_weights", m.parent_weights);
    out += fmt::format("hidden_weights {}\n", m.hidden_weights.size());
    for (const auto& row : m.hidden_weights) put_vector(out, "row", row);
    out += fmt::format("tree_parents {}", m.tree_parents.size());
    for (const auto& p : m.tree_parents) out += p ? fmt::format(" {}", *p) : std::string(" -");
    out += '\n';
    out += fmt::format("gaussians {}\n", m.gaussians.size());
    for (const auto& per_class : m.gaussians) {
        std::vector<double> flat;
        for (const auto& g : per_class) {
            flat.push_back(g.mean);
            flat.push_back(g.variance);
        }
        put_vector(out, "g", flat);
    }
}

void put_tree(std::string& out, const trees::TreeModel& m) {
    out += fmt::format("nodes {}\n", m.nodes.size());
    for (const auto& n : m.nodes) {
        out += fmt::format("node {}", format_number(n.count));
        for (double c : n.class_counts) out += ' ' + format_number(c);
        for (double p : n.distribution) out += ' ' + format_number(p);
        out += fmt::format(" {} {} {} {}", static_cast<int>(n.test), n.attribute, format_number(n.threshold),
                           n.subset.size());
        for (bool b : n.subset) out += b ? " 1" : " 0";
        out += fmt::format(" {}", n.children.size());
        for (std::size_t c : n.children) out += fmt::format(" {}", c);
        out += n.leaf_model ? fmt::format(" {}", *n.leaf_model) : std::string(" -");
        out += '\n';
    }
    out += fmt::format("leaf_models {}\n", m.leaf_models.size());
    for (const auto& leaf : m.leaf_models) {
        out += fmt::format("bayes {}\n", variant_name(leaf.variant));
        put_bayes(out, leaf);
    }
    out += fmt::format("trace {}\n", m.expansion_trace.size());
    for (const auto& [node, gain] : m.expansion_trace) out += fmt::format("t {} {}\n", node, format_number(gain));
}

/// Whitespace token stream over the body lines, with line numbers for errors.
class Tokens {
public:
    explicit Tokens(const std::vector<std::string_view>& lines, std::size_t first_line) {
        for (std::size_t i = 0; i < lines.size(); ++i) {
            std::string_view line = lines[i];
            std::size_t p = 0;
            while (p < line.size()) {
                while (p < line.size() && line[p] == ' ') ++p;
                const std::size_t start = p;
                while (p < line.size() && line[p] != ' ') ++p;
                if (p > start) tokens_.push_back({line.substr(start, p - start), first_line + i});
            }
        }
    }

    [[noreturn]] void fail(std::string_view why) const {
        const std::size_t line = pos_ < tokens_.size() ? tokens_[pos_].line : (tokens_.empty() ? 0 : tokens_.back().line);
        throw DataError(fmt::format("model file line {}: {}", line, why));
    }

    std::string_view next() {
        if (pos_ >= tokens_.size()) fail("unexpected end of model");
        return tokens_[pos_++].text;
    }

    void expect(std::string_view word) {
        if (next() != word) {
            --pos_;
            fail(fmt::format("expected '{}'", word));
        }
    }

    double number() {
        const auto t = next();
        auto v = parse_number(t);
        if (!v) fail(fmt::format("bad number '{}'", t));
        return *v;
    }

    std::size_t count() {
        const auto t = next();
        auto v = parse_integer(t);
        if (!v || *v < 0) fail(fmt::format("bad count '{}'", t));
        return static_cast<std::size_t>(*v);
    }

    std::optional<std::size_t> optional_count() {
        if (pos_ < tokens_.size() && tokens_[pos_].text == "-") {
            ++pos_;
            return std::nullopt;
        }
        return count();
    }

    std::vector<double> vector(std::string_view key) {
        expect(key);
        std::vector<double> v(count());
        for (double& x : v) x = number();
        return v;
    }

    bool done() const { return pos_ >= tokens_.size(); }

private:
    struct Token {
        std::string_view text;
        std::size_t line;
    };
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

bayes::BayesModel get_bayes(Tokens& in, bayes::Variant variant, const std::shared_ptr<const Schema>& schema) {
    bayes::BayesModel m;
    m.variant = variant;
    m.schema = schema;
    in.expect("laplace");
    m.laplace = in.number();
    in.expect("frequency_limit");
    m.frequency_limit = in.count();
    in.expect("total");
    const double total = in.number();
    auto cls = in.vector("class");
    auto single = in.vector("single");
    auto pair = in.vector("pair");
    m.cube = bayes::FrequencyCube::from_raw(*schema, total, std::move(cls), std::move(single), std::move(pair));
    m.parent_weights = in.vector("parent_weights");
    in.expect("hidden_weights");
    m.hidden_weights.resize(in.count());
    for (auto& row : m.hidden_weights) row = in.vector("row");
    in.expect("tree_parents");
    m.tree_parents.resize(in.count());
    for (auto& p : m.tree_parents) p = in.optional_count();
    in.expect("gaussians");
    m.gaussians.resize(in.count());
    for (auto& per_class : m.gaussians) {
        const auto flat = in.vector("g");
        if (flat.size() % 2 != 0) in.fail("odd gaussian parameter count");
        for (std::size_t i = 0; i < flat.size(); i += 2) per_class.push_back({flat[i], flat[i + 1]});
    }
    return m;
}

trees::TreeModel get_tree(Tokens& in, trees::Variant variant, const std::shared_ptr<const Schema>& schema) {
    trees::TreeModel m;
    m.variant = variant;
    m.schema = schema;
    const std::size_t K = schema->class_count();
    in.expect("nodes");
    m.nodes.resize(in.count());
    for (auto& n : m.nodes) {
        in.expect("node");
        n.count = in.number();
        n.class_counts.resize(K);
        for (double& c : n.class_counts) c = in.number();
        n.distribution.resize(K);
        for (double& p : n.distribution) p = in.number();
        const std::size_t test = in.count();
        if (test > 2) in.fail("bad test kind");
        n.test = static_cast<trees::TestKind>(test);
        n.attribute = in.count();
        if (n.attribute >= schema->size()) in.fail("attribute index out of range");
        n.threshold = in.number();
        n.subset.resize(in.count());
        for (std::size_t i = 0; i < n.subset.size(); ++i) n.subset[i] = in.count() != 0;
        n.children.resize(in.count());
        for (auto& c : n.children) {
            c = in.count();
            if (c >= m.nodes.size()) in.fail("child index out of range");
        }
        n.leaf_model = in.optional_count();
    }
    in.expect("leaf_models");
    m.leaf_models.resize(in.count());
    for (auto& leaf : m.leaf_models) {
        in.expect("bayes");
        auto v = bayes::parse_variant(in.next());
        if (!v) in.fail("unknown leaf model variant");
        leaf = get_bayes(in, *v, schema);
    }
    for (const auto& n : m.nodes)
        if (n.leaf_model && *n.leaf_model >= m.leaf_models.size()) in.fail("leaf model index out of range");
    in.expect("trace");
    m.expansion_trace.resize(in.count());
    for (auto& [node, gain] : m.expansion_trace) {
        in.expect("t");
        node = in.count();
        gain = in.number();
    }
    m.recount();
    return m;
}

}  // namespace

std::string save_model(const eval::Model& model) {
    const Schema& schema = eval::model_schema(model);
    const std::string declaration = schema.declaration();
    const auto decl_lines = split_lines(declaration);
    std::size_t lines = decl_lines.size();
    if (lines > 0 && decl_lines.back().empty()) --lines;

    std::string out(kMagic);
    out += '\n';
    const bool is_bayes = std::holds_alternative<bayes::BayesModel>(model);
    out += fmt::format("family {}\n", is_bayes ? "bayes" : "tree");
    out += fmt::format("variant {}\n", eval::model_name(model));
    out += fmt::format("fingerprint {:016x}\n", schema.fingerprint());
    out += fmt::format("schema {}\n", lines);
    for (std::size_t i = 0; i < lines; ++i) {
        out += decl_lines[i];
        out += '\n';
    }
    if (is_bayes)
        put_bayes(out, std::get<bayes::BayesModel>(model));
    else
        put_tree(out, std::get<trees::TreeModel>(model));
    out += "end\n";
    return out;
}

eval::Model load_model(std::string_view text) {
    const auto lines = split_lines(text);
    auto header = [&](std::size_t i, std::string_view key) -> std::string_view {
        if (i >= lines.size() || !lines[i].starts_with(key) || lines[i].size() <= key.size() ||
            lines[i][key.size()] != ' ')
            throw DataError(fmt::format("model file line {}: expected '{}'", i + 1, key));
        return lines[i].substr(key.size() + 1);
    };
    if (lines.empty() || lines[0] != kMagic) throw DataError("not a tabml model file (bad first line)");
    const std::string_view family = header(1, "family");
    const std::string_view variant = header(2, "variant");
    const std::string_view fingerprint = header(3, "fingerprint");
    const auto schema_lines = parse_integer(header(4, "schema"));
    if (!schema_lines || *schema_lines < 0 || 5 + static_cast<std::size_t>(*schema_lines) > lines.size())
        throw DataError("model file line 5: bad schema line count");
    std::string declaration;
    const std::size_t body = 5 + static_cast<std::size_t>(*schema_lines);
    for (std::size_t i = 5; i < body; ++i) {
        declaration += lines[i];
        declaration += '\n';
    }
    auto schema = std::make_shared<const Schema>(parse_schema(declaration));
    if (fmt::format("{:016x}", schema->fingerprint()) != fingerprint)
        throw DataError("model file: schema fingerprint mismatch (file corrupted or edited)");

    Tokens in(std::vector<std::string_view>(lines.begin() + static_cast<std::ptrdiff_t>(body), lines.end()), body + 1);
    eval::Model model;
    if (family == "bayes") {
        auto v = bayes::parse_variant(variant);
        if (!v) throw DataError(fmt::format("model file: unknown Bayesian variant '{}'", variant));
        model = get_bayes(in, *v, schema);
    } else if (family == "tree") {
        auto v = trees::parse_variant(variant);
        if (!v) throw DataError(fmt::format("model file: unknown tree variant '{}'", variant));
        model = get_tree(in, *v, schema);
    } else {
        throw DataError(fmt::format("model file: unknown family '{}'", family));
    }
    in.expect("end");
    if (!in.done()) in.fail("trailing content after 'end'");
    return model;
}

void write_model_file(const std::filesystem::path& path, const eval::Model& model) {
    write_text_file(path, save_model(model));
}

eval::Model read_model_file(const std::filesystem::path& path) {
    try {
        return load_model(read_text_file(path));
    } catch (const DataError& e) {
        throw DataError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

}  // namespace tabml
