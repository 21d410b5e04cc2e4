#include <doctest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "tabml/experiment.hpp"
#include "tabml/model_io.hpp"
#include "tabml/preprocess.hpp"
#include "tabml/syngen.hpp"

using namespace tabml;

namespace {

Dataset sample() {
    const Dataset raw = syngen::generate({.n = 300, .seed = 6, .noise = 0.1});
    preprocess::Options opt;
    opt.bins = 4;
    return preprocess::run_pipeline(raw, opt).dataset;
}

}  // namespace

TEST_CASE("every algorithm survives save and load") {
    const Dataset d = sample();
    for (const auto& spec : experiment::parse_algorithm_list(experiment::default_algorithm_list())) {
        CAPTURE(spec.name);
        const eval::Model m = experiment::make_trainer(spec, 3)(d);
        const std::string text = save_model(m);
        const eval::Model back = load_model(text);
        CHECK(save_model(back) == text);
        CHECK(back.index() == m.index());
        if (const auto* t = std::get_if<trees::TreeModel>(&m)) CHECK(std::get<trees::TreeModel>(back) == *t);
        if (const auto* b = std::get_if<bayes::BayesModel>(&m)) CHECK(std::get<bayes::BayesModel>(back) == *b);
        for (std::size_t r = 0; r < d.size(); ++r) CHECK(eval::classify(back, d.row(r)) == eval::classify(m, d.row(r)));
    }
}

TEST_CASE("gaussian naive bayes round trip") {
    const Dataset raw = syngen::generate({.n = 100, .seed = 1});
    const eval::Model m = bayes::train_naive_bayes(raw);
    const eval::Model back = load_model(save_model(m));
    for (std::size_t r = 0; r < raw.size(); ++r) CHECK(eval::classify(back, raw.row(r)) == eval::classify(m, raw.row(r)));
}

TEST_CASE("model files") {
    const auto dir = std::filesystem::temp_directory_path() / "tabml_model_io";
    std::filesystem::create_directories(dir);
    const eval::Model m = trees::train_id3(fixtures::play_tennis());
    write_model_file(dir / "id3.model", m);
    CHECK(std::get<trees::TreeModel>(read_model_file(dir / "id3.model")) == std::get<trees::TreeModel>(m));
    CHECK_THROWS(read_model_file(dir / "absent.model"));
}

TEST_CASE("corrupt model text is rejected") {
    const std::string text = save_model(trees::train_id3(fixtures::play_tennis()));
    CHECK(text.rfind("tabml-model 1\n", 0) == 0);
    CHECK_THROWS(load_model("tabml-model 9\n"));
    CHECK_THROWS(load_model(text.substr(0, text.size() / 2)));
    std::string tampered = text;
    const auto pos = tampered.find("outlook");
    tampered.replace(pos, 7, "outlooq");
    CHECK_THROWS(load_model(tampered));
}
