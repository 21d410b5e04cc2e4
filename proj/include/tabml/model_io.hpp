#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "tabml/eval.hpp"

namespace tabml {

/// Line-oriented text encoding of a trained model, embedding its schema.
/// Numbers are written in shortest round-trip form, so load(save(m)) == m.
std::string save_model(const eval::Model& model);
eval::Model load_model(std::string_view text);

void write_model_file(const std::filesystem::path& path, const eval::Model& model);
eval::Model read_model_file(const std::filesystem::path& path);

}  // namespace tabml
