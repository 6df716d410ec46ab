#pragma once

#include <filesystem>
#include <string>

#include "ace/gca.hpp"

namespace ace {

inline constexpr int kModelFormatVersion = 1;

// JSON artifact; doubles are written with shortest round-trip precision.
std::string serialize_model(const GcaModel& model);
// Throws ParseError naming the offending field when the text is malformed
// or violates a model invariant (negative weight, dangling id, ...).
GcaModel deserialize_model(const std::string& text);

void save_model(const GcaModel& model, const std::filesystem::path& path);
GcaModel load_model(const std::filesystem::path& path);

}  // namespace ace
