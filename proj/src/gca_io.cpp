#include "ace/gca_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "ace/errors.hpp"

namespace ace {

using nlohmann::json;

std::string serialize_model(const GcaModel& model) {
  const auto& p = model.params();
  json doc;
  doc["version"] = kModelFormatVersion;
  doc["atomic_ops"] = model.atomic_names();
  doc["vocab_size"] = model.vocab_size();
  doc["tau"] = p.tau;
  doc["epsilon"] = p.epsilon;
  doc["lambda"] = p.lambda;
  doc["gamma"] = p.gamma;
  doc["thresholds"] = {{"w", p.theta_w}, {"s", p.theta_s}, {"l", p.theta_l}, {"eff", p.theta_eff}};
  doc["abstraction"] = {{"max_new_macros", p.max_new_macros}, {"min_uses", p.min_uses}};

  json weights = json::array();
  for (const auto& [key, w] : model.weights()) weights.push_back({key.first, key.second, w});
  doc["weights"] = std::move(weights);

  json support = json::array();
  for (const auto& [key, c] : model.support_counts()) support.push_back({key.first, key.second, c});
  doc["support"] = std::move(support);

  json macros = json::array();
  for (const auto& m : model.macros()) {
    macros.push_back({{"id", m.id},
                      {"left", m.left},
                      {"right", m.right},
                      {"uses", m.uses},
                      {"successful_uses", m.successful_uses},
                      {"created_at", m.created_at_generation},
                      {"pruned", m.pruned}});
  }
  doc["macros"] = std::move(macros);
  return doc.dump(1) + "\n";
}

namespace {

const json& field(const json& obj, const char* name, const std::string& where) {
  if (!obj.is_object() || !obj.contains(name)) throw ParseError(where + ": missing field '" + name + "'");
  return obj.at(name);
}

template <typename T>
T get_as(const json& value, const std::string& where) {
  try {
    if constexpr (std::is_unsigned_v<T>) {
      if (!value.is_number_unsigned()) throw ParseError(where + ": expected a non-negative integer");
    } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!value.is_number_integer()) throw ParseError(where + ": expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!value.is_number()) throw ParseError(where + ": expected a number");
    }
    return value.get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
}

}  // namespace

GcaModel deserialize_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model json: ") + e.what());
  }

  const int version = get_as<int>(field(doc, "version", "model"), "version");
  if (version != kModelFormatVersion) {
    throw ParseError("version: unsupported model format " + std::to_string(version));
  }

  std::vector<std::string> names;
  const auto& atoms = field(doc, "atomic_ops", "model");
  if (!atoms.is_array() || atoms.empty()) throw ParseError("atomic_ops: expected a non-empty array");
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!atoms[i].is_string()) throw ParseError("atomic_ops[" + std::to_string(i) + "]: expected a string");
    names.push_back(atoms[i].get<std::string>());
  }

  GcaParams p;
  p.tau = get_as<double>(field(doc, "tau", "model"), "tau");
  p.epsilon = get_as<double>(field(doc, "epsilon", "model"), "epsilon");
  p.lambda = get_as<double>(field(doc, "lambda", "model"), "lambda");
  p.gamma = get_as<double>(field(doc, "gamma", "model"), "gamma");
  const auto& th = field(doc, "thresholds", "model");
  p.theta_w = get_as<double>(field(th, "w", "thresholds"), "thresholds.w");
  p.theta_s = get_as<std::uint64_t>(field(th, "s", "thresholds"), "thresholds.s");
  p.theta_l = get_as<double>(field(th, "l", "thresholds"), "thresholds.l");
  p.theta_eff = get_as<double>(field(th, "eff", "thresholds"), "thresholds.eff");
  if (doc.contains("abstraction")) {
    const auto& ab = doc.at("abstraction");
    p.max_new_macros = get_as<std::size_t>(field(ab, "max_new_macros", "abstraction"),
                                           "abstraction.max_new_macros");
    p.min_uses = get_as<std::uint64_t>(field(ab, "min_uses", "abstraction"), "abstraction.min_uses");
  }

  GcaModel model = [&] {
    try {
      return GcaModel(names, p);
    } catch (const ConfigError& e) {
      throw ParseError(std::string("hyperparameters: ") + e.what());
    }
  }();

  const auto& macros = field(doc, "macros", "model");
  if (!macros.is_array()) throw ParseError("macros: expected an array");
  for (std::size_t k = 0; k < macros.size(); ++k) {
    const std::string where = "macros[" + std::to_string(k) + "]";
    const auto& m = macros[k];
    MacroOperation op;
    op.id = get_as<OpId>(field(m, "id", where), where + ".id");
    op.left = get_as<OpId>(field(m, "left", where), where + ".left");
    op.right = get_as<OpId>(field(m, "right", where), where + ".right");
    op.uses = get_as<std::uint64_t>(field(m, "uses", where), where + ".uses");
    op.successful_uses = get_as<std::uint64_t>(field(m, "successful_uses", where), where + ".successful_uses");
    op.pruned = field(m, "pruned", where).is_boolean() ? m.at("pruned").get<bool>()
                                                       : throw ParseError(where + ".pruned: expected a boolean");
    if (m.contains("created_at")) op.created_at_generation = get_as<int>(m.at("created_at"), where + ".created_at");
    if (op.successful_uses > op.uses) throw ParseError(where + ": successful_uses exceeds uses");
    try {
      model.restore_macro(op);
    } catch (const DomainError& e) {
      throw ParseError(where + ": " + e.what());
    }
  }

  const auto vocab = get_as<std::size_t>(field(doc, "vocab_size", "model"), "vocab_size");
  if (vocab != model.vocab_size()) {
    throw ParseError("vocab_size: " + std::to_string(vocab) + " does not match atomic_ops + macros (" +
                     std::to_string(model.vocab_size()) + ")");
  }

  auto triples = [&](const char* name, auto&& apply) {
    const auto& arr = field(doc, name, "model");
    if (!arr.is_array()) throw ParseError(std::string(name) + ": expected an array");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const std::string where = std::string(name) + "[" + std::to_string(k) + "]";
      if (!arr[k].is_array() || arr[k].size() != 3) throw ParseError(where + ": expected [from, to, value]");
      const auto from = get_as<OpId>(arr[k][0], where + "[0]");
      const auto to = get_as<OpId>(arr[k][1], where + "[1]");
      if (from >= vocab || to >= vocab) throw ParseError(where + ": id outside vocabulary");
      apply(from, to, arr[k][2], where);
    }
  };
  triples("weights", [&](OpId from, OpId to, const json& v, const std::string& where) {
    const double w = get_as<double>(v, where + "[2]");
    if (!(w >= 0.0)) throw ParseError(where + ": negative weight");
    try {
      model.set_weight(from, to, w);
    } catch (const DomainError& e) {
      throw ParseError(where + ": " + e.what());
    }
  });
  triples("support", [&](OpId from, OpId to, const json& v, const std::string& where) {
    model.set_support(from, to, get_as<std::uint64_t>(v, where + "[2]"));
  });
  return model;
}

void save_model(const GcaModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << serialize_model(model);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

GcaModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read model file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return deserialize_model(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace ace
