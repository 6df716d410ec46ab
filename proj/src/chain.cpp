#include "ace/chain.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "ace/errors.hpp"

namespace ace {

void ChainSpec::validate() const {
  if (alphabet_size < 2) throw ConfigError("chain alphabet_size must be >= 2");
  if (noise_penalty < 0.0) throw ConfigError("chain noise_penalty must be >= 0");
  std::set<std::pair<OpId, OpId>> seen;
  for (const auto& b : bigrams) {
    if (b.first >= alphabet_size || b.second >= alphabet_size) {
      throw ConfigError("chain bigram references a token outside the alphabet");
    }
    if (!(b.reward > 0.0)) throw ConfigError("chain bigram rewards must be > 0");
    if (!seen.insert({b.first, b.second}).second) throw ConfigError("duplicate chain bigram");
  }
}

double ChainSpec::pair_score(OpId a, OpId b) const {
  for (const auto& bg : bigrams) {
    if (bg.first == a && bg.second == b) return bg.reward;
  }
  return -noise_penalty;
}

double chain_fitness(const ChainSpec& spec, std::span<const OpId> atomic_ops) {
  for (OpId t : atomic_ops) {
    if (t >= spec.alphabet_size) throw DomainError("chain token outside the alphabet");
  }
  double f = 0.0;
  for (std::size_t i = 0; i + 1 < atomic_ops.size(); ++i) f += spec.pair_score(atomic_ops[i], atomic_ops[i + 1]);
  return f;
}

ChainOptimum brute_force_optimum(const ChainSpec& spec) {
  spec.validate();
  const std::size_t a = spec.alphabet_size;
  const std::size_t len = spec.sequence_length;
  if (static_cast<double>(len) * static_cast<double>(a) * static_cast<double>(a) > 1e8) {
    throw ConfigError("chain spec too large for the exact optimum");
  }
  if (len == 0) return {};

  constexpr double kNeg = -std::numeric_limits<double>::infinity();
  // best[p][t]: best score of pairs after position p given token t at p.
  std::vector<std::vector<double>> best(len, std::vector<double>(a, kNeg));
  std::fill(best[len - 1].begin(), best[len - 1].end(), 0.0);
  for (std::size_t p = len - 1; p-- > 0;) {
    for (OpId t = 0; t < a; ++t) {
      for (OpId u = 0; u < a; ++u) {
        if (!spec.transition_allowed(t, u) || best[p + 1][u] == kNeg) continue;
        best[p][t] = std::max(best[p][t], spec.pair_score(t, u) + best[p + 1][u]);
      }
    }
  }

  ChainOptimum out;
  out.fitness = *std::max_element(best[0].begin(), best[0].end());
  if (out.fitness == kNeg) throw ConfigError("chain spec admits no valid sequence");
  OpId cur = static_cast<OpId>(std::find(best[0].begin(), best[0].end(), out.fitness) - best[0].begin());
  out.witness.push_back(cur);
  for (std::size_t p = 0; p + 1 < len; ++p) {
    for (OpId u = 0; u < a; ++u) {
      if (!spec.transition_allowed(cur, u) || best[p + 1][u] == kNeg) continue;
      if (spec.pair_score(cur, u) + best[p + 1][u] == best[p][cur]) {
        cur = u;
        break;
      }
    }
    out.witness.push_back(cur);
  }
  return out;
}

ChainDomain::ChainDomain(ChainSpec spec) : spec_(std::move(spec)), optimum_(brute_force_optimum(spec_)) {}

std::vector<std::string> ChainDomain::atomic_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < spec_.alphabet_size; ++i) names.push_back("t" + std::to_string(i));
  return names;
}

StateId ChainDomain::encode(std::size_t position, OpId last) const {
  return static_cast<StateId>(position * (spec_.alphabet_size + 1) + last + 1);
}

std::vector<OpId> ChainDomain::valid_atomic(StateId state) const {
  std::vector<OpId> out;
  const std::size_t stride = spec_.alphabet_size + 1;
  const bool has_last = state % stride != 0;
  const OpId last = has_last ? static_cast<OpId>(state % stride - 1) : 0;
  for (OpId t = 0; t < spec_.alphabet_size; ++t) {
    if (!has_last || spec_.transition_allowed(last, t)) out.push_back(t);
  }
  return out;
}

std::optional<StateId> ChainDomain::apply(StateId state, OpId op) const {
  if (op >= spec_.alphabet_size) return std::nullopt;
  const std::size_t stride = spec_.alphabet_size + 1;
  const std::size_t pos = state / stride;
  if (state % stride != 0 && !spec_.transition_allowed(static_cast<OpId>(state % stride - 1), op)) {
    return std::nullopt;
  }
  return encode(state % stride == 0 && pos == 0 ? 0 : pos + 1, op);
}

StateId ChainDomain::advance(StateId state, OpId op) const {
  const std::size_t stride = spec_.alphabet_size + 1;
  const std::size_t pos = state / stride;
  return encode(state % stride == 0 && pos == 0 ? 0 : pos + 1, op);
}

Evaluation ChainDomain::evaluate(std::span<const OpId> atomic_ops) const {
  const auto scored = atomic_ops.first(std::min(atomic_ops.size(), spec_.sequence_length));
  Evaluation e;
  e.fitness = chain_fitness(spec_, scored);
  e.success = scored.size() == spec_.sequence_length && e.fitness >= optimum_.fitness - 1e-9;
  e.path.push_back(start_state());
  std::size_t pos = 0;
  for (OpId t : scored) e.path.push_back(encode(pos++, t));
  return e;
}

}  // namespace ace
