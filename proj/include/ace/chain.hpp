#pragma once

// Synthetic token-chain construction domain with planted rewarded bigrams.
// Its optimum is computable exactly, which makes it a testbed for whether
// Hebbian learning and abstraction recover the planted structure.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ace/domain.hpp"

namespace ace {

struct Bigram {
  OpId first = 0;
  OpId second = 0;
  double reward = 0.0;
};

struct ChainSpec {
  std::size_t alphabet_size = 6;
  std::vector<Bigram> bigrams{{0, 1, 5.0}, {1, 2, 3.0}};
  std::size_t sequence_length = 12;
  double noise_penalty = 0.2;
  // When false a token may not directly follow itself.
  bool allow_repeats = false;

  void validate() const;
  // Score of one adjacent pair: its reward, or -noise_penalty.
  double pair_score(OpId a, OpId b) const;
  bool transition_allowed(OpId a, OpId b) const { return allow_repeats || a != b; }
};

double chain_fitness(const ChainSpec& spec, std::span<const OpId> atomic_ops);

struct ChainOptimum {
  double fitness = 0.0;
  std::vector<OpId> witness;
};

// Exact optimum over sequences of exactly sequence_length tokens by dynamic
// programming over (position, last token); ties go to the lexicographically
// smallest sequence. Throws ConfigError when the table would be too large.
ChainOptimum brute_force_optimum(const ChainSpec& spec);

class ChainDomain final : public Domain {
 public:
  explicit ChainDomain(ChainSpec spec);

  const ChainSpec& spec() const { return spec_; }
  double optimum() const { return optimum_.fitness; }

  std::vector<std::string> atomic_names() const override;
  StateId start_state() const override { return 0; }
  std::vector<OpId> valid_atomic(StateId state) const override;
  std::optional<StateId> apply(StateId state, OpId op) const override;
  // Execution never rejects a token; repeats are merely unrewarded.
  StateId advance(StateId state, OpId op) const override;
  bool is_goal(StateId) const override { return false; }
  double heuristic(StateId) const override { return 0.0; }
  // Only the first sequence_length tokens are scored; success means the
  // exact optimum was reached.
  Evaluation evaluate(std::span<const OpId> atomic_ops) const override;
  bool atomic_transition_allowed(OpId from, OpId to) const override {
    return spec_.transition_allowed(from, to);
  }
  std::size_t default_max_steps() const override { return spec_.sequence_length; }

 private:
  StateId encode(std::size_t position, OpId last) const;

  ChainSpec spec_;
  ChainOptimum optimum_;
};

}  // namespace ace
