#include "ace/gca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ace/errors.hpp"

namespace ace {

void GcaParams::validate() const {
  if (!(tau > 0.0)) throw ConfigError("tau must be > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0,1)");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0,1]");
  if (!(theta_eff >= 0.0 && theta_eff <= 1.0)) throw ConfigError("theta_eff must lie in [0,1]");
  if (!std::isfinite(theta_w) || !std::isfinite(theta_l)) {
    throw ConfigError("abstraction thresholds must be finite");
  }
}

Distribution apply_exploration_floor(const Distribution& probs, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ConfigError("exploration floor epsilon must lie in (0,1)");
  }
  Distribution out(probs);
  const double uniform = epsilon / static_cast<double>(out.size());
  for (auto& e : out) e.p = (1.0 - epsilon) * e.p + uniform;
  return out;
}

GcaModel::GcaModel(std::vector<std::string> atomic_names, GcaParams params)
    : atomic_names_(std::move(atomic_names)), params_(params), vocab_size_(atomic_names_.size()) {
  params_.validate();
  first_atom_.resize(vocab_size_);
  last_atom_.resize(vocab_size_);
  for (OpId i = 0; i < vocab_size_; ++i) first_atom_[i] = last_atom_[i] = i;
}

void GcaModel::check_id(OpId id) const {
  if (id >= vocab_size_) {
    throw DomainError("operation id " + std::to_string(id) + " outside vocabulary of size " +
                      std::to_string(vocab_size_));
  }
}

const MacroOperation& GcaModel::macro(OpId id) const {
  if (!is_macro(id)) throw DomainError("operation " + std::to_string(id) + " is not a macro");
  return macros_[id - atomic_count()];
}

std::vector<OpId> GcaModel::active_macros() const {
  std::vector<OpId> ids;
  for (const auto& m : macros_) {
    if (!m.pruned) ids.push_back(m.id);
  }
  return ids;
}

std::size_t GcaModel::surviving_macro_count() const {
  return static_cast<std::size_t>(
      std::count_if(macros_.begin(), macros_.end(), [](const auto& m) { return !m.pruned; }));
}

void GcaModel::set_atomic_mask(AtomicMask mask) { mask_ = std::move(mask); }

bool GcaModel::allowed(OpId from, OpId to) const {
  if (!mask_) return true;
  return mask_(last_atom_[from], first_atom_[to]);
}

double GcaModel::weight(OpId from, OpId to) const {
  auto it = weights_.find({from, to});
  return it == weights_.end() ? 0.0 : it->second;
}

std::uint64_t GcaModel::support(OpId from, OpId to) const {
  auto it = support_.find({from, to});
  return it == support_.end() ? 0 : it->second;
}

void GcaModel::set_weight(OpId from, OpId to, double w) {
  check_id(from);
  check_id(to);
  if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("weights must be finite and >= 0");
  if (w == 0.0) {
    weights_.erase({from, to});
  } else {
    weights_[{from, to}] = w;
  }
}

void GcaModel::set_support(OpId from, OpId to, std::uint64_t count) {
  check_id(from);
  check_id(to);
  if (count == 0) {
    support_.erase({from, to});
  } else {
    support_[{from, to}] = count;
  }
}

Distribution GcaModel::transition_distribution(OpId from, std::span<const OpId> successors) const {
  if (successors.empty()) throw DomainError("no valid successors");
  check_id(from);
  Distribution out;
  out.reserve(successors.size());
  double max_logit = -std::numeric_limits<double>::infinity();
  for (OpId to : successors) {
    check_id(to);
    const double logit = weight(from, to) / params_.tau;
    max_logit = std::max(max_logit, logit);
    out.push_back({to, logit});
  }
  double total = 0.0;
  for (auto& e : out) {
    e.p = std::exp(e.p - max_logit);
    total += e.p;
  }
  for (auto& e : out) e.p /= total;
  return out;
}

Distribution GcaModel::guided_distribution(OpId from, std::span<const OpId> successors) const {
  return apply_exploration_floor(transition_distribution(from, successors), params_.epsilon);
}

namespace {

OpId draw(const Distribution& dist, Rng& rng) {
  double total = 0.0;
  for (const auto& e : dist) total += e.p;
  const double u = rng.uniform01() * total;
  double acc = 0.0;
  for (const auto& e : dist) {
    acc += e.p;
    if (u < acc) return e.op;
  }
  return dist.back().op;
}

}  // namespace

OpId GcaModel::sample_successor(OpId from, std::span<const OpId> successors, Rng& rng) const {
  return draw(guided_distribution(from, successors), rng);
}

void GcaModel::decay() {
  const double keep = 1.0 - params_.gamma;
  for (auto it = weights_.begin(); it != weights_.end();) {
    it->second *= keep;
    if (it->second == 0.0) {
      it = weights_.erase(it);
    } else {
      ++it;
    }
  }
}

double GcaModel::hebbian_pair_update(std::span<const double> counts_a,
                                     std::span<const double> counts_b, double fit_a,
                                     double fit_b, double fit_child) {
  if (counts_a.size() != vocab_size_ || counts_b.size() != vocab_size_) {
    throw DomainError("count vector length does not match vocabulary size");
  }
  const double delta_f = fit_child - 0.5 * (fit_a + fit_b);
  decay();
  if (!(delta_f > 0.0)) return delta_f;

  std::vector<OpId> active;
  for (OpId i = 0; i < vocab_size_; ++i) {
    if (counts_a[i] != 0.0 || counts_b[i] != 0.0) active.push_back(i);
  }
  const double gain = params_.lambda * delta_f;
  for (OpId i : active) {
    for (OpId j : active) {
      const double term = counts_a[i] * counts_b[j] + counts_b[i] * counts_a[j];
      if (term == 0.0 || !allowed(i, j)) continue;
      weights_[{i, j}] += gain * term;
      ++support_[{i, j}];
    }
  }
  return delta_f;
}

void GcaModel::hebbian_trajectory_update(std::span<const OpId> ops, double delta_f) {
  for (OpId id : ops) check_id(id);
  decay();
  if (!(delta_f > 0.0) || ops.size() < 2) return;
  const double gain = params_.lambda * delta_f;
  for (std::size_t t = 0; t + 1 < ops.size(); ++t) {
    if (!allowed(ops[t], ops[t + 1])) continue;
    weights_[{ops[t], ops[t + 1]}] += gain;
    ++support_[{ops[t], ops[t + 1]}];
  }
}

double GcaModel::row_mean(OpId row) const {
  double sum = 0.0;
  for (auto it = weights_.lower_bound({row, 0}); it != weights_.end() && it->first.first == row;
       ++it) {
    if (allowed(row, it->first.second)) sum += it->second;
  }
  std::size_t cells = 0;
  for (OpId k = 0; k < vocab_size_; ++k) cells += allowed(row, k) ? 1 : 0;
  return cells == 0 ? 0.0 : sum / static_cast<double>(cells);
}

double GcaModel::col_mean(OpId col) const {
  double sum = 0.0;
  for (const auto& [key, w] : weights_) {
    if (key.second == col && allowed(key.first, col)) sum += w;
  }
  std::size_t cells = 0;
  for (OpId k = 0; k < vocab_size_; ++k) cells += allowed(k, col) ? 1 : 0;
  return cells == 0 ? 0.0 : sum / static_cast<double>(cells);
}

double GcaModel::compute_lift(OpId i, OpId j) const {
  check_id(i);
  check_id(j);
  const double w = weight(i, j);
  if (!(w > 0.0)) return 0.0;
  // Incoming marginal of i times outgoing marginal of j.
  const double denom = col_mean(i) * row_mean(j);
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  return w / denom;
}

bool GcaModel::qualifies(OpId i, OpId j) const {
  return weight(i, j) > params_.theta_w && support(i, j) >= params_.theta_s &&
         compute_lift(i, j) >= params_.theta_l;
}

bool GcaModel::has_live_macro(OpId left, OpId right) const {
  return std::any_of(macros_.begin(), macros_.end(), [&](const MacroOperation& m) {
    return !m.pruned && m.left == left && m.right == right;
  });
}

std::vector<MacroOperation> GcaModel::scan_and_abstract(int generation) {
  auto eligible = [&](OpId id) { return !is_macro(id) || !macro(id).pruned; };

  std::vector<std::pair<OpPair, double>> candidates;
  for (const auto& [key, w] : weights_) {
    const auto [i, j] = key;
    if (!eligible(i) || !eligible(j) || !allowed(i, j)) continue;
    if (has_live_macro(i, j) || !qualifies(i, j)) continue;
    candidates.emplace_back(key, w);
  }
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::vector<MacroOperation> created;
  for (const auto& [key, w] : candidates) {
    if (created.size() >= params_.max_new_macros) break;
    const auto [i, j] = key;
    // Earlier expansions in this scan shift the marginals; re-check.
    if (!qualifies(i, j)) continue;
    MacroOperation m;
    m.id = static_cast<OpId>(vocab_size_);
    m.left = i;
    m.right = j;
    m.created_at_generation = generation;
    expand_weight_matrix(m);
    created.push_back(m);
  }
  return created;
}

void GcaModel::expand_weight_matrix(const MacroOperation& macro) {
  if (macro.id != vocab_size_) throw InternalError("macro id must equal the current vocabulary size");
  check_id(macro.left);
  check_id(macro.right);

  const OpId m = macro.id;
  const auto old_n = static_cast<OpId>(vocab_size_);
  std::vector<double> row(old_n, 0.0);
  std::vector<double> col(old_n, 0.0);
  for (const auto& [key, w] : weights_) {
    if (key.first == macro.left || key.first == macro.right) row[key.second] += 0.5 * w;
    if (key.second == macro.left || key.second == macro.right) col[key.first] += 0.5 * w;
  }

  macros_.push_back(macro);
  first_atom_.push_back(first_atom_[macro.left]);
  last_atom_.push_back(last_atom_[macro.right]);
  ++vocab_size_;

  for (OpId k = 0; k < old_n; ++k) {
    if (row[k] != 0.0 && allowed(m, k)) weights_[{m, k}] = row[k];
    if (col[k] != 0.0 && allowed(k, m)) weights_[{k, m}] = col[k];
  }
}

void GcaModel::restore_macro(const MacroOperation& macro) {
  if (macro.id != vocab_size_) throw DomainError("macro ids must be contiguous from atomic_count");
  if (macro.left >= macro.id || macro.right >= macro.id) {
    throw DomainError("macro " + std::to_string(macro.id) + " references a later id");
  }
  macros_.push_back(macro);
  first_atom_.push_back(first_atom_[macro.left]);
  last_atom_.push_back(last_atom_[macro.right]);
  ++vocab_size_;
}

std::vector<OpId> GcaModel::prune_macros() {
  std::vector<OpId> pruned;
  for (auto& m : macros_) {
    if (m.pruned || m.uses < params_.min_uses) continue;
    const double rate = static_cast<double>(m.successful_uses) / static_cast<double>(m.uses);
    if (rate < params_.theta_eff) {
      m.pruned = true;
      pruned.push_back(m.id);
    }
  }
  return pruned;
}

std::vector<OpId> GcaModel::flatten(OpId id) const {
  check_id(id);
  std::vector<OpId> out;
  std::vector<OpId> stack{id};
  std::size_t steps = 0;
  while (!stack.empty()) {
    if (++steps > 4 * vocab_size_ * vocab_size_ + 16) throw InternalError("macro expansion cycle");
    const OpId top = stack.back();
    stack.pop_back();
    if (!is_macro(top)) {
      out.push_back(top);
      continue;
    }
    const auto& m = macro(top);
    if (m.left >= m.id || m.right >= m.id) throw InternalError("macro references a later id");
    stack.push_back(m.right);
    stack.push_back(m.left);
  }
  return out;
}

std::string GcaModel::op_name(OpId id) const {
  check_id(id);
  if (!is_macro(id)) return atomic_names_[id];
  return "M" + std::to_string(id);
}

void GcaModel::record_macro_use(OpId id, bool successful) {
  auto& m = macros_.at(id - atomic_count());
  ++m.uses;
  if (successful) ++m.successful_uses;
}

bool GcaModel::operator==(const GcaModel& other) const {
  return atomic_names_ == other.atomic_names_ && params_ == other.params_ &&
         vocab_size_ == other.vocab_size_ && weights_ == other.weights_ &&
         support_ == other.support_ && macros_ == other.macros_;
}

std::vector<double> operation_counts(std::span<const OpId> ops, std::size_t vocab_size) {
  std::vector<double> counts(vocab_size, 0.0);
  for (OpId id : ops) {
    if (id >= vocab_size) throw DomainError("operation id outside vocabulary");
    counts[id] += 1.0;
  }
  return counts;
}

}  // namespace ace
