#include "ace/trajectory.hpp"

namespace ace {

void flatten_into(Trajectory& t, const GcaModel* model) {
  t.atomic_ops.clear();
  for (OpId op : t.ops) {
    if (model != nullptr && model->is_macro(op)) {
      const auto seq = model->flatten(op);
      t.atomic_ops.insert(t.atomic_ops.end(), seq.begin(), seq.end());
    } else {
      t.atomic_ops.push_back(op);
    }
  }
}

void evaluate(Trajectory& t, const Domain& domain, const GcaModel* model) {
  flatten_into(t, model);
  Evaluation e = domain.evaluate(t.atomic_ops);
  t.fitness = e.fitness;
  t.success = e.success;
  t.path_efficiency = e.path_efficiency;
  t.path = std::move(e.path);
}

}  // namespace ace
