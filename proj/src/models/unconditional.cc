#include "tailq/models/unconditional.h"

#include "tailq/error.h"

namespace tailq::models {

UnconditionalQuantiles::UnconditionalQuantiles(std::span<const data::Sample> train, int dims) {
  data::check_dims(dims);
  if (train.empty()) throw DataError("unconditional baseline needs a nonempty training split");
  for (int j = 0; j < dims; ++j) {
    std::vector<double> values;
    values.reserve(train.size());
    for (const auto& s : train) values.push_back(s.action[j]);
    per_dim_.emplace_back(std::move(values));
  }
}

double UnconditionalQuantiles::quantile(std::span<const double> features, double alpha, std::size_t dim,
                                        std::span<const double> prefix) const {
  if (features.size() != feature_count()) throw ShapeError("unconditional baseline: wrong feature count");
  if (dim >= per_dim_.size()) throw DomainError("action dimension out of range");
  if (prefix.size() != dim) throw ShapeError("prefix must hold exactly the earlier action dimensions");
  return empirical_quantile(per_dim_[dim], QuantileLevel(alpha));
}

}  // namespace tailq::models
