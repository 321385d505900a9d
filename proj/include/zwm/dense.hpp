#pragma once

// Dense views of truncated-space objects. Only meant for small spaces
// (oracles, exact propagators).

#include <Eigen/Dense>

#include "zwm/fock.hpp"

namespace zwm {

using DenseMatrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;

inline constexpr BasisIndex kDefaultDenseLimit = 20000;

inline void require_dense_size(const ModeRegistry& registry, BasisIndex limit) {
  if (registry.basis_size() > limit) {
    throw SizingError("basis of size " + std::to_string(registry.basis_size()) + " exceeds dense limit " +
                      std::to_string(limit));
  }
}

inline DenseVector to_dense(const StateVector& state, BasisIndex limit = kDefaultDenseLimit) {
  require_dense_size(state.registry(), limit);
  DenseVector v = DenseVector::Zero(static_cast<Eigen::Index>(state.registry().basis_size()));
  for (const auto& e : state.entries()) v(static_cast<Eigen::Index>(e.index)) = e.amplitude;
  return v;
}

inline StateVector from_dense(RegistryPtr registry, const DenseVector& v, double truncation_loss = 0.0) {
  if (static_cast<BasisIndex>(v.size()) != registry->basis_size()) {
    throw ConfigError("dense vector does not match the registry's basis size");
  }
  std::vector<StateVector::Entry> entries;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) != Complex{}) entries.push_back({static_cast<BasisIndex>(i), v(i)});
  }
  return StateVector(std::move(registry), std::move(entries), truncation_loss);
}

/// Matrix of `op` on the truncated basis, column j = op |j>.
inline DenseMatrix to_dense(const OperatorSum& op, const RegistryPtr& registry,
                            BasisIndex limit = kDefaultDenseLimit) {
  require_dense_size(*registry, limit);
  const auto n = static_cast<Eigen::Index>(registry->basis_size());
  DenseMatrix m = DenseMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const StateVector column = apply(op, StateVector(registry, {{static_cast<BasisIndex>(j), Complex{1.0}}}));
    for (const auto& e : column.entries()) m(static_cast<Eigen::Index>(e.index), j) = e.amplitude;
  }
  return m;
}

inline StateVector apply_dense(const DenseMatrix& m, const StateVector& state) {
  return from_dense(state.registry_ptr(), m * to_dense(state, static_cast<BasisIndex>(m.cols())),
                    state.truncation_loss());
}

}  // namespace zwm
