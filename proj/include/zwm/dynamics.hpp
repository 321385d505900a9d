#pragma once

// Down-conversion dynamics of one crystal in the interaction picture (hbar = 1):
//
//   H(t) = g' e^{i dw t} X + h.c.,   X = a_P a_S^dagger a_I'^dagger,
//
// where a_I' = a_I e^{i phi_I} is the idler as seen by the crystal (phi_I = 0
// for the first crystal). The propagator is built from the time-ordered
// Dyson series; a dense matrix exponential serves as the exact reference at
// zero detuning.

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "zwm/dense.hpp"
#include "zwm/errors.hpp"
#include "zwm/fock.hpp"

namespace zwm {

/// Standard mode labels of the interferometer.
namespace modes {
inline const std::string kPump1 = "P1";
inline const std::string kPump2 = "P2";
inline const std::string kSignal1 = "S1";
inline const std::string kSignal2 = "S2";
inline const std::string kIdler = "I";
inline const std::string kLoss = "L";
}  // namespace modes

struct CrystalParams {
  Complex g_prime{0.0};     // interaction strength (energy, hbar = 1)
  double tau = 1.0;         // interaction time
  double delta_omega = 0.0; // w_S + w_I - w_P
  int crystal_id = 1;
};

inline constexpr double kPerturbativeThreshold = 0.3;

inline void validate(const CrystalParams& p) {
  if (!(p.tau > 0.0) || !std::isfinite(p.tau)) throw ConfigError("interaction time tau must be positive");
  if (!std::isfinite(p.g_prime.real()) || !std::isfinite(p.g_prime.imag())) {
    throw ConfigError("g_prime must be finite");
  }
  if (!std::isfinite(p.delta_omega)) throw ConfigError("delta_omega must be finite");
  if (p.crystal_id != 1 && p.crystal_id != 2) throw ConfigError("crystal_id must be 1 or 2");
}

/// |g'| tau above the validated perturbative regime.
inline bool outside_perturbative_regime(const CrystalParams& p, double threshold = kPerturbativeThreshold) {
  return std::abs(p.g_prime) * p.tau > threshold;
}

/// Which registry modes a crystal couples, and the propagation phase its
/// idler operators carry.
struct CrystalModes {
  std::string pump;
  std::string signal;
  std::string idler = modes::kIdler;
  double idler_phase = 0.0;

  static CrystalModes for_crystal(int crystal_id, double phi_I = 0.0) {
    if (crystal_id == 1) return {modes::kPump1, modes::kSignal1, modes::kIdler, 0.0};
    if (crystal_id == 2) return {modes::kPump2, modes::kSignal2, modes::kIdler, phi_I};
    throw ConfigError("crystal_id must be 1 or 2");
  }

  void require_in(const ModeRegistry& registry) const {
    for (const auto* label : {&pump, &signal, &idler}) {
      if (!registry.contains(*label)) throw ConfigError("registry lacks crystal mode '" + *label + "'");
    }
  }
};

/// X = e^{-i phi_I} a_P a_S^dagger a_I^dagger.
inline OperatorSum pair_creation(const CrystalModes& m) {
  const Complex phase = std::polar(1.0, -m.idler_phase);
  return phase * (OperatorSum::annihilate(m.pump) * OperatorSum::create(m.signal) * OperatorSum::create(m.idler));
}

inline OperatorSum build_hamiltonian(const CrystalParams& params, const CrystalModes& m,
                                     const ModeRegistry& registry, double t) {
  validate(params);
  m.require_in(registry);
  const OperatorSum x = pair_creation(m);
  const Complex c = params.g_prime * std::polar(1.0, params.delta_omega * t);
  return c * x + std::conj(c) * x.adjoint();
}

// ---------------------------------------------------------------------------
// Time-ordered integrals

/// Integral over tau > t_1 > t_2 > ... > t_n > 0 of exp(i sum_k rate_k t_k).
///
/// Evaluated in closed form as tau^n times the divided difference of exp at
/// the nodes 0, i tau r_1, i tau (r_1 + r_2), ...; the divided difference is
/// read off the exponential of the bidiagonal matrix with those nodes on the
/// diagonal (Opitz), which handles coincident nodes without cancellation.
inline Complex time_ordered_integral(std::span<const double> rates, double tau) {
  const auto n = static_cast<Eigen::Index>(rates.size());
  if (n == 0) return 1.0;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n + 1, n + 1);
  double partial = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    partial += rates[static_cast<std::size_t>(k)];
    m(k + 1, k + 1) = Complex{0.0, tau * partial};
    m(k, k + 1) = 1.0;
  }
  const Eigen::MatrixXcd e = m.exp();
  return std::pow(tau, static_cast<double>(n)) * e(0, n);
}

namespace detail {

// Bisection on an absolute error budget over Boost's single-pass
// Gauss-Kronrod rule. Boost's own adaptive driver targets a tolerance
// relative to the integral, which never converges on panels where an
// oscillating integrand cancels.
template <class F>
Complex adaptive_gauss_kronrod(const F& f, double a, double b, double abs_tol, unsigned depth = 30) {
  using Quad = boost::math::quadrature::gauss_kronrod<double, 21>;
  double err = 0.0;
  const Complex v = Quad::integrate(f, a, b, 0, 0.0, &err);
  if (err <= abs_tol || depth == 0) return v;
  const double mid = 0.5 * (a + b);
  return adaptive_gauss_kronrod(f, a, mid, 0.5 * abs_tol, depth - 1) +
         adaptive_gauss_kronrod(f, mid, b, 0.5 * abs_tol, depth - 1);
}

}  // namespace detail

/// int_0^tau dt1 e^{i outer t1} int_0^t1 dt2 e^{i inner t2}, by nested
/// adaptive Gauss-Kronrod quadrature with the given absolute tolerance.
inline Complex time_ordered_double_quadrature(double outer_rate, double inner_rate, double tau,
                                              double abs_tol = 1e-12) {
  // Half the budget to the outer rule; inner errors are integrated over at most tau.
  const double inner_tol = 0.5 * abs_tol / std::max(tau, 1e-300);
  auto inner = [&](double t1) {
    return detail::adaptive_gauss_kronrod([&](double t2) { return std::polar(1.0, inner_rate * t2); }, 0.0, t1,
                                          inner_tol);
  };
  return detail::adaptive_gauss_kronrod([&](double t1) { return std::polar(1.0, outer_rate * t1) * inner(t1); },
                                        0.0, tau, 0.5 * abs_tol);
}

// ---------------------------------------------------------------------------
// Dyson series

inline constexpr int kMaxDysonOrder = 3;

/// Scalar weight of X_{s_1} X_{s_2} ... X_{s_n} in the order-n Dyson term,
/// with s_k = true for X and false for X^dagger (leftmost = latest time):
///   (-i)^n  prod_k c_{s_k}  int_simplex exp(i dw sum_k +-t_k).
inline Complex dyson_weight(const CrystalParams& params, const std::vector<bool>& signs) {
  Complex w = 1.0;
  std::vector<double> rates;
  rates.reserve(signs.size());
  for (bool creates : signs) {
    w *= Complex{0.0, -1.0} * (creates ? params.g_prime : std::conj(params.g_prime));
    rates.push_back(creates ? params.delta_omega : -params.delta_omega);
  }
  return w * time_ordered_integral(rates, params.tau);
}

/// 1 + sum_{k=1}^{order} (-i)^k int_{tau > t_1 > ... > t_k > 0} H(t_1) ... H(t_k).
inline OperatorSum dyson_propagator(const CrystalParams& params, const CrystalModes& m, int order) {
  validate(params);
  if (order < 1 || order > kMaxDysonOrder) {
    throw ConfigError("Dyson order " + std::to_string(order) + " unsupported (1.." +
                      std::to_string(kMaxDysonOrder) + ")");
  }
  const OperatorSum x = pair_creation(m);
  const OperatorSum xd = x.adjoint();
  OperatorSum u = OperatorSum::identity();
  for (int k = 1; k <= order; ++k) {
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
      std::vector<bool> signs(static_cast<std::size_t>(k));
      OperatorSum product = OperatorSum::identity();
      for (int j = 0; j < k; ++j) {
        signs[static_cast<std::size_t>(j)] = ((mask >> j) & 1u) != 0;
        product = product * (signs[static_cast<std::size_t>(j)] ? x : xd);
      }
      u = u + dyson_weight(params, signs) * product;
    }
  }
  return u;
}

inline OperatorSum dyson_propagator(const CrystalParams& params, const ModeRegistry& registry, int order,
                                    double phi_I = 0.0) {
  const auto m = CrystalModes::for_crystal(params.crystal_id, phi_I);
  m.require_in(registry);
  return dyson_propagator(params, m, order);
}

// ---------------------------------------------------------------------------
// Closed-form coefficients g and g~^2

inline double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

struct PerturbativeCoefficients {
  Complex g;                    // first-order pair amplitude
  Complex g_tilde_sq;           // value used downstream (quadrature)
  Complex g_tilde_sq_formula;   // published closed form, NaN where singular
  double discrepancy = 0.0;     // |formula - quadrature|, inf where singular
  bool formula_agrees = false;
  std::string diagnostic;       // non-empty when the closed form was overruled
};

/// g = (tau g'/i) e^{i dw tau/2} sinc(dw tau/2).
inline Complex first_order_coefficient(const CrystalParams& p) {
  const double half = 0.5 * p.delta_omega * p.tau;
  return (p.tau * p.g_prime / Complex{0.0, 1.0}) * std::polar(1.0, half) * sinc(half);
}

/// Published closed form (|g'|/i)^2 (i tau/dw) [1 + e^{-i dw tau/2} sinc(dw tau/2)];
/// singular at dw = 0.
inline Complex g_tilde_sq_closed_form(const CrystalParams& p) {
  if (p.delta_omega == 0.0) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double half = 0.5 * p.delta_omega * p.tau;
  const Complex prefactor = -std::norm(p.g_prime);  // (|g'|/i)^2
  return prefactor * Complex{0.0, p.tau / p.delta_omega} * (1.0 + std::polar(1.0, -half) * sinc(half));
}

/// g~^2 = (|g'|/i)^2 int_0^tau dt1 e^{-i dw t1} int_0^t1 dt2 e^{i dw t2}.
inline Complex g_tilde_sq_quadrature(const CrystalParams& p, double abs_tol = 1e-12) {
  return -std::norm(p.g_prime) * time_ordered_double_quadrature(-p.delta_omega, p.delta_omega, p.tau, abs_tol);
}

inline PerturbativeCoefficients analytic_coefficients(const CrystalParams& params, double rel_tol = 1e-8) {
  validate(params);
  PerturbativeCoefficients c;
  c.g = first_order_coefficient(params);
  c.g_tilde_sq = g_tilde_sq_quadrature(params);
  c.g_tilde_sq_formula = g_tilde_sq_closed_form(params);
  const bool finite = std::isfinite(c.g_tilde_sq_formula.real()) && std::isfinite(c.g_tilde_sq_formula.imag());
  c.discrepancy = finite ? std::abs(c.g_tilde_sq_formula - c.g_tilde_sq) : std::numeric_limits<double>::infinity();
  const double scale = std::max(std::abs(c.g_tilde_sq), std::norm(params.g_prime) * params.tau * params.tau * 1e-12);
  c.formula_agrees = finite && c.discrepancy <= rel_tol * scale + 1e-300;
  if (!c.formula_agrees) {
    c.diagnostic = "g~^2 closed form disagrees with the time-ordered integral (dw=" +
                   std::to_string(params.delta_omega) + ", tau=" + std::to_string(params.tau) +
                   (finite ? ", |diff|=" + std::to_string(c.discrepancy) : std::string(", closed form singular")) +
                   "); using the integral";
  }
  return c;
}

// ---------------------------------------------------------------------------
// Exact reference propagator

/// U = exp(-i H tau) on the truncated space. Only for dw = 0, where H is
/// time independent.
inline DenseMatrix exact_propagator(const CrystalParams& params, const CrystalModes& m, const RegistryPtr& registry,
                                    BasisIndex dense_limit = kDefaultDenseLimit) {
  validate(params);
  if (params.delta_omega != 0.0) {
    throw ConfigError("exact propagator needs zero detuning (time-ordered exponential not implemented)");
  }
  require_dense_size(*registry, dense_limit);
  const DenseMatrix h = to_dense(build_hamiltonian(params, m, *registry, 0.0), registry, dense_limit);
  const Eigen::Index n = h.rows();

  // H conserves photon-number combinations, so it is block diagonal once basis
  // states are grouped by the connected components of its nonzero pattern.
  // Exponentiating each block is exact and far cheaper than the full matrix.
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Eigen::Index{0});
  auto root = [&](Eigen::Index i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (h(i, j) != Complex{}) parent[root(i)] = root(j);
    }
  }
  std::map<Eigen::Index, std::vector<Eigen::Index>> blocks;
  for (Eigen::Index i = 0; i < n; ++i) blocks[root(i)].push_back(i);

  DenseMatrix u = DenseMatrix::Zero(n, n);
  for (const auto& [r, idx] : blocks) {
    const auto k = static_cast<Eigen::Index>(idx.size());
    DenseMatrix generator(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) generator(a, b) = Complex{0.0, -params.tau} * h(idx[a], idx[b]);
    }
    const DenseMatrix block = generator.exp();
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) u(idx[a], idx[b]) = block(a, b);
    }
  }
  return u;
}

inline DenseMatrix exact_propagator(const CrystalParams& params, const RegistryPtr& registry, double phi_I = 0.0,
                                    BasisIndex dense_limit = kDefaultDenseLimit) {
  return exact_propagator(params, CrystalModes::for_crystal(params.crystal_id, phi_I), registry, dense_limit);
}

}  // namespace zwm
