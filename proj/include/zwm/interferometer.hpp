#pragma once

// Two-crystal induced-coherence interferometer.
//
// Modes: pumps P1, P2; signals S1, S2; one shared idler I (the idler of the
// first crystal is aligned onto the second); optional loss mode L that
// receives the part of the idler rejected by the filter between the
// crystals. The output state is U2 F U1 |psi0>, renormalized.

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "zwm/dynamics.hpp"
#include "zwm/errors.hpp"
#include "zwm/fock.hpp"
#include "zwm/fringe.hpp"

namespace zwm {

enum class PumpKind { single_photon, coherent };

struct PumpConfig {
  PumpKind kind = PumpKind::single_photon;
  double phi_P = 0.0;                   // single-photon pump: relative phase at NL2
  Complex alpha1{0.0};                  // coherent pump amplitudes
  Complex alpha2{0.0};
  bool allow_unequal_intensity = false;

  static PumpConfig single_photon(double phi_P = 0.0) { return {PumpKind::single_photon, phi_P, {}, {}, false}; }
  static PumpConfig coherent(Complex alpha1, Complex alpha2) { return {PumpKind::coherent, 0.0, alpha1, alpha2, false}; }
  /// |alpha1| = |alpha2| = sqrt(mean_photons), relative phase phi_P.
  static PumpConfig coherent_power(double mean_photons, double phi_P = 0.0) {
    const double a = std::sqrt(mean_photons);
    return coherent(a, std::polar(a, phi_P));
  }
};

/// Unset entries fall back to defaults large enough that the Dyson
/// propagators never create past them.
struct CutoffConfig {
  std::optional<unsigned> pump;
  std::optional<unsigned> signal;
  std::optional<unsigned> idler;
  std::optional<unsigned> loss;
};

struct ZwmConfig {
  PumpConfig pump;
  CrystalParams crystal;             // shared by both crystals; crystal_id is ignored
  double phi_I = 0.0;                // idler propagation phase NL1 -> NL2
  double phi_S = 0.0;                // signal path phase difference to the detector
  double idler_transmission = 1.0;   // amplitude transmission of the idler filter
  int order = 2;                     // Dyson order per crystal
  CutoffConfig cutoffs;
  double coherent_tail = 1e-14;      // bound on each pump's discarded Poisson tail
  double max_truncation_loss = 1e-8; // bound on the total discarded norm
};

inline constexpr double kEqualIntensityTolerance = 1e-12;

inline void validate(const ZwmConfig& c) {
  validate(c.crystal);
  if (!(c.idler_transmission >= 0.0 && c.idler_transmission <= 1.0)) {
    throw ConfigError("idler transmission must lie in [0, 1]");
  }
  if (c.order < 1 || c.order > kMaxDysonOrder) throw ConfigError("Dyson order must be 1..3");
  for (double v : {c.phi_I, c.phi_S, c.pump.phi_P}) {
    if (!std::isfinite(v)) throw ConfigError("phases must be finite");
  }
  if (c.pump.kind == PumpKind::coherent && !c.pump.allow_unequal_intensity) {
    const double a1 = std::abs(c.pump.alpha1);
    const double a2 = std::abs(c.pump.alpha2);
    if (std::abs(a1 - a2) > kEqualIntensityTolerance * std::max(1.0, std::max(a1, a2))) {
      throw ConfigError("coherent pumps must have equal intensities (set allow_unequal_intensity to override)");
    }
  }
  if (!(c.coherent_tail > 0.0) || !(c.max_truncation_loss > 0.0)) throw ConfigError("loss bounds must be positive");
}

/// phi_P: configured phase (single photon) or arg(alpha2) - arg(alpha1).
inline double pump_phase(const ZwmConfig& c) {
  if (c.pump.kind == PumpKind::single_photon) return c.pump.phi_P;
  return std::arg(c.pump.alpha2) - std::arg(c.pump.alpha1);
}

/// phi_in = phi_S + phi_P - phi_I + pi/2; fringes peak at phi_in = 0.
inline double interferometric_phase(const ZwmConfig& c, double phi_S) {
  return phi_S + pump_phase(c) - c.phi_I + std::numbers::pi / 2.0;
}

inline double interferometric_phase(const ZwmConfig& c) { return interferometric_phase(c, c.phi_S); }

/// phi_S that puts the fringe maximum on the detector.
inline double constructive_signal_phase(const ZwmConfig& c) {
  return -(pump_phase(c) - c.phi_I) - std::numbers::pi / 2.0;
}

inline bool uses_loss_mode(const ZwmConfig& c) { return c.idler_transmission < 1.0; }

inline RegistryPtr make_registry(const ZwmConfig& c) {
  validate(c);
  const auto order = static_cast<unsigned>(c.order);
  unsigned pump = 1;
  if (c.pump.kind == PumpKind::coherent) {
    pump = std::max(coherent_cutoff(c.pump.alpha1, c.coherent_tail), coherent_cutoff(c.pump.alpha2, c.coherent_tail));
    pump = std::max(pump, 1u);
  }
  const unsigned signal = c.cutoffs.signal.value_or(order);
  const unsigned idler = c.cutoffs.idler.value_or(2 * order);
  std::vector<ModeSpec> specs{{modes::kPump1, c.cutoffs.pump.value_or(pump)},
                              {modes::kPump2, c.cutoffs.pump.value_or(pump)},
                              {modes::kSignal1, signal},
                              {modes::kSignal2, signal},
                              {modes::kIdler, idler}};
  if (uses_loss_mode(c)) specs.push_back({modes::kLoss, c.cutoffs.loss.value_or(order)});
  return make_registry(std::move(specs));
}

// ---------------------------------------------------------------------------

inline StateVector prepare_pump(const ZwmConfig& c, const RegistryPtr& registry) {
  validate(c);
  if (c.pump.kind == PumpKind::single_photon) {
    const Complex h = 1.0 / std::sqrt(2.0);
    const auto p1 = registry->index_of(registry->basis_vector({{modes::kPump1, 1}}));
    const auto p2 = registry->index_of(registry->basis_vector({{modes::kPump2, 1}}));
    return StateVector(registry, {{p1, h}, {p2, h * std::polar(1.0, c.pump.phi_P)}});
  }
  double loss1 = 0.0;
  double loss2 = 0.0;
  auto amps1 = coherent_amplitudes(c.pump.alpha1, registry->cutoff(registry->index_of(modes::kPump1)), loss1);
  auto amps2 = coherent_amplitudes(c.pump.alpha2, registry->cutoff(registry->index_of(modes::kPump2)), loss2);
  if (loss1 > c.coherent_tail || loss2 > c.coherent_tail) {
    throw TruncationError("pump cutoff discards " + std::to_string(std::max(loss1, loss2)) +
                          " of the coherent state; raise the pump cutoff");
  }
  return product_state(registry, {{modes::kPump1, std::move(amps1)}, {modes::kPump2, std::move(amps2)}},
                       loss1 + loss2 - loss1 * loss2);
}

/// Beam splitter I -> t I + sqrt(1 - t^2) L acting on states whose loss mode
/// is empty: |n>_I |0>_L -> sum_k sqrt(C(n,k)) t^k r^(n-k) |k>_I |n-k>_L.
inline StateVector apply_idler_filter(const StateVector& state, double t) {
  if (t == 1.0) return state;
  const ModeRegistry& reg = state.registry();
  const std::size_t idler = reg.index_of(modes::kIdler);
  const std::size_t loss = reg.index_of(modes::kLoss);
  const double r = std::sqrt(std::max(0.0, 1.0 - t * t));
  std::vector<StateVector::Entry> out;
  out.reserve(state.nonzeros() * 2);
  double dropped = 0.0;
  for (const auto& e : state.entries()) {
    if (reg.occupation(e.index, loss) != 0) throw ConfigError("idler filter expects an empty loss mode");
    const unsigned n = reg.occupation(e.index, idler);
    const BasisIndex base = e.index - n * reg.stride(idler);
    for (unsigned k = 0; k <= n; ++k) {
      const double log_binom = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
      const double w = std::exp(0.5 * log_binom) * std::pow(t, k) * std::pow(r, n - k);
      if (w == 0.0) continue;
      const Complex amp = e.amplitude * w;
      if (n - k > reg.cutoff(loss)) {
        dropped += std::norm(amp);
        continue;
      }
      out.push_back({base + k * reg.stride(idler) + (n - k) * reg.stride(loss), amp});
    }
  }
  return StateVector(state.registry_ptr(), std::move(out), state.truncation_loss() + dropped);
}

struct ZwmOutput {
  StateVector state;                  // normalized
  ZwmConfig config;
  double norm_squared_before = 1.0;   // squared norm of U2 F U1 |psi0> before renormalizing
  double truncation_loss = 0.0;       // pump tails + creations past cutoffs

  [[nodiscard]] double discarded_norm() const { return 1.0 - norm_squared_before; }
};

inline ZwmOutput run_zwm(const ZwmConfig& config) {
  validate(config);
  const RegistryPtr registry = make_registry(config);
  StateVector psi = prepare_pump(config, registry);

  CrystalParams nl1 = config.crystal;
  nl1.crystal_id = 1;
  CrystalParams nl2 = config.crystal;
  nl2.crystal_id = 2;

  psi = apply(dyson_propagator(nl1, *registry, config.order), psi);
  psi = apply_idler_filter(psi, config.idler_transmission);
  psi = apply(dyson_propagator(nl2, *registry, config.order, config.phi_I), psi);

  const double loss = psi.truncation_loss();
  if (loss > config.max_truncation_loss) {
    throw TruncationError("truncation discarded " + std::to_string(loss) + " of the norm (bound " +
                          std::to_string(config.max_truncation_loss) + "); increase the cutoffs");
  }
  const double n2 = psi.norm_squared();
  return ZwmOutput{psi.normalized(), config, n2, loss};
}

// ---------------------------------------------------------------------------
// Observables

/// E^(+) = a_S1 + i e^{i phi_S} a_S2.
inline OperatorSum detector_field(const ModeRegistry& registry, double phi_S) {
  if (!registry.contains(modes::kSignal1) || !registry.contains(modes::kSignal2)) {
    throw ConfigError("detector field needs both signal modes");
  }
  return OperatorSum::annihilate(modes::kSignal1) +
         Complex{0.0, 1.0} * std::polar(1.0, phi_S) * OperatorSum::annihilate(modes::kSignal2);
}

/// <E^(-) E^(+)> with unit detector efficiency.
inline double detection_rate(const ZwmOutput& out, double phi_S) {
  const OperatorSum field = detector_field(out.state.registry(), phi_S);
  const StateVector projected = apply(field, out.state);
  return projected.norm_squared();
}

inline std::vector<double> detection_rates(const ZwmOutput& out, std::span<const double> phases) {
  std::vector<double> rates;
  rates.reserve(phases.size());
  for (double p : phases) rates.push_back(detection_rate(out, p));
  return rates;
}

/// Fringe visibility of the output over an n-point phi_S scan.
inline FringeFit fringe(const ZwmOutput& out, std::size_t points = 16) {
  const auto phases = full_period(points);
  const auto rates = detection_rates(out, phases);
  return fit_fringe(phases, rates);
}

/// <a_S1^dagger a_S2^dagger a_S2 a_S1>.
inline double coincidence_rate(const ZwmOutput& out) {
  const OperatorSum pair = OperatorSum::annihilate(modes::kSignal2) * OperatorSum::annihilate(modes::kSignal1);
  return apply(pair, out.state).norm_squared();
}

/// <a^dagger a> of one mode.
inline double mean_photons(const ZwmOutput& out, const std::string& mode) {
  return expectation(OperatorSum::number(mode), out.state).real();
}

/// Single-photon-pump decomposition eta |psi0> + G (|S1> + e^{i phi}|S2>)|I>.
/// `residual` is the norm of whatever does not fit that form.
struct SinglePhotonAmplitudes {
  Complex eta;
  Complex g_sp;
  Complex g_sp_nl2;
  double residual = 0.0;
};

inline SinglePhotonAmplitudes single_photon_amplitudes(const ZwmOutput& out) {
  if (out.config.pump.kind != PumpKind::single_photon) throw ConfigError("needs a single-photon pump output");
  const ModeRegistry& reg = out.state.registry();
  const BasisIndex p1 = reg.index_of(reg.basis_vector({{modes::kPump1, 1}}));
  const BasisIndex p2 = reg.index_of(reg.basis_vector({{modes::kPump2, 1}}));
  const BasisIndex s1 = reg.index_of(reg.basis_vector({{modes::kSignal1, 1}, {modes::kIdler, 1}}));
  const BasisIndex s2 = reg.index_of(reg.basis_vector({{modes::kSignal2, 1}, {modes::kIdler, 1}}));
  SinglePhotonAmplitudes a;
  const double h = std::sqrt(2.0);
  a.eta = out.state.amplitude(p1) * h;
  a.g_sp = out.state.amplitude(s1);
  a.g_sp_nl2 = out.state.amplitude(s2);
  const Complex eta2 = out.state.amplitude(p2) * h * std::polar(1.0, -out.config.pump.phi_P);
  double r2 = std::norm(a.eta - eta2) / 2.0;
  for (const auto& e : out.state.entries()) {
    if (e.index != p1 && e.index != p2 && e.index != s1 && e.index != s2) r2 += std::norm(e.amplitude);
  }
  a.residual = std::sqrt(r2);
  return a;
}

/// |g_lp alpha|: first-order pair amplitude times the pump amplitude.
inline double pair_amplitude(const ZwmConfig& c) {
  const double g = std::abs(first_order_coefficient(c.crystal));
  return c.pump.kind == PumpKind::coherent ? g * std::abs(c.pump.alpha1) : g / std::sqrt(2.0);
}

// ---------------------------------------------------------------------------
// NL2 / NL1 intensity ratio

inline constexpr double kMatchingTolerance = 1e-6;

/// Single-photon configuration whose emission probability per crystal,
/// |G_sp|^2 = <n_S1>_sp, equals the spontaneous (unseeded) NL1 intensity
/// <n_S1> of the laser-pumped configuration. Only |g'| is adjusted.
inline ZwmConfig matched_single_photon_config(const ZwmConfig& lp, double target_n_s1) {
  ZwmConfig sp = lp;
  sp.pump = PumpConfig::single_photon(pump_phase(lp));
  sp.cutoffs = {};
  const double phase = std::arg(lp.crystal.g_prime);
  auto n_s1 = [&](double strength) {
    ZwmConfig trial = sp;
    trial.crystal.g_prime = std::polar(strength, phase);
    return mean_photons(run_zwm(trial), modes::kSignal1);
  };
  if (!(target_n_s1 > 0.0)) {
    sp.crystal.g_prime = 0.0;
    return sp;
  }
  double hi = std::sqrt(2.0 * target_n_s1) / sp.crystal.tau;
  int guard = 0;
  while (n_s1(hi) < target_n_s1) {
    hi *= 1.5;
    if (++guard > 40 || hi * sp.crystal.tau > 1.0) {
      throw ConfigError("no single-photon gain reproduces the laser-pumped NL1 intensity");
    }
  }
  std::uintmax_t iterations = 200;
  auto [a, b] = boost::math::tools::toms748_solve([&](double s) { return n_s1(s) - target_n_s1; }, 0.0, hi,
                                                  -target_n_s1, n_s1(hi) - target_n_s1,
                                                  boost::math::tools::eps_tolerance<double>(50), iterations);
  sp.crystal.g_prime = std::polar(0.5 * (a + b), phase);
  return sp;
}

inline ZwmConfig matched_single_photon_config(const ZwmConfig& lp) {
  return matched_single_photon_config(lp, mean_photons(run_zwm(lp), modes::kSignal1));
}

/// rho = <n_S2>_lp / <n_S2>_sp for outputs whose per-crystal spontaneous
/// emission is matched (<n_S1>_sp = <n_S1>_lp within kMatchingTolerance).
inline double nl2_nl1_ratio(const ZwmOutput& lp, const ZwmOutput& sp) {
  if (lp.config.pump.kind != PumpKind::coherent || sp.config.pump.kind != PumpKind::single_photon) {
    throw ConfigError("ratio needs a laser-pumped and a single-photon-pumped output");
  }
  const double target = mean_photons(lp, modes::kSignal1);
  const double g_sp_sq = mean_photons(sp, modes::kSignal1);
  if (std::abs(g_sp_sq - target) > kMatchingTolerance * std::max(target, 1e-300)) {
    throw ConfigError("pump-gain products are not matched: |G_sp|^2=" + std::to_string(g_sp_sq) +
                      ", NL1 intensity=" + std::to_string(target));
  }
  const double denominator = mean_photons(sp, modes::kSignal2);
  if (!(denominator > 0.0)) throw ConfigError("single-photon NL2 intensity vanishes");
  return mean_photons(lp, modes::kSignal2) / denominator;
}

inline double nl2_nl1_ratio(const ZwmConfig& config_lp, const ZwmConfig& config_sp) {
  return nl2_nl1_ratio(run_zwm(config_lp), run_zwm(config_sp));
}

}  // namespace zwm
