#pragma once

// Truncated multi-mode bosonic Fock space.
//
// Basis vectors are occupation tuples over an ordered list of modes. The
// basis is enumerated lexicographically by occupation tuple with the first
// registered mode most significant, so the flat index of a tuple is
//
//   index = sum_k n_k * stride_k,   stride_last = 1,
//   stride_k = stride_{k+1} * (cutoff_{k+1} + 1).
//
// States are stored sparsely as (index, amplitude) pairs sorted by index.
// Creation past a mode's cutoff removes the component; the squared norm it
// would have carried is accumulated in the state's truncation loss.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "zwm/errors.hpp"

namespace zwm {

using Complex = std::complex<double>;
using BasisIndex = std::uint64_t;

struct ModeSpec {
  std::string label;
  unsigned cutoff = 0;

  friend bool operator==(const ModeSpec&, const ModeSpec&) = default;
};

/// One occupation-number tuple, ordered like the registry's modes.
struct FockBasisVector {
  std::vector<unsigned> occupations;

  friend bool operator==(const FockBasisVector&, const FockBasisVector&) = default;
  friend auto operator<=>(const FockBasisVector&, const FockBasisVector&) = default;
};

class ModeRegistry {
 public:
  explicit ModeRegistry(std::vector<ModeSpec> modes) : modes_(std::move(modes)) {
    if (modes_.empty()) {
      throw ConfigError("mode registry needs at least one mode");
    }
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      if (modes_[i].label.empty()) {
        throw ConfigError("mode labels must be non-empty");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (modes_[i].label == modes_[j].label) {
          throw ConfigError("duplicate mode label '" + modes_[i].label + "'");
        }
      }
    }
    strides_.resize(modes_.size());
    BasisIndex stride = 1;
    constexpr auto kMax = std::numeric_limits<BasisIndex>::max();
    for (std::size_t k = modes_.size(); k-- > 0;) {
      strides_[k] = stride;
      const BasisIndex dim = BasisIndex{modes_[k].cutoff} + 1;
      if (stride > kMax / dim) {
        throw SizingError("basis size overflows the 64-bit index space");
      }
      stride *= dim;
      max_cutoff_ = std::max(max_cutoff_, modes_[k].cutoff);
    }
    size_ = stride;
  }

  ModeRegistry(std::initializer_list<ModeSpec> modes)
      : ModeRegistry(std::vector<ModeSpec>(modes)) {}

  [[nodiscard]] std::size_t mode_count() const noexcept { return modes_.size(); }
  [[nodiscard]] const std::vector<ModeSpec>& modes() const noexcept { return modes_; }
  [[nodiscard]] BasisIndex basis_size() const noexcept { return size_; }
  [[nodiscard]] unsigned max_cutoff() const noexcept { return max_cutoff_; }
  [[nodiscard]] unsigned cutoff(std::size_t mode) const { return modes_.at(mode).cutoff; }
  [[nodiscard]] BasisIndex stride(std::size_t mode) const { return strides_.at(mode); }
  [[nodiscard]] const std::string& label(std::size_t mode) const { return modes_.at(mode).label; }

  [[nodiscard]] std::optional<std::size_t> find(std::string_view label) const noexcept {
    for (std::size_t k = 0; k < modes_.size(); ++k) {
      if (modes_[k].label == label) return k;
    }
    return std::nullopt;
  }

  [[nodiscard]] bool contains(std::string_view label) const noexcept {
    return find(label).has_value();
  }

  /// Throws ConfigError for unknown labels.
  [[nodiscard]] std::size_t index_of(std::string_view label) const {
    if (auto k = find(label)) return *k;
    throw ConfigError("unknown mode label '" + std::string(label) + "'");
  }

  [[nodiscard]] unsigned occupation(BasisIndex index, std::size_t mode) const noexcept {
    return static_cast<unsigned>((index / strides_[mode]) % (BasisIndex{modes_[mode].cutoff} + 1));
  }

  [[nodiscard]] BasisIndex index_of(const FockBasisVector& v) const {
    if (v.occupations.size() != modes_.size()) {
      throw ConfigError("basis vector has wrong number of modes");
    }
    BasisIndex index = 0;
    for (std::size_t k = 0; k < modes_.size(); ++k) {
      if (v.occupations[k] > modes_[k].cutoff) {
        throw SizingError("occupation " + std::to_string(v.occupations[k]) + " of mode '" +
                          modes_[k].label + "' exceeds cutoff " + std::to_string(modes_[k].cutoff));
      }
      index += v.occupations[k] * strides_[k];
    }
    return index;
  }

  [[nodiscard]] FockBasisVector basis_vector(BasisIndex index) const {
    if (index >= size_) throw SizingError("basis index out of range");
    FockBasisVector v;
    v.occupations.resize(modes_.size());
    for (std::size_t k = 0; k < modes_.size(); ++k) v.occupations[k] = occupation(index, k);
    return v;
  }

  /// Builds a basis vector from (label, occupation) pairs; unspecified modes are empty.
  [[nodiscard]] FockBasisVector
  basis_vector(std::initializer_list<std::pair<std::string_view, unsigned>> occupied) const {
    FockBasisVector v;
    v.occupations.assign(modes_.size(), 0);
    for (const auto& [label, n] : occupied) v.occupations[index_of(label)] = n;
    return v;
  }

  friend bool operator==(const ModeRegistry& a, const ModeRegistry& b) { return a.modes_ == b.modes_; }

 private:
  std::vector<ModeSpec> modes_;
  std::vector<BasisIndex> strides_;
  BasisIndex size_ = 1;
  unsigned max_cutoff_ = 0;
};

using RegistryPtr = std::shared_ptr<const ModeRegistry>;

inline RegistryPtr make_registry(std::vector<ModeSpec> modes) {
  return std::make_shared<const ModeRegistry>(std::move(modes));
}

inline bool same_space(const RegistryPtr& a, const RegistryPtr& b) {
  return a == b || (a && b && *a == *b);
}

/// Lexicographic enumeration of the whole truncated basis. Refuses to
/// materialize more than `limit` vectors.
inline std::vector<FockBasisVector> enumerate_basis(const ModeRegistry& registry,
                                                    BasisIndex limit = BasisIndex{1} << 24) {
  if (registry.basis_size() > limit) {
    throw SizingError("basis of size " + std::to_string(registry.basis_size()) +
                      " exceeds enumeration limit " + std::to_string(limit));
  }
  std::vector<FockBasisVector> out;
  out.reserve(registry.basis_size());
  for (BasisIndex i = 0; i < registry.basis_size(); ++i) out.push_back(registry.basis_vector(i));
  return out;
}

// ---------------------------------------------------------------------------

class StateVector {
 public:
  struct Entry {
    BasisIndex index;
    Complex amplitude;
  };

  StateVector() = default;

  /// Entries may be unsorted and contain duplicates; they are summed.
  StateVector(RegistryPtr registry, std::vector<Entry> entries, double truncation_loss = 0.0)
      : registry_(std::move(registry)), entries_(std::move(entries)), truncation_loss_(truncation_loss) {
    if (!registry_) throw ConfigError("state vector needs a registry");
    canonicalize();
  }

  static StateVector basis_state(RegistryPtr registry, const FockBasisVector& v, Complex amplitude = 1.0) {
    const BasisIndex index = registry->index_of(v);
    return StateVector(std::move(registry), {{index, amplitude}});
  }

  static StateVector vacuum(RegistryPtr registry) {
    return StateVector(std::move(registry), {{0, Complex{1.0}}});
  }

  [[nodiscard]] const RegistryPtr& registry_ptr() const noexcept { return registry_; }
  [[nodiscard]] const ModeRegistry& registry() const { return *registry_; }
  [[nodiscard]] std::span<const Entry> entries() const noexcept { return entries_; }
  [[nodiscard]] std::size_t nonzeros() const noexcept { return entries_.size(); }
  [[nodiscard]] bool is_zero() const noexcept { return entries_.empty(); }

  /// Squared norm removed by cutoffs on the way to this state.
  [[nodiscard]] double truncation_loss() const noexcept { return truncation_loss_; }

  [[nodiscard]] Complex amplitude(BasisIndex index) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                               [](const Entry& e, BasisIndex i) { return e.index < i; });
    return (it != entries_.end() && it->index == index) ? it->amplitude : Complex{};
  }

  [[nodiscard]] Complex amplitude(const FockBasisVector& v) const { return amplitude(registry_->index_of(v)); }

  [[nodiscard]] double norm_squared() const noexcept {
    double s = 0.0;
    for (const auto& e : entries_) s += std::norm(e.amplitude);
    return s;
  }

  [[nodiscard]] StateVector normalized() const {
    const double n2 = norm_squared();
    if (!(n2 > 0.0)) throw ConfigError("cannot normalize the zero vector");
    return scaled(1.0 / std::sqrt(n2));
  }

  [[nodiscard]] StateVector scaled(Complex factor) const {
    StateVector out = *this;
    for (auto& e : out.entries_) e.amplitude *= factor;
    out.drop_zeros();
    return out;
  }

  [[nodiscard]] StateVector with_truncation_loss(double loss) const {
    StateVector out = *this;
    out.truncation_loss_ = loss;
    return out;
  }

  friend StateVector operator+(const StateVector& a, const StateVector& b) {
    require_same_space(a, b);
    std::vector<Entry> merged;
    merged.reserve(a.entries_.size() + b.entries_.size());
    merged.insert(merged.end(), a.entries_.begin(), a.entries_.end());
    merged.insert(merged.end(), b.entries_.begin(), b.entries_.end());
    return StateVector(a.registry_, std::move(merged), a.truncation_loss_ + b.truncation_loss_);
  }

  friend StateVector operator*(Complex c, const StateVector& s) { return s.scaled(c); }

  static void require_same_space(const StateVector& a, const StateVector& b) {
    if (!same_space(a.registry_, b.registry_)) {
      throw ConfigError("states live on different mode registries");
    }
  }

 private:
  void canonicalize() {
    const BasisIndex size = registry_->basis_size();
    for (const auto& e : entries_) {
      if (e.index >= size) throw SizingError("state entry outside the truncated basis");
    }
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.index < b.index; });
    std::size_t w = 0;
    for (std::size_t r = 0; r < entries_.size(); ++r) {
      if (w > 0 && entries_[w - 1].index == entries_[r].index) {
        entries_[w - 1].amplitude += entries_[r].amplitude;
      } else {
        entries_[w++] = entries_[r];
      }
    }
    entries_.resize(w);
    drop_zeros();
  }

  void drop_zeros() {
    std::erase_if(entries_, [](const Entry& e) { return e.amplitude == Complex{}; });
  }

  RegistryPtr registry_;
  std::vector<Entry> entries_;
  double truncation_loss_ = 0.0;
};

// ---------------------------------------------------------------------------

enum class Ladder : std::uint8_t { annihilate, create };

struct LadderFactor {
  std::string mode;
  Ladder kind;

  friend bool operator==(const LadderFactor&, const LadderFactor&) = default;
};

/// coefficient * f_1 f_2 ... f_n; f_n acts first.
struct OperatorTerm {
  Complex coefficient{1.0};
  std::vector<LadderFactor> factors;
};

/// Linear combination of ladder-operator products. Immutable value type;
/// composition builds new sums.
class OperatorSum {
 public:
  OperatorSum() = default;
  explicit OperatorSum(std::vector<OperatorTerm> terms) : terms_(std::move(terms)) {}

  static OperatorSum identity() { return scalar(1.0); }
  static OperatorSum scalar(Complex c) { return OperatorSum({OperatorTerm{c, {}}}); }
  static OperatorSum create(std::string mode) {
    return OperatorSum({OperatorTerm{1.0, {LadderFactor{std::move(mode), Ladder::create}}}});
  }
  static OperatorSum annihilate(std::string mode) {
    return OperatorSum({OperatorTerm{1.0, {LadderFactor{std::move(mode), Ladder::annihilate}}}});
  }
  /// a^dagger a
  static OperatorSum number(const std::string& mode) { return create(mode) * annihilate(mode); }

  [[nodiscard]] const std::vector<OperatorTerm>& terms() const noexcept { return terms_; }
  [[nodiscard]] bool empty() const noexcept { return terms_.empty(); }

  [[nodiscard]] OperatorSum adjoint() const {
    std::vector<OperatorTerm> out;
    out.reserve(terms_.size());
    for (const auto& t : terms_) {
      OperatorTerm a{std::conj(t.coefficient), {}};
      a.factors.reserve(t.factors.size());
      for (auto it = t.factors.rbegin(); it != t.factors.rend(); ++it) {
        a.factors.push_back({it->mode, it->kind == Ladder::create ? Ladder::annihilate : Ladder::create});
      }
      out.push_back(std::move(a));
    }
    return OperatorSum(std::move(out));
  }

  friend OperatorSum operator+(const OperatorSum& a, const OperatorSum& b) {
    std::vector<OperatorTerm> out = a.terms_;
    out.insert(out.end(), b.terms_.begin(), b.terms_.end());
    return OperatorSum(std::move(out));
  }

  friend OperatorSum operator-(const OperatorSum& a, const OperatorSum& b) { return a + Complex{-1.0} * b; }

  friend OperatorSum operator*(Complex c, const OperatorSum& a) {
    OperatorSum out = a;
    for (auto& t : out.terms_) t.coefficient *= c;
    return out;
  }

  friend OperatorSum operator*(const OperatorSum& a, const OperatorSum& b) {
    std::vector<OperatorTerm> out;
    out.reserve(a.terms_.size() * b.terms_.size());
    for (const auto& ta : a.terms_) {
      for (const auto& tb : b.terms_) {
        OperatorTerm t{ta.coefficient * tb.coefficient, ta.factors};
        t.factors.insert(t.factors.end(), tb.factors.begin(), tb.factors.end());
        out.push_back(std::move(t));
      }
    }
    return OperatorSum(std::move(out));
  }

 private:
  std::vector<OperatorTerm> terms_;
};

namespace detail {

struct ResolvedFactor {
  std::size_t mode;
  Ladder kind;
};

inline std::vector<std::vector<ResolvedFactor>> resolve(const OperatorSum& op, const ModeRegistry& registry) {
  std::vector<std::vector<ResolvedFactor>> out;
  out.reserve(op.terms().size());
  for (const auto& term : op.terms()) {
    std::vector<ResolvedFactor> factors;
    factors.reserve(term.factors.size());
    for (const auto& f : term.factors) factors.push_back({registry.index_of(f.mode), f.kind});
    out.push_back(std::move(factors));
  }
  return out;
}

/// Squared norm that the rest of a product (from `first`, a creation at the
/// cutoff, leftwards) would have produced without truncation. Zero when a
/// later annihilation empties a mode anyway.
inline double overflow_norm(const ModeRegistry& registry, BasisIndex index, Complex amp,
                            const std::vector<ResolvedFactor>& factors,
                            std::vector<ResolvedFactor>::const_reverse_iterator first) {
  std::vector<unsigned> occ(registry.mode_count());
  for (std::size_t k = 0; k < occ.size(); ++k) occ[k] = registry.occupation(index, k);
  for (auto f = first; f != factors.rend(); ++f) {
    unsigned& n = occ[f->mode];
    if (f->kind == Ladder::create) {
      amp *= std::sqrt(static_cast<double>(n) + 1.0);
      ++n;
    } else {
      if (n == 0) return 0.0;
      amp *= std::sqrt(static_cast<double>(n));
      --n;
    }
  }
  return std::norm(amp);
}

}  // namespace detail

/// Applies `op` to `state` with the bosonic ladder action
///   a^dagger |n> = sqrt(n+1) |n+1>,   a |n> = sqrt(n) |n-1>.
/// A creation at the cutoff drops the component; the norm the remaining
/// factors would have carried in the untruncated space is added to the
/// result's truncation loss (on top of the input's).
inline StateVector apply(const OperatorSum& op, const StateVector& state) {
  const ModeRegistry& registry = state.registry();
  const auto resolved = detail::resolve(op, registry);

  std::vector<double> sqrt_table(registry.max_cutoff() + 2);
  for (std::size_t n = 0; n < sqrt_table.size(); ++n) sqrt_table[n] = std::sqrt(static_cast<double>(n));

  std::vector<StateVector::Entry> out;
  out.reserve(state.nonzeros() * op.terms().size());
  double dropped = 0.0;

  for (std::size_t t = 0; t < resolved.size(); ++t) {
    const Complex coefficient = op.terms()[t].coefficient;
    if (coefficient == Complex{}) continue;
    const auto& factors = resolved[t];
    for (const auto& entry : state.entries()) {
      BasisIndex index = entry.index;
      Complex amp = coefficient * entry.amplitude;
      bool alive = true;
      for (auto f = factors.rbegin(); f != factors.rend(); ++f) {
        const unsigned n = registry.occupation(index, f->mode);
        if (f->kind == Ladder::create) {
          if (n == registry.cutoff(f->mode)) {
            dropped += detail::overflow_norm(registry, index, amp, factors, f);
            alive = false;
            break;
          }
          amp *= sqrt_table[n + 1];
          index += registry.stride(f->mode);
        } else {
          if (n == 0) {
            alive = false;
            break;
          }
          amp *= sqrt_table[n];
          index -= registry.stride(f->mode);
        }
      }
      if (alive) out.push_back({index, amp});
    }
  }
  return StateVector(state.registry_ptr(), std::move(out), state.truncation_loss() + dropped);
}

/// <x|y>, conjugate-linear in x.
inline Complex inner_product(const StateVector& x, const StateVector& y) {
  StateVector::require_same_space(x, y);
  Complex sum{};
  auto a = x.entries();
  auto b = y.entries();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].index < b[j].index) {
      ++i;
    } else if (b[j].index < a[i].index) {
      ++j;
    } else {
      sum += std::conj(a[i].amplitude) * b[j].amplitude;
      ++i;
      ++j;
    }
  }
  return sum;
}

/// <state| op |state>. The state is assumed normalized.
inline Complex expectation(const OperatorSum& op, const StateVector& state) {
  return inner_product(state, apply(op, state));
}

// ---------------------------------------------------------------------------
// Coherent states and photon statistics

/// Probability mass of a Poisson(|alpha|^2) distribution above n.
inline double coherent_tail_mass(double mean_photons, unsigned n) {
  if (mean_photons <= 0.0) return 0.0;
  return boost::math::gamma_p(static_cast<double>(n) + 1.0, mean_photons);
}

/// Smallest cutoff whose discarded Poisson tail is below `tolerance`.
inline unsigned coherent_cutoff(Complex alpha, double tolerance = 1e-10) {
  const double mean = std::norm(alpha);
  unsigned n = 0;
  while (coherent_tail_mass(mean, n) >= tolerance) {
    ++n;
    if (n > 100000) throw SizingError("coherent amplitude too large for any practical cutoff");
  }
  return n;
}

/// Single-mode coherent amplitudes e^{-|a|^2/2} a^n / sqrt(n!), n = 0..cutoff,
/// renormalized. `loss` receives the discarded tail mass.
inline std::vector<Complex> coherent_amplitudes(Complex alpha, unsigned cutoff, double& loss) {
  std::vector<Complex> c(cutoff + 1);
  const double r = std::abs(alpha);
  const double theta = std::arg(alpha);
  if (r == 0.0) {
    c[0] = 1.0;
    loss = 0.0;
    return c;
  }
  double kept = 0.0;
  for (unsigned n = 0; n <= cutoff; ++n) {
    const double log_mag = -0.5 * r * r + n * std::log(r) - 0.5 * std::lgamma(n + 1.0);
    c[n] = std::polar(std::exp(log_mag), n * theta);
    kept += std::norm(c[n]);
  }
  loss = coherent_tail_mass(r * r, cutoff);
  const double scale = 1.0 / std::sqrt(kept);
  for (auto& v : c) v *= scale;
  return c;
}

/// Product state with the given single-mode amplitude vectors; every other
/// mode is empty. Amplitude vectors longer than cutoff+1 are rejected.
inline StateVector product_state(RegistryPtr registry,
                                 const std::vector<std::pair<std::string, std::vector<Complex>>>& factors,
                                 double truncation_loss = 0.0) {
  std::vector<StateVector::Entry> entries{{0, Complex{1.0}}};
  for (const auto& [label, amps] : factors) {
    const std::size_t k = registry->index_of(label);
    if (amps.size() > registry->cutoff(k) + 1) {
      throw SizingError("amplitudes for mode '" + label + "' exceed its cutoff");
    }
    std::vector<StateVector::Entry> next;
    next.reserve(entries.size() * amps.size());
    for (const auto& e : entries) {
      if (registry->occupation(e.index, k) != 0) throw ConfigError("mode '" + label + "' given twice");
      for (std::size_t n = 0; n < amps.size(); ++n) {
        if (amps[n] == Complex{}) continue;
        next.push_back({e.index + n * registry->stride(k), e.amplitude * amps[n]});
      }
    }
    entries = std::move(next);
  }
  return StateVector(std::move(registry), std::move(entries), truncation_loss);
}

/// |alpha> in `mode`, vacuum elsewhere; the mode's registry cutoff truncates
/// the expansion. Throws SizingError when the discarded tail exceeds `max_loss`.
inline StateVector coherent_state(RegistryPtr registry, const std::string& mode, Complex alpha,
                                  double max_loss = 1e-10) {
  const unsigned cutoff = registry->cutoff(registry->index_of(mode));
  double loss = 0.0;
  auto amps = coherent_amplitudes(alpha, cutoff, loss);
  if (loss > max_loss) {
    throw SizingError("coherent state |alpha|^2=" + std::to_string(std::norm(alpha)) + " loses " +
                      std::to_string(loss) + " above cutoff " + std::to_string(cutoff) + "; need cutoff >= " +
                      std::to_string(coherent_cutoff(alpha, max_loss)));
  }
  return product_state(std::move(registry), {{mode, std::move(amps)}}, loss);
}

/// P(n) for n = 0..cutoff of `mode`.
inline std::vector<double> photon_number_distribution(const StateVector& state, std::string_view mode) {
  const ModeRegistry& registry = state.registry();
  const std::size_t k = registry.index_of(mode);
  std::vector<double> p(registry.cutoff(k) + 1, 0.0);
  for (const auto& e : state.entries()) p[registry.occupation(e.index, k)] += std::norm(e.amplitude);
  return p;
}

}  // namespace zwm
