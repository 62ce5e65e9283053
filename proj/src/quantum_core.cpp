#include "qft/quantum_core.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace qft {

void DetectorSpec::validate() const {
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
    throw std::invalid_argument(fmt::format("detector {}: efficiency {} not in [0, 1]", label,
                                            efficiency));
  }
  if (!(dark_prob >= 0.0 && dark_prob <= 1.0)) {
    throw std::invalid_argument(fmt::format("detector {}: dark_prob {} not in [0, 1]", label,
                                            dark_prob));
  }
}

}  // namespace qft

namespace qft::quantum {

namespace {

constexpr double kUnitarityTolerance = 1e-10;

std::vector<double> sqrt_factorials(int n) {
  std::vector<double> out(static_cast<std::size_t>(n) + 1, 1.0);
  double f = 1.0;
  for (int k = 1; k <= n; ++k) {
    f *= k;
    out[static_cast<std::size_t>(k)] = std::sqrt(f);
  }
  return out;
}

std::vector<double> binomial_row(int n) {
  std::vector<double> row(static_cast<std::size_t>(n) + 1, 1.0);
  for (int k = 1; k < n; ++k) {
    row[static_cast<std::size_t>(k)] =
        row[static_cast<std::size_t>(k - 1)] * (n - k + 1) / static_cast<double>(k);
  }
  return row;
}

Complex ipow(Complex base, int exponent) {
  Complex out = 1.0;
  for (int i = 0; i < exponent; ++i) out *= base;
  return out;
}

// (c0 x + c1 y)^n as coefficients of x^j y^(n-j), indexed by j.
std::vector<Complex> expand(Complex c0, Complex c1, int n) {
  const auto binom = binomial_row(n);
  std::vector<Complex> out(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) {
    out[static_cast<std::size_t>(j)] =
        binom[static_cast<std::size_t>(j)] * ipow(c0, j) * ipow(c1, n - j);
  }
  return out;
}

}  // namespace

TwoModeFockState::TwoModeFockState(int n_max)
    : n_max_(n_max),
      amplitudes_(static_cast<std::size_t>(n_max + 1) * static_cast<std::size_t>(n_max + 1)) {
  if (n_max < 0) throw std::invalid_argument("truncation must be >= 0");
  amplitudes_[0] = 1.0;
}

TwoModeFockState TwoModeFockState::fock(int n1, int n2, int n_max) {
  TwoModeFockState state(n_max);
  state.set_amplitude(0, 0, 0.0);
  state.set_amplitude(n1, n2, 1.0);
  return state;
}

std::size_t TwoModeFockState::index(int n1, int n2) const {
  if (n1 < 0 || n2 < 0 || n1 > n_max_ || n2 > n_max_) {
    throw std::out_of_range(fmt::format("|{}, {}> outside truncation {}", n1, n2, n_max_));
  }
  return static_cast<std::size_t>(n1) * static_cast<std::size_t>(n_max_ + 1) +
         static_cast<std::size_t>(n2);
}

Complex TwoModeFockState::amplitude(int n1, int n2) const { return amplitudes_[index(n1, n2)]; }

void TwoModeFockState::set_amplitude(int n1, int n2, Complex value) {
  amplitudes_[index(n1, n2)] = value;
}

double TwoModeFockState::norm_squared() const {
  double sum = 0.0;
  for (const auto& c : amplitudes_) sum += std::norm(c);
  return sum;
}

std::vector<double> TwoModeFockState::total_number_distribution() const {
  std::vector<double> dist(static_cast<std::size_t>(2 * n_max_) + 1, 0.0);
  for (int n1 = 0; n1 <= n_max_; ++n1) {
    for (int n2 = 0; n2 <= n_max_; ++n2) {
      dist[static_cast<std::size_t>(n1 + n2)] += probability(n1, n2);
    }
  }
  return dist;
}

std::vector<double> TwoModeFockState::marginal(int mode) const {
  if (mode != 0 && mode != 1) throw std::invalid_argument("mode must be 0 or 1");
  std::vector<double> dist(static_cast<std::size_t>(n_max_) + 1, 0.0);
  for (int n1 = 0; n1 <= n_max_; ++n1) {
    for (int n2 = 0; n2 <= n_max_; ++n2) {
      dist[static_cast<std::size_t>(mode == 0 ? n1 : n2)] += probability(n1, n2);
    }
  }
  return dist;
}

double TwoModeFockState::mean_photons(int mode) const {
  const auto dist = marginal(mode);
  double mean = 0.0;
  for (std::size_t n = 0; n < dist.size(); ++n) mean += static_cast<double>(n) * dist[n];
  return mean;
}

double TwoModeFockState::edge_probability() const {
  double p = 0.0;
  for (int k = 0; k <= n_max_; ++k) {
    p += probability(n_max_, k);
    if (k != n_max_) p += probability(k, n_max_);
  }
  return p;
}

TwoModeFockState TwoModeFockState::resized(int n_max) const {
  TwoModeFockState out(n_max);
  out.set_amplitude(0, 0, 0.0);
  for (int n1 = 0; n1 <= n_max_; ++n1) {
    for (int n2 = 0; n2 <= n_max_; ++n2) {
      const Complex c = amplitude(n1, n2);
      if (n1 > n_max || n2 > n_max) {
        if (c != 0.0) throw std::out_of_range("resize would drop populated levels");
        continue;
      }
      out.set_amplitude(n1, n2, c);
    }
  }
  out.leaked_ = leaked_;
  return out;
}

ModeOperatorMap TransferMatrix::operator_map() const {
  return {{{{mu, nu}, {-std::conj(nu), std::conj(mu)}}}};
}

double ModeOperatorMap::unitarity_error() const {
  double err = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Complex s = 0.0;
      for (int k = 0; k < 2; ++k) s += m[i][k] * std::conj(m[j][k]);
      err = std::max(err, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  }
  return err;
}

TwoModeFockState apply_mode_map(const TwoModeFockState& state, const TransferMatrix& map) {
  if (map.unitarity_error() > kUnitarityTolerance) {
    throw std::invalid_argument(
        fmt::format("mode map is not unitary: |mu|^2+|nu|^2-1 = {:.3e}",
                    std::norm(map.mu) + std::norm(map.nu) - 1.0));
  }
  const int n_max = state.n_max();
  int top = 0;
  for (int n1 = 0; n1 <= n_max; ++n1) {
    for (int n2 = 0; n2 <= n_max; ++n2) {
      if (state.amplitude(n1, n2) != 0.0) top = std::max(top, n1 + n2);
    }
  }
  const int out_max = std::max(n_max, top);
  const auto sqf = sqrt_factorials(2 * n_max);
  const auto m = map.operator_map().m;

  // U a_k^dag U^dag = sum_j m[j][k] a_j^dag; expand each input ket's creation
  // polynomial and collect x^a y^b -> sqrt(a! b!) |a, b>.
  TwoModeFockState out(out_max);
  out.set_amplitude(0, 0, 0.0);
  for (int n1 = 0; n1 <= n_max; ++n1) {
    const auto first = expand(m[0][0], m[1][0], n1);
    for (int n2 = 0; n2 <= n_max; ++n2) {
      const Complex c = state.amplitude(n1, n2);
      if (c == 0.0) continue;
      const auto second = expand(m[0][1], m[1][1], n2);
      const double norm = 1.0 / (sqf[static_cast<std::size_t>(n1)] *
                                 sqf[static_cast<std::size_t>(n2)]);
      const int n = n1 + n2;
      for (int j = 0; j <= n1; ++j) {
        for (int k = 0; k <= n2; ++k) {
          const int a = j + k;
          const int b = n - a;
          const Complex term = c * norm * first[static_cast<std::size_t>(j)] *
                               second[static_cast<std::size_t>(k)] *
                               sqf[static_cast<std::size_t>(a)] * sqf[static_cast<std::size_t>(b)];
          out.set_amplitude(a, b, out.amplitude(a, b) + term);
        }
      }
    }
  }
  out.set_leaked_probability(state.leaked_probability());
  return out;
}

TwoModeFockState two_mode_squeezed_state(double epsilon, int n_max) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw std::domain_error(
        fmt::format("pair amplitude must satisfy 0 <= eps < 1, got {}", epsilon));
  }
  TwoModeFockState state(n_max);
  double norm = 0.0;
  for (int n = 0; n <= n_max; ++n) norm += std::pow(epsilon * epsilon, n);
  for (int n = 0; n <= n_max; ++n) state.set_amplitude(n, n, std::pow(epsilon, n) / std::sqrt(norm));
  state.set_leaked_probability(std::pow(epsilon, 2 * (n_max + 1)));
  return state;
}

double HeraldedState::mean() const {
  double m = 0.0;
  for (std::size_t n = 0; n < distribution.size(); ++n) m += static_cast<double>(n) * distribution[n];
  return m;
}

double HeraldedState::g2() const {
  double m2 = 0.0;
  for (std::size_t n = 2; n < distribution.size(); ++n) {
    m2 += static_cast<double>(n * (n - 1)) * distribution[n];
  }
  const double m1 = mean();
  return m1 > 0.0 ? m2 / (m1 * m1) : 0.0;
}

HeraldedState heralded_reduce(const TwoModeFockState& state, const DetectorSpec& herald) {
  herald.validate();
  const int n_max = state.n_max();
  HeraldedState out;
  out.distribution.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  const double total = state.norm_squared();
  for (int ns = 0; ns <= n_max; ++ns) {
    for (int ni = 0; ni <= n_max; ++ni) {
      out.distribution[static_cast<std::size_t>(ns)] +=
          state.probability(ns, ni) * herald.click_probability(ni);
    }
  }
  double click = 0.0;
  for (double p : out.distribution) click += p;
  if (!(click > 0.0)) throw ConditioningError("herald never clicks on this state");
  for (double& p : out.distribution) p /= click;
  out.click_probability = click / total;
  return out;
}

}  // namespace qft::quantum
