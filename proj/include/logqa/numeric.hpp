#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace logqa {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Rng = std::mt19937_64;

// [0,1) from the raw engine output; independent of the standard library's
// distribution implementations so seeded runs are portable.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }
inline std::size_t uniform_index(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

template <typename M>
void fill_uniform(M& m, Rng& rng, double lo, double hi) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = uniform(rng, lo, hi);
}

inline double log_sum_exp(std::span<const double> x) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : x) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double v : x) s += std::exp(v - mx);
  return mx + std::log(s);
}

inline std::vector<double> softmax(std::span<const double> x) {
  const double lse = log_sum_exp(x);
  std::vector<double> p(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) p[i] = std::exp(x[i] - lse);
  return p;
}

struct SoftCrossEntropy {
  double loss = 0.0;
  std::vector<double> dlogits;
};

// Cross-entropy of targets t against q_i = exp(s_i) / sum_j m_j exp(s_j).
// The per-candidate weights m put hard negatives into the denominator with
// weight w while leaving the numerator unweighted.
inline SoftCrossEntropy weighted_soft_cross_entropy(std::span<const double> logits,
                                                    std::span<const double> targets,
                                                    std::span<const double> weights) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (weights[i] > 0.0) mx = std::max(mx, logits[i]);
  double denom = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (weights[i] > 0.0) denom += weights[i] * std::exp(logits[i] - mx);
  const double log_denom = mx + std::log(denom);

  SoftCrossEntropy out;
  out.dlogits.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out.loss -= targets[i] * logits[i];
    const double q = weights[i] > 0.0 ? weights[i] * std::exp(logits[i] - log_denom) : 0.0;
    out.dlogits[i] = q - targets[i];
  }
  out.loss += log_denom;
  return out;
}

// Adam over a flat list of parameter blocks. Each block is a contiguous
// Eigen storage; moments are kept per block.
class Adam {
 public:
  struct Config {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  explicit Adam(Config cfg) : cfg_(cfg) {}

  void add_block(std::size_t size) {
    m_.emplace_back(Vector::Zero(static_cast<Eigen::Index>(size)));
    v_.emplace_back(Vector::Zero(static_cast<Eigen::Index>(size)));
  }

  void begin_step() { ++t_; }

  void update(std::size_t block, double* param, const double* grad) {
    auto& m = m_[block];
    auto& v = v_[block];
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double g = grad[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      param[i] -= cfg_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.eps);
    }
  }

 private:
  Config cfg_;
  std::int64_t t_ = 0;
  std::vector<Vector> m_, v_;
};

}  // namespace logqa
