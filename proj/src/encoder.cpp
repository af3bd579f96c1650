#include "logqa/encoder.hpp"

#include <algorithm>

#include "logqa/binary_io.hpp"
#include "logqa/checksum.hpp"
#include "logqa/error.hpp"

namespace logqa {
namespace {
constexpr std::string_view kMagic = "LQAENC01";
constexpr std::uint32_t kVersion = 1;
}  // namespace

EncoderParams EncoderParams::random(std::size_t vocab_size, std::size_t dim, std::uint64_t seed,
                                    double init_range) {
  if (dim < 2) throw Error("encoder: dimension must be >= 2");
  EncoderParams p;
  p.embedding.resize(static_cast<Eigen::Index>(vocab_size), static_cast<Eigen::Index>(dim));
  p.projection.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  Rng rng(seed);
  fill_uniform(p.embedding, rng, -init_range, init_range);
  fill_uniform(p.projection, rng, -init_range, init_range);
  return p;
}

std::uint64_t EncoderParams::checksum() const {
  Fnv1a h;
  h.update_value(static_cast<std::uint64_t>(embedding.rows()));
  h.update_value(static_cast<std::uint64_t>(embedding.cols()));
  h.update(embedding.data(), static_cast<std::size_t>(embedding.size()) * sizeof(double));
  h.update(projection.data(), static_cast<std::size_t>(projection.size()) * sizeof(double));
  return h.digest();
}

std::string EncoderParams::serialize() const {
  BinaryWriter w;
  w.put_bytes(kMagic);
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(dim()));
  w.put<std::uint64_t>(vocab_size());
  w.put_matrix(embedding);
  w.put_matrix(projection);
  return w.str();
}

EncoderParams EncoderParams::deserialize(std::string_view blob) {
  BinaryReader r(blob, "encoder artifact");
  r.expect_magic(kMagic);
  if (auto v = r.get<std::uint32_t>(); v != kVersion)
    throw Error("encoder artifact: unsupported version " + std::to_string(v));
  const auto d = static_cast<Eigen::Index>(r.get<std::uint32_t>());
  const auto n = static_cast<Eigen::Index>(r.get<std::uint64_t>());
  if (d < 2) throw Error("encoder artifact: bad dimension");
  EncoderParams p;
  p.embedding.resize(n, d);
  p.projection.resize(d, d);
  r.get_matrix(p.embedding);
  r.get_matrix(p.projection);
  r.expect_end();
  return p;
}

EncoderGrads EncoderGrads::zeros_like(const EncoderParams& p) {
  return {RowMatrix::Zero(p.embedding.rows(), p.embedding.cols()),
          Matrix::Zero(p.projection.rows(), p.projection.cols())};
}

void EncoderGrads::set_zero() {
  embedding.setZero();
  projection.setZero();
}

Encoded encode(const EncoderParams& params, std::span<const TokenId> ids) {
  if (ids.empty()) throw Error("encoder: empty token sequence");
  Encoded enc;
  enc.ids.assign(ids.begin(), ids.end());
  enc.mean = Vector::Zero(params.embedding.cols());
  for (TokenId id : ids) {
    if (id < 0 || id >= params.embedding.rows()) throw Error("encoder: token id out of range");
    enc.mean += params.embedding.row(id).transpose();
  }
  enc.mean /= static_cast<double>(ids.size());
  enc.output = (params.projection * enc.mean).array().tanh().matrix();
  return enc;
}

void backward(const EncoderParams& params, const Encoded& enc, const Vector& d_output,
              EncoderGrads& grads) {
  const Vector d_pre = d_output.array() * (1.0 - enc.output.array().square());
  grads.projection.noalias() += d_pre * enc.mean.transpose();
  const Vector d_mean = params.projection.transpose() * d_pre / static_cast<double>(enc.ids.size());
  for (TokenId id : enc.ids) grads.embedding.row(id) += d_mean.transpose();
}

double cosine(const DenseVector& u, const DenseVector& v) {
  if (u.size() != v.size()) throw Error("cosine: dimension mismatch");
  const double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw Error("cosine: zero-norm vector");
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

void cosine_backward(const DenseVector& u, const DenseVector& v, double d_cos, Vector& d_u,
                     Vector& d_v) {
  const double nu = u.norm(), nv = v.norm();
  const double c = u.dot(v) / (nu * nv);
  d_u = d_cos * (v / (nu * nv) - c * u / (nu * nu));
  d_v = d_cos * (u / (nu * nv) - c * v / (nv * nv));
}

LossAndGrads encoder_gradients(const EncoderParams& params, std::span<const TokenId> question,
                               const std::vector<TokenIds>& candidates,
                               const RetrievalLossSpec& spec) {
  if (spec.targets.size() != candidates.size() || spec.weights.size() != candidates.size())
    throw Error("encoder_gradients: loss spec does not match candidate count");
  const Encoded q = encode(params, question);
  std::vector<Encoded> cands;
  std::vector<double> logits;
  for (const auto& c : candidates) {
    cands.push_back(encode(params, c));
    logits.push_back(cosine(q.output, cands.back().output) / spec.temperature);
  }
  const auto ce = weighted_soft_cross_entropy(logits, spec.targets, spec.weights);

  LossAndGrads out{ce.loss, EncoderGrads::zeros_like(params)};
  Vector d_q = Vector::Zero(q.output.size());
  Vector du, dv;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    cosine_backward(q.output, cands[i].output, ce.dlogits[i] / spec.temperature, du, dv);
    d_q += du;
    backward(params, cands[i], dv, out.grads);
  }
  backward(params, q, d_q, out.grads);
  return out;
}

}  // namespace logqa
