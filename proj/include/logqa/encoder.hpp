#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "logqa/numeric.hpp"
#include "logqa/text.hpp"

namespace logqa {

using DenseVector = Vector;

// Parameters of the shared question/log tower: an embedding table and one
// square projection. Both towers read the same instance.
struct EncoderParams {
  RowMatrix embedding;  // |vocab| x d
  Matrix projection;    // d x d

  static EncoderParams random(std::size_t vocab_size, std::size_t dim, std::uint64_t seed,
                              double init_range = 0.05);

  std::size_t dim() const { return static_cast<std::size_t>(projection.rows()); }
  std::size_t vocab_size() const { return static_cast<std::size_t>(embedding.rows()); }
  std::uint64_t checksum() const;
  bool all_finite() const { return embedding.allFinite() && projection.allFinite(); }

  // Binary blob: "LQAENC01", u32 version, u32 d, u64 |vocab|, then E and P
  // row-major as little-endian doubles.
  std::string serialize() const;
  static EncoderParams deserialize(std::string_view blob);
};

struct EncoderGrads {
  RowMatrix embedding;
  Matrix projection;

  static EncoderGrads zeros_like(const EncoderParams& p);
  void set_zero();
};

// Forward state kept for backprop.
struct Encoded {
  TokenIds ids;
  Vector mean;    // mean of embedding rows
  Vector output;  // tanh(P * mean)
};

Encoded encode(const EncoderParams& params, std::span<const TokenId> ids);

// tanh(P * mean(E[ids])). Throws on an empty id list.
inline DenseVector embed_sequence(const EncoderParams& params, std::span<const TokenId> ids) {
  return encode(params, ids).output;
}

// Accumulates d(loss)/d(params) given d(loss)/d(output).
void backward(const EncoderParams& params, const Encoded& enc, const Vector& d_output,
              EncoderGrads& grads);

// Throws on a zero-norm argument or a dimension mismatch.
double cosine(const DenseVector& u, const DenseVector& v);

// Partial derivatives of cosine(u, v) with respect to u and v.
void cosine_backward(const DenseVector& u, const DenseVector& v, double d_cos, Vector& d_u,
                     Vector& d_v);

// Loss definition for a single question against a candidate list:
// targets (normalized), denominator weights (1 for in-batch, w for hard
// negatives) and the softmax temperature.
struct RetrievalLossSpec {
  std::vector<double> targets;
  std::vector<double> weights;
  double temperature = 0.05;
};

struct LossAndGrads {
  double loss = 0.0;
  EncoderGrads grads;
};

LossAndGrads encoder_gradients(const EncoderParams& params, std::span<const TokenId> question,
                               const std::vector<TokenIds>& candidates,
                               const RetrievalLossSpec& spec);

}  // namespace logqa
