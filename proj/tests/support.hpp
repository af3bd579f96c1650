#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "logqa/corpus.hpp"
#include "logqa/encoder.hpp"
#include "logqa/numeric.hpp"

namespace logqa::support {

// The running example of the HDFS walkthrough plus a few neighbours.
Corpus hdfs_toy_corpus();

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

// Central finite difference of f around *x.
template <typename F>
double central_difference(double* x, F&& f, double h = 1e-4) {
  const double saved = *x;
  *x = saved + h;
  const double up = f();
  *x = saved - h;
  const double down = f();
  *x = saved;
  return (up - down) / (2.0 * h);
}

// Analytic vs numeric agreement used by every gradient check.
inline bool gradient_close(double analytic, double numeric) {
  return std::abs(analytic - numeric) <= 1e-4 * (1.0 + std::abs(analytic));
}

}  // namespace logqa::support
