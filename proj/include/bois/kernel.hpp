#pragma once

#include "bois/common.hpp"

#include <string>

namespace bois {

enum class KernelFamily { matern12, matern32, matern52, squared_exponential };

KernelFamily kernel_family_from_string(const std::string& name);
std::string to_string(KernelFamily family);

// Stationary kernel with per-dimension lengthscales.
struct KernelSpec {
  KernelFamily family = KernelFamily::matern52;
  Vec lengthscales;             // one per input dimension, > 0
  double signal_variance = 1.0;  // > 0
  double noise_variance = 0.0;   // >= 0, observation noise added on the Gram diagonal

  int dim() const { return static_cast<int>(lengthscales.size()); }
  void validate() const;
};

// k(r) for scaled distance r = |(x - x') / lengthscales|.
double kernel_from_distance(KernelFamily family, double r, double signal_variance);

double kernel_eval(const KernelSpec& spec, const Vec& x, const Vec& xp);

// Gram matrix K(X, X); rows of X are points. Noise is not added here.
Mat gram(const KernelSpec& spec, const Mat& X);

// K(A, B), |A| x |B|.
Mat cross_gram(const KernelSpec& spec, const Mat& A, const Mat& B);

}  // namespace bois
