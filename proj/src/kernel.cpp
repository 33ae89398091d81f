#include "bois/kernel.hpp"

#include <cmath>

namespace bois {

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "matern12") return KernelFamily::matern12;
  if (name == "matern32") return KernelFamily::matern32;
  if (name == "matern52") return KernelFamily::matern52;
  if (name == "squared-exponential" || name == "se") return KernelFamily::squared_exponential;
  throw ConfigError("unknown kernel family: " + name);
}

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::matern12: return "matern12";
    case KernelFamily::matern32: return "matern32";
    case KernelFamily::matern52: return "matern52";
    case KernelFamily::squared_exponential: return "squared-exponential";
  }
  return "?";
}

void KernelSpec::validate() const {
  require(lengthscales.size() >= 1, "KernelSpec: lengthscales must be non-empty");
  for (Eigen::Index i = 0; i < lengthscales.size(); ++i)
    require(lengthscales[i] > 0.0, "KernelSpec: lengthscales must be > 0");
  require(signal_variance > 0.0, "KernelSpec: signal_variance must be > 0");
  require(noise_variance >= 0.0, "KernelSpec: noise_variance must be >= 0");
}

double kernel_from_distance(KernelFamily family, double r, double signal_variance) {
  switch (family) {
    case KernelFamily::matern12:
      return signal_variance * std::exp(-r);
    case KernelFamily::matern32: {
      const double a = std::sqrt(3.0) * r;
      return signal_variance * (1.0 + a) * std::exp(-a);
    }
    case KernelFamily::matern52: {
      const double a = std::sqrt(5.0) * r;
      return signal_variance * (1.0 + a + a * a / 3.0) * std::exp(-a);
    }
    case KernelFamily::squared_exponential:
      return signal_variance * std::exp(-0.5 * r * r);
  }
  return 0.0;
}

namespace {

double scaled_distance(const KernelSpec& spec, const Vec& x, const Vec& xp) {
  double r2 = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = (x[i] - xp[i]) / spec.lengthscales[i];
    r2 += d * d;
  }
  return std::sqrt(r2);
}

}  // namespace

double kernel_eval(const KernelSpec& spec, const Vec& x, const Vec& xp) {
  if (x.size() != spec.lengthscales.size() || xp.size() != spec.lengthscales.size())
    throw ShapeError("kernel_eval: point dimension does not match lengthscales");
  return kernel_from_distance(spec.family, scaled_distance(spec, x, xp), spec.signal_variance);
}

Mat gram(const KernelSpec& spec, const Mat& X) {
  if (X.cols() != spec.lengthscales.size())
    throw ShapeError("gram: input dimension does not match lengthscales");
  const Eigen::Index n = X.rows();
  Mat K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = spec.signal_variance;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double k =
          kernel_from_distance(spec.family, scaled_distance(spec, X.row(i), X.row(j)),
                               spec.signal_variance);
      K(i, j) = k;
      K(j, i) = k;
    }
  }
  return K;
}

Mat cross_gram(const KernelSpec& spec, const Mat& A, const Mat& B) {
  if (A.cols() != spec.lengthscales.size() || B.cols() != spec.lengthscales.size())
    throw ShapeError("cross_gram: input dimension does not match lengthscales");
  Mat K(A.rows(), B.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < B.rows(); ++j)
      K(i, j) = kernel_from_distance(spec.family, scaled_distance(spec, A.row(i), B.row(j)),
                                     spec.signal_variance);
  return K;
}

}  // namespace bois
