#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace lisec {

using cx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kLn2 = 0.6931471805599453094172321214581766;

/// Real inner product <A,B> = Re tr(A^H B) used throughout for Hermitian pairs.
inline double real_inner(const CMat& a, const CMat& b) {
  return (a.adjoint() * b).trace().real();
}

inline CMat hermitize(const CMat& a) { return 0.5 * (a + a.adjoint()); }

inline double hermitian_deviation(const CMat& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline void require_hermitian(const CMat& a, double tol, const char* what) {
  if (a.rows() != a.cols() || hermitian_deviation(a) > tol)
    throw std::invalid_argument(std::string(what) + ": matrix is not Hermitian within tolerance");
}

/// Summation with pairwise recursion so results do not depend on the
/// reduction order used by callers that shard the input.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double pairwise_mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("pairwise_mean: empty input");
  return pairwise_sum(xs) / static_cast<double>(xs.size());
}

struct MeanStdErr {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Sample mean and standard error (sample std / sqrt(n)).
inline MeanStdErr mean_stderr(std::span<const double> xs) {
  const double m = pairwise_mean(xs);
  if (xs.size() < 2) return {m, 0.0};
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - m) * (xs[i] - m);
  const double var = pairwise_sum(sq) / static_cast<double>(xs.size() - 1);
  return {m, std::sqrt(var / static_cast<double>(xs.size()))};
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed and task indices.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(base ^ (0xD1B54A32D192ED03ull * (a + 1))) ^
                    (0x8CB92BA72F3D8DD7ull * (b + 1)));
}

/// Deterministic random stream. The mapping from engine output to doubles is
/// spelled out here instead of relying on std distributions, so sequences are
/// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform on (0, 1]; never returns 0 so logs are safe.
  double uniform() {
    const std::uint64_t bits = eng_() >> 11;  // 53 bits
    return (static_cast<double>(bits) + 1.0) * 0x1p-53;
  }

  /// Circularly symmetric complex Gaussian CN(0,1):
  /// modulus^2 ~ Exp(1), phase uniform.
  cx cnormal() {
    const double r = std::sqrt(-std::log(uniform()));
    const double phi = 2.0 * kPi * uniform();
    return cx(r * std::cos(phi), r * std::sin(phi));
  }

  CMat cnormal_matrix(Eigen::Index rows, Eigen::Index cols) {
    CMat m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cnormal();
    return m;
  }

  CVec cnormal_vector(Eigen::Index n) {
    CVec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cnormal();
    return v;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace lisec
