#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pace {

/// Deterministic random stream. A (base_seed, stream_index) pair always
/// produces the same sample sequence, independent of how many other streams
/// exist or which thread consumes it. Monte Carlo code uses one stream per
/// trial, with stream_index = trial index.
class RngStream {
 public:
  RngStream(std::uint64_t base_seed, std::uint64_t stream_index);

  std::uint64_t base_seed() const { return base_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  /// Uniform draw in [0, 1).
  double uniform01();
  /// Standard real Gaussian N(0, 1).
  double gaussian();
  /// Circularly-symmetric complex Gaussian CN(0, 1): real and imaginary
  /// parts each have variance 1/2.
  std::complex<double> complex_gaussian();
  Eigen::VectorXcd complex_gaussian_vector(int n);

 private:
  std::uint64_t base_seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Zero-th order Bessel function of the first kind.
/// Absolute error <= 1e-12 over |x| <= 1e4. Throws std::domain_error on
/// non-finite input.
double bessel_j0(double x);

/// Complex matrix with exact conjugate symmetry enforced at construction.
struct HermitianMatrix {
  Eigen::MatrixXcd entries;

  /// Builds from an approximately Hermitian matrix: averages A with its
  /// adjoint and then mirrors the lower triangle so that
  /// entries(i,j) == conj(entries(j,i)) holds bit-exactly.
  static HermitianMatrix symmetrized(const Eigen::MatrixXcd& A);

  int dimension() const { return static_cast<int>(entries.rows()); }
  bool check() const;  // exact conjugate symmetry
};

/// Thrown when a covariance matrix cannot be factored even at the jitter cap.
class NumericalRankError : public std::runtime_error {
 public:
  NumericalRankError(const std::string& what, double min_eigenvalue_estimate)
      : std::runtime_error(what), min_eigenvalue(min_eigenvalue_estimate) {}
  double min_eigenvalue;
};

template <typename Matrix>
struct CholeskyResult {
  Matrix L;            // lower triangular, L * L^H = A + jitter_used * I
  double jitter_used;  // 0 when the plain factorization succeeded
};

/// Cholesky factorization of a (possibly numerically rank-deficient) PSD
/// matrix. Attempts the factorization at the requested jitter; on failure
/// escalates the jitter tenfold, starting from 1e-10 relative to the mean
/// diagonal, up to a cap of 1e-4 relative. Throws NumericalRankError past
/// the cap, carrying a smallest-eigenvalue estimate.
CholeskyResult<Eigen::MatrixXd> cholesky_psd(const Eigen::MatrixXd& A,
                                             double jitter);
CholeskyResult<Eigen::MatrixXcd> cholesky_psd(const HermitianMatrix& A,
                                              double jitter);

/// log2 det(I_N + (rho / M) * H * H^H) for an N x M matrix H, evaluated via
/// Cholesky pivots. Result is >= 0; throws std::domain_error for rho < 0 or
/// non-finite entries.
double logdet_capacity(const Eigen::MatrixXcd& H, double rho);

/// n i.i.d. CN(0, 1) samples from the given stream.
Eigen::VectorXcd sample_standard_complex_gaussian(int n, RngStream& rng);

/// Order-independent sum (pairwise reduction), used so that parallel Monte
/// Carlo aggregation reproduces the sequential result bit-exactly.
double pairwise_sum(const std::vector<double>& values);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. fn must only touch
/// disjoint state per index.
void parallel_for_index(int n, int threads, const std::function<void(int)>& fn);

}  // namespace pace
