#include "pace/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

namespace pace {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t base_seed, std::uint64_t stream_index)
    : base_seed_(base_seed), stream_index_(stream_index) {
  // Mixing both words through splitmix64 decorrelates nearby seeds and
  // nearby stream indices.
  std::uint64_t s = splitmix64(base_seed ^ splitmix64(stream_index));
  engine_.seed(s);
}

double RngStream::uniform01() {
  // 53-bit mantissa draw in [0, 1); engine output is fully specified by the
  // standard, so sequences are portable across platforms.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 shifted away from zero so log() stays finite.
  double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::complex<double> RngStream::complex_gaussian() {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  double re = gaussian();
  double im = gaussian();
  return {re * inv_sqrt2, im * inv_sqrt2};
}

Eigen::VectorXcd RngStream::complex_gaussian_vector(int n) {
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = complex_gaussian();
  return v;
}

Eigen::VectorXcd sample_standard_complex_gaussian(int n, RngStream& rng) {
  if (n < 1) throw std::domain_error("sample size must be >= 1");
  return rng.complex_gaussian_vector(n);
}

// ---------------------------------------------------------------------------
// Bessel J0
// ---------------------------------------------------------------------------

namespace {

// Ascending series sum_k (-1)^k (x^2/4)^k / (k!)^2 in extended precision with
// compensated summation. Cancellation grows with x; below the regime split
// the accumulated error stays under 1e-13.
double j0_series(double x) {
  long double q = static_cast<long double>(x) * x / 4.0L;
  long double term = 1.0L;
  long double sum = 1.0L;
  long double comp = 0.0L;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<long double>(k) * k);
    long double y = term - comp;
    long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    if (std::abs(term) < 1e-20L * (1.0L + std::abs(sum))) break;
  }
  return static_cast<double>(sum);
}

// Hankel asymptotic form J0(x) = sqrt(2/(pi x)) [P cos(x - pi/4) - Q sin(x - pi/4)].
// The P/Q series are summed to their smallest term; past the regime split the
// truncation error is below 1e-14.
double j0_asymptotic(double x) {
  double u = 1.0;  // A_j / x^j with A_j = prod(-(2i-1)^2) / (j! 8^j)
  double p = 1.0;
  double q = 0.0;
  double prev = std::abs(u);
  for (int j = 0; j < 400; ++j) {
    double odd = 2.0 * j + 1.0;
    u *= -(odd * odd) / (8.0 * (j + 1) * x);
    double mag = std::abs(u);
    if (mag > prev) break;  // divergent tail reached: stop at smallest term
    prev = mag;
    int k = (j + 1) / 2;  // index inside P or Q
    double signed_term = ((k % 2) ? -u : u);
    if ((j + 1) % 2 == 0) {
      p += signed_term;
    } else {
      q += signed_term;
    }
    if (mag < 1e-19) break;
  }
  double chi = x - 0.25 * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

// Series/asymptotic split. 16 keeps both regimes within the 1e-12 accuracy
// contract: the asymptotic tail bottoms out near exp(-2x).
constexpr double kJ0Split = 16.0;

}  // namespace

double bessel_j0(double x) {
  if (!std::isfinite(x)) throw std::domain_error("bessel_j0: non-finite input");
  double ax = std::abs(x);
  if (ax < kJ0Split) return j0_series(ax);
  return j0_asymptotic(ax);
}

// ---------------------------------------------------------------------------
// Cholesky with jitter escalation
// ---------------------------------------------------------------------------

namespace {

constexpr double kJitterStartRel = 1e-10;
constexpr double kJitterCapRel = 1e-4;

template <typename Matrix>
bool try_factor(const Matrix& A, double jitter, Matrix& L) {
  Matrix work = A;
  work.diagonal().array() += jitter;
  Eigen::LLT<Matrix> llt(work);
  if (llt.info() != Eigen::Success) return false;
  L = llt.matrixL();
  if (!L.allFinite()) return false;
  // The contract is a reconstruction bound, not just a nonnegative pivot.
  double denom = std::max(A.norm(), 1.0);
  double err = (L * L.adjoint() - work).norm() / denom;
  return err <= 1e-10;
}

template <typename Matrix>
CholeskyResult<Matrix> cholesky_psd_impl(const Matrix& A, double jitter) {
  if (A.rows() != A.cols()) throw std::invalid_argument("cholesky_psd: square matrix required");
  if (jitter < 0.0) throw std::invalid_argument("cholesky_psd: jitter must be >= 0");
  const int n = static_cast<int>(A.rows());
  double mean_diag = std::abs(A.diagonal().real().sum()) / std::max(n, 1);
  if (mean_diag == 0.0) mean_diag = 1.0;
  const double cap = kJitterCapRel * mean_diag;

  Matrix L(n, n);
  if (try_factor(A, jitter, L)) return {L, jitter};

  double j = std::max(jitter * 10.0, kJitterStartRel * mean_diag);
  for (; j <= cap * (1.0 + 1e-12); j *= 10.0) {
    if (try_factor(A, j, L)) return {L, j};
  }

  Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
  double min_eig = es.info() == Eigen::Success
                       ? es.eigenvalues().minCoeff()
                       : std::numeric_limits<double>::quiet_NaN();
  throw NumericalRankError(
      "cholesky_psd: factorization failed at jitter cap " + std::to_string(cap) +
          " (min eigenvalue ~ " + std::to_string(min_eig) + ")",
      min_eig);
}

}  // namespace

HermitianMatrix HermitianMatrix::symmetrized(const Eigen::MatrixXcd& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("HermitianMatrix: square matrix required");
  HermitianMatrix h;
  h.entries = 0.5 * (A + A.adjoint());
  const int n = static_cast<int>(A.rows());
  for (int i = 0; i < n; ++i) {
    h.entries(i, i) = std::complex<double>(h.entries(i, i).real(), 0.0);
    for (int j = i + 1; j < n; ++j) h.entries(j, i) = std::conj(h.entries(i, j));
  }
  return h;
}

bool HermitianMatrix::check() const {
  const int n = dimension();
  for (int i = 0; i < n; ++i) {
    if (entries(i, i).imag() != 0.0) return false;
    for (int j = i + 1; j < n; ++j) {
      if (entries(i, j) != std::conj(entries(j, i))) return false;
    }
  }
  return true;
}

CholeskyResult<Eigen::MatrixXd> cholesky_psd(const Eigen::MatrixXd& A, double jitter) {
  return cholesky_psd_impl<Eigen::MatrixXd>(A, jitter);
}

CholeskyResult<Eigen::MatrixXcd> cholesky_psd(const HermitianMatrix& A, double jitter) {
  return cholesky_psd_impl<Eigen::MatrixXcd>(A.entries, jitter);
}

double logdet_capacity(const Eigen::MatrixXcd& H, double rho) {
  if (rho < 0.0 || !std::isfinite(rho)) throw std::domain_error("logdet_capacity: rho must be finite and >= 0");
  if (!H.allFinite()) throw std::domain_error("logdet_capacity: non-finite matrix entries");
  if (rho == 0.0) return 0.0;
  const int n = static_cast<int>(H.rows());
  const int m = static_cast<int>(H.cols());
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(n, n);
  A.selfadjointView<Eigen::Lower>().rankUpdate(H, rho / m);
  Eigen::LLT<Eigen::MatrixXcd> llt(A);
  if (llt.info() != Eigen::Success) throw std::runtime_error("logdet_capacity: factorization failed");
  double sum = 0.0;
  Eigen::MatrixXcd L = llt.matrixL();
  for (int i = 0; i < n; ++i) sum += std::log2(L(i, i).real());
  return std::max(2.0 * sum, 0.0);
}

double pairwise_sum(const std::vector<double>& values) {
  std::function<double(std::size_t, std::size_t)> rec = [&](std::size_t lo, std::size_t hi) -> double {
    if (hi - lo <= 8) {
      double s = 0.0;
      for (std::size_t i = lo; i < hi; ++i) s += values[i];
      return s;
    }
    std::size_t mid = lo + (hi - lo) / 2;
    return rec(lo, mid) + rec(mid, hi);
  };
  return values.empty() ? 0.0 : rec(0, values.size());
}

void parallel_for_index(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace pace
