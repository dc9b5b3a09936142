#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace pong {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat6x3 = Eigen::Matrix<double, 6, 3>;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

/// Bad user-facing input (malformed JSON, inconsistent dimensions, ...).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation requested outside a function's smooth/valid domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numeric routine could not certify its result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An analytic derivative is ill-posed at the query point. The message
/// names the cause; callers are expected to fall back to finite differences.
class DegeneracyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

inline Mat3 skew(const Vec3& a) {
  Mat3 s;
  s << 0.0, -a.z(), a.y(), a.z(), 0.0, -a.x(), -a.y(), a.x(), 0.0;
  return s;
}

inline int effective_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Index-addressed parallel loop. Results must be written to
/// caller-preallocated, per-index storage so the outcome is identical
/// for every thread count. If bodies throw, the exception from the lowest
/// index is rethrown after all workers stop.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& body) {
  int tc = effective_threads(threads);
  if (tc <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(tc), n);
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  std::vector<std::exception_ptr> errors(n_workers);
  std::vector<std::size_t> error_index(n_workers, n);
  for (std::size_t w = 0; w < n_workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = w; i < n; i += n_workers) {
        try {
          body(i);
        } catch (...) {
          errors[w] = std::current_exception();
          error_index[w] = i;
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  std::size_t first = n;
  std::size_t who = n_workers;
  for (std::size_t w = 0; w < n_workers; ++w) {
    if (errors[w] && error_index[w] < first) {
      first = error_index[w];
      who = w;
    }
  }
  if (who < n_workers) std::rethrow_exception(errors[who]);
}

}  // namespace pong
