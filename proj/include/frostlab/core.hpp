// Shared basics: error types, deterministic summation, small numeric helpers.
#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace frostlab {

using cplx = std::complex<double>;

// Invalid or inconsistent configuration / arguments (CLI exit code 2).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A numeric precondition stated by an operation's contract failed (exit code 3).
struct PreconditionError : std::runtime_error {
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

// Gram-Schmidt residual collapsed: the input vectors are (numerically) dependent.
struct DegeneracyError : PreconditionError {
  explicit DegeneracyError(const std::string& what) : PreconditionError(what) {}
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw PreconditionError(what);
}

// Pairwise (tree) summation. Fixed association order, so results do not depend
// on how callers partition work across threads.
template <typename T>
T pairwise_sum(std::span<const T> xs) {
  if (xs.size() <= 16) {
    T acc{};
    for (const T& x : xs) acc += x;
    return acc;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.subspan(0, half)) + pairwise_sum(xs.subspan(half));
}

template <typename T>
T pairwise_sum(const std::vector<T>& xs) {
  return pairwise_sum(std::span<const T>(xs));
}

inline double sqr(double x) { return x * x; }

}  // namespace frostlab
