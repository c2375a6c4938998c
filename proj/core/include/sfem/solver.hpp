#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Core>

#include "sfem/assembly.hpp"
#include "sfem/errors.hpp"

namespace sfem {

enum class SolverMethod {
  /// Jacobi-preconditioned conjugate gradient.
  PCG,
  /// Sparse LDL^T factorization with iterative refinement.
  Direct,
};

SolverMethod parse_solver_method(const std::string& name);
std::string to_string(SolverMethod method);

struct SolveOptions {
  SolverMethod method = SolverMethod::PCG;
  /// Target for ||f - K d||_2 / ||f||_2.
  double rel_tolerance = 1e-10;
  /// 0 selects max(1000, 20 sqrt(dofs)).
  std::size_t max_iterations = 0;
  unsigned threads = 1;
};

std::size_t default_max_iterations(std::size_t dofs);

/// Wall-clock seconds per pipeline phase.
struct PhaseTimings {
  double parse = 0.0;
  double assembly = 0.0;
  double csc = 0.0;
  double bc = 0.0;
  double solve = 0.0;
  double recovery = 0.0;
  double output = 0.0;
};

struct SolveReport {
  Eigen::VectorXd displacements;
  std::size_t iterations = 0;
  /// True residual ||f - K d|| / ||f|| of the returned displacements.
  double relative_residual = 0.0;
  bool converged = false;
  SolverMethod method = SolverMethod::PCG;
  PhaseTimings timings;
};

/// Raised when the solver cannot meet its tolerance; carries the best iterate.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, SolveReport best);
  const SolveReport& best() const noexcept { return best_; }

 private:
  SolveReport best_;
};

/// Solves K d = f for symmetric positive definite K.
SolveReport solve(const CscMatrix& k, const Eigen::VectorXd& f, const SolveOptions& options = {});

/// ||f - K d||_2 / ||f||_2 (||f - K d||_2 when f = 0).
double relative_residual(const CscMatrix& k, const Eigen::VectorXd& f, const Eigen::VectorXd& d,
                         unsigned threads = 1);

}  // namespace sfem
