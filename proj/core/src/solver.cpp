#include "sfem/solver.hpp"

#include <chrono>
#include <cmath>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "sfem/parallel.hpp"

namespace sfem {

namespace {

using Clock = std::chrono::steady_clock;

// Reductions are split into fixed-size blocks whose partial sums are added in
// block order, so dot products do not depend on the thread count.
constexpr std::size_t kReduceBlock = 4096;

double dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b, unsigned threads) {
  const std::size_t n = static_cast<std::size_t>(a.size());
  const std::size_t blocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(blocks, 0.0);
  parallel_for(blocks, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t blk = begin; blk < end; ++blk) {
      const std::size_t lo = blk * kReduceBlock;
      const std::size_t hi = std::min(n, lo + kReduceBlock);
      double s = 0.0;
      for (std::size_t i = lo; i < hi; ++i) s += a(i) * b(i);
      partial[blk] = s;
    }
  });
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

template <class Fn>
void for_each_index(Eigen::Index n, unsigned threads, Fn&& fn) {
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) fn(static_cast<Eigen::Index>(i));
  });
}

SolveReport solve_pcg(const CscMatrix& k, const Eigen::VectorXd& f, const SolveOptions& opt) {
  const Eigen::Index n = k.dimension;
  const unsigned threads = opt.threads;
  SolveReport rep;
  rep.method = SolverMethod::PCG;
  rep.displacements = Eigen::VectorXd::Zero(n);

  const double fnorm = std::sqrt(dot(f, f, threads));
  if (fnorm == 0.0) {
    rep.converged = true;
    return rep;
  }

  const Eigen::VectorXd diag = k.diagonal();
  Eigen::VectorXd inv_diag(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(diag(i) > 0.0)) {
      throw SolverError("Jacobi preconditioner needs a positive diagonal (dof " + std::to_string(i) + ")", rep);
    }
    inv_diag(i) = 1.0 / diag(i);
  }

  const std::size_t max_it = opt.max_iterations > 0 ? opt.max_iterations
                                                    : default_max_iterations(static_cast<std::size_t>(n));
  Eigen::VectorXd& x = rep.displacements;
  Eigen::VectorXd r = f;
  Eigen::VectorXd z(n), p(n), q(n);
  for_each_index(n, threads, [&](Eigen::Index i) { z(i) = inv_diag(i) * r(i); });
  p = z;
  double rz = dot(r, z, threads);
  double best_res = 1.0;
  Eigen::VectorXd best_x = x;

  for (std::size_t it = 1; it <= max_it; ++it) {
    k.multiply_symmetric(p, q, threads);
    const double pq = dot(p, q, threads);
    if (!std::isfinite(pq) || pq <= 0.0) {
      rep.iterations = it;
      rep.displacements = best_x;
      rep.relative_residual = best_res;
      throw SolverError("conjugate gradient broke down (p^T K p = " + std::to_string(pq) +
                            "); is the system constrained?", rep);
    }
    const double alpha = rz / pq;
    for_each_index(n, threads, [&](Eigen::Index i) {
      x(i) += alpha * p(i);
      r(i) -= alpha * q(i);
    });
    rep.iterations = it;
    double res = std::sqrt(dot(r, r, threads)) / fnorm;
    if (!std::isfinite(res)) {
      rep.displacements = best_x;
      rep.relative_residual = best_res;
      throw SolverError("non-finite residual in conjugate gradient", rep);
    }
    if (res <= opt.rel_tolerance) {
      // Confirm against the true residual; restart from it if the recursive
      // one has drifted.
      k.multiply_symmetric(x, q, threads);
      for_each_index(n, threads, [&](Eigen::Index i) { r(i) = f(i) - q(i); });
      res = std::sqrt(dot(r, r, threads)) / fnorm;
      if (res <= opt.rel_tolerance) {
        rep.converged = true;
        rep.relative_residual = res;
        return rep;
      }
      for_each_index(n, threads, [&](Eigen::Index i) { z(i) = inv_diag(i) * r(i); });
      p = z;
      rz = dot(r, z, threads);
      if (res < best_res) {
        best_res = res;
        best_x = x;
      }
      continue;
    }
    if (res < best_res) {
      best_res = res;
      best_x = x;
    }
    for_each_index(n, threads, [&](Eigen::Index i) { z(i) = inv_diag(i) * r(i); });
    const double rz_next = dot(r, z, threads);
    const double beta = rz_next / rz;
    rz = rz_next;
    for_each_index(n, threads, [&](Eigen::Index i) { p(i) = z(i) + beta * p(i); });
  }
  rep.displacements = best_x;
  rep.relative_residual = relative_residual(k, f, best_x, threads);
  throw SolverError("conjugate gradient reached the iteration cap (" + std::to_string(max_it) +
                        ") at relative residual " + std::to_string(rep.relative_residual), rep);
}

SolveReport solve_direct(const CscMatrix& k, const Eigen::VectorXd& f, const SolveOptions& opt) {
  using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  SpMat a(k.dimension, k.dimension);
  std::vector<Eigen::Triplet<double, int>> entries;
  entries.reserve(k.nnz() / 2 + k.dimension);
  for (DofIndex c = 0; c < k.dimension; ++c)
    for (std::int64_t p = k.col_ptr[c]; p < k.col_ptr[c + 1]; ++p)
      if (k.row_idx[p] >= c) entries.emplace_back(k.row_idx[p], c, k.values[p]);
  a.setFromTriplets(entries.begin(), entries.end());

  SolveReport rep;
  rep.method = SolverMethod::Direct;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt(a);
  if (ldlt.info() != Eigen::Success) {
    rep.displacements = Eigen::VectorXd::Zero(k.dimension);
    rep.relative_residual = 1.0;
    throw SolverError("sparse LDL^T factorization failed (matrix not positive definite?)", rep);
  }
  rep.displacements = ldlt.solve(f);
  rep.relative_residual = relative_residual(k, f, rep.displacements, opt.threads);
  Eigen::VectorXd kx(k.dimension);
  for (int step = 0; step < 5 && rep.relative_residual > opt.rel_tolerance; ++step) {
    k.multiply_symmetric(rep.displacements, kx, opt.threads);
    rep.displacements += ldlt.solve(f - kx);
    rep.relative_residual = relative_residual(k, f, rep.displacements, opt.threads);
    rep.iterations = static_cast<std::size_t>(step + 1);
  }
  if (!rep.displacements.allFinite()) throw SolverError("direct solve produced non-finite values", rep);
  if (rep.relative_residual > opt.rel_tolerance) {
    throw SolverError("direct solve stalled at relative residual " + std::to_string(rep.relative_residual), rep);
  }
  rep.converged = true;
  return rep;
}

}  // namespace

SolverMethod parse_solver_method(const std::string& name) {
  if (name == "pcg") return SolverMethod::PCG;
  if (name == "direct") return SolverMethod::Direct;
  throw ConfigError("unknown solver method '" + name + "' (pcg|direct)");
}

std::string to_string(SolverMethod method) { return method == SolverMethod::PCG ? "pcg" : "direct"; }

std::size_t default_max_iterations(std::size_t dofs) {
  const auto scaled = static_cast<std::size_t>(std::ceil(20.0 * std::sqrt(static_cast<double>(dofs))));
  return std::max<std::size_t>(1000, scaled);
}

SolverError::SolverError(const std::string& what, SolveReport best)
    : Error(what), best_(std::move(best)) {}

double relative_residual(const CscMatrix& k, const Eigen::VectorXd& f, const Eigen::VectorXd& d,
                         unsigned threads) {
  Eigen::VectorXd kd;
  k.multiply_symmetric(d, kd, threads);
  const Eigen::VectorXd r = f - kd;
  const double fn = std::sqrt(dot(f, f, threads));
  const double rn = std::sqrt(dot(r, r, threads));
  return fn > 0.0 ? rn / fn : rn;
}

SolveReport solve(const CscMatrix& k, const Eigen::VectorXd& f, const SolveOptions& options) {
  if (!(options.rel_tolerance > 0.0 && options.rel_tolerance < 1.0)) {
    throw ConfigError("solver tolerance must lie in (0, 1)");
  }
  if (f.size() != k.dimension) throw ConfigError("load vector size does not match the matrix");
  const auto t0 = Clock::now();
  SolveReport rep = options.method == SolverMethod::PCG ? solve_pcg(k, f, options) : solve_direct(k, f, options);
  rep.timings.solve = std::chrono::duration<double>(Clock::now() - t0).count();
  return rep;
}

}  // namespace sfem
