#pragma once
// Small numeric utilities shared across the library: scalar minimization,
// Gauss-Legendre rules, convex hulls, a dense linear solve, and a portable
// uniform generator.

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace homagg {

double dot(const std::vector<double>& a, const std::vector<double>& b);

/// Stable ln(sum_i exp(t_i)).
double log_sum_exp(const std::vector<double>& t);

/// exp(t_i) / sum_j exp(t_j), computed stably.
std::vector<double> softmax(const std::vector<double>& t);

/// Golden-section minimization of a unimodal (or quasi-convex) function on
/// [lo, hi].  Returns the argmin.
double golden_min(const std::function<double(double)>& f, double lo,
                  double hi, int iterations = 160);

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1,1].
/// Computed by Newton iteration on the Legendre recurrence and cached.
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n);

/// Composite Gauss-Legendre integral of f over [a,b].
double integrate_gl(const std::function<double(double)>& f, double a,
                    double b, int panels, int nodes_per_panel);

/// Indices of the upper (concave) hull of the points (x[i], y[i]), x sorted
/// strictly increasing; monotone-chain construction.  lower_hull_indices is
/// the convex counterpart.
std::vector<int> upper_hull_indices(const std::vector<double>& x,
                                    const std::vector<double>& y);
std::vector<int> lower_hull_indices(const std::vector<double>& x,
                                    const std::vector<double>& y);

/// Solves A x = b in place by Gaussian elimination with partial pivoting.
/// Returns false when the matrix is numerically singular.
bool solve_dense(std::vector<std::vector<double>>& A, std::vector<double>& b);

/// Projects y onto the probability simplex (Euclidean projection).
std::vector<double> project_simplex(const std::vector<double>& y);

/// Deterministic uniform draw in (0,1) from a 64-bit engine state; the
/// mapping is fixed here rather than delegated to std distributions so that
/// seeded runs are bit-reproducible across standard libraries.
template <class Engine>
double uniform01(Engine& eng) {
  // 53 random mantissa bits; result lies in (0,1).
  return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace homagg
