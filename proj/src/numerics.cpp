#include "homagg/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace homagg {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double log_sum_exp(const std::vector<double>& t) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : t) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0;
  for (double v : t) s += std::exp(v - m);
  return m + std::log(s);
}

std::vector<double> softmax(const std::vector<double>& t) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : t) m = std::max(m, v);
  std::vector<double> out(t.size());
  double s = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    out[i] = std::exp(t[i] - m);
    s += out[i];
  }
  for (double& v : out) v /= s;
  return out;
}

double golden_min(const std::function<double(double)>& f, double lo,
                  double hi, int iterations) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);  // 0.618...
  double a = lo, b = hi;
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < iterations && (b - a) > 1e-15 * (1 + std::abs(a) + std::abs(b)); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  std::vector<double> x(n), w(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Initial guess for the i-th root, then Newton on the recurrence.
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double dz = -p1 / pp;
      z += dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
  return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

double integrate_gl(const std::function<double(double)>& f, double a,
                    double b, int panels, int nodes_per_panel) {
  const auto& [x, w] = gauss_legendre(nodes_per_panel);
  const double h = (b - a) / panels;
  double total = 0;
  for (int k = 0; k < panels; ++k) {
    const double mid = a + (k + 0.5) * h;
    for (int j = 0; j < nodes_per_panel; ++j)
      total += 0.5 * h * w[j] * f(mid + 0.5 * h * x[j]);
  }
  return total;
}

namespace {

// cross(o->a, o->b) sign; > 0 means a left turn.
double cross(double ox, double oy, double ax, double ay, double bx, double by) {
  return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox);
}

std::vector<int> hull_indices(const std::vector<double>& x,
                              const std::vector<double>& y, bool upper) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("hull: need at least two points");
  std::vector<int> h;
  for (int i = 0; i < static_cast<int>(x.size()); ++i) {
    while (h.size() >= 2) {
      int a = h[h.size() - 2], b = h[h.size() - 1];
      double c = cross(x[a], y[a], x[b], y[b], x[i], y[i]);
      // Upper hull keeps right turns only, lower hull left turns.
      if (upper ? (c >= 0) : (c <= 0))
        h.pop_back();
      else
        break;
    }
    h.push_back(i);
  }
  return h;
}

}  // namespace

std::vector<int> upper_hull_indices(const std::vector<double>& x,
                                    const std::vector<double>& y) {
  return hull_indices(x, y, true);
}

std::vector<int> lower_hull_indices(const std::vector<double>& x,
                                    const std::vector<double>& y) {
  return hull_indices(x, y, false);
}

bool solve_dense(std::vector<std::vector<double>>& A, std::vector<double>& b) {
  const int n = static_cast<int>(A.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    if (std::abs(A[piv][col]) < 1e-300) return false;
    std::swap(A[piv], A[col]);
    std::swap(b[piv], b[col]);
    for (int r = col + 1; r < n; ++r) {
      const double f = A[r][col] / A[col][col];
      if (f == 0) continue;
      for (int c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  for (int col = n - 1; col >= 0; --col) {
    double s = b[col];
    for (int c = col + 1; c < n; ++c) s -= A[col][c] * b[c];
    b[col] = s / A[col][col];
  }
  return true;
}

std::vector<double> project_simplex(const std::vector<double>& y) {
  // Euclidean projection onto {x >= 0, sum x = 1}.
  std::vector<double> u = y;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0, theta = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0) theta = t;
  }
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = std::max(0.0, y[i] - theta);
  return out;
}

}  // namespace homagg
