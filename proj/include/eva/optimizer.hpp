#pragma once

// Derivative-free Nelder-Mead simplex search with restarts.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <Eigen/Core>

namespace eva {

template <int Dim>
struct SimplexResult {
  Eigen::Matrix<double, Dim, 1> x;
  double value = 0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;   // last run met the objective tolerance
  int restarts_used = 0;
};

/// One simplex run. Stops when the spread of objective values across the
/// simplex falls below rel_tol * (|f_best| + rel_tol).
template <int Dim, typename Objective>
SimplexResult<Dim> nelder_mead(Objective&& f, const Eigen::Matrix<double, Dim, 1>& x0,
                               const Eigen::Matrix<double, Dim, 1>& steps, int max_iterations,
                               double rel_tol) {
  using Point = Eigen::Matrix<double, Dim, 1>;
  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;

  std::array<Point, Dim + 1> pts;
  std::array<double, Dim + 1> vals;
  SimplexResult<Dim> res;
  pts[0] = x0;
  for (int i = 0; i < Dim; ++i) {
    pts[i + 1] = x0;
    pts[i + 1][i] += steps[i];
  }
  for (int i = 0; i <= Dim; ++i) vals[i] = f(pts[i]);
  res.evaluations = Dim + 1;

  std::array<int, Dim + 1> order;
  std::iota(order.begin(), order.end(), 0);
  auto sort_simplex = [&] {
    std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
  };

  int it = 0;
  for (; it < max_iterations; ++it) {
    sort_simplex();
    const int best = order[0];
    const int worst = order[Dim];
    const int second = order[Dim - 1];
    if (std::abs(vals[worst] - vals[best]) <= rel_tol * (std::abs(vals[best]) + rel_tol)) {
      res.converged = true;
      break;
    }

    Point centroid = Point::Zero();
    for (int i = 0; i < Dim; ++i) centroid += pts[order[i]];
    centroid /= Dim;

    const Point xr = centroid + kReflect * (centroid - pts[worst]);
    const double fr = f(xr);
    ++res.evaluations;

    if (fr < vals[best]) {
      const Point xe = centroid + kExpand * (xr - centroid);
      const double fe = f(xe);
      ++res.evaluations;
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }

    // Contraction, outside if the reflected point beat the worst.
    const bool outside = fr < vals[worst];
    const Point xc = outside ? Point(centroid + kContract * (xr - centroid))
                             : Point(centroid + kContract * (pts[worst] - centroid));
    const double fc = f(xc);
    ++res.evaluations;
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }

    for (int i = 1; i <= Dim; ++i) {
      const int idx = order[i];
      pts[idx] = pts[best] + kShrink * (pts[idx] - pts[best]);
      vals[idx] = f(pts[idx]);
      ++res.evaluations;
    }
  }
  sort_simplex();
  res.x = pts[order[0]];
  res.value = vals[order[0]];
  res.iterations = it;
  return res;
}

/// Simplex search followed by up to `restarts` re-inflated searches from the
/// incumbent. Restarting stops early once a restart improves the objective
/// by no more than the relative tolerance.
template <int Dim, typename Objective>
SimplexResult<Dim> nelder_mead_restarts(Objective&& f, const Eigen::Matrix<double, Dim, 1>& x0,
                                        const Eigen::Matrix<double, Dim, 1>& steps,
                                        int max_iterations, double rel_tol, int restarts) {
  SimplexResult<Dim> best = nelder_mead<Dim>(f, x0, steps, max_iterations, rel_tol);
  int evaluations = best.evaluations;
  int used = 0;
  for (int r = 0; r < restarts; ++r) {
    ++used;
    SimplexResult<Dim> next = nelder_mead<Dim>(f, best.x, steps, max_iterations, rel_tol);
    evaluations += next.evaluations;
    const double gain = best.value - next.value;
    const bool settled = gain <= rel_tol * (std::abs(best.value) + rel_tol);
    if (next.value <= best.value) best = next;
    best.converged = next.converged;
    if (settled) break;
  }
  best.evaluations = evaluations;
  best.restarts_used = used;
  return best;
}

}  // namespace eva
