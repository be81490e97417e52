#pragma once

#include <array>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>

namespace bayestomo::quadrature {

struct Result {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
inline constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
Result gauss_kronrod15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kNodes[j];
    const double sum = f(c - dx) + f(c + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  return {kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace detail

/// Globally adaptive G7/K15 integration: the interval with the largest
/// Kronrod-Gauss gap is bisected until the summed gap is below
/// max(abs_tol, rel_tol * |estimate|) or max_intervals is reached. Endpoints
/// are never evaluated, so integrable endpoint singularities are fine.
template <typename F>
Result integrate(F&& f, double a, double b, double rel_tol = 1e-12,
                 double abs_tol = 0.0, std::size_t max_intervals = 4000) {
  struct Piece {
    double a, b;
    Result r;
    bool operator<(const Piece& o) const { return r.error < o.r.error; }
  };
  std::priority_queue<Piece> heap;
  Result total = detail::gauss_kronrod15(f, a, b);
  heap.push({a, b, total});
  while (heap.size() < max_intervals) {
    if (total.error <= std::max(abs_tol, rel_tol * std::abs(total.value))) {
      break;
    }
    const Piece worst = heap.top();
    if (worst.b - worst.a < 1e-15 * std::max(1.0, std::abs(worst.a))) break;
    heap.pop();
    const double m = 0.5 * (worst.a + worst.b);
    const Result left = detail::gauss_kronrod15(f, worst.a, m);
    const Result right = detail::gauss_kronrod15(f, m, worst.b);
    total.value += left.value + right.value - worst.r.value;
    total.error += left.error + right.error - worst.r.error;
    heap.push({worst.a, m, left});
    heap.push({m, worst.b, right});
  }
  // Re-sum to drop the cancellation noise of the running updates.
  Result exact{0.0, 0.0};
  while (!heap.empty()) {
    exact.value += heap.top().r.value;
    exact.error += heap.top().r.error;
    heap.pop();
  }
  return exact;
}

}  // namespace bayestomo::quadrature
