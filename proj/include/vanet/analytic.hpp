#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include "vanet/fitting.hpp"
#include "vanet/rng.hpp"

namespace vanet {
namespace detail {

// Gauss-Kronrod 7-15 pair (QUADPACK abscissae/weights).
inline constexpr double kGk15X[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kGk15Wk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGk15Wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
inline void gk15(const F& f, double a, double b, double& result, double& err) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(mid);
  double kronrod = fc * kGk15Wk[7];
  double gauss = fc * kGk15Wg[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kGk15X[i];
    const double fsum = f(mid - dx) + f(mid + dx);
    kronrod += fsum * kGk15Wk[i];
    if (i % 2 == 1) gauss += fsum * kGk15Wg[i / 2];
  }
  result = kronrod * half;
  err = std::abs((kronrod - gauss) * half);
}

template <typename F>
inline double adaptive_quad(const F& f, double a, double b, double tol, int depth = 0) {
  double result = 0, err = 0;
  gk15(f, a, b, result, err);
  if (err <= tol || depth >= 48) return result;
  const double mid = 0.5 * (a + b);
  return adaptive_quad(f, a, mid, tol * 0.5, depth + 1) +
         adaptive_quad(f, mid, b, tol * 0.5, depth + 1);
}

}  // namespace detail

// Adaptive Gauss-Kronrod quadrature of f over [a, b].
template <typename F>
inline double integrate(const F& f, double a, double b, double tol = 1e-9) {
  return detail::adaptive_quad(f, a, b, tol);
}

// Probability that two vehicles within radius r of a common vehicle in an
// open 2-D area are within r of each other: the lens-overlap integral. The
// value is scale-free in r.
inline double clustering_2d(double r = 1.0) {
  if (r <= 0) throw std::invalid_argument("radius must be > 0");
  const double pi = 3.14159265358979323846;
  auto integrand = [r, pi](double x) {
    const double lens = 2.0 * r * r * std::acos(x / (2.0 * r)) -
                        (x / 2.0) * std::sqrt(4.0 * r * r - x * x);
    return (2.0 * x / (r * r)) * lens / (pi * r * r);
  };
  return integrate(integrand, 0.0, r, 1e-9 * r);
}

// 1-D analogue: closed form 3/4.
inline double clustering_1d() { return 0.75; }

// Quadrature cross-check of the 1-D integrand, for tests against the
// closed form.
inline double clustering_1d_quadrature(double r = 1.0) {
  if (r <= 0) throw std::invalid_argument("radius must be > 0");
  auto integrand = [r](double x) { return (1.0 / r) * (2.0 * r - x) / (2.0 * r); };
  return integrate(integrand, 0.0, r, 1e-13 * r);
}

// Direct evaluation of the truncated-Gaussian degree model, valid for k >= 0.
inline double gaussian_model_eval(double k, double a, double b, double c) {
  if (k < 0) throw std::domain_error("degree model is only valid for k >= 0");
  if (c == 0) throw std::invalid_argument("c must be nonzero");
  const double t = (k - b) / c;
  return a * std::exp(-t * t);
}

// P(degree > threshold) under the fitted Gaussian model, renormalized over
// integer k >= 0 (tail cut where its mass drops below 1e-12 of the total).
inline double prob_degree_above(int threshold, double a, double b, double c) {
  if (c == 0) throw std::invalid_argument("c must be nonzero");
  const double width = std::abs(c);
  const int k_max =
      static_cast<int>(std::ceil(std::max(0.0, b) + width * 8.0)) + 1;  // e^-64 << 1e-12
  double total = 0;
  double above = 0;
  for (int k = 0; k <= k_max; ++k) {
    const double t = (k - b) / c;
    const double p = a * std::exp(-t * t);
    total += p;
    if (k > threshold) above += p;
  }
  if (total <= 0) throw std::domain_error("degree model has no mass on k >= 0");
  return above / total;
}

inline double prob_degree_above(int threshold, const FitResult& fit) {
  if (fit.model != FitModel::gaussian)
    throw std::invalid_argument("prob_degree_above expects a gaussian fit");
  return prob_degree_above(threshold, fit.a, fit.b, fit.c);
}

// Monte-Carlo cross-checks of the clustering integrals: draw two points
// uniformly within unit range of a common point and test their distance.
inline double mc_clustering_2d(long samples, Rng& rng) {
  if (samples <= 0) throw std::invalid_argument("samples must be > 0");
  const double pi = 3.14159265358979323846;
  long hits = 0;
  for (long i = 0; i < samples; ++i) {
    const double r1 = std::sqrt(rng.next_double());
    const double t1 = rng.uniform(0.0, 2.0 * pi);
    const double r2 = std::sqrt(rng.next_double());
    const double t2 = rng.uniform(0.0, 2.0 * pi);
    const double dx = r1 * std::cos(t1) - r2 * std::cos(t2);
    const double dy = r1 * std::sin(t1) - r2 * std::sin(t2);
    if (dx * dx + dy * dy <= 1.0) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

inline double mc_clustering_1d(long samples, Rng& rng) {
  if (samples <= 0) throw std::invalid_argument("samples must be > 0");
  long hits = 0;
  for (long i = 0; i < samples; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    const double y = rng.uniform(-1.0, 1.0);
    if (std::abs(x - y) <= 1.0) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

}  // namespace vanet
