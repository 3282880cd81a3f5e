#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "vanet/graph_metrics.hpp"

namespace vanet {

enum class FitModel { gaussian, power, log, powerlaw };

inline const char* fit_model_name(FitModel m) {
  switch (m) {
    case FitModel::gaussian: return "gaussian";
    case FitModel::power: return "power";
    case FitModel::log: return "log";
    case FitModel::powerlaw: return "powerlaw";
  }
  return "?";
}

// Fitted parameters. powerlaw stores gamma in the b slot; the log model
// leaves b at 0.
struct FitResult {
  FitModel model = FitModel::gaussian;
  double a = 0, b = 0, c = 0;
  double r_square = std::numeric_limits<double>::quiet_NaN();
  double sse = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
};

struct XYSeries {
  std::vector<double> xs;
  std::vector<double> ys;
};

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct GaussianModel {
  // f = a * exp(-((x - b)/c)^2)
  bool eval(double x, const std::array<double, 3>& p, double& f, double* g) const {
    const double c = p[2];
    if (std::abs(c) < 1e-12) return false;
    const double t = (x - p[1]) / c;
    const double e = std::exp(-t * t);
    f = p[0] * e;
    if (g) {
      g[0] = e;
      g[1] = p[0] * e * 2.0 * t / c;
      g[2] = p[0] * e * 2.0 * t * t / c;
    }
    return true;
  }
};

struct PowerModel {
  // f = a * x^b + c, x > 0
  bool eval(double x, const std::array<double, 3>& p, double& f, double* g) const {
    const double lx = std::log(x);
    const double e = p[1] * lx;
    if (std::abs(e) > 500.0) return false;
    const double xb = std::exp(e);
    f = p[0] * xb + p[2];
    if (g) {
      g[0] = xb;
      g[1] = p[0] * xb * lx;
      g[2] = 1.0;
    }
    return true;
  }
};

// Solves A x = b for 3x3 A, Gaussian elimination with partial pivoting.
inline bool solve3(std::array<std::array<double, 3>, 3> A, std::array<double, 3> b,
                   std::array<double, 3>& x) {
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    if (std::abs(A[piv][col]) < 1e-300) return false;
    std::swap(A[piv], A[col]);
    std::swap(b[piv], b[col]);
    for (int r = col + 1; r < 3; ++r) {
      const double m = A[r][col] / A[col][col];
      for (int k = col; k < 3; ++k) A[r][k] -= m * A[col][k];
      b[r] -= m * b[col];
    }
  }
  for (int r = 2; r >= 0; --r) {
    double s = b[r];
    for (int k = r + 1; k < 3; ++k) s -= A[r][k] * x[k];
    x[r] = s / A[r][r];
  }
  return std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]);
}

template <typename Model>
inline double sse_at(const Model& m, const std::vector<double>& xs, const std::vector<double>& ys,
                     const std::array<double, 3>& p) {
  double s = 0;
  double f = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!m.eval(xs[i], p, f, nullptr)) return kInf;
    const double r = ys[i] - f;
    s += r * r;
  }
  return std::isfinite(s) ? s : kInf;
}

struct LmOutcome {
  std::array<double, 3> p{};
  double sse = kInf;
  bool converged = false;
};

// Basic Levenberg-Marquardt on 3 parameters with analytic Jacobians.
template <typename Model>
inline LmOutcome levenberg_marquardt(const Model& model, const std::vector<double>& xs,
                                     const std::vector<double>& ys, std::array<double, 3> p,
                                     int max_iter = 400) {
  LmOutcome out;
  out.p = p;
  out.sse = sse_at(model, xs, ys, p);
  if (!std::isfinite(out.sse)) return out;

  double lambda = 1e-3;
  for (int iter = 0; iter < max_iter; ++iter) {
    std::array<std::array<double, 3>, 3> jtj{};
    std::array<double, 3> jtr{};
    double f = 0;
    std::array<double, 3> g{};
    bool ok = true;
    for (std::size_t i = 0; i < xs.size() && ok; ++i) {
      ok = model.eval(xs[i], out.p, f, g.data());
      if (!ok) break;
      const double r = ys[i] - f;
      for (int a = 0; a < 3; ++a) {
        jtr[a] += g[a] * r;
        for (int b = a; b < 3; ++b) jtj[a][b] += g[a] * g[b];
      }
    }
    if (!ok) break;
    jtj[1][0] = jtj[0][1];
    jtj[2][0] = jtj[0][2];
    jtj[2][1] = jtj[1][2];

    bool accepted = false;
    while (lambda < 1e15) {
      auto damped = jtj;
      for (int d = 0; d < 3; ++d) damped[d][d] = jtj[d][d] * (1.0 + lambda) + 1e-300;
      std::array<double, 3> delta{};
      if (solve3(damped, jtr, delta)) {
        const std::array<double, 3> trial{out.p[0] + delta[0], out.p[1] + delta[1],
                                          out.p[2] + delta[2]};
        const double trial_sse = sse_at(model, xs, ys, trial);
        if (trial_sse <= out.sse) {
          const double improvement = out.sse - trial_sse;
          double step = 0;
          double scale = 1.0;
          for (int d = 0; d < 3; ++d) {
            step = std::max(step, std::abs(delta[d]));
            scale = std::max(scale, std::abs(out.p[d]));
          }
          out.p = trial;
          out.sse = trial_sse;
          lambda = std::max(lambda * 0.3, 1e-12);
          accepted = true;
          if (improvement <= 1e-15 * (out.sse + 1e-300) || step <= 1e-14 * scale) {
            out.converged = true;
            return out;
          }
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // no descent direction left at any damping: treat as converged plateau
      out.converged = true;
      return out;
    }
  }
  return out;
}

inline double sst_of(const std::vector<double>& ys) {
  double mean = 0;
  for (double y : ys) mean += y;
  mean /= static_cast<double>(ys.size());
  double sst = 0;
  for (double y : ys) sst += (y - mean) * (y - mean);
  return sst;
}

inline double r_square_of(double sse, double sst) {
  if (sst <= 0) return std::numeric_limits<double>::quiet_NaN();
  return 1.0 - sse / sst;
}

// 2x2 linear LS for y ~ a*t + c. Returns false when t has no spread.
inline bool linear_ls(const std::vector<double>& ts, const std::vector<double>& ys, double& a,
                      double& c) {
  const double n = static_cast<double>(ts.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    st += ts[i];
    sy += ys[i];
    stt += ts[i] * ts[i];
    sty += ts[i] * ys[i];
  }
  const double det = n * stt - st * st;
  if (std::abs(det) < 1e-12 * (1.0 + stt) * n) return false;
  a = (n * sty - st * sy) / det;
  c = (sy - a * st) / n;
  return true;
}

}  // namespace detail

// Gaussian fit of P(k) = a*exp(-((k-b)/c)^2) over the given points (the
// model is only valid for k >= 0, so negative-x points are dropped), LM
// with a fixed 27-point start grid (a from the data peak, b from the x
// support, c from the x spread).
inline FitResult fit_gaussian(const XYSeries& series) {
  XYSeries kept;
  for (std::size_t i = 0; i < series.xs.size() && i < series.ys.size(); ++i) {
    if (series.xs[i] >= 0) {
      kept.xs.push_back(series.xs[i]);
      kept.ys.push_back(series.ys[i]);
    }
  }
  const auto& xs = kept.xs;
  const auto& ys = kept.ys;
  if (series.xs.size() != series.ys.size() || xs.size() < 3)
    throw std::invalid_argument("gaussian fit needs >= 3 points with k >= 0");
  double xmin = xs[0], xmax = xs[0], xmean = 0, ymax = ys[0];
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xmin = std::min(xmin, xs[i]);
    xmax = std::max(xmax, xs[i]);
    xmean += xs[i];
    ymax = std::max(ymax, ys[i]);
  }
  xmean /= static_cast<double>(xs.size());
  if (xmin == xmax) throw std::invalid_argument("gaussian fit needs distinct x values");
  if (ymax <= 0) ymax = 1e-9;
  const double spread = xmax - xmin;

  detail::LmOutcome best;
  const double a_grid[3] = {ymax / 2, ymax, 2 * ymax};
  const double b_grid[3] = {xmin, xmean, xmax};
  const double c_grid[3] = {spread / 4, spread / 2, spread};
  for (double a0 : a_grid)
    for (double b0 : b_grid)
      for (double c0 : c_grid) {
        auto out = detail::levenberg_marquardt(detail::GaussianModel{}, xs, ys, {a0, b0, c0});
        if (out.sse < best.sse) best = out;
      }

  FitResult r;
  r.model = FitModel::gaussian;
  r.a = best.p[0];
  r.b = best.p[1];
  r.c = std::abs(best.p[2]);  // the model depends on c^2 only
  r.sse = best.sse;
  r.r_square = detail::r_square_of(best.sse, detail::sst_of(ys));
  r.converged = best.converged;
  return r;
}

inline XYSeries to_series(const DegreeHistogram& hist) {
  XYSeries s;
  for (const auto& [k, p] : hist.probs) {
    s.xs.push_back(static_cast<double>(k));
    s.ys.push_back(p);
  }
  return s;
}

inline FitResult fit_gaussian(const DegreeHistogram& hist) { return fit_gaussian(to_series(hist)); }

// Power fit y = a*x^b + c. Starts profile the exponent over a fixed grid
// with (a, c) solved linearly, which also picks the sign of a; the 27-grid
// used for the Gaussian would seed b with x values and diverge.
inline FitResult fit_power(const XYSeries& series) {
  const auto& xs = series.xs;
  const auto& ys = series.ys;
  if (xs.size() != ys.size() || xs.size() < 3)
    throw std::invalid_argument("power fit needs >= 3 points");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] <= 0) throw std::invalid_argument("power fit needs x > 0");
    if (i > 0 && xs[i] <= xs[i - 1])
      throw std::invalid_argument("power fit needs strictly increasing x");
  }

  detail::LmOutcome best;
  const double b_grid[11] = {-3, -2, -1, -0.5, -0.25, 0.25, 0.5, 1, 1.5, 2, 3};
  std::vector<double> ts(xs.size());
  for (double b0 : b_grid) {
    bool ok = true;
    for (std::size_t i = 0; i < xs.size() && ok; ++i) {
      const double e = b0 * std::log(xs[i]);
      ok = std::abs(e) < 300.0;
      ts[i] = std::exp(e);
    }
    if (!ok) continue;
    double a0 = 1, c0 = 0;
    if (!detail::linear_ls(ts, ys, a0, c0)) continue;
    auto out = detail::levenberg_marquardt(detail::PowerModel{}, xs, ys, {a0, b0, c0});
    if (out.sse < best.sse) best = out;
  }

  FitResult r;
  r.model = FitModel::power;
  r.a = best.p[0];
  r.b = best.p[1];
  r.c = best.p[2];
  r.sse = best.sse;
  r.r_square = detail::r_square_of(best.sse, detail::sst_of(ys));
  r.converged = best.converged;
  return r;
}

// Logarithmic fit y = a*log(x) + c, closed-form linear least squares.
inline FitResult fit_log(const XYSeries& series) {
  const auto& xs = series.xs;
  const auto& ys = series.ys;
  if (xs.size() != ys.size() || xs.size() < 3)
    throw std::invalid_argument("log fit needs >= 3 points");
  std::vector<double> ts(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] <= 0) throw std::invalid_argument("log fit needs x > 0");
    if (i > 0 && xs[i] <= xs[i - 1]) throw std::invalid_argument("log fit needs strictly increasing x");
    ts[i] = std::log(xs[i]);
  }
  FitResult r;
  r.model = FitModel::log;
  r.b = 0;
  if (!detail::linear_ls(ts, ys, r.a, r.c)) {
    r.a = 0;
    double mean = 0;
    for (double y : ys) mean += y;
    r.c = mean / static_cast<double>(ys.size());
  }
  double sse = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double res = ys[i] - (r.a * ts[i] + r.c);
    sse += res * res;
  }
  r.sse = sse;
  r.r_square = detail::r_square_of(sse, detail::sst_of(ys));
  r.converged = true;
  return r;
}

// Power-law fit P(k) = a*k^(-gamma) by linear LS in log-log space over
// k >= 1; SSE and R^2 are reported in the original space so the result is
// comparable with the Gaussian fit.
inline FitResult fit_powerlaw(const DegreeHistogram& hist) {
  std::vector<double> lk, lp, ks, ps;
  for (const auto& [k, p] : hist.probs) {
    if (k >= 1 && p > 0) {
      lk.push_back(std::log(static_cast<double>(k)));
      lp.push_back(std::log(p));
      ks.push_back(static_cast<double>(k));
      ps.push_back(p);
    }
  }
  if (ks.size() < 3) throw std::invalid_argument("power-law fit needs >= 3 usable points");
  FitResult r;
  r.model = FitModel::powerlaw;
  double slope = 0, intercept = 0;
  if (!detail::linear_ls(lk, lp, slope, intercept))
    throw std::invalid_argument("power-law fit needs distinct degrees");
  r.a = std::exp(intercept);
  r.b = -slope;  // gamma
  r.c = 0;
  double sse = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double res = ps[i] - r.a * std::pow(ks[i], -r.b);
    sse += res * res;
  }
  r.sse = sse;
  r.r_square = detail::r_square_of(sse, detail::sst_of(ps));
  r.converged = true;
  return r;
}

struct TopologyVerdict {
  bool scale_free = false;
  bool small_world_indicated = false;
};

// Pure R^2 comparisons; the small-world tie goes to the log fit.
inline TopologyVerdict classify_topology(const FitResult& degree_gauss,
                                         const FitResult& degree_powerlaw,
                                         const FitResult& aspl_log, const FitResult& aspl_power) {
  TopologyVerdict v;
  v.scale_free = degree_powerlaw.r_square > degree_gauss.r_square;
  v.small_world_indicated = aspl_log.r_square >= aspl_power.r_square;
  return v;
}

// CSV row in Table II/III column order.
inline std::string fit_csv_row(const FitResult& f) {
  std::string out = fit_model_name(f.model);
  out += ',';
  out += detail::fmt_g(f.a);
  out += ',';
  out += detail::fmt_g(f.b);
  out += ',';
  out += detail::fmt_g(f.c);
  out += ',';
  out += detail::fmt_g(f.r_square);
  out += ',';
  out += detail::fmt_g(f.sse);
  out += ',';
  out += f.converged ? '1' : '0';
  return out;
}

}  // namespace vanet
