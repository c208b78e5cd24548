#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>

#include "crm/errors.hpp"
#include "crm/special_math.hpp"

namespace crm::math {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

void check_finite(double fx, double x) {
  if (!std::isfinite(fx)) throw DomainError("quadrature: integrand is not finite at x=" + std::to_string(x));
}

// One 21-point Kronrod panel with the embedded 10-point Gauss estimate;
// error heuristic as in QUADPACK's qk21.
Segment gk21(const RealFunction& f, double a, double b, int& evals) {
  static const auto& xk = boost::math::quadrature::gauss_kronrod<double, 21>::abscissa();
  static const auto& wk = boost::math::quadrature::gauss_kronrod<double, 21>::weights();
  static const auto& wg = boost::math::quadrature::gauss<double, 10>::weights();
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv1[11], fv2[11];
  const double fc = f(c);
  check_finite(fc, c);
  double resk = wk[0] * fc, resg = 0.0, resabs = std::fabs(resk);
  for (int j = 1; j <= 10; ++j) {
    const double dx = h * xk[j];
    const double f1 = f(c - dx), f2 = f(c + dx);
    check_finite(f1, c - dx);
    check_finite(f2, c + dx);
    fv1[j] = f1;
    fv2[j] = f2;
    resk += wk[j] * (f1 + f2);
    resabs += wk[j] * (std::fabs(f1) + std::fabs(f2));
    if (j % 2 == 1) resg += wg[(j - 1) / 2] * (f1 + f2);
  }
  evals += 21;
  const double mean = 0.5 * resk;
  double resasc = wk[0] * std::fabs(fc - mean);
  for (int j = 1; j <= 10; ++j) resasc += wk[j] * (std::fabs(fv1[j] - mean) + std::fabs(fv2[j] - mean));
  const double ah = std::fabs(h);
  double err = std::fabs((resk - resg) * h);
  resasc *= ah;
  resabs *= ah;
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps)) err = std::max(50.0 * kEps * resabs, err);
  return {a, b, resk * h, err};
}

// Tanh-sinh core on (a, b). g receives the node x together with its exact
// distances to both endpoints so mapped integrands can avoid cancellation.
template <class G>
QuadratureResult tanh_sinh(G&& g, double a, double b, const Tolerance& tol) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  constexpr int max_level = 11;
  const double len = b - a;
  // Nodes closer than len * 1e-120 to an endpoint are dropped; the neglected
  // mass of an integrable w^{-s} singularity is then O(1e-120^{1-s}).
  const double t_max = std::asinh(std::log(1e120) / std::numbers::pi);

  QuadratureResult out;
  auto term = [&](double t) {
    const double v = half_pi * std::sinh(t);
    const double e = std::exp(-2.0 * std::fabs(v));
    const double dist = len * e / (1.0 + e);
    const double weight = len * half_pi * std::cosh(t) * 2.0 * e / ((1.0 + e) * (1.0 + e));
    double x, dl, dr;
    if (t < 0) {
      dl = dist;
      dr = len - dist;
      x = a + dl;
    } else {
      dr = dist;
      dl = len - dist;
      x = b - dr;
    }
    const double fx = g(x, dl, dr);
    ++out.evaluations;
    if (!std::isfinite(fx)) throw DomainError("quadrature: integrand is not finite at x=" + std::to_string(x));
    return weight * fx;
  };

  double h = 1.0;
  double sum = term(0.0);
  for (int j = 1; j * h <= t_max; ++j) sum += term(j * h) + term(-j * h);
  double prev = sum * h;
  double diff = std::numeric_limits<double>::infinity();
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    for (int j = 1; j * h <= t_max; j += 2) sum += term(j * h) + term(-j * h);
    const double est = sum * h;
    diff = std::fabs(est - prev);
    prev = est;
    if (level >= 3 && diff <= std::max(tol.abs, tol.rel * std::fabs(est))) {
      out.value = est;
      out.error = diff;
      out.converged = true;
      return out;
    }
  }
  out.value = prev;
  out.error = diff;
  out.converged = false;
  return out;
}

}  // namespace

QuadratureResult integrate_interval(const RealFunction& f, double a, double b, const Tolerance& tol) {
  tol.validate();
  if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("integrate_interval: limits must be finite");
  if (a == b) return {0.0, 0.0, 0, true};
  if (a > b) {
    auto r = integrate_interval(f, b, a, tol);
    r.value = -r.value;
    return r;
  }
  QuadratureResult out;
  const std::size_t limit = std::max<std::size_t>(50, 10 * static_cast<std::size_t>(tol.max_iter));
  std::priority_queue<Segment> heap;
  Segment first = gk21(f, a, b, out.evaluations);
  double total = first.value, total_err = first.error;
  heap.push(first);
  auto target = [&] { return std::max(tol.abs, tol.rel * std::fabs(total)); };
  while (total_err > target() && heap.size() < limit) {
    Segment s = heap.top();
    const double mid = 0.5 * (s.a + s.b);
    if (mid <= s.a || mid >= s.b || (s.b - s.a) < 4.0 * kEps * std::max(std::fabs(s.a), std::fabs(s.b))) break;
    heap.pop();
    Segment l = gk21(f, s.a, mid, out.evaluations);
    Segment r = gk21(f, mid, s.b, out.evaluations);
    total += l.value + r.value - s.value;
    total_err += l.error + r.error - s.error;
    heap.push(l);
    heap.push(r);
  }
  // Re-sum to shed accumulated rounding in the running totals.
  total = 0.0;
  total_err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    total_err += heap.top().error;
    heap.pop();
  }
  out.value = total;
  out.error = total_err;
  out.converged = total_err <= std::max(tol.abs, tol.rel * std::fabs(total));
  return out;
}

QuadratureResult integrate_singular(const RealFunction& f, double a, double b, const Tolerance& tol) {
  tol.validate();
  if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("integrate_singular: limits must be finite");
  if (a == b) return {0.0, 0.0, 0, true};
  if (a > b) {
    auto r = integrate_singular(f, b, a, tol);
    r.value = -r.value;
    return r;
  }
  // Nodes that round onto an endpoint carry no resolvable mass in double
  // precision and may hit the singularity itself; they are dropped.
  return tanh_sinh([&](double x, double, double) { return x <= a || x >= b ? 0.0 : f(x); }, a, b, tol);
}

QuadratureResult integrate_semiaxis(const RealFunction& f, const Tolerance& tol, const SemiaxisOptions& opts) {
  tol.validate();
  if (!(opts.scale > 0.0) || !std::isfinite(opts.scale)) throw DomainError("integrate_semiaxis: scale must be > 0");
  std::vector<double> cuts;
  for (double b : opts.breakpoints)
    if (b > 0.0 && std::isfinite(b)) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  // With finite pieces present, also cut at the scale so that mass near
  // 0 and the long stretch up to the first cut are handled separately.
  if (!cuts.empty() && opts.scale < cuts.front()) cuts.insert(cuts.begin(), opts.scale);
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  QuadratureResult out{0.0, 0.0, 0, true};
  auto accumulate = [&](const QuadratureResult& r) {
    out.value += r.value;
    out.error += r.error;
    out.evaluations += r.evaluations;
    out.converged = out.converged && r.converged;
  };
  double lo = 0.0;
  for (double c : cuts) {
    if (lo > 0.0 && c > 1e3 * lo) {
      // Piece spanning many decades: integrate in log w.
      auto logf = [&](double v) {
        const double w = std::exp(v);
        return f(w) * w;
      };
      accumulate(integrate_singular(logf, std::log(lo), std::log(c), tol));
    } else {
      accumulate(integrate_singular(f, lo, c, tol));
    }
    lo = c;
  }
  // Tail piece [lo, inf): w = lo + s u / (1 - u), dw = s / (1-u)^2 du.
  const double s = opts.scale;
  auto mapped = [&](double, double u, double one_minus_u) {
    const double w = lo + s * (u / one_minus_u);
    if (std::isinf(w)) return 0.0;
    return f(w) * s / (one_minus_u * one_minus_u);
  };
  accumulate(tanh_sinh(mapped, 0.0, 1.0, tol));
  return out;
}

double invert_increasing(const RealFunction& g, double y, double guess, const Tolerance& tol) {
  tol.validate();
  if (!(guess > 0.0) || !std::isfinite(guess)) throw DomainError("invert_increasing: guess must be > 0");
  if (!std::isfinite(y)) throw DomainError("invert_increasing: target must be finite");
  double lo = guess / 2.0, hi = 2.0 * guess;
  double glo = g(lo), ghi = g(hi);
  int expansions = 0;
  while (glo > y) {
    if (++expansions > tol.max_iter || lo < 1e-300)
      throw ConvergenceError("invert_increasing: could not bracket target from below", lo, hi - lo);
    hi = lo;
    ghi = glo;
    lo /= 4.0;
    glo = g(lo);
  }
  while (ghi < y) {
    if (++expansions > tol.max_iter || hi > 1e300)
      throw ConvergenceError("invert_increasing: could not bracket target from above", hi, hi - lo);
    lo = hi;
    glo = ghi;
    hi *= 4.0;
    ghi = g(hi);
  }
  const double ftol = 0.5 * tol.rel * std::fabs(y) + tol.abs;
  if (std::fabs(glo - y) <= ftol) return lo;
  if (std::fabs(ghi - y) <= ftol) return hi;

  // Brent's method on s = log x.
  double a = std::log(lo), b = std::log(hi);
  double fa = glo - y, fb = ghi - y;
  double c = b, fc = fb, d = b - a, e = d;
  const int max_steps = 200 + tol.max_iter;
  for (int it = 0; it < max_steps; ++it) {
    if ((fb > 0 && fc > 0) || (fb < 0 && fc < 0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * kEps * std::fabs(b) + 1e-17;
    const double xm = 0.5 * (c - b);
    if (std::fabs(xm) <= tol1 || std::fabs(fb) <= ftol || fb == 0.0) return std::exp(b);
    if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0) q = -q;
      p = std::fabs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::fabs(tol1 * q), std::fabs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::fabs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
    fb = g(std::exp(b)) - y;
  }
  throw ConvergenceError("invert_increasing: root refinement did not converge", std::exp(b), std::fabs(c - b));
}

}  // namespace crm::math
