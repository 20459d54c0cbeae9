#include "cutflux/manufactured.hpp"

#include <cmath>
#include <numbers>

#include "cutflux/errors.hpp"

namespace cutflux {
namespace {

// w = c(x) g(y) phi(x, y) S(y) with c(x) = x - c0, phi = x - alpha - s (y - 1/2),
// S = sin(pi y). Holds g and its first two derivatives at y.
struct Profile {
  double c0;  // 0 for phase 1, 1 for phase 2
  bool unit_g;
  double alpha;
  double s;

  std::array<double, 3> g(double y) const {
    if (unit_g) return {1.0, 0.0, 0.0};
    const double xg = alpha + s * (y - 0.5);
    const double d = xg - 1.0;
    return {xg / d, -s / (d * d), 2.0 * s * s / (d * d * d)};
  }

  double value(const Vec2& p) const {
    const double x = p.x(), y = p.y();
    const double phi = x - alpha - s * (y - 0.5);
    return (x - c0) * g(y)[0] * phi * std::sin(std::numbers::pi * y);
  }

  Vec2 gradient(const Vec2& p) const {
    const double x = p.x(), y = p.y(), pi = std::numbers::pi;
    const double phi = x - alpha - s * (y - 0.5);
    const double c = x - c0;
    const auto gy = g(y);
    const double g0 = gy[0], g1 = gy[1];
    const double sn = std::sin(pi * y), cs = pi * std::cos(pi * y);
    const double wx = g0 * sn * (phi + c);
    const double wy = c * (g1 * phi * sn - s * g0 * sn + g0 * phi * cs);
    return {wx, wy};
  }

  double laplacian(const Vec2& p) const {
    const double x = p.x(), y = p.y(), pi = std::numbers::pi;
    const double phi = x - alpha - s * (y - 0.5);
    const double c = x - c0;
    const auto [g0, g1, g2] = g(y);
    const double sn = std::sin(pi * y), cs = pi * std::cos(pi * y), ss = -pi * pi * sn;
    const double wxx = 2.0 * g0 * sn;
    const double wyy = c * (g2 * phi * sn - 2.0 * s * g1 * sn + 2.0 * g1 * phi * cs - 2.0 * s * g0 * cs + g0 * phi * ss);
    return wxx + wyy;
  }
};

}  // namespace

InterfacePolyline ManufacturedCase::interface() const {
  return InterfacePolyline({Vec2(alpha - 0.5 * slope, 0.0), Vec2(alpha + 0.5 * slope, 1.0)});
}

ProblemData ManufacturedCase::problem(double gamma, double beta) const {
  ProblemData data;
  data.k = {k1, k2};
  data.f = f;
  data.gamma = gamma;
  data.beta = beta;
  return data;
}

ManufacturedCase manufactured_family(double k1, double k2, double alpha, double slope) {
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw Error(ErrorKind::invalid_argument, "diffusivities must be positive");
  const double lo = std::min(alpha - 0.5 * slope, alpha + 0.5 * slope);
  const double hi = std::max(alpha - 0.5 * slope, alpha + 0.5 * slope);
  if (!(lo > 0.0 && hi < 1.0)) throw Error(ErrorKind::invalid_argument, "interface must cross the unit square", alpha);
  ManufacturedCase mc;
  mc.k1 = k1;
  mc.k2 = k2;
  mc.alpha = alpha;
  mc.slope = slope;
  const std::array<Profile, kNumPhases> w{Profile{0.0, true, alpha, slope}, Profile{1.0, false, alpha, slope}};
  const std::array<double, kNumPhases> k{k1, k2};
  for (int i = 0; i < kNumPhases; ++i) {
    const Profile p = w[i];
    const double ki = k[i];
    mc.u[i] = [p, ki](const Vec2& x) { return p.value(x) / ki; };
    mc.gradient[i] = [p, ki](const Vec2& x) -> Vec2 { return p.gradient(x) / ki; };
    mc.f[i] = [p](const Vec2& x) { return -p.laplacian(x); };
  }
  return mc;
}

ManufacturedCase manufactured(const std::string& id, double k1, double k2) {
  if (id == "M1") {
    ManufacturedCase mc = manufactured_family(k1, k2, kDefaultAlpha, 0.0);
    mc.id = id;
    return mc;
  }
  if (id == "M2") {
    ManufacturedCase mc = manufactured_family(k1, k2, kDefaultAlpha, kTiltedSlope);
    mc.id = id;
    return mc;
  }
  if (id == "M0") {
    ManufacturedCase mc = manufactured_family(k1, k2, kDefaultAlpha, 0.0);
    mc.id = id;
    for (int i = 0; i < kNumPhases; ++i) {
      mc.u[i] = [](const Vec2&) { return 0.0; };
      mc.gradient[i] = [](const Vec2&) -> Vec2 { return Vec2::Zero(); };
      mc.f[i] = [](const Vec2&) { return 0.0; };
    }
    return mc;
  }
  throw Error(ErrorKind::invalid_argument, "unknown manufactured case '" + id + "'");
}

}  // namespace cutflux
