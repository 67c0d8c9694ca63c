#include "plfe/kernels.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

#include "plfe/error.hpp"

namespace plfe {

namespace {

constexpr int kInitialPanels = 10;  // 10 panels x 20 nodes
constexpr double kQuadTolerance = 1e-13;
// Finite-difference derivatives carry ~1e-11 relative rounding noise, which an
// absolute tolerance alone never gets under.
constexpr double kRelTolerance = 1e-10;
constexpr int kMaxDepth = 30;

using Rule = boost::math::quadrature::gauss<double, 20>;

double refine(const KernelFunction& f, double a, double b, double whole, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = Rule::integrate(f, a, mid);
  const double right = Rule::integrate(f, mid, b);
  const double both = left + right;
  const double err = std::abs(both - whole);
  if (depth >= kMaxDepth || err <= kQuadTolerance * (b - a) || err <= kRelTolerance * std::abs(both)) {
    return both;
  }
  return refine(f, a, mid, left, depth + 1) + refine(f, mid, b, right, depth + 1);
}

double integrate(const KernelFunction& f, double lo, double hi) {
  const double width = (hi - lo) / kInitialPanels;
  double total = 0.0;
  for (int i = 0; i < kInitialPanels; ++i) {
    const double a = lo + i * width;
    const double b = (i + 1 == kInitialPanels) ? hi : a + width;
    total += refine(f, a, b, Rule::integrate(f, a, b), 0);
  }
  return total;
}

KernelFunction finite_difference(const KernelFunction& k, double A) {
  return [k, A](double u) {
    const double step = 1e-5 * A;
    const double lo = std::max(-A, u - step);
    const double hi = std::min(A, u + step);
    return (k(hi) - k(lo)) / (hi - lo);
  };
}

}  // namespace

KernelMoments kernel_moments(const KernelFunction& k, double A, const KernelFunction& deriv) {
  if (!(A > 0.0) || !std::isfinite(A)) {
    raise(ErrorCode::InvalidArgument, "support endpoint A must be positive and finite");
  }
  const KernelFunction dk = deriv ? deriv : finite_difference(k, A);

  KernelMoments m;
  m.mu0 = integrate([&](double z) { return k(z); }, -A, A);
  m.mu1 = integrate([&](double z) { return z * k(z); }, -A, A);
  m.mu2 = integrate([&](double z) { return z * z * k(z); }, -A, A);
  m.nu0 = integrate([&](double z) { return k(z) * k(z); }, -A, A);
  m.nu1 = integrate([&](double z) { return z * k(z) * k(z); }, -A, A);
  m.nu2 = integrate([&](double z) { return z * z * k(z) * k(z); }, -A, A);
  m.int_dk_sq = integrate([&](double z) { return dk(z) * dk(z); }, -A, A);
  m.int_z2_dk_sq = integrate([&](double z) { return z * z * dk(z) * dk(z); }, -A, A);

  if (std::abs(m.mu0 - 1.0) > 1e-6) {
    raise(ErrorCode::NotADensity, "integral of K is " + std::to_string(m.mu0));
  }
  if (std::abs(m.mu1) > 1e-8) {
    raise(ErrorCode::Asymmetric, "first moment is " + std::to_string(m.mu1));
  }
  return m;
}

KernelSpec::KernelSpec(std::string name, KernelFunction k, KernelFunction deriv, double A)
    : name_(std::move(name)), k_(std::move(k)), dk_(std::move(deriv)), A_(A) {
  if (!k_) raise(ErrorCode::InvalidArgument, "kernel evaluator is empty");
  if (!dk_) dk_ = finite_difference(k_, A_);
  moments_ = kernel_moments(k_, A_, dk_);
  boundary_value_ = k_(A_);
}

bool KernelSpec::vanishes_at_boundary() const noexcept {
  return std::abs(boundary_value_) <= 1e-12;
}

KernelSpec epanechnikov() {
  return KernelSpec(
      "epanechnikov", [](double u) { return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0; },
      [](double u) { return std::abs(u) < 1.0 ? -1.5 * u : 0.0; }, 1.0);
}

KernelSpec uniform() {
  return KernelSpec(
      "uniform", [](double u) { return std::abs(u) <= 1.0 ? 0.5 : 0.0; },
      [](double) { return 0.0; }, 1.0);
}

KernelSpec kernel_by_name(const std::string& name) {
  if (name == "epanechnikov") return epanechnikov();
  if (name == "uniform") return uniform();
  raise(ErrorCode::UnknownKernel, "'" + name + "' (expected epanechnikov|uniform)");
}

double scaled_kernel(const KernelSpec& k, double h, double u) {
  if (!(h > 0.0)) raise(ErrorCode::NonPositiveBandwidth, "h = " + std::to_string(h));
  return k.eval(u / h) / h;
}

}  // namespace plfe
