#pragma once

#include <functional>
#include <string>

namespace plfe {

/// Moment constants of a kernel K supported on [-A, A]:
/// mu_l = int z^l K, nu_l = int z^l K^2, plus int (K')^2 and int z^2 (K')^2.
struct KernelMoments {
  double mu0 = 0.0, mu1 = 0.0, mu2 = 0.0;
  double nu0 = 0.0, nu1 = 0.0, nu2 = 0.0;
  double int_dk_sq = 0.0;
  double int_z2_dk_sq = 0.0;
};

using KernelFunction = std::function<double(double)>;

/// Computes all eight constants by adaptive composite Gauss-Legendre
/// quadrature on [-A, A]. Without `deriv`, K' is taken by central differences.
/// Throws NotADensity if |mu0 - 1| > 1e-6 and Asymmetric if |mu1| > 1e-8.
KernelMoments kernel_moments(const KernelFunction& k, double A, const KernelFunction& deriv = {});

/// Symmetric, compactly supported kernel with cached moments. Immutable.
class KernelSpec {
 public:
  KernelSpec(std::string name, KernelFunction k, KernelFunction deriv, double A);

  const std::string& name() const noexcept { return name_; }
  double support() const noexcept { return A_; }
  double boundary_value() const noexcept { return boundary_value_; }
  const KernelMoments& moments() const noexcept { return moments_; }

  /// K(u); zero outside [-A, A].
  double eval(double u) const { return (u < -A_ || u > A_) ? 0.0 : k_(u); }
  double operator()(double u) const { return eval(u); }
  /// K'(u) on the open support, zero outside.
  double deriv(double u) const { return (u <= -A_ || u >= A_) ? 0.0 : dk_(u); }

  /// Vanishing-boundary case of the band constants: K(A) == 0 within 1e-12.
  bool vanishes_at_boundary() const noexcept;

 private:
  std::string name_;
  KernelFunction k_;
  KernelFunction dk_;
  double A_;
  double boundary_value_;
  KernelMoments moments_;
};

/// K(z) = 0.75 (1 - z^2)_+ on [-1, 1].
KernelSpec epanechnikov();
/// K(z) = 0.5 on [-1, 1].
KernelSpec uniform();
/// "epanechnikov" or "uniform"; anything else throws UnknownKernel.
KernelSpec kernel_by_name(const std::string& name);

/// K_h(u) = K(u / h) / h. Throws NonPositiveBandwidth for h <= 0.
double scaled_kernel(const KernelSpec& k, double h, double u);

}  // namespace plfe
