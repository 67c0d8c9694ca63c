#include "plfe/fe_estimator.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "plfe/error.hpp"

namespace plfe {

namespace {

constexpr double kConditionWarning = 1e10;
constexpr double kSingularRatio = 1e-14;

// Factors a symmetric Gram matrix, refusing numerically singular ones and
// warning on ill-conditioned ones.
Eigen::LLT<Eigen::MatrixXd> factor_gram(const Eigen::MatrixXd& gram, const std::string& name,
                                        std::vector<std::string>& warnings) {
  Eigen::LLT<Eigen::MatrixXd> llt;
  if (gram.rows() == 0) return llt.compute(gram);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(hi > 0.0) || !(lo > kSingularRatio * hi)) {
    std::ostringstream msg;
    msg << name << " is singular (eigenvalues in [" << lo << ", " << hi << "])";
    raise(ErrorCode::SingularProjection, msg.str());
  }
  if (hi / lo > kConditionWarning) {
    std::ostringstream msg;
    msg << name << " condition number " << hi / lo << " exceeds 1e10";
    warnings.push_back(msg.str());
  }
  llt.compute(gram);
  if (llt.info() != Eigen::Success) {
    raise(ErrorCode::SingularProjection, name + " is not positive definite");
  }
  return llt;
}

void require_panel(const PanelDataset& ds) {
  if (ds.n() < 2) {
    raise(ErrorCode::InvalidShape, "fixed-effects fit needs at least two units");
  }
}

}  // namespace

ProjectionSet build_projections(const PanelDataset& ds, const SmootherMatrix& sm) {
  require_panel(ds);
  const auto N = static_cast<Eigen::Index>(ds.size());
  if (sm.M.rows() != N || sm.M.cols() != N) {
    raise(ErrorCode::InvalidShape, "smoothing matrix does not match dataset");
  }
  std::vector<std::string> ignored;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);
  const Eigen::MatrixXd D = build_dummy_matrix(ds.n(), ds.T());
  const Eigen::MatrixXd& X = ds.X();

  ProjectionSet ps;
  ps.M = sm.M;
  const Eigen::MatrixXd R0 = I - sm.M;
  ps.P = R0.transpose() * R0;

  const Eigen::MatrixXd Dt = R0 * D;
  const auto dtdt = factor_gram(Dt.transpose() * Dt, "Dt^T Dt", ignored);
  ps.Qtilde = I - Dt * dtdt.solve(Dt.transpose());

  const Eigen::MatrixXd DtP = D.transpose() * ps.P;
  const auto dpd = factor_gram(DtP * D, "D^T P D", ignored);
  ps.Q1 = I - D * dpd.solve(DtP);

  if (X.cols() == 0) {
    ps.Q2 = I;
  } else {
    const Eigen::MatrixXd XtPQ1 = X.transpose() * ps.P * ps.Q1;
    const Eigen::MatrixXd xpqx = XtPQ1 * X;
    // X^T P Q1 X is symmetric in exact arithmetic; symmetrize before factoring.
    const auto f = factor_gram(0.5 * (xpqx + xpqx.transpose()), "X^T P Q1 X", ignored);
    ps.Q2 = I - X * f.solve(XtPQ1);
  }
  const Eigen::MatrixXd L = I - R0 * ps.Q1 * ps.Q2;
  ps.hat_diag = L.diagonal();
  return ps;
}

std::shared_ptr<const ProfileOperator> ProfileOperator::build(const PanelDataset& ds,
                                                              SmootherMatrix sm) {
  require_panel(ds);
  const auto N = static_cast<Eigen::Index>(ds.size());
  if (sm.M.rows() != N || sm.M.cols() != N) {
    raise(ErrorCode::InvalidShape, "smoothing matrix does not match dataset");
  }
  std::shared_ptr<ProfileOperator> op(new ProfileOperator());
  op->n_ = ds.n();
  op->T_ = ds.T();
  op->h_ = sm.h;
  op->M_ = std::move(sm.M);
  op->X_ = ds.X();
  const Eigen::MatrixXd& M = op->M_;
  const std::size_t n = op->n_;
  const std::size_t T = op->T_;

  // Dt = (I - M) D, C = Dt^T (I - M).
  op->Dt_ = build_dummy_matrix(n, T) - right_apply_dummy(M, n, T);
  op->C_ = op->Dt_.transpose() - op->Dt_.transpose() * M;
  op->dgram_ = factor_gram(op->Dt_.transpose() * op->Dt_, "D^T P D", op->warnings_);

  const Eigen::Index p = op->X_.cols();
  op->Xt_ = op->X_ - M * op->X_;
  op->Xq_ = op->Xt_ - op->Dt_ * op->dgram_.solve(op->Dt_.transpose() * op->Xt_);
  if (p > 0) {
    op->xgram_ = factor_gram(op->Xt_.transpose() * op->Xq_, "X^T P Q1 X", op->warnings_);
  }

  // (I - M) Q1 Q2 = (I - Pi) (I - M) with Pi the orthogonal projection onto
  // span[Dt, Xt] = span[Dt, Xq], Dt orthogonal to Xq.
  //   diag: R0_kk - (Dt S^{-1} C)_kk - (Xq F^{-1} E)_kk,   E = Xq^T (I - M)
  //   trace of R^T R: |R0|_F^2 - |L_S^{-1} C|_F^2 - |L_F^{-1} E|_F^2
  const Eigen::VectorXd r0_diag = Eigen::VectorXd::Ones(N) - M.diagonal();
  const double r0_norm2 = (Eigen::MatrixXd::Identity(N, N) - M).squaredNorm();

  const Eigen::MatrixXd SinvC = op->dgram_.solve(op->C_);
  const Eigen::MatrixXd LinvC = op->dgram_.matrixL().solve(op->C_);
  op->residual_diag_ = r0_diag - (op->Dt_.array() * SinvC.transpose().array()).rowwise().sum().matrix();
  double explained = LinvC.squaredNorm();
  if (p > 0) {
    const Eigen::MatrixXd E = op->Xq_.transpose() - op->Xq_.transpose() * M;
    const Eigen::MatrixXd FinvE = op->xgram_.solve(E);
    op->residual_diag_ -= (op->Xq_.array() * FinvE.transpose().array()).rowwise().sum().matrix();
    explained += op->xgram_.matrixL().solve(E).squaredNorm();
  }
  op->residual_trace_ = r0_norm2 - explained;
  return op;
}

Eigen::VectorXd ProfileOperator::beta(const Eigen::VectorXd& y) const {
  if (X_.cols() == 0) return Eigen::VectorXd(0);
  return xgram_.solve(Xq_.transpose() * smooth_residual(y));
}

Eigen::VectorXd ProfileOperator::free_effects(const Eigen::VectorXd& y,
                                              const Eigen::VectorXd& beta) const {
  Eigen::VectorXd target = smooth_residual(y);
  if (X_.cols() > 0) target -= Xt_ * beta;
  return dgram_.solve(Dt_.transpose() * target);
}

Eigen::MatrixXd ProfileOperator::apply_q1(const Eigen::MatrixXd& v) const {
  const Eigen::MatrixXd coef = dgram_.solve(C_ * v);
  Eigen::MatrixXd out = v;
  for (Eigen::Index c = 0; c < v.cols(); ++c) out.col(c) -= apply_dummy(coef.col(c), n_, T_);
  return out;
}

Eigen::MatrixXd ProfileOperator::right_apply_q1(const Eigen::MatrixXd& rows) const {
  const Eigen::MatrixXd rd = right_apply_dummy(rows, n_, T_);
  return rows - dgram_.solve(rd.transpose()).transpose() * C_;
}

Eigen::VectorXd ProfileOperator::residuals(const Eigen::VectorXd& y) const {
  Eigen::VectorXd partial = y;
  if (X_.cols() > 0) partial -= X_ * beta(y);
  return smooth_residual(apply_q1(partial));
}

Eigen::MatrixXd ProfileOperator::beta_map() const {
  if (X_.cols() == 0) return Eigen::MatrixXd(0, M_.cols());
  const Eigen::MatrixXd XqT = Xq_.transpose();
  return xgram_.solve(XqT - XqT * M_);
}

Eigen::VectorXd default_grid(const Interval& interval, std::size_t points) {
  if (points < 2) raise(ErrorCode::InvalidArgument, "grid needs at least two points");
  return Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(points), interval.lo, interval.hi);
}

FitResult fit_with(const PanelDataset& ds, std::shared_ptr<const ProfileOperator> op,
                   const KernelSpec& k, const FitOptions& opts) {
  if (!op || op->n() != ds.n() || op->T() != ds.T() || op->p() != ds.p()) {
    raise(ErrorCode::InvalidShape, "profile operator does not match dataset");
  }
  FitResult fr;
  fr.h = op->bandwidth();
  fr.warnings = op->warnings();
  const Eigen::VectorXd& y = ds.y();

  fr.beta_hat = op->beta(y);
  fr.alpha_hat = full_effects(op->free_effects(y, fr.beta_hat));
  Eigen::VectorXd partial = y;
  if (ds.p() > 0) partial -= ds.X() * fr.beta_hat;
  fr.partialled = op->apply_q1(partial);
  fr.residuals = fr.partialled - op->smoother() * fr.partialled;
  fr.sigma2_hat = fr.residuals.squaredNorm() / op->residual_trace();

  fr.grid = opts.grid ? *opts.grid : default_grid(ds.interval(), opts.grid_points);
  fr.g_hat.resize(fr.grid.size());
  fr.g_prime.resize(fr.grid.size());
  for (Eigen::Index g = 0; g < fr.grid.size(); ++g) {
    const SmootherRows rows = smoother_row(fr.grid(g), ds.z(), fr.h, k);
    fr.g_hat(g) = rows.level.dot(fr.partialled);
    fr.g_prime(g) = rows.slope.dot(fr.partialled);
  }
  fr.projections = std::move(op);
  return fr;
}

FitResult fit(const PanelDataset& ds, double h, const KernelSpec& k, const FitOptions& opts) {
  require_panel(ds);
  return fit_with(ds, ProfileOperator::build(ds, smoothing_matrix(ds, h, k)), k, opts);
}

LevelSlope g_at(const FitResult& fr, const PanelDataset& ds, const KernelSpec& k, double z) {
  const SmootherRows rows = smoother_row(z, ds.z(), fr.h, k);
  return {rows.level.dot(fr.partialled), rows.slope.dot(fr.partialled)};
}

namespace {

Eigen::VectorXd sandwich(const FitResult& fr, const Eigen::MatrixXd& rows) {
  const Eigen::MatrixXd rq = fr.projections->right_apply_q1(rows);
  Eigen::VectorXd out = (rq.array() * rows.array()).rowwise().sum().matrix() * fr.sigma2_hat;
  for (Eigen::Index g = 0; g < out.size(); ++g) {
    if (!(out(g) > 0.0)) {
      raise(ErrorCode::NonPositiveVariance,
            "plug-in variance " + std::to_string(out(g)) + " at grid index " + std::to_string(g));
    }
  }
  return out;
}

}  // namespace

double conditional_variance(const FitResult& fr, const PanelDataset& ds, const KernelSpec& k,
                            double z) {
  return sandwich(fr, smoother_row(z, ds.z(), fr.h, k).level)(0);
}

double slope_conditional_variance(const FitResult& fr, const PanelDataset& ds,
                                  const KernelSpec& k, double z) {
  return sandwich(fr, smoother_row(z, ds.z(), fr.h, k).slope)(0);
}

Eigen::VectorXd conditional_variance_grid(const FitResult& fr, const PanelDataset& ds,
                                          const KernelSpec& k, const Eigen::VectorXd& grid) {
  return sandwich(fr, level_rows(grid, ds.z(), fr.h, k));
}

Eigen::VectorXd slope_conditional_variance_grid(const FitResult& fr, const PanelDataset& ds,
                                                const KernelSpec& k, const Eigen::VectorXd& grid) {
  return sandwich(fr, slope_rows(grid, ds.z(), fr.h, k));
}

}  // namespace plfe
