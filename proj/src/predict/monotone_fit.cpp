#include "evball/predict/monotone_fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "evball/core/errors.hpp"

namespace evball::predict {

namespace {

double horner(const Eigen::VectorXd& beta, double t) {
  double acc = 0.0;
  for (Eigen::Index j = beta.size() - 1; j >= 0; --j) acc = acc * t + beta[j];
  return acc;
}

double horner_derivative(const Eigen::VectorXd& beta, double t) {
  double acc = 0.0;
  for (Eigen::Index j = beta.size() - 1; j >= 1; --j) {
    acc = acc * t + static_cast<double>(j) * beta[j];
  }
  return acc;
}

Eigen::MatrixXd vandermonde(const std::vector<double>& taus, int degree) {
  Eigen::MatrixXd a(taus.size(), degree + 1);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    double pow_t = 1.0;
    for (int j = 0; j <= degree; ++j) {
      a(static_cast<Eigen::Index>(i), j) = pow_t;
      pow_t *= taus[i];
    }
  }
  return a;
}

Eigen::RowVectorXd derivative_row(double tau, int degree) {
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(degree + 1);
  double pow_t = 1.0;
  for (int j = 1; j <= degree; ++j) {
    row(j) = static_cast<double>(j) * pow_t;
    pow_t *= tau;
  }
  return row;
}

}  // namespace

double PolyFit::eval_x(double t) const { return horner(beta_x, t - t0); }
double PolyFit::eval_y(double t) const { return horner(beta_y, t - t0); }
double PolyFit::eval_z(double t) const { return horner(beta_z, t - t0); }
double PolyFit::eval_dz(double t) const {
  return horner_derivative(beta_z, t - t0);
}

Eigen::VectorXd solve_qp_active_set(const Eigen::MatrixXd& h,
                                    const Eigen::VectorXd& g,
                                    const Eigen::MatrixXd& c,
                                    const Eigen::VectorXd& d,
                                    const Eigen::VectorXd& feasible_start,
                                    bool* any_active) {
  const Eigen::Index n = h.rows();
  const Eigen::Index m = c.rows();
  Eigen::VectorXd x = feasible_start;
  std::vector<Eigen::Index> working;
  if (any_active) *any_active = false;

  const double scale = 1.0 + h.cwiseAbs().maxCoeff();
  const double step_tol = 1e-12 * scale;
  const int max_iter = 60 + 12 * static_cast<int>(m);

  for (int iter = 0; iter < max_iter; ++iter) {
    const auto w = static_cast<Eigen::Index>(working.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + w, n + w);
    kkt.topLeftCorner(n, n) = h;
    for (Eigen::Index k = 0; k < w; ++k) {
      kkt.block(n + k, 0, 1, n) = c.row(working[k]);
      kkt.block(0, n + k, n, 1) = c.row(working[k]).transpose();
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + w);
    rhs.head(n) = -(h * x + g);

    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) {
      // PSD H restricted to the working-set null space can still be
      // singular; nudge and retry once per iteration.
      kkt.topLeftCorner(n, n) += 1e-12 * scale * Eigen::MatrixXd::Identity(n, n);
      lu.compute(kkt);
      if (!lu.isInvertible()) {
        throw core::NumericalError("qp: singular KKT system");
      }
    }
    const Eigen::VectorXd sol = lu.solve(rhs);
    const Eigen::VectorXd p = sol.head(n);

    if (p.norm() <= 1e-10 * (1.0 + x.norm())) {
      if (w == 0) return x;
      Eigen::Index drop = -1;
      double most_negative = -1e-9 * scale;
      for (Eigen::Index k = 0; k < w; ++k) {
        const double lambda = sol(n + k);
        if (lambda < most_negative) {
          most_negative = lambda;
          drop = k;
        }
      }
      if (drop < 0) return x;
      working.erase(working.begin() + drop);
      continue;
    }

    double alpha = 1.0;
    Eigen::Index blocker = -1;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (std::find(working.begin(), working.end(), i) != working.end()) {
        continue;
      }
      const double ci_p = c.row(i).dot(p);
      if (ci_p <= step_tol) continue;
      const double room = d(i) - c.row(i).dot(x);
      const double a = std::max(room, 0.0) / ci_p;
      if (a < alpha) {
        alpha = a;
        blocker = i;
      }
    }
    x += alpha * p;
    if (blocker >= 0) {
      working.push_back(blocker);
      if (any_active) *any_active = true;
    }
  }
  throw core::NumericalError("qp: active-set iteration cap exceeded");
}

PolyFit fit_monotone_poly(const std::vector<BallMeasurement>& meas, int degree) {
  if (meas.size() < 2) {
    throw core::DataError("fit_monotone_poly: needs >= 2 measurements");
  }
  if (degree < 0) throw core::DataError("fit_monotone_poly: negative degree");

  PolyFit fit;
  fit.t0 = meas.front().t;
  std::vector<double> taus(meas.size());
  Eigen::VectorXd zx(meas.size()), zy(meas.size()), zz(meas.size());
  for (std::size_t i = 0; i < meas.size(); ++i) {
    taus[i] = meas[i].t - fit.t0;
    zx(static_cast<Eigen::Index>(i)) = meas[i].cx_img;
    zy(static_cast<Eigen::Index>(i)) = meas[i].cy_img;
    zz(static_cast<Eigen::Index>(i)) = meas[i].depth;
  }
  fit.t_max = *std::max_element(taus.begin(), taus.end());

  int d = std::min<int>(degree, static_cast<int>(meas.size()) - 1);
  Eigen::MatrixXd a = vandermonde(taus, d);
  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    while (qr.rank() < d + 1 && d > 0) {
      --d;
      a = vandermonde(taus, d);
      qr.compute(a);
    }
  }
  fit.degree = d;
  fit.degree_reduced = d < degree;

  fit.beta_x = a.colPivHouseholderQr().solve(zx);
  fit.beta_y = a.colPivHouseholderQr().solve(zy);

  // Collocation points: every measurement time plus a uniform 10-point
  // grid across the fit window.
  std::vector<double> colloc = taus;
  if (fit.t_max > 0.0) {
    for (int k = 0; k < 10; ++k) colloc.push_back(fit.t_max * k / 9.0);
  }
  Eigen::MatrixXd constraints(colloc.size(), d + 1);
  for (std::size_t i = 0; i < colloc.size(); ++i) {
    constraints.row(static_cast<Eigen::Index>(i)) = derivative_row(colloc[i], d);
  }

  const Eigen::MatrixXd h = 2.0 * a.transpose() * a;
  const Eigen::VectorXd g = -2.0 * a.transpose() * zz;
  Eigen::VectorXd start = Eigen::VectorXd::Zero(d + 1);
  start(0) = zz.mean();  // constant fit: feasible, all derivatives zero
  fit.beta_z = solve_qp_active_set(
      h, g, constraints, Eigen::VectorXd::Zero(constraints.rows()), start,
      &fit.constraint_active);
  return fit;
}

}  // namespace evball::predict
