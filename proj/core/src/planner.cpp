#include "fwav/planner.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <sstream>

#include "fwav/errors.hpp"

namespace fwav::planner {

void PlanOptions::validate() const {
  if (segments < 1) throw InvalidInput("plan: segments must be >= 1");
  if (order < 4) throw InvalidInput("plan: order must be >= 4");
  if (!(T > 0.0)) throw InvalidInput("plan: T must be positive");
  if (restarts < 1) throw InvalidInput("plan: restarts must be >= 1");
  if (max_outer < 1 || max_inner < 1) throw InvalidInput("plan: iteration limits must be >= 1");
  if (!(tolerance > 0.0)) throw InvalidInput("plan: tolerance must be positive");
  if (limit_tightening < 0.0 || limit_tightening >= 0.5) {
    throw InvalidInput("plan: limit_tightening must lie in [0, 0.5)");
  }
}

std::string PlanReport::to_string() const {
  std::ostringstream os;
  os << "feasible " << (feasible ? "yes" : "no") << "\n";
  os << "best_restart " << best_restart << "\n";
  os << "objective " << objective << "\n";
  os << "kkt_residual " << kkt_residual << "\n";
  os << "penalty " << penalty << "\n";
  os << "outer_iterations " << outer_iterations << "\n";
  os << "dense_max_inequality " << dense_residuals.max_inequality() << "\n";
  os << residuals.to_string();
  for (const RestartSummary& r : restarts) {
    os << "restart " << r.index << " feasible " << (r.feasible ? 1 : 0) << " objective "
       << r.objective << " max_inequality " << r.max_inequality << " outer "
       << r.outer_iterations << "\n";
  }
  return os.str();
}

namespace {

struct SamplePoint {
  double t = 0.0;
  int seg = 0;
  Eigen::RowVectorXd m0, m1, m2;
};

struct QuadPoint {
  int seg = 0;
  double w = 0.0;
  Eigen::RowVectorXd m1;
};

/// Inequality constraint h(x) <= 0 evaluated with its gradient in x.
struct ConstraintEval {
  Eigen::VectorXd h;
  Eigen::MatrixXd grad;  // one row per constraint
};

constexpr double kInactive = -1e30;

class Problem {
 public:
  Problem(const ConstraintSet& cons, const ObjectiveWeights& w, const PlanOptions& opts)
      : cons_(cons), weights_(w), opts_(opts), L_(opts.layout()) {
    const double duration = L_.segments * L_.T;
    for (double t : sample_times(duration, cons.sample_interval)) {
      SamplePoint s;
      s.t = t;
      s.seg = std::min(static_cast<int>(std::floor(t / L_.T + 1e-12)), L_.segments - 1);
      const double lt = t - s.seg * L_.T;
      s.m0 = monomial_row(L_.order, lt, 0);
      s.m1 = monomial_row(L_.order, lt, 1);
      s.m2 = monomial_row(L_.order, lt, 2);
      samples_.push_back(std::move(s));
    }
    const auto [nodes, wts] = gauss_legendre(kVelocityQuadratureOrder);
    for (int seg = 0; seg < L_.segments; ++seg) {
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        QuadPoint q;
        q.seg = seg;
        q.w = 0.5 * L_.T * wts[i];
        q.m1 = monomial_row(L_.order, 0.5 * L_.T * (nodes[i] + 1.0), 1);
        quad_.push_back(std::move(q));
      }
    }
    per_sample_ = 5 + static_cast<int>(cons.obstacles.size());
    H_ = 2.0 * w.mu_p * snap_hessian_full(L_);
    const double k = 1.0 - opts.limit_tightening;
    vh_ = cons.v_h_max * k;
    vv_ = cons.v_v_max * k;
    psi_ = cons.psi_rate_max * k;
  }

  int constraint_count() const { return static_cast<int>(samples_.size()) * per_sample_; }
  const Eigen::MatrixXd& hessian() const { return H_; }
  const std::vector<double> times() const {
    std::vector<double> t;
    for (const SamplePoint& s : samples_) t.push_back(s.t);
    return t;
  }

  /// Smoothed objective and its gradient.
  double objective(const Eigen::VectorXd& x, Eigen::VectorXd* g) const {
    Eigen::VectorXd Hx = H_ * x;
    double f = 0.5 * x.dot(Hx);
    if (g) *g = Hx;
    if (weights_.mu_v > 0.0) {
      const double eps2 = opts_.l1_smoothing * opts_.l1_smoothing;
      const int n1 = L_.coeffs_per_axis();
      for (const QuadPoint& q : quad_) {
        for (int a = 0; a < 3; ++a) {
          const int base = L_.index(q.seg, a, 0);
          const double v = q.m1.dot(x.segment(base, n1));
          const double r = std::sqrt(v * v + eps2);
          f += weights_.mu_v * q.w * r;
          if (g) g->segment(base, n1) += (weights_.mu_v * q.w * v / r) * q.m1.transpose();
        }
      }
    }
    return f;
  }

  ConstraintEval constraints(const Eigen::VectorXd& x, bool with_grad) const {
    ConstraintEval out;
    const int nc = constraint_count();
    const int n1 = L_.coeffs_per_axis();
    out.h = Eigen::VectorXd::Constant(nc, kInactive);
    if (with_grad) out.grad = Eigen::MatrixXd::Zero(nc, L_.size());
    for (std::size_t k = 0; k < samples_.size(); ++k) {
      const SamplePoint& s = samples_[k];
      Vec3 p, v, a;
      for (int ax = 0; ax < 3; ++ax) {
        const auto c = x.segment(L_.index(s.seg, ax, 0), n1);
        p[ax] = s.m0.dot(c);
        v[ax] = s.m1.dot(c);
        a[ax] = s.m2.dot(c);
      }
      const int r0 = static_cast<int>(k) * per_sample_;
      auto put = [&](int row, int ax, const Eigen::RowVectorXd& m, double coef) {
        out.grad.row(row).segment(L_.index(s.seg, ax, 0), n1) += coef * m;
      };
      const double d = v.x() * v.x() + v.y() * v.y();
      const double vh = std::sqrt(d);
      out.h[r0] = vh - vh_;
      if (with_grad && vh > 1e-12) {
        put(r0, 0, s.m1, v.x() / vh);
        put(r0, 1, s.m1, v.y() / vh);
      }
      out.h[r0 + 1] = v.z() - vv_;
      out.h[r0 + 2] = -v.z() - vv_;
      if (with_grad) {
        put(r0 + 1, 2, s.m1, 1.0);
        put(r0 + 2, 2, s.m1, -1.0);
      }
      if (cons_.enforce_psi_rate && vh >= cons_.v_eps) {
        const double num = v.x() * a.y() - v.y() * a.x();
        const double rate = num / d;
        out.h[r0 + 3] = rate - psi_;
        out.h[r0 + 4] = -rate - psi_;
        if (with_grad) {
          const double dvx = (a.y() * d - 2.0 * num * v.x()) / (d * d);
          const double dvy = (-a.x() * d - 2.0 * num * v.y()) / (d * d);
          const double dax = -v.y() / d;
          const double day = v.x() / d;
          for (int sgn = 0; sgn < 2; ++sgn) {
            const double m = sgn == 0 ? 1.0 : -1.0;
            put(r0 + 3 + sgn, 0, s.m1, m * dvx);
            put(r0 + 3 + sgn, 1, s.m1, m * dvy);
            put(r0 + 3 + sgn, 0, s.m2, m * dax);
            put(r0 + 3 + sgn, 1, s.m2, m * day);
          }
        }
      }
      for (std::size_t o = 0; o < cons_.obstacles.size(); ++o) {
        const int row = r0 + 5 + static_cast<int>(o);
        out.h[row] = -clearance(cons_.obstacles[o], p, cons_.obstacle_margin,
                                cons_.ball_origin_form);
        if (with_grad) {
          const Vec3 gp = clearance_gradient(cons_.obstacles[o], p, cons_.ball_origin_form);
          for (int ax = 0; ax < 3; ++ax) put(row, ax, s.m0, -gp[ax]);
        }
      }
    }
    return out;
  }

 private:
  const ConstraintSet& cons_;
  ObjectiveWeights weights_;
  PlanOptions opts_;
  Layout L_;
  std::vector<SamplePoint> samples_;
  std::vector<QuadPoint> quad_;
  int per_sample_ = 5;
  Eigen::MatrixXd H_;
  double vh_ = 0.0, vv_ = 0.0, psi_ = 0.0;
};

double max_violation(const Eigen::VectorXd& h) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < h.size(); ++i) v = std::max(v, h[i]);
  return v;
}

/// Augmented Lagrangian value and gradient in the reduced coordinates y.
struct Merit {
  const Problem& prob;
  const Eigen::VectorXd& x0;
  const Eigen::MatrixXd& Z;
  const Eigen::VectorXd& lambda;
  double rho;

  double operator()(const Eigen::VectorXd& y, Eigen::VectorXd* gy) const {
    const Eigen::VectorXd x = x0 + Z * y;
    Eigen::VectorXd gx;
    double f = prob.objective(x, gy ? &gx : nullptr);
    const ConstraintEval c = prob.constraints(x, gy != nullptr);
    for (Eigen::Index i = 0; i < c.h.size(); ++i) {
      const double s = std::max(0.0, lambda[i] + rho * c.h[i]);
      f += (s * s - lambda[i] * lambda[i]) / (2.0 * rho);
      if (gy && s > 0.0) gx += s * c.grad.row(i).transpose();
    }
    if (gy) *gy = Z.transpose() * gx;
    return f;
  }
};

/// BFGS on the inverse Hessian with Armijo backtracking.
Eigen::VectorXd bfgs(const Merit& merit, Eigen::VectorXd y, const Eigen::MatrixXd& Hinv0,
                     int max_iter) {
  Eigen::VectorXd g;
  double f = merit(y, &g);
  Eigen::MatrixXd Hinv = Hinv0;
  int stalls = 0;
  for (int it = 0; it < max_iter; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= 1e-10 * (1.0 + std::abs(f))) break;
    Eigen::VectorXd p = -Hinv * g;
    double slope = g.dot(p);
    if (!(slope < 0.0)) {
      Hinv = Hinv0;
      p = -Hinv * g;
      slope = g.dot(p);
      if (!(slope < 0.0)) break;
    }
    double alpha = 1.0;
    Eigen::VectorXd y_new, g_new;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      y_new = y + alpha * p;
      f_new = merit(y_new, nullptr);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (stalls++ > 0) break;
      Hinv = Hinv0;
      continue;
    }
    merit(y_new, &g_new);
    const Eigen::VectorXd s = y_new - y;
    const Eigen::VectorXd dg = g_new - g;
    const double sy = s.dot(dg);
    if (sy > 1e-12 * s.norm() * dg.norm()) {
      const double r = 1.0 / sy;
      const Eigen::VectorXd Hy = Hinv * dg;
      Hinv += (r * r * (sy + dg.dot(Hy))) * (s * s.transpose()) -
              r * (Hy * s.transpose() + s * Hy.transpose());
    }
    const double decrease = f - f_new;
    y = y_new;
    g = g_new;
    f = f_new;
    if (decrease <= 1e-15 * (1.0 + std::abs(f))) {
      if (++stalls >= 3) break;
    } else {
      stalls = 0;
    }
  }
  return y;
}

struct RestartOutcome {
  RestartSummary summary;
  Eigen::VectorXd x;
  double kkt = 0.0;
  ResidualReport residuals;
};

double position_span(const ConstraintSet& cons) {
  Vec3 lo = cons.start.position, hi = cons.start.position;
  auto grow = [&](const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  };
  grow(cons.end.position);
  for (const Waypoint& w : cons.waypoints) grow(w.position);
  const double span = (hi - lo).norm();
  return span > 1e-9 ? span : 1.0;
}

}  // namespace

PlanResult plan(const ConstraintSet& cons, const ObjectiveWeights& weights,
                const PlanOptions& opts) {
  cons.validate();
  opts.validate();
  if (!(weights.mu_p > 0.0) || weights.mu_v < 0.0) {
    throw InvalidInput("plan: weights require mu_p > 0 and mu_v >= 0");
  }
  const Layout L = opts.layout();
  const QpSolution qp = solve_qp_equality(cons, ObjectiveWeights{weights.mu_p, 0.0}, L);
  const Eigen::VectorXd x_qp = trajectory_to_vector(qp.traj);

  const EqualitySystem sys = build_equality_system(cons, L);
  Eigen::MatrixXd Z;
  {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys.A);
    const Eigen::MatrixXd K = lu.kernel();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(K);
    Z = qr.householderQ() * Eigen::MatrixXd::Identity(L.size(), K.cols());
    if (sys.A.rows() == 0) Z = Eigen::MatrixXd::Identity(L.size(), L.size());
  }

  const Problem prob(cons, weights, opts);
  Eigen::MatrixXd Hr = Z.transpose() * prob.hessian() * Z;
  Hr.diagonal().array() += 1e-12 * std::max(1.0, Hr.trace() / std::max<Eigen::Index>(1, Hr.rows()));
  const Eigen::MatrixXd Hinv0 = Hr.ldlt().solve(Eigen::MatrixXd::Identity(Hr.rows(), Hr.cols()));
  const double span = position_span(cons);
  const double f_qp = prob.objective(x_qp, nullptr);
  const double rho0 = 10.0 * std::max(1.0, std::abs(f_qp));
  const std::vector<double> times = prob.times();

  auto run = [&](int restart) {
    Eigen::VectorXd x0 = x_qp;
    if (restart > 0) {
      std::seed_seq seq{static_cast<std::uint32_t>(opts.seed & 0xffffffffu),
                        static_cast<std::uint32_t>(opts.seed >> 32),
                        static_cast<std::uint32_t>(restart)};
      std::mt19937_64 rng(seq);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      Eigen::VectorXd dx(L.size());
      for (int s = 0; s < L.segments; ++s)
        for (int a = 0; a < 3; ++a)
          for (int i = 0; i <= L.order; ++i)
            dx[L.index(s, a, i)] = u(rng) * span / std::pow(L.T, i);
      x0 += Z * (Z.transpose() * dx);
    }
    Eigen::VectorXd y = Z.transpose() * (x0 - x_qp);
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(prob.constraint_count());
    double rho = rho0;
    double prev = std::numeric_limits<double>::infinity();
    RestartOutcome out;
    out.summary.index = restart;
    int it = 0;
    for (; it < opts.max_outer; ++it) {
      const Merit merit{prob, x_qp, Z, lambda, rho};
      y = bfgs(merit, y, Hinv0 * (1.0 / std::max(1.0, rho / rho0)), opts.max_inner);
      const Eigen::VectorXd x = x_qp + Z * y;
      const ConstraintEval c = prob.constraints(x, false);
      const double viol = max_violation(c.h);
      for (Eigen::Index i = 0; i < lambda.size(); ++i)
        lambda[i] = std::max(0.0, lambda[i] + rho * c.h[i]);
      if (viol <= 1e-7) {
        const ResidualReport rep = constraint_residuals(trajectory_from_vector(x, L), cons, times);
        if (rep.max_inequality() <= opts.tolerance) {
          ++it;
          break;
        }
      }
      if (viol > 0.25 * prev) rho = std::min(rho * 10.0, 1e12);
      prev = viol;
    }
    out.x = x_qp + Z * y;
    const PiecewiseTrajectory traj = trajectory_from_vector(out.x, L);
    out.residuals = constraint_residuals(traj, cons, times);
    out.summary.outer_iterations = it;
    out.summary.penalty = rho;
    out.summary.max_inequality = out.residuals.max_inequality();
    out.summary.feasible = out.summary.max_inequality <= opts.tolerance &&
                           out.residuals.max_equality() <= opts.tolerance;
    out.summary.objective = snap_objective(traj, weights);
    // Stationarity of the Lagrangian on the constraint nullspace.
    Eigen::VectorXd gx;
    prob.objective(out.x, &gx);
    const ConstraintEval c = prob.constraints(out.x, true);
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
      if (lambda[i] > 0.0) gx += lambda[i] * c.grad.row(i).transpose();
    out.kkt = (Z.transpose() * gx).lpNorm<Eigen::Infinity>();
    return out;
  };

  std::vector<RestartOutcome> outcomes(opts.restarts);
  if (opts.parallel && opts.restarts > 1) {
    std::vector<std::future<RestartOutcome>> futures;
    for (int r = 0; r < opts.restarts; ++r) futures.push_back(std::async(std::launch::async, run, r));
    for (int r = 0; r < opts.restarts; ++r) outcomes[r] = futures[r].get();
  } else {
    for (int r = 0; r < opts.restarts; ++r) outcomes[r] = run(r);
  }

  int best = -1;
  for (int r = 0; r < opts.restarts; ++r) {
    if (!outcomes[r].summary.feasible) continue;
    if (best < 0 || outcomes[r].summary.objective < outcomes[best].summary.objective) best = r;
  }

  PlanResult result;
  for (const RestartOutcome& o : outcomes) result.report.restarts.push_back(o.summary);
  if (best < 0) {
    int least = 0;
    for (int r = 1; r < opts.restarts; ++r)
      if (outcomes[r].summary.max_inequality < outcomes[least].summary.max_inequality) least = r;
    const NamedResidual& w = outcomes[least].residuals.worst();
    std::ostringstream os;
    os << "plan: no restart satisfied the constraints; worst residual " << w.name << " = "
       << w.value << " at t = " << w.worst_time << " s (restart " << least << ")";
    throw InfeasiblePlan(os.str(), w.name, w.value, w.worst_time);
  }
  const RestartOutcome& o = outcomes[best];
  result.traj = trajectory_from_vector(o.x, L);
  PlanReport& rep = result.report;
  rep.feasible = true;
  rep.best_restart = best;
  rep.objective = o.summary.objective;
  rep.kkt_residual = o.kkt;
  rep.penalty = o.summary.penalty;
  rep.outer_iterations = o.summary.outer_iterations;
  rep.residuals = o.residuals;
  rep.dense_residuals = constraint_residuals(
      result.traj, cons, sample_times(L.segments * L.T, cons.sample_interval / 10.0));
  return result;
}

}  // namespace fwav::planner
