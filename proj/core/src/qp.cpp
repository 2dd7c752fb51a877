#include "fwav/qp.hpp"

#include <cmath>

#include "fwav/errors.hpp"

namespace fwav::planner {

Eigen::RowVectorXd monomial_row(int order, double t, int k) {
  Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(order + 1);
  for (int i = k; i <= order; ++i) {
    double f = 1.0;
    for (int j = 0; j < k; ++j) f *= static_cast<double>(i - j);
    r[i] = f * std::pow(t, i - k);
  }
  return r;
}

Eigen::VectorXd trajectory_to_vector(const PiecewiseTrajectory& traj) {
  const int n1 = traj.segments().front().order() + 1;
  Eigen::VectorXd x(traj.segment_count() * 3 * n1);
  for (int s = 0; s < traj.segment_count(); ++s)
    for (int a = 0; a < 3; ++a)
      x.segment((s * 3 + a) * n1, n1) = traj.segments()[s].coeffs.row(a).transpose();
  return x;
}

PiecewiseTrajectory trajectory_from_vector(const Eigen::VectorXd& x, const Layout& L) {
  if (x.size() != L.size()) throw InvalidInput("trajectory_from_vector: size mismatch");
  std::vector<PolySegment> segs(L.segments);
  for (int s = 0; s < L.segments; ++s) {
    segs[s].T = L.T;
    segs[s].coeffs.resize(3, L.coeffs_per_axis());
    for (int a = 0; a < 3; ++a)
      segs[s].coeffs.row(a) = x.segment(L.index(s, a, 0), L.coeffs_per_axis()).transpose();
  }
  return PiecewiseTrajectory(std::move(segs));
}

EqualitySystem build_equality_system(const ConstraintSet& cons, const Layout& L) {
  const char* axis[3] = {"x", "y", "z"};
  const char* order_name[3] = {"position", "velocity", "acceleration"};
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  EqualitySystem sys;
  const int n1 = L.coeffs_per_axis();

  auto add = [&](int seg, int a, const Eigen::RowVectorXd& m, double value, std::string name) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(L.size());
    r.segment(L.index(seg, a, 0), n1) = m;
    rows.push_back(r);
    rhs.push_back(value);
    sys.rows.push_back(std::move(name));
  };

  const BoundaryState* ends[2] = {&cons.start, &cons.end};
  for (int e = 0; e < 2; ++e) {
    const int seg = e == 0 ? 0 : L.segments - 1;
    const double t = e == 0 ? 0.0 : L.T;
    const Vec3* vals[3] = {&ends[e]->position, &ends[e]->velocity, &ends[e]->acceleration};
    for (int k = 0; k < 3; ++k)
      for (int a = 0; a < 3; ++a)
        add(seg, a, monomial_row(L.order, t, k), (*vals[k])[a],
            std::string("boundary.") + (e == 0 ? "start." : "end.") + order_name[k] + "." +
                axis[a]);
  }
  for (std::size_t i = 0; i < cons.waypoints.size(); ++i) {
    const Waypoint& w = cons.waypoints[i];
    if (w.segment < 0 || w.segment >= L.segments) {
      throw InvalidInput("waypoint " + std::to_string(i) + " refers to a missing segment");
    }
    for (int a = 0; a < 3; ++a)
      add(w.segment, a, monomial_row(L.order, w.local_time, 0), w.position[a],
          "waypoint[" + std::to_string(i) + "]." + axis[a]);
  }
  for (int s = 0; s + 1 < L.segments; ++s) {
    for (int k = 0; k <= 3; ++k) {
      for (int a = 0; a < 3; ++a) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(L.size());
        r.segment(L.index(s, a, 0), n1) = monomial_row(L.order, L.T, k);
        r.segment(L.index(s + 1, a, 0), n1) -= monomial_row(L.order, 0.0, k);
        rows.push_back(r);
        rhs.push_back(0.0);
        sys.rows.push_back("continuity[" + std::to_string(s) + "].d" + std::to_string(k) + "." +
                           axis[a]);
      }
    }
  }
  sys.A.resize(static_cast<Eigen::Index>(rows.size()), L.size());
  sys.b.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    sys.A.row(static_cast<Eigen::Index>(i)) = rows[i];
    sys.b[static_cast<Eigen::Index>(i)] = rhs[i];
  }
  return sys;
}

Eigen::MatrixXd snap_hessian_full(const Layout& L) {
  const int n1 = L.coeffs_per_axis();
  const Eigen::MatrixXd q = snap_hessian(L.order, L.T);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(L.size(), L.size());
  for (int s = 0; s < L.segments; ++s)
    for (int a = 0; a < 3; ++a) H.block(L.index(s, a, 0), L.index(s, a, 0), n1, n1) = q;
  return H;
}

std::vector<int> dependent_rows(const Eigen::MatrixXd& A, double tol) {
  std::vector<int> out;
  if (A.rows() == 0) return out;
  // Greedy scan in row order keeps the first occurrence of each direction.
  Eigen::MatrixXd basis(0, A.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    Eigen::MatrixXd trial(basis.rows() + 1, A.cols());
    trial << basis, A.row(i);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(trial.transpose());
    qr.setThreshold(tol);
    if (qr.rank() < trial.rows()) {
      out.push_back(static_cast<int>(i));
    } else {
      basis = trial;
    }
  }
  return out;
}

QpSolution solve_qp_equality(const ConstraintSet& cons, const ObjectiveWeights& weights,
                             const Layout& L) {
  if (weights.mu_v != 0.0) throw InvalidInput("solve_qp_equality: requires mu_v == 0");
  if (!(weights.mu_p > 0.0)) throw InvalidInput("solve_qp_equality: mu_p must be positive");
  const EqualitySystem sys = build_equality_system(cons, L);
  const Eigen::Index n = L.size();
  const Eigen::Index m = sys.A.rows();
  if (m > n) {
    throw RankDeficient("solve_qp_equality: " + std::to_string(m) + " constraints exceed " +
                        std::to_string(n) + " coefficients");
  }
  const std::vector<int> dep = dependent_rows(sys.A);
  if (!dep.empty()) {
    std::string names;
    for (int r : dep) names += (names.empty() ? "" : ", ") + sys.rows[r];
    throw RankDeficient("solve_qp_equality: dependent constraint rows: " + names);
  }

  const Eigen::MatrixXd H = 2.0 * weights.mu_p * snap_hessian_full(L);
  // Reduced Hessian on the nullspace of A must be positive definite.
  Eigen::FullPivLU<Eigen::MatrixXd> lu_a(sys.A);
  const Eigen::MatrixXd Z = lu_a.kernel();
  if (Z.cols() > 0 && !(m == 0 && Z.cols() == 1 && Z.isZero())) {
    Eigen::HouseholderQR<Eigen::MatrixXd> zqr(Z);
    const Eigen::MatrixXd Zo = zqr.householderQ() * Eigen::MatrixXd::Identity(n, Z.cols());
    const Eigen::MatrixXd Hr = Zo.transpose() * H * Zo;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hr);
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() <= 1e-12 * scale) {
      throw RankDeficient(
          "solve_qp_equality: constraints leave coefficients the snap objective does not "
          "determine (underdetermined)");
    }
  }

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = H;
  K.topRightCorner(n, m) = sys.A.transpose();
  K.bottomLeftCorner(m, n) = sys.A;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
  rhs.tail(m) = sys.b;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
  Eigen::VectorXd sol = lu.solve(rhs);
  // One step of iterative refinement.
  sol += lu.solve(rhs - K * sol);

  QpSolution out;
  const Eigen::VectorXd x = sol.head(n);
  out.traj = trajectory_from_vector(x, L);
  out.objective = 0.5 * x.dot(H * x);
  out.kkt_residual = (K * sol - rhs).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace fwav::planner
