#include "uavmec/conic_solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/OrderingMethods>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace uavmec {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::MaxIterations: return "max-iterations";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

namespace {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct SocBlock {
  int start = 0;
  int dim = 0;
  // W = eta * [a q'; q I + q q'/(1+a)]
  double eta = 1.0;
  double a = 1.0;
  Vec q;
};

class Cones {
 public:
  Cones(int l, const std::vector<int>& dims) : l_(l) {
    int off = l;
    for (int d : dims) {
      if (d < 1) throw std::invalid_argument("second-order cone dimension must be >= 1");
      SocBlock b;
      b.start = off;
      b.dim = d;
      b.q = Vec::Zero(d - 1);
      soc_.push_back(b);
      off += d;
    }
    m_ = off;
    lp_w_ = Vec::Ones(l);
  }

  int size() const { return m_; }
  int degree() const { return l_ + static_cast<int>(soc_.size()); }
  int num_linear() const { return l_; }
  const std::vector<SocBlock>& socs() const { return soc_; }

  void set_identity() {
    lp_w_.setOnes();
    for (auto& b : soc_) {
      b.eta = 1.0;
      b.a = 1.0;
      b.q.setZero();
    }
  }

  // Nesterov-Todd scaling point for interior s, z. Returns false if either
  // vector has left the cone interior numerically.
  bool update_scaling(const Vec& s, const Vec& z) {
    for (int i = 0; i < l_; ++i) {
      if (!(s[i] > 0) || !(z[i] > 0)) return false;
      lp_w_[i] = std::sqrt(s[i] / z[i]);
    }
    for (auto& b : soc_) {
      const int d = b.dim;
      const double s0 = s[b.start], z0 = z[b.start];
      if (d == 1) {
        if (!(s0 > 0) || !(z0 > 0)) return false;
        b.eta = std::sqrt(s0 / z0);
        b.a = 1.0;
        continue;
      }
      auto s1 = s.segment(b.start + 1, d - 1);
      auto z1 = z.segment(b.start + 1, d - 1);
      const double sres = s0 * s0 - s1.squaredNorm();
      const double zres = z0 * z0 - z1.squaredNorm();
      if (!(sres > 0) || !(zres > 0) || !(s0 > 0) || !(z0 > 0)) return false;
      const double snorm = std::sqrt(sres), znorm = std::sqrt(zres);
      const double sb0 = s0 / snorm, zb0 = z0 / znorm;
      Vec sb1 = s1 / snorm, zb1 = z1 / znorm;
      const double dot = sb0 * zb0 + sb1.dot(zb1);
      const double gamma = std::sqrt(0.5 * (1.0 + dot));
      b.a = 0.5 * (sb0 + zb0) / gamma;
      b.q = 0.5 * (sb1 - zb1) / gamma;
      b.eta = std::sqrt(snorm / znorm);
    }
    return true;
  }

  Vec apply_w(const Vec& v) const {
    Vec out(m_);
    out.head(l_) = lp_w_.cwiseProduct(v.head(l_));
    for (const auto& b : soc_) {
      const int d = b.dim;
      if (d == 1) {
        out[b.start] = b.eta * v[b.start];
        continue;
      }
      const double v0 = v[b.start];
      auto v1 = v.segment(b.start + 1, d - 1);
      const double qv = b.q.dot(v1);
      out[b.start] = b.eta * (b.a * v0 + qv);
      out.segment(b.start + 1, d - 1) = b.eta * (v0 * b.q + v1 + (qv / (1.0 + b.a)) * b.q);
    }
    return out;
  }

  Vec apply_winv(const Vec& v) const {
    Vec out(m_);
    out.head(l_) = v.head(l_).cwiseQuotient(lp_w_);
    for (const auto& b : soc_) {
      const int d = b.dim;
      if (d == 1) {
        out[b.start] = v[b.start] / b.eta;
        continue;
      }
      const double v0 = v[b.start];
      auto v1 = v.segment(b.start + 1, d - 1);
      const double qv = b.q.dot(v1);
      out[b.start] = (b.a * v0 - qv) / b.eta;
      out.segment(b.start + 1, d - 1) = (-v0 * b.q + v1 + (qv / (1.0 + b.a)) * b.q) / b.eta;
    }
    return out;
  }

  Vec apply_w2(const Vec& v) const { return apply_w(apply_w(v)); }

  // Dense W^2 for one cone block.
  Eigen::MatrixXd soc_w2(const SocBlock& b) const {
    const int d = b.dim;
    Eigen::MatrixXd w(d, d);
    if (d == 1) {
      w(0, 0) = b.eta * b.eta;
      return w;
    }
    w(0, 0) = b.a;
    w.block(0, 1, 1, d - 1) = b.q.transpose();
    w.block(1, 0, d - 1, 1) = b.q;
    w.block(1, 1, d - 1, d - 1) =
        Eigen::MatrixXd::Identity(d - 1, d - 1) + b.q * b.q.transpose() / (1.0 + b.a);
    return b.eta * b.eta * (w * w);
  }

  const Vec& lp_w() const { return lp_w_; }

  Vec circ(const Vec& u, const Vec& v) const {
    Vec out(m_);
    out.head(l_) = u.head(l_).cwiseProduct(v.head(l_));
    for (const auto& b : soc_) {
      const int d = b.dim;
      out[b.start] = u.segment(b.start, d).dot(v.segment(b.start, d));
      if (d > 1)
        out.segment(b.start + 1, d - 1) = u[b.start] * v.segment(b.start + 1, d - 1) +
                                          v[b.start] * u.segment(b.start + 1, d - 1);
    }
    return out;
  }

  // Solves lambda o x = r.
  Vec inv_circ(const Vec& lam, const Vec& r) const {
    Vec out(m_);
    out.head(l_) = r.head(l_).cwiseQuotient(lam.head(l_));
    for (const auto& b : soc_) {
      const int d = b.dim;
      const double l0 = lam[b.start], r0 = r[b.start];
      if (d == 1) {
        out[b.start] = r0 / l0;
        continue;
      }
      auto l1 = lam.segment(b.start + 1, d - 1);
      auto r1 = r.segment(b.start + 1, d - 1);
      const double det = l0 * l0 - l1.squaredNorm();
      const double x0 = (l0 * r0 - l1.dot(r1)) / det;
      out[b.start] = x0;
      out.segment(b.start + 1, d - 1) = (r1 - x0 * l1) / l0;
    }
    return out;
  }

  Vec identity() const {
    Vec e = Vec::Zero(m_);
    e.head(l_).setOnes();
    for (const auto& b : soc_) e[b.start] = 1.0;
    return e;
  }

  // Smallest alpha such that v + alpha*e is on the cone boundary (negative
  // when v is interior).
  double boundary_shift(const Vec& v) const {
    double alpha = -kInf;
    for (int i = 0; i < l_; ++i) alpha = std::max(alpha, -v[i]);
    for (const auto& b : soc_) {
      const double t = b.dim > 1 ? v.segment(b.start + 1, b.dim - 1).norm() : 0.0;
      alpha = std::max(alpha, t - v[b.start]);
    }
    return alpha;
  }

  // Largest step alpha with v + alpha*dv in the cone.
  double max_step(const Vec& v, const Vec& dv) const {
    double alpha = kInf;
    for (int i = 0; i < l_; ++i)
      if (dv[i] < 0) alpha = std::min(alpha, -v[i] / dv[i]);
    for (const auto& b : soc_) {
      const int d = b.dim;
      const double s0 = v[b.start], d0 = dv[b.start];
      if (d == 1) {
        if (d0 < 0) alpha = std::min(alpha, -s0 / d0);
        continue;
      }
      auto s1 = v.segment(b.start + 1, d - 1);
      auto d1 = dv.segment(b.start + 1, d - 1);
      const double qa = d0 * d0 - d1.squaredNorm();
      const double qb = s0 * d0 - s1.dot(d1);
      const double qc = std::max(0.0, s0 * s0 - s1.squaredNorm());
      double root = kInf;
      if (std::abs(qa) < 1e-300) {
        if (qb < 0) root = -qc / (2.0 * qb);
      } else {
        const double disc = qb * qb - qa * qc;
        if (disc >= 0) {
          const double sq = std::sqrt(disc);
          const double qq = -(qb + (qb >= 0 ? sq : -sq));
          const double r1 = qq / qa;
          const double r2 = qq != 0.0 ? qc / qq : kInf;
          if (r1 > 0) root = std::min(root, r1);
          if (r2 > 0) root = std::min(root, r2);
        }
      }
      // Also guard the first coordinate from going negative.
      if (d0 < 0) root = std::min(root, -s0 / d0);
      alpha = std::min(alpha, root);
    }
    return alpha;
  }

 private:
  int l_;
  int m_;
  Vec lp_w_;
  std::vector<SocBlock> soc_;
};

// Quasi-definite KKT system [dI A' G'; A -dI 0; G 0 -(W^2 + dI)] with a fixed
// sparsity pattern; only the scaling block changes between iterations.
class Kkt {
 public:
  Kkt(const ConeProblem& p, const Cones& cones, double reg)
      : n_(static_cast<int>(p.c.size())),
        p_(static_cast<int>(p.b.size())),
        m_(static_cast<int>(p.h.size())),
        reg_(reg),
        A_(p.A),
        G_(p.G),
        At_(p.A.transpose()),
        Gt_(p.G.transpose()),
        cones_(cones) {
    const int dim = n_ + p_ + m_;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<size_t>(dim + A_.nonZeros() + G_.nonZeros() + 4 * m_));
    for (int i = 0; i < n_; ++i) {
      t.emplace_back(i, i, reg_);
      dslots_.push_back({i, 1.0});
    }
    for (int k = 0; k < A_.outerSize(); ++k)
      for (SpMat::InnerIterator it(A_, k); it; ++it)
        t.emplace_back(n_ + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int k = 0; k < G_.outerSize(); ++k)
      for (SpMat::InnerIterator it(G_, k); it; ++it)
        t.emplace_back(n_ + p_ + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int i = 0; i < p_; ++i) {
      t.emplace_back(n_ + i, n_ + i, -reg_);
      dslots_.push_back({n_ + i, -1.0});
    }
    const int z0 = n_ + p_;
    for (int i = 0; i < cones.num_linear(); ++i) {
      t.emplace_back(z0 + i, z0 + i, -1.0);
      wslots_.push_back({z0 + i, z0 + i});
    }
    for (const auto& b : cones.socs())
      for (int c = 0; c < b.dim; ++c)
        for (int r = c; r < b.dim; ++r) {
          t.emplace_back(z0 + b.start + r, z0 + b.start + c, r == c ? -1.0 : 0.0);
          wslots_.push_back({z0 + b.start + r, z0 + b.start + c});
        }
    K_.resize(dim, dim);
    K_.setFromTriplets(t.begin(), t.end());
    K_.makeCompressed();
    auto locate = [&](int r, int c) {
      const int* inner = K_.innerIndexPtr();
      const int begin = K_.outerIndexPtr()[c], end = K_.outerIndexPtr()[c + 1];
      return static_cast<int>(std::lower_bound(inner + begin, inner + end, r) - inner);
    };
    slot_index_.reserve(wslots_.size());
    for (auto [r, c] : wslots_) slot_index_.push_back(locate(r, c));
    for (auto& d : dslots_) d.index = locate(d.index, d.index);
    ldlt_.analyzePattern(K_);
    base_reg_ = reg_;
  }

  // Factorises with the base regularisation, escalating it when the
  // quasi-definite system turns numerically singular.
  bool factor() {
    for (reg_ = base_reg_; reg_ <= 1e-4; reg_ *= 100.0) {
      if (factor_once()) return true;
    }
    reg_ = base_reg_;
    return false;
  }

 private:
  bool factor_once() {
    for (const auto& d : dslots_) K_.valuePtr()[d.index] = d.sign * reg_;
    double* val = K_.valuePtr();
    size_t k = 0;
    const int l = cones_.num_linear();
    const Vec& w = cones_.lp_w();
    for (int i = 0; i < l; ++i) val[slot_index_[k++]] = -(w[i] * w[i]) - reg_;
    for (const auto& b : cones_.socs()) {
      Eigen::MatrixXd w2 = cones_.soc_w2(b);
      for (int c = 0; c < b.dim; ++c)
        for (int r = c; r < b.dim; ++r) val[slot_index_[k++]] = -w2(r, c) - (r == c ? reg_ : 0.0);
    }
    ldlt_.factorize(K_);
    if (ldlt_.info() != Eigen::Success) return false;
    const auto& dv = ldlt_.vectorD();
    return dv.allFinite() && dv.cwiseAbs().minCoeff() > 0.0;
  }

 public:

  Vec solve(const Vec& rhs, int refine) const {
    Vec sol = ldlt_.solve(rhs);
    const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
    Vec r = rhs - apply_true(sol);
    double rn = r.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < refine && rn >= 1e-14 * scale; ++it) {
      Vec next = sol + ldlt_.solve(r);
      Vec rnext = rhs - apply_true(next);
      const double nn = rnext.lpNorm<Eigen::Infinity>();
      if (nn >= rn) break;
      sol.swap(next);
      r.swap(rnext);
      const bool slow = nn > 0.5 * rn;
      rn = nn;
      if (slow) break;  // refinement has stalled; more passes rarely pay
    }
    return sol;
  }

 private:
  Vec apply_true(const Vec& v) const {
    Vec out(n_ + p_ + m_);
    auto vx = v.head(n_);
    auto vy = v.segment(n_, p_);
    auto vz = v.tail(m_);
    out.head(n_) = At_ * vy + Gt_ * vz;
    out.segment(n_, p_) = A_ * vx;
    out.tail(m_) = G_ * vx - cones_.apply_w2(vz);
    return out;
  }

  int n_, p_, m_;
  double reg_;
  const SpMat& A_;
  const SpMat& G_;
  SpMat At_, Gt_;
  const Cones& cones_;
  SpMat K_;
  std::vector<std::pair<int, int>> wslots_;
  struct DiagSlot {
    int index;
    double sign;
  };
  std::vector<DiagSlot> dslots_;
  double base_reg_ = 0.0;
  std::vector<int> slot_index_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

double safe_norm(const Vec& v) { return v.size() ? v.norm() : 0.0; }

}  // namespace

namespace {

ConeSolution solve_homogeneous(const ConeProblem& prob, const IpmSettings& st) {
  const int n = static_cast<int>(prob.c.size());
  const int p = static_cast<int>(prob.b.size());
  const int m = static_cast<int>(prob.h.size());
  if (prob.A.rows() != p || (p > 0 && prob.A.cols() != n))
    throw std::invalid_argument("A has inconsistent dimensions");
  if (prob.G.rows() != m || (m > 0 && prob.G.cols() != n))
    throw std::invalid_argument("G has inconsistent dimensions");
  SpMat A = prob.A, G = prob.G;
  if (A.cols() != n) A.resize(p, n);
  if (G.cols() != n) G.resize(m, n);
  ConeProblem local{prob.c, A, prob.b, G, prob.h, prob.num_linear, prob.soc_dims};

  Cones cones(prob.num_linear, prob.soc_dims);
  if (cones.size() != m) throw std::invalid_argument("cone dimensions do not match h");

  const Vec& c = local.c;
  const Vec& b = local.b;
  const Vec& h = local.h;
  const double cnorm = std::max(1.0, safe_norm(c));
  const double bnorm = std::max(1.0, safe_norm(b));
  const double hnorm = std::max(1.0, safe_norm(h));

  ConeSolution out;
  Kkt kkt(local, cones, st.static_reg);

  // Starting point from two least-squares style solves with W = I.
  cones.set_identity();
  if (!kkt.factor()) {
    out.status = SolveStatus::NumericalFailure;
    return out;
  }
  Vec rhs(n + p + m);
  rhs << Vec::Zero(n), b, h;
  Vec sol = kkt.solve(rhs, st.refinement_steps);
  Vec x = sol.head(n);
  Vec s = -sol.tail(m);
  const Vec e = cones.identity();
  {
    const double ap = cones.boundary_shift(s);
    if (ap >= -1e-8) s += (1.0 + std::max(ap, 0.0)) * e;
  }
  rhs << -c, Vec::Zero(p), Vec::Zero(m);
  sol = kkt.solve(rhs, st.refinement_steps);
  Vec y = sol.segment(n, p);
  Vec z = sol.tail(m);
  {
    const double ad = cones.boundary_shift(z);
    if (ad >= -1e-8) z += (1.0 + std::max(ad, 0.0)) * e;
  }
  double tau = 1.0, kap = 1.0;
  const int degree = cones.degree();

  Vec best_x, best_y, best_z, best_s;
  double best_merit = kInf, best_tau = 1.0;
  double best_pres = kInf, best_dres = kInf, best_gap = kInf;
  int last_progress = 0;

  auto finish = [&](SolveStatus status, double t) {
    out.status = status;
    out.x = x / t;
    out.y = y / t;
    out.z = z / t;
    out.s = s / t;
  };

  const SpMat At = A.transpose();
  const SpMat Gt = G.transpose();

  for (int iter = 0; iter <= st.max_iterations; ++iter) {
    out.iterations = iter;
    Vec rx = At * y + Gt * z + c * tau;
    Vec ry = A * x - b * tau;
    Vec rz = s + G * x - h * tau;
    const double cx = c.dot(x), by = b.dot(y), hz = h.dot(z);
    const double rt = kap + cx + by + hz;

    const double pres = std::max(safe_norm(ry) / bnorm, safe_norm(rz) / hnorm) / tau;
    const double dres = safe_norm(rx) / cnorm / tau;
    const double pcost = cx / tau;
    const double dcost = -(by + hz) / tau;
    const double gap = s.dot(z) / (tau * tau);
    double relgap = kInf;
    if (pcost < 0)
      relgap = gap / -pcost;
    else if (dcost > 0)
      relgap = gap / dcost;
    out.primal_residual = pres;
    out.dual_residual = dres;
    out.gap = gap;
    out.primal_objective = pcost;
    out.dual_objective = dcost;

    if (pres < st.feas_tol && dres < st.feas_tol && (gap < st.abs_tol || relgap < st.rel_tol)) {
      finish(SolveStatus::Optimal, tau);
      return out;
    }
    if (by + hz < 0) {
      const double pinf = safe_norm(Vec(At * y + Gt * z)) / (-(by + hz));
      if (pinf < st.feas_tol && tau < kap) {
        finish(SolveStatus::Infeasible, 1.0);
        out.x = Vec::Constant(n, std::numeric_limits<double>::quiet_NaN());
        out.y = y / (-(by + hz));
        out.z = z / (-(by + hz));
        return out;
      }
    }
    if (cx < 0) {
      // Certificate normalised to c'x = -1; residuals are absolute, since
      // dividing by |b| or |h| would accept anything on large right-hand sides.
      const double dinf = std::max(safe_norm(Vec(A * x)), safe_norm(Vec(G * x + s))) / (-cx);
      if (dinf < st.feas_tol && tau < kap) {
        finish(SolveStatus::Unbounded, 1.0);
        out.x = x / (-cx);
        out.s = s / (-cx);
        return out;
      }
    }
    const double merit = std::max({pres, dres, std::min(gap, relgap)});
    if (merit < 0.5 * best_merit) last_progress = iter;
    if (merit < best_merit) {
      best_merit = merit;
      best_x = x;
      best_y = y;
      best_z = z;
      best_s = s;
      best_tau = tau;
      best_pres = pres;
      best_dres = dres;
      best_gap = gap;
    }
    if (iter == st.max_iterations) break;
    // Only a nearly converged run counts as stalled; infeasibility and
    // unboundedness certificates can take many flat iterations to emerge.
    if (best_merit < 1e-4 && iter - last_progress > st.stall_iterations) break;

    auto fallback = [&]() {
      // Accept a slightly less accurate point rather than fail outright.
      const double loose = st.inaccurate_tol;
      x = best_x;
      y = best_y;
      z = best_z;
      s = best_s;
      out.primal_residual = best_pres;
      out.dual_residual = best_dres;
      out.gap = best_gap;
      finish(best_merit < loose ? SolveStatus::Optimal : SolveStatus::NumericalFailure, best_tau);
      out.primal_objective = c.dot(out.x);
      return out;
    };

    if (!cones.update_scaling(s, z) || !kkt.factor()) return fallback();
    const Vec lambda = cones.apply_w(z);
    const double mu = (s.dot(z) + tau * kap) / (degree + 1);

    rhs << c, -b, -h;
    const Vec u1 = kkt.solve(rhs, st.refinement_steps);
    const double qu1 = c.dot(u1.head(n)) + b.dot(u1.segment(n, p)) + h.dot(u1.tail(m));

    struct Dir {
      Vec dx, dy, dz, ds;
      double dtau, dkap;
    };
    auto direction = [&](double sigma, const Vec& xi, double dtk) {
      Vec r(n + p + m);
      r << -(1.0 - sigma) * rx, -(1.0 - sigma) * ry, -(1.0 - sigma) * rz - cones.apply_w(xi);
      const Vec u0 = kkt.solve(r, st.refinement_steps);
      const double qu0 = c.dot(u0.head(n)) + b.dot(u0.segment(n, p)) + h.dot(u0.tail(m));
      Dir d;
      d.dtau = ((1.0 - sigma) * rt + dtk / tau + qu0) / (kap / tau + qu1);
      const Vec u = u0 - d.dtau * u1;
      d.dx = u.head(n);
      d.dy = u.segment(n, p);
      d.dz = u.tail(m);
      d.ds = cones.apply_w(xi - cones.apply_w(d.dz));
      d.dkap = (dtk - kap * d.dtau) / tau;
      return d;
    };
    auto step_len = [&](const Dir& d) {
      double a = std::min(cones.max_step(s, d.ds), cones.max_step(z, d.dz));
      if (d.dtau < 0) a = std::min(a, -tau / d.dtau);
      if (d.dkap < 0) a = std::min(a, -kap / d.dkap);
      return a;
    };

    const Dir aff = direction(0.0, -lambda, -tau * kap);
    const double alpha_aff = std::min(1.0, step_len(aff));
    double sigma = std::pow(1.0 - alpha_aff, 3);
    sigma = std::clamp(sigma, 1e-4, 1.0);

    const Vec corr = cones.circ(cones.apply_winv(aff.ds), cones.apply_w(aff.dz));
    const Vec target = -cones.circ(lambda, lambda) - corr + sigma * mu * e;
    const Vec xi = cones.inv_circ(lambda, target);
    const double dtk = -tau * kap - aff.dtau * aff.dkap + sigma * mu;
    const Dir d = direction(sigma, xi, dtk);
    const double alpha = std::min(1.0, st.step_fraction * step_len(d));
    if (!std::isfinite(alpha) || alpha < 1e-12 || !d.dx.allFinite()) return fallback();

    x += alpha * d.dx;
    y += alpha * d.dy;
    z += alpha * d.dz;
    s += alpha * d.ds;
    tau += alpha * d.dtau;
    kap += alpha * d.dkap;
  }

  // Iteration cap reached or progress stalled.
  x = best_x;
  y = best_y;
  z = best_z;
  s = best_s;
  finish(best_merit < st.inaccurate_tol ? SolveStatus::Optimal : SolveStatus::MaxIterations, best_tau);
  out.primal_residual = best_pres;
  out.dual_residual = best_dres;
  out.gap = best_gap;
  out.primal_objective = c.dot(out.x);
  return out;
}

// Ruiz equilibration: column scales D and row scales E (one per SOC block so
// cone membership is preserved), applied as A <- E_A A D, G <- E_G G D.
struct Equilibration {
  Vec d, ea, eg;
};

Equilibration equilibrate(ConeProblem& p, int iterations) {
  const int n = static_cast<int>(p.c.size());
  const int rows_a = static_cast<int>(p.b.size());
  const int rows_g = static_cast<int>(p.h.size());
  Equilibration eq{Vec::Ones(n), Vec::Ones(rows_a), Vec::Ones(rows_g)};
  std::vector<int> block_of(static_cast<size_t>(rows_g));
  for (int i = 0; i < p.num_linear; ++i) block_of[static_cast<size_t>(i)] = i;
  {
    int r = p.num_linear, blk = p.num_linear;
    for (int dim : p.soc_dims) {
      for (int k = 0; k < dim; ++k) block_of[static_cast<size_t>(r++)] = blk;
      ++blk;
    }
  }
  const int num_blocks = p.num_linear + static_cast<int>(p.soc_dims.size());
  auto inv_sqrt = [](double v) { return v > 1e-300 ? 1.0 / std::sqrt(v) : 1.0; };
  for (int it = 0; it < iterations; ++it) {
    Vec col = Vec::Zero(n), ra = Vec::Zero(rows_a), blk = Vec::Zero(num_blocks);
    for (int k = 0; k < p.A.outerSize(); ++k)
      for (SpMat::InnerIterator e(p.A, k); e; ++e) {
        const double v = std::abs(e.value());
        col[k] = std::max(col[k], v);
        ra[e.row()] = std::max(ra[e.row()], v);
      }
    for (int k = 0; k < p.G.outerSize(); ++k)
      for (SpMat::InnerIterator e(p.G, k); e; ++e) {
        const double v = std::abs(e.value());
        col[k] = std::max(col[k], v);
        const int b = block_of[static_cast<size_t>(e.row())];
        blk[b] = std::max(blk[b], v);
      }
    Vec dc(n), ec(rows_a), gc(rows_g);
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
      dc[j] = inv_sqrt(col[j]);
      worst = std::max(worst, std::abs(1.0 - col[j]) * (col[j] > 0));
    }
    for (int i = 0; i < rows_a; ++i) {
      ec[i] = inv_sqrt(ra[i]);
      worst = std::max(worst, std::abs(1.0 - ra[i]) * (ra[i] > 0));
    }
    for (int i = 0; i < rows_g; ++i) {
      const double v = blk[block_of[static_cast<size_t>(i)]];
      gc[i] = inv_sqrt(v);
      worst = std::max(worst, std::abs(1.0 - v) * (v > 0));
    }
    if (worst < 1e-2) break;
    p.A = ec.asDiagonal() * p.A * dc.asDiagonal();
    p.G = gc.asDiagonal() * p.G * dc.asDiagonal();
    eq.d.array() *= dc.array();
    eq.ea.array() *= ec.array();
    eq.eg.array() *= gc.array();
  }
  p.c = eq.d.asDiagonal() * p.c;
  p.b = eq.ea.asDiagonal() * p.b;
  p.h = eq.eg.asDiagonal() * p.h;
  return eq;
}

}  // namespace

ConeSolution solve_cone_problem(const ConeProblem& prob, const IpmSettings& st) {
  const auto n = prob.c.size();
  if (prob.A.rows() != prob.b.size() || (prob.b.size() > 0 && prob.A.cols() != n))
    throw std::invalid_argument("A has inconsistent dimensions");
  if (prob.G.rows() != prob.h.size() || (prob.h.size() > 0 && prob.G.cols() != n))
    throw std::invalid_argument("G has inconsistent dimensions");
  if (st.equilibration_passes <= 0) return solve_homogeneous(prob, st);
  int cone_rows = prob.num_linear;
  for (int d : prob.soc_dims) cone_rows += d;
  if (cone_rows != prob.h.size()) throw std::invalid_argument("cone dimensions do not match h");

  ConeProblem scaled = prob;
  if (scaled.A.cols() != n) scaled.A.resize(scaled.b.size(), n);
  if (scaled.G.cols() != n) scaled.G.resize(scaled.h.size(), n);
  const Equilibration eq = equilibrate(scaled, st.equilibration_passes);
  ConeSolution out = solve_homogeneous(scaled, st);
  if (out.x.size() == n) out.x = eq.d.asDiagonal() * out.x;
  if (out.y.size() == prob.b.size()) out.y = eq.ea.asDiagonal() * out.y;
  if (out.z.size() == prob.h.size()) out.z = eq.eg.asDiagonal() * out.z;
  if (out.s.size() == prob.h.size()) out.s = eq.eg.cwiseInverse().asDiagonal() * out.s;
  return out;
}

}  // namespace uavmec
