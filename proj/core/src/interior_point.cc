#include "whcert/interior_point.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace whcert {
namespace conic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double Inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.cwiseProduct(b).sum();
}

// tr(A G) for symmetric A.
double TraceProduct(const Eigen::MatrixXd& A, const Eigen::MatrixXd& G) {
  return A.cwiseProduct(G.transpose()).sum();
}

void Symmetrize(Eigen::MatrixXd* m) {
  *m = (0.5 * (*m + m->transpose())).eval();
}

// Largest alpha with X + alpha dX >= 0 (infinity if unbounded).
double MaxStep(const Eigen::MatrixXd& X, const Eigen::MatrixXd& dX) {
  if (X.rows() == 1) {
    return dX(0, 0) < 0.0 ? -X(0, 0) / dX(0, 0) : kInf;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(X);
  if (llt.info() != Eigen::Success) return 0.0;
  const auto L = llt.matrixL();
  Eigen::MatrixXd W = L.solve(dX);
  W = L.solve(W.transpose()).transpose();
  Symmetrize(&W);
  const double lam =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(W, Eigen::EigenvaluesOnly)
          .eigenvalues()(0);
  return lam < 0.0 ? -1.0 / lam : kInf;
}

class Ipm {
 public:
  Ipm(const SdpProblem& p, const IpmOptions& o) : p_(p), o_(o) {
    nb_ = static_cast<int>(p_.blocks.size());
    total_dim_ = 0;
    for (const auto& blk : p_.blocks) total_dim_ += blk.dim;
    double cnorm = 0.0;
    for (const auto& blk : p_.blocks) cnorm += blk.C.squaredNorm();
    c_norm_ = std::sqrt(cnorm);
    b_norm_ = p_.b.norm();
  }

  IpmResult Run() {
    Initialize();
    IpmResult r;
    int stalls = 0;
    for (int iter = 0; iter <= o_.max_iterations; ++iter) {
      Residuals();
      r.iterations = iter;
      if (std::getenv("WHCERT_IPM_TRACE")) {
        std::fprintf(stderr, "%3d pobj %.6e dobj %.6e pinf %.2e dinf %.2e gap %.2e mu %.2e ap %.2e ad %.2e\n",
                     iter, pobj_, dobj_, pinf_, dinf_, gap_, mu_, alpha_p_, alpha_d_);
      }
      if (pinf_ < o_.tolerance && dinf_ < o_.tolerance && gap_ < o_.tolerance) {
        r.converged = true;
        r.message = "converged";
        break;
      }
      if (iter == o_.max_iterations) {
        r.message = "iteration limit";
        break;
      }
      if (!Step()) {
        r.message = "numerical failure: " + failure_;
        break;
      }
      if (std::min(alpha_p_, alpha_d_) < 1e-8) {
        if (++stalls >= 3) {
          r.message = "stalled";
          break;
        }
      } else {
        stalls = 0;
      }
      if (x_scale_ > 1e14) {
        r.message = "primal iterates diverging";
        break;
      }
    }
    Residuals();
    // Near-converged iterates are still useful to the caller.
    if (!r.converged && pinf_ < 1e3 * o_.tolerance && dinf_ < 1e3 * o_.tolerance &&
        gap_ < 1e3 * o_.tolerance) {
      r.converged = true;
      r.message += " (tolerance relaxed)";
    }
    r.y = y_;
    r.X = X_;
    r.Z = Z_;
    r.primal_objective = pobj_;
    r.dual_objective = dobj_;
    r.primal_infeasibility = pinf_;
    r.dual_infeasibility = dinf_;
    r.relative_gap = gap_;
    return r;
  }

 private:
  void Initialize() {
    y_ = Eigen::VectorXd::Zero(p_.m);
    X_.resize(nb_);
    Z_.resize(nb_);
    for (int k = 0; k < nb_; ++k) {
      const auto& blk = p_.blocks[k];
      const double d = blk.dim;
      double xi = std::max(10.0, std::sqrt(d));
      double zeta = std::max({10.0, std::sqrt(d), blk.C.norm()});
      for (size_t a = 0; a < blk.vars.size(); ++a) {
        const double an = blk.A[a].norm();
        xi = std::max(xi, d * (1.0 + std::abs(p_.b[blk.vars[a]])) / (1.0 + an));
        zeta = std::max(zeta, an);
      }
      X_[k] = xi * Eigen::MatrixXd::Identity(blk.dim, blk.dim);
      Z_[k] = zeta * Eigen::MatrixXd::Identity(blk.dim, blk.dim);
    }
  }

  void Residuals() {
    rp_ = p_.b;
    pobj_ = 0.0;
    double rd2 = 0.0;
    double xz = 0.0;
    Rd_.resize(nb_);
    x_scale_ = 0.0;
    for (int k = 0; k < nb_; ++k) {
      const auto& blk = p_.blocks[k];
      Eigen::MatrixXd rd = blk.C - Z_[k];
      for (size_t a = 0; a < blk.vars.size(); ++a) {
        const int i = blk.vars[a];
        rp_[i] -= Inner(blk.A[a], X_[k]);
        rd -= y_[i] * blk.A[a];
      }
      Rd_[k] = rd;
      rd2 += rd.squaredNorm();
      pobj_ += Inner(blk.C, X_[k]);
      xz += Inner(X_[k], Z_[k]);
      x_scale_ = std::max(x_scale_, X_[k].cwiseAbs().maxCoeff());
    }
    dobj_ = p_.b.dot(y_);
    mu_ = xz / total_dim_;
    pinf_ = rp_.norm() / (1.0 + b_norm_);
    dinf_ = std::sqrt(rd2) / (1.0 + c_norm_);
    gap_ = std::abs(pobj_ - dobj_) / (1.0 + std::abs(pobj_) + std::abs(dobj_));
  }

  bool Factor() {
    Zinv_.resize(nb_);
    for (int k = 0; k < nb_; ++k) {
      const int d = p_.blocks[k].dim;
      if (d == 1) {
        if (!(Z_[k](0, 0) > 0.0)) {
          failure_ = "Z lost definiteness";
          return false;
        }
        Zinv_[k] = Eigen::MatrixXd::Constant(1, 1, 1.0 / Z_[k](0, 0));
        continue;
      }
      Eigen::LLT<Eigen::MatrixXd> llt(Z_[k]);
      if (llt.info() != Eigen::Success) {
        failure_ = "Z lost definiteness";
        return false;
      }
      Zinv_[k] = llt.solve(Eigen::MatrixXd::Identity(d, d));
      Symmetrize(&Zinv_[k]);
    }
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(p_.m, p_.m);
    std::vector<Eigen::MatrixXd> G;
    for (int k = 0; k < nb_; ++k) {
      const auto& blk = p_.blocks[k];
      const size_t nv = blk.vars.size();
      if (blk.dim == 1) {
        const double w = X_[k](0, 0) * Zinv_[k](0, 0);
        for (size_t a = 0; a < nv; ++a) {
          const double ga = w * blk.A[a](0, 0);
          for (size_t c = a; c < nv; ++c) {
            M(blk.vars[a], blk.vars[c]) += ga * blk.A[c](0, 0);
          }
        }
        continue;
      }
      G.resize(nv);
      for (size_t a = 0; a < nv; ++a) G[a].noalias() = X_[k] * blk.A[a] * Zinv_[k];
      for (size_t a = 0; a < nv; ++a) {
        for (size_t c = a; c < nv; ++c) {
          M(blk.vars[a], blk.vars[c]) += TraceProduct(blk.A[c], G[a]);
        }
      }
    }
    // Only the upper triangle was filled (vars are ascending per block).
    M.triangularView<Eigen::StrictlyLower>() = M.transpose();
    llt_.compute(M);
    if (llt_.info() != Eigen::Success) {
      const double reg = 1e-13 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
      M.diagonal().array() += reg;
      llt_.compute(M);
      if (llt_.info() != Eigen::Success) {
        failure_ = "Schur complement not positive definite";
        return false;
      }
    }
    return true;
  }

  // Solves for (dy, dX, dZ) given G_k = (target) Z^{-1}; G empty means zero.
  void Direction(const std::vector<Eigen::MatrixXd>* G, Eigen::VectorXd* dy,
                 std::vector<Eigen::MatrixXd>* dX, std::vector<Eigen::MatrixXd>* dZ) {
    Eigen::VectorXd rhs = p_.b;
    std::vector<Eigen::MatrixXd> XRdZ(nb_);
    for (int k = 0; k < nb_; ++k) {
      const auto& blk = p_.blocks[k];
      XRdZ[k].noalias() = X_[k] * Rd_[k] * Zinv_[k];
      Eigen::MatrixXd H = XRdZ[k];
      if (G) H -= (*G)[k];
      for (size_t a = 0; a < blk.vars.size(); ++a) {
        rhs[blk.vars[a]] += TraceProduct(blk.A[a], H);
      }
    }
    *dy = llt_.solve(rhs);
    dX->resize(nb_);
    dZ->resize(nb_);
    for (int k = 0; k < nb_; ++k) {
      const auto& blk = p_.blocks[k];
      Eigen::MatrixXd dz = Rd_[k];
      for (size_t a = 0; a < blk.vars.size(); ++a) dz -= (*dy)[blk.vars[a]] * blk.A[a];
      Symmetrize(&dz);
      Eigen::MatrixXd dx = -X_[k] - X_[k] * dz * Zinv_[k];
      if (G) dx += (*G)[k];
      Symmetrize(&dx);
      (*dX)[k] = std::move(dx);
      (*dZ)[k] = std::move(dz);
    }
  }

  void StepLengths(const std::vector<Eigen::MatrixXd>& dX,
                   const std::vector<Eigen::MatrixXd>& dZ, double* ap, double* ad) {
    double sp = kInf, sd = kInf;
    for (int k = 0; k < nb_; ++k) {
      sp = std::min(sp, MaxStep(X_[k], dX[k]));
      sd = std::min(sd, MaxStep(Z_[k], dZ[k]));
    }
    *ap = sp;
    *ad = sd;
  }

  bool Step() {
    if (!Factor()) return false;
    Eigen::VectorXd dy_a;
    std::vector<Eigen::MatrixXd> dX_a, dZ_a;
    Direction(nullptr, &dy_a, &dX_a, &dZ_a);
    double ap, ad;
    StepLengths(dX_a, dZ_a, &ap, &ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double xz_aff = 0.0;
    for (int k = 0; k < nb_; ++k) {
      xz_aff += Inner(X_[k] + ap * dX_a[k], Z_[k] + ad * dZ_a[k]);
    }
    const double mu_aff = xz_aff / total_dim_;
    double sigma = std::pow(std::max(0.0, mu_aff) / mu_, 3.0);
    sigma = std::clamp(sigma, 0.0, 1.0);

    std::vector<Eigen::MatrixXd> G(nb_);
    for (int k = 0; k < nb_; ++k) {
      const int d = p_.blocks[k].dim;
      Eigen::MatrixXd target = sigma * mu_ * Eigen::MatrixXd::Identity(d, d) - dX_a[k] * dZ_a[k];
      G[k].noalias() = target * Zinv_[k];
    }
    Eigen::VectorXd dy;
    std::vector<Eigen::MatrixXd> dX, dZ;
    Direction(&G, &dy, &dX, &dZ);
    StepLengths(dX, dZ, &ap, &ad);
    const double tau = 0.95;
    alpha_p_ = std::min(1.0, tau * ap);
    alpha_d_ = std::min(1.0, tau * ad);
    if (!std::isfinite(alpha_p_) || !std::isfinite(alpha_d_) || !dy.allFinite()) {
      failure_ = "non-finite direction";
      return false;
    }
    for (int k = 0; k < nb_; ++k) {
      X_[k] += alpha_p_ * dX[k];
      Z_[k] += alpha_d_ * dZ[k];
      Symmetrize(&X_[k]);
      Symmetrize(&Z_[k]);
    }
    y_ += alpha_d_ * dy;
    return true;
  }

  const SdpProblem& p_;
  const IpmOptions& o_;
  int nb_ = 0;
  int total_dim_ = 0;
  double c_norm_ = 0.0;
  double b_norm_ = 0.0;

  Eigen::VectorXd y_;
  std::vector<Eigen::MatrixXd> X_, Z_, Rd_, Zinv_;
  Eigen::VectorXd rp_;
  double pobj_ = 0.0, dobj_ = 0.0, mu_ = 0.0;
  double pinf_ = 0.0, dinf_ = 0.0, gap_ = 0.0;
  double alpha_p_ = 0.0, alpha_d_ = 0.0;
  double x_scale_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  std::string failure_;
};

}  // namespace

IpmResult SolveSdp(const SdpProblem& problem, const IpmOptions& options) {
  if (problem.b.size() != problem.m) {
    IpmResult r;
    r.message = "b has wrong size";
    return r;
  }
  if (problem.blocks.empty()) {
    IpmResult r;
    r.y = Eigen::VectorXd::Zero(problem.m);
    r.message = "no blocks";
    return r;
  }
  return Ipm(problem, options).Run();
}

}  // namespace conic
}  // namespace whcert
