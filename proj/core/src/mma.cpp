// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#include "gpamr/mma.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace gpamr {

using Eigen::ArrayXd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MoveLimitBox apply_move_limit(const VectorXd& z_prev, double move, const VectorXd& lo,
                              const VectorXd& hi) {
  if (!(move > 0.0 && move <= 1.0))
    throw std::invalid_argument("apply_move_limit: move limit must lie in (0,1]");
  MoveLimitBox box;
  box.lower = lo.cwiseMax((z_prev.array() - move).matrix());
  box.upper = hi.cwiseMin((z_prev.array() + move).matrix());
  return box;
}

MmaOptimizer::MmaOptimizer(Eigen::Index n_vars, int n_constraints, MmaOptions options)
    : n_(n_vars), m_(n_constraints), opt_(options) {
  low_ = VectorXd::Zero(n_);
  upp_ = VectorXd::Ones(n_);
  xold1_ = VectorXd::Zero(n_);
  xold2_ = VectorXd::Zero(n_);
}

namespace {

struct Subproblem {
  ArrayXd low, upp, alfa, beta, p0, q0;
  MatrixXd P, Q;  // m x n
  VectorXd b, c;  // m
};

// Primal-dual interior-point solve of the MMA subproblem. Returns the new
// design point; throws if the Newton iteration stalls at a large residual.
ArrayXd solve_subproblem(const Subproblem& sp, double epsimin) {
  const Eigen::Index n = sp.alfa.size();
  const Eigen::Index m = sp.b.size();
  const double a0 = 1.0;
  const VectorXd a = VectorXd::Zero(m);
  const VectorXd d = VectorXd::Ones(m);

  ArrayXd x = 0.5 * (sp.alfa + sp.beta);
  ArrayXd y = ArrayXd::Ones(m);
  double z = 1.0;
  ArrayXd lam = ArrayXd::Ones(m);
  ArrayXd xsi = (1.0 / (x - sp.alfa)).max(1.0);
  ArrayXd eta = (1.0 / (sp.beta - x)).max(1.0);
  ArrayXd mu = (0.5 * sp.c.array()).max(1.0);
  double zet = 1.0;
  ArrayXd s = ArrayXd::Ones(m);

  const auto residual = [&](const ArrayXd& xv, const ArrayXd& yv, double zv,
                            const ArrayXd& lamv, const ArrayXd& xsiv, const ArrayXd& etav,
                            const ArrayXd& muv, double zetv, const ArrayXd& sv,
                            double epsi, double* out_max) {
    const ArrayXd ux1 = sp.upp - xv;
    const ArrayXd xl1 = xv - sp.low;
    const ArrayXd plam = sp.p0 + (sp.P.transpose() * lamv.matrix()).array();
    const ArrayXd qlam = sp.q0 + (sp.Q.transpose() * lamv.matrix()).array();
    const ArrayXd gvec = (sp.P * (1.0 / ux1).matrix()).array() +
                         (sp.Q * (1.0 / xl1).matrix()).array();
    const ArrayXd rex = plam / ux1.square() - qlam / xl1.square() - xsiv + etav;
    const ArrayXd rey = sp.c.array() + d.array() * yv - muv - lamv;
    const double rez = a0 - zetv - (a.array() * lamv).sum();
    const ArrayXd relam = gvec - a.array() * zv - yv + sv - sp.b.array();
    const ArrayXd rexsi = xsiv * (xv - sp.alfa) - epsi;
    const ArrayXd reeta = etav * (sp.beta - xv) - epsi;
    const ArrayXd remu = muv * yv - epsi;
    const double rezet = zetv * zv - epsi;
    const ArrayXd res = lamv * sv - epsi;
    double sq = rex.square().sum() + rey.square().sum() + rez * rez +
                relam.square().sum() + rexsi.square().sum() + reeta.square().sum() +
                remu.square().sum() + rezet * rezet + res.square().sum();
    double mx = std::max({rex.abs().maxCoeff(), rey.abs().maxCoeff(), std::abs(rez),
                          relam.abs().maxCoeff(), rexsi.abs().maxCoeff(),
                          reeta.abs().maxCoeff(), remu.abs().maxCoeff(), std::abs(rezet),
                          res.abs().maxCoeff()});
    if (out_max) *out_max = mx;
    return std::sqrt(sq);
  };

  double epsi = 1.0;
  double residumax = 0.0;
  double residunorm = residual(x, y, z, lam, xsi, eta, mu, zet, s, epsi, &residumax);
  while (epsi > epsimin) {
    residunorm = residual(x, y, z, lam, xsi, eta, mu, zet, s, epsi, &residumax);
    int ittt = 0;
    while (residumax > 0.9 * epsi && ittt < 200) {
      ++ittt;
      const ArrayXd ux1 = sp.upp - x;
      const ArrayXd xl1 = x - sp.low;
      const ArrayXd ux2 = ux1.square();
      const ArrayXd xl2 = xl1.square();
      const ArrayXd ux3 = ux1 * ux2;
      const ArrayXd xl3 = xl1 * xl2;
      const ArrayXd plam = sp.p0 + (sp.P.transpose() * lam.matrix()).array();
      const ArrayXd qlam = sp.q0 + (sp.Q.transpose() * lam.matrix()).array();
      const ArrayXd gvec = (sp.P * (1.0 / ux1).matrix()).array() +
                           (sp.Q * (1.0 / xl1).matrix()).array();
      // GG = P diag(1/ux2) - Q diag(1/xl2)
      MatrixXd GG(m, n);
      for (Eigen::Index j = 0; j < n; ++j)
        GG.col(j) = sp.P.col(j) / ux2(j) - sp.Q.col(j) / xl2(j);

      const ArrayXd dpsidx = plam / ux2 - qlam / xl2;
      const ArrayXd delx = dpsidx - epsi / (x - sp.alfa) + epsi / (sp.beta - x);
      const ArrayXd dely = sp.c.array() + d.array() * y - lam - epsi / y;
      const double delz = a0 - (a.array() * lam).sum() - epsi / z;
      const ArrayXd dellam = gvec - a.array() * z - y - sp.b.array() + epsi / lam;
      ArrayXd diagx = 2.0 * (plam / ux3 + qlam / xl3);
      diagx += xsi / (x - sp.alfa) + eta / (sp.beta - x);
      const ArrayXd diagxinv = 1.0 / diagx;
      const ArrayXd diagy = d.array() + mu / y;
      const ArrayXd diagyinv = 1.0 / diagy;
      const ArrayXd diaglam = s / lam;
      const ArrayXd diaglamyi = diaglam + diagyinv;

      // m is small here, so solve the (m+1)x(m+1) condensed system.
      VectorXd blam(m);
      blam = (dellam + dely / diagy).matrix() - GG * (delx / diagx).matrix();
      VectorXd bb(m + 1);
      bb.head(m) = blam;
      bb(m) = delz;
      MatrixXd Alam = (diaglamyi.matrix()).asDiagonal();
      Alam += GG * diagxinv.matrix().asDiagonal() * GG.transpose();
      MatrixXd AA(m + 1, m + 1);
      AA.topLeftCorner(m, m) = Alam;
      AA.topRightCorner(m, 1) = a;
      AA.bottomLeftCorner(1, m) = a.transpose();
      AA(m, m) = -zet / z;
      const VectorXd solut = AA.fullPivLu().solve(bb);
      const ArrayXd dlam = solut.head(m).array();
      const double dz = solut(m);
      const ArrayXd dx = -delx / diagx - (GG.transpose() * dlam.matrix()).array() / diagx;
      const ArrayXd dy = -dely / diagy + dlam / diagy;
      const ArrayXd dxsi = -xsi + epsi / (x - sp.alfa) - (xsi * dx) / (x - sp.alfa);
      const ArrayXd deta = -eta + epsi / (sp.beta - x) + (eta * dx) / (sp.beta - x);
      const ArrayXd dmu = -mu + epsi / y - (mu * dy) / y;
      const double dzet = -zet + epsi / z - zet * dz / z;
      const ArrayXd ds = -s + epsi / lam - (s * dlam) / lam;

      // Largest step keeping all positivity conditions with margin 1/1.01.
      double stm = 1.0;
      const auto upd = [&stm](const ArrayXd& v, const ArrayXd& dv) {
        for (Eigen::Index i = 0; i < v.size(); ++i)
          stm = std::max(stm, -1.01 * dv(i) / v(i));
      };
      upd(y, dy);
      upd(lam, dlam);
      upd(xsi, dxsi);
      upd(eta, deta);
      upd(mu, dmu);
      upd(s, ds);
      stm = std::max(stm, -1.01 * dz / z);
      stm = std::max(stm, -1.01 * dzet / zet);
      upd(x - sp.alfa, dx);
      upd(sp.beta - x, -dx);
      double steg = 1.0 / stm;

      const ArrayXd xold = x, yold = y, lamold = lam, xsiold = xsi, etaold = eta,
                    muold = mu, sold = s;
      const double zold = z, zetold = zet;
      double resinew = 2.0 * residunorm;
      int itto = 0;
      while (resinew > residunorm && itto < 50) {
        ++itto;
        x = xold + steg * dx;
        y = yold + steg * dy;
        z = zold + steg * dz;
        lam = lamold + steg * dlam;
        xsi = xsiold + steg * dxsi;
        eta = etaold + steg * deta;
        mu = muold + steg * dmu;
        zet = zetold + steg * dzet;
        s = sold + steg * ds;
        resinew = residual(x, y, z, lam, xsi, eta, mu, zet, s, epsi, &residumax);
        steg *= 0.5;
      }
      residunorm = resinew;
    }
    epsi *= 0.1;
  }
  if (residumax > 1.0)
    throw std::runtime_error("MMA subproblem did not converge (residual " +
                             std::to_string(residumax) + ")");
  return x;
}

}  // namespace

VectorXd MmaOptimizer::step(const VectorXd& zv, double /*objective*/,
                            const VectorXd& df0, const VectorXd& fval,
                            const MatrixXd& dfdx, const MoveLimitBox& box) {
  if (zv.size() != n_ || df0.size() != n_ || fval.size() != m_ || dfdx.rows() != m_ ||
      dfdx.cols() != n_ || box.lower.size() != n_ || box.upper.size() != n_)
    throw std::invalid_argument("MmaOptimizer::step: inconsistent dimensions");
  if (!df0.allFinite() || !dfdx.allFinite() || !fval.allFinite())
    throw std::invalid_argument("MmaOptimizer::step: non-finite inputs");

  ++iter_;
  const ArrayXd x = zv.array();
  // Scaled variables live in [0,1], so the reference range xmami is one.
  if (iter_ <= 2) {
    low_ = (x - opt_.asymptote_init).matrix();
    upp_ = (x + opt_.asymptote_init).matrix();
  } else {
    ArrayXd factor = ArrayXd::Ones(n_);
    const ArrayXd zzz = (x - xold1_.array()) * (xold1_.array() - xold2_.array());
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (zzz(j) > 0) factor(j) = opt_.asymptote_increase;
      else if (zzz(j) < 0) factor(j) = opt_.asymptote_decrease;
    }
    ArrayXd low = x - factor * (xold1_.array() - low_.array());
    ArrayXd upp = x + factor * (upp_.array() - xold1_.array());
    low = low.max(x - 10.0).min(x - 0.01);
    upp = upp.min(x + 10.0).max(x + 0.01);
    low_ = low.matrix();
    upp_ = upp.matrix();
  }

  Subproblem sp;
  sp.low = low_.array();
  sp.upp = upp_.array();
  sp.alfa = (sp.low + opt_.bound_offset * (x - sp.low)).max(box.lower.array());
  sp.beta = (sp.upp - opt_.bound_offset * (sp.upp - x)).min(box.upper.array());

  const ArrayXd ux2 = (sp.upp - x).square();
  const ArrayXd xl2 = (x - sp.low).square();
  const ArrayXd df0p = df0.array().max(0.0);
  const ArrayXd df0m = (-df0.array()).max(0.0);
  const ArrayXd pq0 = 0.001 * (df0p + df0m) + opt_.raa0;
  sp.p0 = (df0p + pq0) * ux2;
  sp.q0 = (df0m + pq0) * xl2;

  sp.P.resize(m_, n_);
  sp.Q.resize(m_, n_);
  for (int i = 0; i < m_; ++i) {
    const ArrayXd dfi = dfdx.row(i).transpose().array();
    const ArrayXd pp = dfi.max(0.0);
    const ArrayXd qq = (-dfi).max(0.0);
    const ArrayXd pq = 0.001 * (pp + qq) + opt_.raa0;
    sp.P.row(i) = ((pp + pq) * ux2).matrix().transpose();
    sp.Q.row(i) = ((qq + pq) * xl2).matrix().transpose();
  }
  sp.b = sp.P * (1.0 / (sp.upp - x)).matrix() + sp.Q * (1.0 / (x - sp.low)).matrix() -
         fval;
  sp.c = VectorXd::Constant(m_, opt_.constraint_penalty);

  const ArrayXd xnew = solve_subproblem(sp, opt_.epsimin);

  xold2_ = iter_ >= 2 ? xold1_ : zv;
  xold1_ = zv;
  return xnew.matrix();
}

bool design_converged(const std::vector<VectorXd>& history, double tol) {
  const size_t k = history.size();
  if (k < 3) return false;
  const VectorXd& cur = history[k - 1];
  return (cur - history[k - 2]).lpNorm<Eigen::Infinity>() < tol &&
         (cur - history[k - 3]).lpNorm<Eigen::Infinity>() < tol;
}

}  // namespace gpamr
