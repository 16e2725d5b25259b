// Copyright 2026 The maxqfi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Minimal fidelity between two Kraus channels,
//
//   f_min(Ka, Kb) = min_{rho} || M(rho) ||_1 = max_{||W|| <= 1} 1/2 lambda_min(K_W + K_W^H),
//
// with M_ij = Tr[rho Fa_i^H Fb_j] and K_W = sum_ij w_ij Fa_i^H Fb_j. Both sides
// are posed as SDPs. Whichever side is solved, the returned value is bracketed
// by two certificates evaluated in closed form: the W side with W pulled into
// the unit ball gives a lower bound, the probe side with rho projected onto
// the state space gives an upper bound.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "maxqfi/channels.hpp"
#include "maxqfi/error.hpp"
#include "maxqfi/linalg.hpp"
#include "maxqfi/sdp.hpp"

namespace maxqfi {

struct FidelityResult {
  double f_min = 0.0;           // midpoint of [lower, upper]
  double lower = 0.0;           // 1/2 lambda_min(K_W + K_W^H) at w_opt
  double upper = 0.0;           // ||M(probe_opt)||_1
  double gap = 0.0;             // upper - lower
  ComplexMatrix w_opt;          // contraction, ||W||_op <= 1
  ComplexMatrix probe_opt;      // reduced probe rho^S
  double t = 0.0;               // primal epigraph variable (primal solve only)
  ComplexMatrix p;              // dual certificate blocks (dual solve only)
  ComplexMatrix q;
  sdp::SdpStatus status = sdp::SdpStatus::Optimal;
  double solver_gap = 0.0;
  int iterations = 0;
};

struct EigenAngles {
  RealVector angles;  // descending, each in (-pi, pi]
  double spread() const { return angles.size() == 0 ? 0.0 : angles(0) - angles(angles.size() - 1); }
};

namespace chandist_detail {

inline void require_compatible(const KrausChannel& ka, const KrausChannel& kb, const char* who) {
  if (ka.rank() != kb.rank())
    fail(ErrorCode::RankMismatch, std::string(who) + ": Kraus ranks " + std::to_string(ka.rank()) + " and " +
                                      std::to_string(kb.rank()) + " differ");
  if (ka.dim_in() != kb.dim_in() || ka.dim_out() != kb.dim_out())
    fail(ErrorCode::DimMismatch, std::string(who) + ": channel dimensions differ");
}

// G_ij = Fa_i^H Fb_j, stored at i * d + j.
inline std::vector<ComplexMatrix> cross_products(const KrausChannel& ka, const KrausChannel& kb) {
  const std::size_t d = ka.rank();
  std::vector<ComplexMatrix> g(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) g[i * d + j] = ka[i].adjoint() * kb[j];
  return g;
}

// Hermitian basis of n x n matrices: E_kk, then E_kl + E_lk and i(E_kl - E_lk) for k < l.
inline std::vector<ComplexMatrix> hermitian_basis(Eigen::Index n) {
  std::vector<ComplexMatrix> out;
  for (Eigen::Index k = 0; k < n; ++k) {
    ComplexMatrix e = ComplexMatrix::Zero(n, n);
    e(k, k) = 1.0;
    out.push_back(e);
  }
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index l = k + 1; l < n; ++l) {
      ComplexMatrix s = ComplexMatrix::Zero(n, n), a = ComplexMatrix::Zero(n, n);
      s(k, l) = s(l, k) = 1.0;
      a(k, l) = kI;
      a(l, k) = -kI;
      out.push_back(s);
      out.push_back(a);
    }
  return out;
}

// Traceless Hermitian basis: E_kk - E_{n-1,n-1} and the off-diagonal elements above.
inline std::vector<ComplexMatrix> traceless_basis(Eigen::Index n) {
  std::vector<ComplexMatrix> out;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    ComplexMatrix e = ComplexMatrix::Zero(n, n);
    e(k, k) = 1.0;
    e(n - 1, n - 1) = -1.0;
    out.push_back(e);
  }
  auto all = hermitian_basis(n);
  for (std::size_t i = static_cast<std::size_t>(n); i < all.size(); ++i) out.push_back(all[i]);
  return out;
}

// Nearest density matrix in Frobenius norm: eigenvalues projected onto the simplex.
inline ComplexMatrix project_to_state(const ComplexMatrix& a) {
  const auto es = linalg::herm_eig(linalg::hermitian_part(a), 1e-6);
  const Eigen::Index n = es.values.size();
  std::vector<double> v(es.values.data(), es.values.data() + n), s = v;
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cum += s[static_cast<std::size_t>(k)];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (s[static_cast<std::size_t>(k)] - t > 0.0) theta = t;
  }
  RealVector lam(n);
  for (Eigen::Index k = 0; k < n; ++k) lam(k) = std::max(v[static_cast<std::size_t>(k)] - theta, 0.0);
  return linalg::hermitian_part(es.vectors * lam.asDiagonal() * es.vectors.adjoint());
}

inline ComplexMatrix kw_from(const std::vector<ComplexMatrix>& g, std::size_t d, const ComplexMatrix& w) {
  ComplexMatrix k = ComplexMatrix::Zero(g.front().rows(), g.front().cols());
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const Complex c = w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (c != Complex(0.0, 0.0)) k += c * g[i * d + j];
    }
  return k;
}

inline ComplexMatrix m_from(const std::vector<ComplexMatrix>& g, std::size_t d, const ComplexMatrix& rho) {
  const auto n = static_cast<Eigen::Index>(d);
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (rho.transpose().cwiseProduct(g[i * d + j])).sum();
  return m;
}

/// Contraction maximizing Re Tr(rho K_W) for fixed rho: the polar factor V U^H of M^T = U S V^H.
inline ComplexMatrix polar_w(const std::vector<ComplexMatrix>& g, std::size_t d, const ComplexMatrix& rho) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m_from(g, d, rho).transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixV() * svd.matrixU().adjoint();
}

inline double lower_at(const std::vector<ComplexMatrix>& g, std::size_t d, ComplexMatrix& w) {
  const double wn = linalg::op_norm(w);
  if (wn > 1.0) w /= wn;
  const ComplexMatrix k = kw_from(g, d, w);
  return 0.5 * linalg::min_eigenvalue(ComplexMatrix(k + k.adjoint()));
}

// Fills lower/upper/f_min/gap from a candidate pair (W, rho). The polar factor
// of M(rho) is tried as a second W; it is exact whenever rho is optimal.
inline void certify(const std::vector<ComplexMatrix>& g, std::size_t d, ComplexMatrix w, ComplexMatrix rho,
                    FidelityResult& out) {
  rho = project_to_state(rho);
  out.lower = lower_at(g, d, w);
  ComplexMatrix wp = polar_w(g, d, rho);
  const double lp = lower_at(g, d, wp);
  if (lp > out.lower) {
    out.lower = lp;
    w = std::move(wp);
  }
  out.upper = linalg::trace_norm(m_from(g, d, rho));
  // Rounding can invert a bracket of width ~1e-16; order it so gap >= 0.
  if (out.lower > out.upper) std::swap(out.lower, out.upper);
  out.f_min = 0.5 * (out.lower + out.upper);
  out.gap = out.upper - out.lower;
  out.w_opt = std::move(w);
  out.probe_opt = std::move(rho);
}

inline sdp::SdpOptions tight_options() {
  sdp::SdpOptions o;
  o.gap_tol = 1e-12;
  o.feas_tol = 1e-12;
  o.max_iter = 200;
  return o;
}

}  // namespace chandist_detail

/// K_W = sum_ij w_ij Fa_i^H Fb_j.
inline ComplexMatrix kw_matrix(const KrausChannel& ka, const KrausChannel& kb, const ComplexMatrix& w) {
  chandist_detail::require_compatible(ka, kb, "kw_matrix");
  const auto d = static_cast<Eigen::Index>(ka.rank());
  if (w.rows() != d || w.cols() != d) fail(ErrorCode::DimMismatch, "kw_matrix: W must be d x d");
  return chandist_detail::kw_from(chandist_detail::cross_products(ka, kb), ka.rank(), w);
}

/// M_ij = Tr[rho Fa_i^H Fb_j].
inline ComplexMatrix m_matrix(const DensityMatrix& rho, const KrausChannel& ka, const KrausChannel& kb) {
  chandist_detail::require_compatible(ka, kb, "m_matrix");
  if (rho.dim() != ka.dim_in()) fail(ErrorCode::DimMismatch, "m_matrix: probe dimension differs from dim_in");
  return chandist_detail::m_from(chandist_detail::cross_products(ka, kb), ka.rank(), rho.matrix());
}

/// max 1/2 t  s.t.  [[I, W^H], [W, I]] >= 0,  K_W + K_W^H - t I >= 0.
inline FidelityResult min_fidelity_primal(const KrausChannel& ka, const KrausChannel& kb,
                                          const sdp::SdpOptions& opt = chandist_detail::tight_options()) {
  using namespace chandist_detail;
  require_compatible(ka, kb, "min_fidelity_primal");
  const std::size_t d = ka.rank();
  const auto di = static_cast<Eigen::Index>(d);
  const Eigen::Index n = ka.dim_in();
  const auto g = cross_products(ka, kb);
  const int nv = static_cast<int>(2 * d * d + 1);

  sdp::SdpProblem p;
  p.num_vars = nv;
  p.objective = RealVector::Zero(nv);
  p.objective(nv - 1) = 0.5;
  sdp::LmiBlock ball{linalg::identity(2 * di), std::vector<ComplexMatrix>(static_cast<std::size_t>(nv))};
  sdp::LmiBlock eig{ComplexMatrix::Zero(n, n), std::vector<ComplexMatrix>(static_cast<std::size_t>(nv))};
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const std::size_t k = i * d + j;
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      ComplexMatrix re = ComplexMatrix::Zero(2 * di, 2 * di), im = re;
      re(di + ii, jj) = 1.0;
      re(jj, di + ii) = 1.0;
      im(di + ii, jj) = kI;
      im(jj, di + ii) = -kI;
      ball.coeffs[2 * k] = std::move(re);
      ball.coeffs[2 * k + 1] = std::move(im);
      eig.coeffs[2 * k] = linalg::hermitian_part(g[k]) * 2.0;
      eig.coeffs[2 * k + 1] = linalg::hermitian_part(ComplexMatrix(kI * g[k])) * 2.0;
    }
  eig.coeffs[static_cast<std::size_t>(nv - 1)] = -linalg::identity(n);
  p.blocks = {std::move(ball), std::move(eig)};

  const auto sol = sdp::solve(p, opt);
  ComplexMatrix w(di, di);
  for (std::size_t k = 0; k < d * d; ++k)
    w(static_cast<Eigen::Index>(k / d), static_cast<Eigen::Index>(k % d)) = Complex(sol.y(2 * k), sol.y(2 * k + 1));

  FidelityResult out;
  certify(g, d, w, 2.0 * sol.multipliers[1], out);
  out.t = sol.y(nv - 1);
  out.status = sol.status;
  out.solver_gap = sol.gap;
  out.iterations = sol.iterations;
  return out;
}

/// min 1/2 Tr P + 1/2 Tr Q  s.t.  [[P, M^H], [M, Q]] >= 0,  rho >= 0,  Tr rho = 1.
inline FidelityResult min_fidelity_dual(const KrausChannel& ka, const KrausChannel& kb,
                                        const sdp::SdpOptions& opt = chandist_detail::tight_options()) {
  using namespace chandist_detail;
  require_compatible(ka, kb, "min_fidelity_dual");
  const std::size_t d = ka.rank();
  const auto di = static_cast<Eigen::Index>(d);
  const Eigen::Index n = ka.dim_in();
  const auto g = cross_products(ka, kb);
  const auto hb = hermitian_basis(di);
  const auto tb = traceless_basis(n);
  const std::size_t nh = hb.size(), nt = tb.size();
  const int nv = static_cast<int>(2 * nh + nt);

  // Embeds M into the lower-left block and M^H into the upper-right block.
  auto embed_m = [&](const ComplexMatrix& m) {
    ComplexMatrix out = ComplexMatrix::Zero(2 * di, 2 * di);
    out.block(di, 0, di, di) = m;
    out.block(0, di, di, di) = m.adjoint();
    return out;
  };

  sdp::SdpProblem p;
  p.num_vars = nv;
  p.objective = RealVector::Zero(nv);
  const ComplexMatrix rho0 = linalg::identity(n) / static_cast<double>(n);
  sdp::LmiBlock joint{embed_m(m_from(g, d, rho0)), std::vector<ComplexMatrix>(static_cast<std::size_t>(nv))};
  sdp::LmiBlock state{rho0, std::vector<ComplexMatrix>(static_cast<std::size_t>(nv))};
  for (std::size_t k = 0; k < nh; ++k) {
    ComplexMatrix pk = ComplexMatrix::Zero(2 * di, 2 * di), qk = pk;
    pk.block(0, 0, di, di) = hb[k];
    qk.block(di, di, di, di) = hb[k];
    joint.coeffs[k] = std::move(pk);
    joint.coeffs[nh + k] = std::move(qk);
    const double tr = hb[k].trace().real();
    p.objective(static_cast<Eigen::Index>(k)) = -0.5 * tr;
    p.objective(static_cast<Eigen::Index>(nh + k)) = -0.5 * tr;
  }
  for (std::size_t k = 0; k < nt; ++k) {
    joint.coeffs[2 * nh + k] = embed_m(m_from(g, d, tb[k]));
    state.coeffs[2 * nh + k] = tb[k];
  }
  p.blocks = {std::move(joint), std::move(state)};

  const auto sol = sdp::solve(p, opt);
  auto assemble = [&](std::size_t offset, const std::vector<ComplexMatrix>& basis, ComplexMatrix init) {
    for (std::size_t k = 0; k < basis.size(); ++k) init += sol.y(static_cast<Eigen::Index>(offset + k)) * basis[k];
    return init;
  };
  const ComplexMatrix pm = assemble(0, hb, ComplexMatrix::Zero(di, di));
  const ComplexMatrix qm = assemble(nh, hb, ComplexMatrix::Zero(di, di));
  const ComplexMatrix rho = assemble(2 * nh, tb, rho0);
  // The multiplier of the joint block is [[I/2, -W^T/2], [-conj(W)/2, I/2]]:
  // 2 Re Tr(M X12) = -Re sum_ij M_ij W_ij pairs M_ij with (X12)_ji.
  const ComplexMatrix w = -2.0 * sol.multipliers[0].block(0, di, di, di).transpose();

  FidelityResult out;
  certify(g, d, w, rho, out);
  out.p = pm;
  out.q = qm;
  out.status = sol.status;
  out.solver_gap = sol.gap;
  out.iterations = sol.iterations;
  return out;
}

/// Eigen-angles E with eigenvalues exp(-i E), mapped to (-pi, pi] and sorted descending.
inline EigenAngles eigen_angles(const ComplexMatrix& u) {
  linalg::require_square(u, "eigen_angles");
  if (linalg::unitarity_defect(u) > 1e-8) fail(ErrorCode::NotUnitary, "eigen_angles: ||U^H U - I|| > 1e-8");
  Eigen::ComplexEigenSolver<ComplexMatrix> es(u, false);
  if (es.info() != Eigen::Success) fail(ErrorCode::NoConvergence, "eigen_angles: eigensolver did not converge");
  RealVector a(u.rows());
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    double e = -std::arg(es.eigenvalues()(k));
    if (e <= -std::numbers::pi) e += 2.0 * std::numbers::pi;
    if (std::abs(e) > std::numbers::pi - 1e-9)
      fail(ErrorCode::BranchAmbiguity, "eigen_angles: eigenphase at the branch cut");
    a(k) = e;
  }
  std::sort(a.data(), a.data() + a.size(), std::greater<>());
  return {a};
}

/// Length of the shortest arc of the unit circle holding every eigenphase of U.
/// Unlike the raw (-pi, pi] spread it ignores the global phase of U.
inline double eigenphase_arc(const ComplexMatrix& u) {
  linalg::require_square(u, "eigenphase_arc");
  if (linalg::unitarity_defect(u) > 1e-8) fail(ErrorCode::NotUnitary, "eigenphase_arc: ||U^H U - I|| > 1e-8");
  Eigen::ComplexEigenSolver<ComplexMatrix> es(u, false);
  if (es.info() != Eigen::Success) fail(ErrorCode::NoConvergence, "eigenphase_arc: eigensolver did not converge");
  std::vector<double> ph(static_cast<std::size_t>(u.rows()));
  for (Eigen::Index k = 0; k < u.rows(); ++k) ph[static_cast<std::size_t>(k)] = std::arg(es.eigenvalues()(k));
  std::sort(ph.begin(), ph.end());
  double largest_gap = ph.front() + 2.0 * std::numbers::pi - ph.back();
  for (std::size_t k = 1; k < ph.size(); ++k) largest_gap = std::max(largest_gap, ph[k] - ph[k - 1]);
  return 2.0 * std::numbers::pi - largest_gap;
}

/// C(U) = half the eigenphase spread of U.
inline double c_angle(const ComplexMatrix& u) { return 0.5 * eigenphase_arc(u); }

/// cos C(Ua^H Ub).
inline double min_fidelity_unitary(const ComplexMatrix& ua, const ComplexMatrix& ub) {
  if (ua.rows() != ub.rows() || ua.cols() != ub.cols())
    fail(ErrorCode::DimMismatch, "min_fidelity_unitary: unitaries differ in shape");
  const double arc = eigenphase_arc(ua.adjoint() * ub);
  if (arc > std::numbers::pi + 1e-12)
    fail(ErrorCode::SpreadExceedsPi, "min_fidelity_unitary: eigenphase spread " + std::to_string(arc) + " > pi");
  return std::cos(0.5 * arc);
}

}  // namespace maxqfi
