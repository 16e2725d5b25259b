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

// Small dense semidefinite programs with complex Hermitian blocks:
//
//   maximize  c . y   subject to  A0^(k) + sum_i y_i A_i^(k)  >= 0  for every block k.
//
// The companion problem over the block multipliers X^(k) >= 0 is
//
//   minimize  sum_k Tr(A0^(k) X^(k))  subject to  sum_k Re Tr(A_i^(k) X^(k)) = -c_i,
//
// and for feasible pairs the objective gap equals sum_k Tr(X^(k) S^(k)) with
// S^(k) the LMI slack. The solver is an infeasible-start primal-dual path
// following method (HKM search direction, Mehrotra predictor-corrector) that
// works directly on Hermitian matrices; no real embedding is formed.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "maxqfi/error.hpp"
#include "maxqfi/linalg.hpp"

namespace maxqfi::sdp {

struct LmiBlock {
  ComplexMatrix constant;              // A0
  std::vector<ComplexMatrix> coeffs;   // A_i, one per variable; an empty matrix means zero
};

struct SdpProblem {
  int num_vars = 0;
  RealVector objective;  // c
  std::vector<LmiBlock> blocks;
};

enum class SdpStatus { Optimal, Infeasible, MaxIterations };

inline const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::Infeasible: return "Infeasible";
    case SdpStatus::MaxIterations: return "MaxIterations";
  }
  return "?";
}

struct SdpOptions {
  double gap_tol = 1e-9;
  double feas_tol = 1e-9;
  int max_iter = 200;
};

struct SdpSolution {
  RealVector y;
  double primal_objective = 0.0;  // c . y
  double dual_objective = 0.0;    // sum_k Tr(A0 X)
  double gap = 0.0;               // dual - primal
  SdpStatus status = SdpStatus::MaxIterations;
  std::vector<ComplexMatrix> slacks;       // A0 + sum y_i A_i, recomputed from y
  std::vector<ComplexMatrix> multipliers;  // X per block
  double min_slack_eigenvalue = 0.0;
  double multiplier_residual = 0.0;  // || A(X) + c || / (1 + ||c||)
  int iterations = 0;
};

namespace detail {

struct SparseEntry {
  Eigen::Index row;
  Eigen::Index col;
  Complex value;
};

// A coefficient is stored dense and, when it has few nonzeros, also as a
// triplet list so the Schur complement can be assembled in O(nnz n^2).
struct Coefficient {
  bool zero = true;
  bool sparse = false;
  ComplexMatrix dense;
  std::vector<SparseEntry> entries;
};

struct Block {
  Eigen::Index n = 0;
  ComplexMatrix c;                 // standard-form C = A0
  std::vector<Coefficient> a;      // standard-form Abar_i = -A_i
};

inline Coefficient make_coefficient(const ComplexMatrix& m, Eigen::Index n) {
  Coefficient out;
  if (m.size() == 0) return out;
  out.dense = -m;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (out.dense(i, j) != Complex(0.0, 0.0)) out.entries.push_back({i, j, out.dense(i, j)});
  out.zero = out.entries.empty();
  out.sparse = static_cast<Eigen::Index>(out.entries.size()) <= n;
  if (!out.sparse) out.entries.clear();
  return out;
}

// Re Tr(A B) for Hermitian A.
inline double re_trace_product(const Coefficient& a, const ComplexMatrix& b) {
  if (a.zero) return 0.0;
  if (a.sparse) {
    double s = 0.0;
    for (const auto& e : a.entries) s += (e.value * b(e.col, e.row)).real();
    return s;
  }
  return (a.dense.transpose().cwiseProduct(b)).sum().real();
}

inline double re_trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.transpose().cwiseProduct(b)).sum().real();
}

// Largest alpha in (0, inf] keeping X + alpha dX >= 0, given X = L L^H.
inline double max_step(const Eigen::LLT<ComplexMatrix>& llt, const ComplexMatrix& dx) {
  ComplexMatrix t = llt.matrixL().solve(dx);
  ComplexMatrix s = llt.matrixL().solve(t.adjoint().eval());
  const double lmin = linalg::min_eigenvalue(s);
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

}  // namespace detail

inline void validate(const SdpProblem& p) {
  if (p.num_vars < 0 || p.objective.size() != p.num_vars)
    fail(ErrorCode::InvalidArgument, "sdp: objective length does not match num_vars");
  if (p.blocks.empty()) fail(ErrorCode::InvalidArgument, "sdp: no blocks");
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    const auto& b = p.blocks[k];
    const Eigen::Index n = b.constant.rows();
    if (n == 0 || b.constant.cols() != n)
      fail(ErrorCode::DimMismatch, "sdp: block " + std::to_string(k) + " constant must be square and nonempty");
    if (static_cast<int>(b.coeffs.size()) != p.num_vars)
      fail(ErrorCode::InvalidArgument, "sdp: block " + std::to_string(k) + " has wrong coefficient count");
    if (!linalg::is_hermitian(b.constant))
      fail(ErrorCode::NotHermitian, "sdp: block " + std::to_string(k) + " constant");
    for (int i = 0; i < p.num_vars; ++i) {
      const auto& a = b.coeffs[static_cast<std::size_t>(i)];
      if (a.size() == 0) continue;
      if (a.rows() != n || a.cols() != n)
        fail(ErrorCode::DimMismatch,
             "sdp: block " + std::to_string(k) + " coefficient " + std::to_string(i) + " has wrong shape");
      if (!linalg::is_hermitian(a))
        fail(ErrorCode::NotHermitian, "sdp: block " + std::to_string(k) + " coefficient " + std::to_string(i));
    }
  }
}

/// LMI slack A0 + sum_i y_i A_i for every block.
inline std::vector<ComplexMatrix> slacks_at(const SdpProblem& p, const RealVector& y) {
  std::vector<ComplexMatrix> out;
  out.reserve(p.blocks.size());
  for (const auto& b : p.blocks) {
    ComplexMatrix s = b.constant;
    for (int i = 0; i < p.num_vars; ++i)
      if (b.coeffs[static_cast<std::size_t>(i)].size() != 0) s += y(i) * b.coeffs[static_cast<std::size_t>(i)];
    out.push_back(linalg::hermitian_part(s));
  }
  return out;
}

inline SdpSolution solve(const SdpProblem& problem, const SdpOptions& opt = {}) {
  using detail::Block;
  validate(problem);
  const int m = problem.num_vars;
  const RealVector& b = problem.objective;

  std::vector<Block> blocks;
  Eigen::Index n_total = 0;
  double c_norm = 0.0;
  for (const auto& lb : problem.blocks) {
    Block blk;
    blk.n = lb.constant.rows();
    blk.c = lb.constant;
    for (int i = 0; i < m; ++i) blk.a.push_back(detail::make_coefficient(lb.coeffs[static_cast<std::size_t>(i)], blk.n));
    n_total += blk.n;
    c_norm = std::max(c_norm, blk.c.norm());
    blocks.push_back(std::move(blk));
  }
  const double b_norm = b.norm();

  auto apply_a = [&](const std::vector<ComplexMatrix>& mats) {
    RealVector out = RealVector::Zero(m);
    for (std::size_t k = 0; k < blocks.size(); ++k)
      for (int i = 0; i < m; ++i) out(i) += detail::re_trace_product(blocks[k].a[static_cast<std::size_t>(i)], mats[k]);
    return out;
  };

  // Identity-scaled infeasible start.
  std::vector<ComplexMatrix> X, Z;
  for (auto& blk : blocks) {
    const double nn = static_cast<double>(blk.n);
    double ratio = 0.0, a_max = 0.0;
    for (int i = 0; i < m; ++i) {
      const double an = blk.a[static_cast<std::size_t>(i)].zero ? 0.0 : blk.a[static_cast<std::size_t>(i)].dense.norm();
      a_max = std::max(a_max, an);
      ratio = std::max(ratio, (1.0 + std::abs(b(i))) / (1.0 + an));
    }
    const double xi = std::max({10.0, std::sqrt(nn), nn * ratio});
    const double zeta = std::max({10.0, std::sqrt(nn), blk.c.norm(), a_max});
    X.push_back(xi * linalg::identity(blk.n));
    Z.push_back(zeta * linalg::identity(blk.n));
  }
  RealVector y = RealVector::Zero(m);

  SdpSolution best;
  double best_score = std::numeric_limits<double>::infinity();
  auto record = [&](int iter, double pobj, double dobj, double pinf, double dinf, double score) {
    if (score < best_score) {
      best_score = score;
      best.y = y;
      best.multipliers = X;
      best.primal_objective = pobj;
      best.dual_objective = dobj;
      best.iterations = iter;
      best.multiplier_residual = pinf;
      (void)dinf;
    }
  };

  SdpStatus status = SdpStatus::MaxIterations;
  int stalled = 0;
  for (int iter = 0; iter <= opt.max_iter; ++iter) {
    // Residuals and objectives.
    const RealVector ax = apply_a(X);
    const RealVector rp = b - ax;
    std::vector<ComplexMatrix> rd(blocks.size());
    double dinf = 0.0, mu = 0.0, dobj = 0.0;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      ComplexMatrix r = blocks[k].c - Z[k];
      for (int i = 0; i < m; ++i) {
        const auto& a = blocks[k].a[static_cast<std::size_t>(i)];
        if (!a.zero) r -= y(i) * a.dense;
      }
      rd[k] = linalg::hermitian_part(r);
      dinf = std::max(dinf, rd[k].norm());
      mu += detail::re_trace_product(X[k], Z[k]);
      dobj += detail::re_trace_product(blocks[k].c, X[k]);
    }
    mu /= static_cast<double>(n_total);
    const double pobj = b.dot(y);
    const double pinf = rp.norm() / (1.0 + b_norm);
    dinf /= (1.0 + c_norm);
    const double gap_rel = std::abs(dobj - pobj) / std::max(1.0, std::abs(pobj));
    record(iter, pobj, dobj, pinf, dinf, std::max({gap_rel, pinf, dinf}));

    if (gap_rel <= opt.gap_tol && pinf <= opt.feas_tol && dinf <= opt.feas_tol) {
      status = SdpStatus::Optimal;
      break;
    }
    // Certificate that the LMI is empty: X >= 0 with A(X) ~ 0 and Tr(A0 X) < 0.
    if (dobj < 0.0 && ax.norm() <= opt.feas_tol * std::abs(dobj) && std::abs(dobj) > 1e6 * (1.0 + b_norm)) {
      status = SdpStatus::Infeasible;
      break;
    }
    if (iter == opt.max_iter) break;

    // Schur complement M_ij = sum_k Re Tr(Abar_i X Abar_j Z^{-1}).
    std::vector<ComplexMatrix> zinv(blocks.size());
    std::vector<Eigen::LLT<ComplexMatrix>> zllt(blocks.size()), xllt(blocks.size());
    bool chol_ok = true;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      zllt[k].compute(Z[k]);
      xllt[k].compute(X[k]);
      if (zllt[k].info() != Eigen::Success || xllt[k].info() != Eigen::Success) {
        chol_ok = false;
        break;
      }
      zinv[k] = zllt[k].solve(linalg::identity(blocks[k].n));
      zinv[k] = linalg::hermitian_part(zinv[k]);
    }
    if (!chol_ok) break;

    RealMatrix schur = RealMatrix::Zero(m, m);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const Block& blk = blocks[k];
      for (int j = 0; j < m; ++j) {
        const auto& aj = blk.a[static_cast<std::size_t>(j)];
        if (aj.zero) continue;
        ComplexMatrix g;
        if (aj.sparse) {
          g = ComplexMatrix::Zero(blk.n, blk.n);
          for (const auto& e : aj.entries) g.noalias() += e.value * X[k].col(e.row) * zinv[k].row(e.col);
        } else {
          g.noalias() = X[k] * aj.dense * zinv[k];
        }
        for (int i = j; i < m; ++i) {
          const double v = detail::re_trace_product(blk.a[static_cast<std::size_t>(i)], g);
          schur(i, j) += v;
        }
      }
    }
    for (int j = 0; j < m; ++j)
      for (int i = j + 1; i < m; ++i) schur(j, i) = schur(i, j);

    Eigen::LLT<RealMatrix> mllt(schur);
    Eigen::LDLT<RealMatrix> mldlt;
    bool use_ldlt = mllt.info() != Eigen::Success;
    if (use_ldlt) {
      RealMatrix reg = schur;
      reg.diagonal().array() += 1e-14 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
      mldlt.compute(reg);
      if (mldlt.info() != Eigen::Success) break;
    }
    auto schur_solve = [&](const RealVector& r) -> RealVector {
      return use_ldlt ? RealVector(mldlt.solve(r)) : RealVector(mllt.solve(r));
    };

    // Right-hand side pieces shared by predictor and corrector.
    std::vector<ComplexMatrix> x_rd_zinv(blocks.size());
    for (std::size_t k = 0; k < blocks.size(); ++k) x_rd_zinv[k] = X[k] * rd[k] * zinv[k];
    const RealVector a_xrdz = apply_a(x_rd_zinv);
    const RealVector a_zinv = apply_a(zinv);

    auto direction = [&](double sigma, const std::vector<ComplexMatrix>* second_order, RealVector& dy,
                         std::vector<ComplexMatrix>& dx, std::vector<ComplexMatrix>& dz) {
      RealVector rhs = b - sigma * mu * a_zinv + a_xrdz;
      if (second_order) rhs += apply_a(*second_order);
      dy = schur_solve(rhs);
      dx.resize(blocks.size());
      dz.resize(blocks.size());
      for (std::size_t k = 0; k < blocks.size(); ++k) {
        ComplexMatrix dzk = rd[k];
        for (int i = 0; i < m; ++i) {
          const auto& a = blocks[k].a[static_cast<std::size_t>(i)];
          if (!a.zero) dzk -= dy(i) * a.dense;
        }
        dz[k] = linalg::hermitian_part(dzk);
        ComplexMatrix dxk = sigma * mu * zinv[k] - X[k] - X[k] * dz[k] * zinv[k];
        if (second_order) dxk -= (*second_order)[k];
        dx[k] = linalg::hermitian_part(dxk);
      }
    };
    auto step_lengths = [&](const std::vector<ComplexMatrix>& dx, const std::vector<ComplexMatrix>& dz) {
      double ap = std::numeric_limits<double>::infinity(), ad = ap;
      for (std::size_t k = 0; k < blocks.size(); ++k) {
        ap = std::min(ap, detail::max_step(xllt[k], dx[k]));
        ad = std::min(ad, detail::max_step(zllt[k], dz[k]));
      }
      return std::pair<double, double>{ap, ad};
    };

    // Predictor.
    RealVector dy;
    std::vector<ComplexMatrix> dx, dz;
    direction(0.0, nullptr, dy, dx, dz);
    auto [ap_max, ad_max] = step_lengths(dx, dz);
    const double ap_pred = std::min(1.0, ap_max), ad_pred = std::min(1.0, ad_max);
    double mu_pred = 0.0;
    for (std::size_t k = 0; k < blocks.size(); ++k)
      mu_pred += detail::re_trace_product(ComplexMatrix(X[k] + ap_pred * dx[k]), ComplexMatrix(Z[k] + ad_pred * dz[k]));
    mu_pred /= static_cast<double>(n_total);
    double sigma = mu > 0.0 ? std::pow(std::max(mu_pred, 0.0) / mu, 3.0) : 0.0;
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector with the second-order term dX_pred dZ_pred Z^{-1}.
    std::vector<ComplexMatrix> second(blocks.size());
    for (std::size_t k = 0; k < blocks.size(); ++k) second[k] = dx[k] * dz[k] * zinv[k];
    direction(sigma, &second, dy, dx, dz);
    std::tie(ap_max, ad_max) = step_lengths(dx, dz);
    const double gamma = 0.9 + 0.09 * std::min(ap_pred, ad_pred);
    const double ap = std::min(1.0, gamma * ap_max);
    const double ad = std::min(1.0, gamma * ad_max);

    for (std::size_t k = 0; k < blocks.size(); ++k) {
      X[k] = linalg::hermitian_part(X[k] + ap * dx[k]);
      Z[k] = linalg::hermitian_part(Z[k] + ad * dz[k]);
    }
    y += ad * dy;

    if (std::max(ap, ad) < 1e-10) {
      if (++stalled >= 3) break;
    } else {
      stalled = 0;
    }
  }

  // Report the best iterate with a slack recomputed from y, never from the
  // running Z, so the reported feasibility is honest.
  SdpSolution out = best;
  if (status == SdpStatus::Infeasible) {
    out.y = y;
    out.multipliers = X;
  }
  out.status = status;
  out.slacks = slacks_at(problem, out.y);
  out.min_slack_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& s : out.slacks) out.min_slack_eigenvalue = std::min(out.min_slack_eigenvalue, linalg::min_eigenvalue(s));
  out.primal_objective = b.dot(out.y);
  double dobj = 0.0;
  for (std::size_t k = 0; k < blocks.size(); ++k) dobj += detail::re_trace_product(blocks[k].c, out.multipliers[k]);
  out.dual_objective = dobj;
  out.gap = out.dual_objective - out.primal_objective;
  out.multiplier_residual = (b - apply_a(out.multipliers)).norm() / (1.0 + b_norm);
  if (out.status == SdpStatus::Optimal) {
    const bool ok = std::abs(out.gap) <= opt.gap_tol * std::max(1.0, std::abs(out.primal_objective)) &&
                    out.min_slack_eigenvalue >= -opt.feas_tol;
    if (!ok) out.status = SdpStatus::MaxIterations;
  }
  return out;
}

}  // namespace maxqfi::sdp
