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

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "maxqfi/channels.hpp"
#include "maxqfi/error.hpp"
#include "maxqfi/linalg.hpp"

namespace maxqfi {

/// Real symmetric m x m; units 1/([x_i][x_j]).
using QFIMatrix = RealMatrix;
/// Real symmetric PSD m x m.
using CovarianceMatrix = RealMatrix;

struct SldResult {
  QFIMatrix j;
  std::vector<ComplexMatrix> sld;  // L_i
};

/// Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)) = ||sqrt(rho1) sqrt(rho2)||_1.
inline double fidelity(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  if (rho1.dim() != rho2.dim()) fail(ErrorCode::DimMismatch, "fidelity: states differ in dimension");
  const double f = linalg::trace_norm(linalg::psd_sqrt(rho1.matrix()) * linalg::psd_sqrt(rho2.matrix()));
  return std::clamp(f, 0.0, 1.0);
}

inline double bures_distance(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * fidelity(rho1, rho2)));
}

/// J and the SLDs from rho and its partial derivatives. In the eigenbasis of
/// rho, (L_i)_ab = 2 (d_i rho)_ab / (l_a + l_b) where l_a + l_b > 1e-12 l_max,
/// and 0 on the rest.
inline SldResult sld_qfim(const DensityMatrix& rho, const std::vector<ComplexMatrix>& drho) {
  const Eigen::Index n = rho.dim();
  for (std::size_t i = 0; i < drho.size(); ++i) {
    const auto& d = drho[i];
    if (d.rows() != n || d.cols() != n) fail(ErrorCode::DimMismatch, "sld_qfim: derivative has wrong shape");
    if (!linalg::is_hermitian(d, 1e-8)) fail(ErrorCode::NotHermitian, "sld_qfim: derivative is not Hermitian");
    if (std::abs(d.trace()) > 1e-8 * std::max(1.0, d.norm()))
      fail(ErrorCode::NonTracelessDerivative, "sld_qfim: derivative " + std::to_string(i) + " has nonzero trace");
  }
  const auto es = linalg::herm_eig(rho.matrix(), 1e-10);
  RealVector lam = es.values.cwiseMax(0.0);
  const double lmax = lam.maxCoeff();
  if (lmax > 1.0 - 1e-10) {
    // Pure state: drop the rounding noise in the small eigenvalues.
    lam.setZero();
    lam(n - 1) = 1.0;
  }
  const double tau = 1e-12 * lam.maxCoeff();

  const std::size_t m = drho.size();
  std::vector<ComplexMatrix> rot(m);
  for (std::size_t i = 0; i < m; ++i) rot[i] = es.vectors.adjoint() * linalg::hermitian_part(drho[i]) * es.vectors;

  RealMatrix inv_sum = RealMatrix::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      if (lam(a) + lam(b) > tau) inv_sum(a, b) = 1.0 / (lam(a) + lam(b));

  SldResult out;
  out.j = QFIMatrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  out.sld.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const ComplexMatrix l = 2.0 * rot[i].cwiseProduct(inv_sum.cast<Complex>());
    out.sld[i] = linalg::hermitian_part(es.vectors * l * es.vectors.adjoint());
  }
  // J_ij = 2 sum_ab Re(d_i rho_ab d_j rho_ba) / (l_a + l_b)
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = i; k < m; ++k) {
      const double v =
          2.0 * (rot[i].cwiseProduct(rot[k].transpose()).cwiseProduct(inv_sum.cast<Complex>())).sum().real();
      out.j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
      out.j(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = v;
    }
  return out;
}

/// Output of the ancilla-extended channel at x for a probe on system (x) ancilla.
inline ComplexMatrix extended_output(const ParamChannel& pch, const RealVector& x, const ComplexMatrix& probe) {
  const Eigen::Index din = pch.dim_in();
  if (probe.rows() % din != 0 || probe.rows() != probe.cols())
    fail(ErrorCode::DimMismatch, "probe dimension is not a multiple of dim_in");
  return apply_with_ancilla(pch.at(x), probe.rows() / din, probe);
}

inline constexpr double kDefaultProbeStep = 1e-3;

/// Columns (F_j (x) I_A) psi for a pure probe psi on system (x) ancilla, so that
/// the output state is A A^H.
inline ComplexMatrix output_factor(const KrausChannel& ch, const ComplexVector& psi) {
  const Eigen::Index din = ch.dim_in(), dout = ch.dim_out();
  if (psi.size() % din != 0) fail(ErrorCode::DimMismatch, "probe dimension is not a multiple of dim_in");
  const Eigen::Index da = psi.size() / din;
  // psi reshaped with system index as row and ancilla index as column.
  const ComplexMatrix p = Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      psi.data(), din, da);
  ComplexMatrix a(dout * da, static_cast<Eigen::Index>(ch.rank()));
  for (std::size_t j = 0; j < ch.rank(); ++j) {
    const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out = ch[j] * p;
    a.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const ComplexVector>(out.data(), dout * da);
  }
  return a;
}

/// QFIM of rho = A A^H from A and its partial derivatives B_i, without forming
/// n x n matrices. With A = U S V^H restricted to the support (l_a = s_a^2),
///   J_ij = 2 sum_{a,b} Re(D_i,ab D_j,ba) / (l_a + l_b) + 4 Re sum_a (C_i^H C_j)_aa / l_a,
/// where D_i = U^H d_i rho U and C_i = (I - U U^H) B_i A^H U is the part of
/// d_i rho U leaving the support. The kernel-kernel block is dropped, as in sld_qfim.
inline QFIMatrix qfim_from_factor(const ComplexMatrix& a, const std::vector<ComplexMatrix>& b) {
  Eigen::BDCSVD<ComplexMatrix> svd(a, Eigen::ComputeThinU);
  const RealVector sv = svd.singularValues();
  const double lmax = sv.size() ? sv(0) * sv(0) : 0.0;
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) * sv(r) > 1e-12 * lmax) ++r;
  const ComplexMatrix u = svd.matrixU().leftCols(r);
  RealVector lam(r);
  for (Eigen::Index k = 0; k < r; ++k) lam(k) = sv(k) * sv(k);
  const ComplexMatrix ahu = a.adjoint() * u;  // A^H U

  const std::size_t m = b.size();
  std::vector<ComplexMatrix> d(m), c(m);
  for (std::size_t i = 0; i < m; ++i) {
    const ComplexMatrix ub = u.adjoint() * b[i];
    const ComplexMatrix t = ub * ahu;
    d[i] = t + t.adjoint();
    const ComplexMatrix bu = b[i] * ahu;
    c[i] = bu - u * (u.adjoint() * bu);
  }
  QFIMatrix j = QFIMatrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = i; k < m; ++k) {
      double v = 0.0;
      for (Eigen::Index p = 0; p < r; ++p) {
        for (Eigen::Index q = 0; q < r; ++q) v += 2.0 * (d[i](p, q) * d[k](q, p)).real() / (lam(p) + lam(q));
        v += 4.0 * c[i].col(p).dot(c[k].col(p)).real() / lam(p);
      }
      j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
      j(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = v;
    }
  return j;
}

/// QFIM of rho_x = (K_x (x) I_A)(probe). Partial derivatives are central
/// differences with step h max(1, |x_i|), Richardson-combined over h and h/2.
/// Pure probes take a low-rank path through the factor A with rho_x = A A^H.
inline QFIMatrix qfim_of_probe(const ParamChannel& pch, const RealVector& x, const DensityMatrix& probe,
                               double h = kDefaultProbeStep) {
  if (!(h > 0.0)) fail(ErrorCode::InvalidArgument, "qfim_of_probe: step must be positive");
  if (x.size() != pch.num_params()) fail(ErrorCode::DimMismatch, "qfim_of_probe: wrong number of parameters");
  const ComplexMatrix& p = probe.matrix();
  if (p.rows() % pch.dim_in() != 0) fail(ErrorCode::DimMismatch, "probe dimension is not a multiple of dim_in");

  auto derivative = [&](Eigen::Index i, const auto& eval) {
    auto central = [&](double step) {
      RealVector xp = x, xm = x;
      xp(i) += step;
      xm(i) -= step;
      return ComplexMatrix((eval(xp) - eval(xm)) / (2.0 * step));
    };
    const double s = h * std::max(1.0, std::abs(x(i)));
    return ComplexMatrix((4.0 * central(0.5 * s) - central(s)) / 3.0);
  };

  // Tr rho^2 > 1 - 1e-10 marks a pure probe; any column with a large diagonal
  // entry is then proportional to the state vector.
  if (p.squaredNorm() > 1.0 - 1e-10) {
    Eigen::Index k = 0;
    p.diagonal().real().maxCoeff(&k);
    const ComplexVector psi = p.col(k) / std::sqrt(p(k, k).real());
    auto eval = [&](const RealVector& y) { return output_factor(pch.at(y), psi); };
    std::vector<ComplexMatrix> b;
    for (Eigen::Index i = 0; i < x.size(); ++i) b.push_back(derivative(i, eval));
    return qfim_from_factor(eval(x), b);
  }

  auto eval = [&](const RealVector& y) { return extended_output(pch, y, p); };
  std::vector<ComplexMatrix> drho;
  for (Eigen::Index i = 0; i < x.size(); ++i) drho.push_back(linalg::hermitian_part(derivative(i, eval)));
  return sld_qfim(DensityMatrix::trusted(eval(x)), drho).j;
}

/// J^{-1} / n.
inline CovarianceMatrix crb(const QFIMatrix& j, int n) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "crb: n must be positive");
  if (j.rows() != j.cols() || j.rows() == 0) fail(ErrorCode::DimMismatch, "crb: J must be square");
  const double jn = std::max(std::abs(linalg::max_eigenvalue(j)), std::abs(linalg::min_eigenvalue(j)));
  if (!(linalg::min_eigenvalue(j) > 1e-12 * jn))
    fail(ErrorCode::SingularQFIM, "crb: J is singular (unidentifiable parameter combination)");
  const RealMatrix inv = j.ldlt().solve(RealMatrix::Identity(j.rows(), j.cols()));
  return 0.5 * (inv + inv.transpose()) / static_cast<double>(n);
}

/// Haar-random pure state of the given dimension.
template <class Rng>
ComplexVector random_pure_vector(Eigen::Index dim, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexVector v(dim);
  for (Eigen::Index k = 0; k < dim; ++k) v(k) = Complex(g(rng), g(rng));
  return v / v.norm();
}

/// Random purified probe on system (x) ancilla with dim_A = dim_in.
template <class Rng>
DensityMatrix random_purified_probe(Eigen::Index dim_in, Rng& rng) {
  return DensityMatrix::pure(random_pure_vector(dim_in * dim_in, rng));
}

/// (|00> + |11> + ...)/sqrt(d) on system (x) ancilla.
inline DensityMatrix maximally_entangled(Eigen::Index d) {
  ComplexVector v = ComplexVector::Zero(d * d);
  for (Eigen::Index k = 0; k < d; ++k) v(k * d + k) = 1.0;
  return DensityMatrix::pure(v);
}

}  // namespace maxqfi
