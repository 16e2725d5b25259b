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

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maxqfi/error.hpp"
#include "maxqfi/linalg.hpp"

namespace maxqfi {

/// A CPTP map rho -> sum_j F_j rho F_j^H with every F_j of shape dim_out x dim_in.
class KrausChannel {
 public:
  static constexpr double kCompletenessTol = 1e-9;

  explicit KrausChannel(std::vector<ComplexMatrix> kraus) : kraus_(std::move(kraus)) {
    if (kraus_.empty()) fail(ErrorCode::InvalidArgument, "KrausChannel: empty Kraus list");
    dim_out_ = kraus_.front().rows();
    dim_in_ = kraus_.front().cols();
    if (dim_in_ == 0 || dim_out_ == 0) fail(ErrorCode::DimMismatch, "KrausChannel: zero-sized Kraus operator");
    for (const auto& f : kraus_)
      if (f.rows() != dim_out_ || f.cols() != dim_in_)
        fail(ErrorCode::DimMismatch, "KrausChannel: Kraus operators disagree in shape");
    const double r = completeness_residual();
    if (r > kCompletenessTol)
      fail(ErrorCode::NotCompletelyPositive,
           "KrausChannel: ||sum F^H F - I||_op = " + std::to_string(r) + " exceeds 1e-9");
  }

  Eigen::Index dim_in() const { return dim_in_; }
  Eigen::Index dim_out() const { return dim_out_; }
  std::size_t rank() const { return kraus_.size(); }
  const std::vector<ComplexMatrix>& kraus() const { return kraus_; }
  const ComplexMatrix& operator[](std::size_t j) const { return kraus_[j]; }

  double completeness_residual() const {
    ComplexMatrix s = ComplexMatrix::Zero(dim_in_, dim_in_);
    for (const auto& f : kraus_) s.noalias() += f.adjoint() * f;
    return linalg::op_norm(s - linalg::identity(dim_in_));
  }

  bool is_unitary() const { return kraus_.size() == 1 && dim_in_ == dim_out_; }

 private:
  std::vector<ComplexMatrix> kraus_;
  Eigen::Index dim_in_ = 0;
  Eigen::Index dim_out_ = 0;
};

/// Unit-trace PSD matrix.
class DensityMatrix {
 public:
  static constexpr double kTol = 1e-10;

  explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
    linalg::require_hermitian(m_, "DensityMatrix", 1e-10);
    m_ = linalg::hermitian_part(m_);
    const double tr = m_.trace().real();
    if (std::abs(tr - 1.0) > kTol) fail(ErrorCode::NotAState, "DensityMatrix: trace " + std::to_string(tr));
    const double lmin = linalg::min_eigenvalue(m_);
    if (lmin < -kTol) fail(ErrorCode::NotAState, "DensityMatrix: eigenvalue " + std::to_string(lmin));
  }

  /// Skips validation; for outputs of maps that preserve states by construction.
  static DensityMatrix trusted(ComplexMatrix m) { return DensityMatrix(std::move(m), Trusted{}); }

  static DensityMatrix pure(const ComplexVector& psi) {
    const double n = psi.norm();
    if (n == 0.0) fail(ErrorCode::NotAState, "DensityMatrix::pure: zero vector");
    const ComplexVector v = psi / n;
    return trusted(v * v.adjoint());
  }

  static DensityMatrix maximally_mixed(Eigen::Index dim) {
    return trusted(linalg::identity(dim) / static_cast<double>(dim));
  }

  Eigen::Index dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }

 private:
  struct Trusted {};
  DensityMatrix(ComplexMatrix m, Trusted) : m_(linalg::hermitian_part(m)) {}
  ComplexMatrix m_;
};

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix::trusted(linalg::kron(a.matrix(), b.matrix()));
}

inline DensityMatrix apply(const KrausChannel& ch, const DensityMatrix& rho) {
  if (rho.dim() != ch.dim_in())
    fail(ErrorCode::DimMismatch, "apply: state dim " + std::to_string(rho.dim()) + " != channel dim_in " +
                                     std::to_string(ch.dim_in()));
  ComplexMatrix out = ComplexMatrix::Zero(ch.dim_out(), ch.dim_out());
  for (const auto& f : ch.kraus()) out.noalias() += f * rho.matrix() * f.adjoint();
  return DensityMatrix::trusted(std::move(out));
}

/// (K tensor I_A)(rho) for rho on system (x) ancilla, without forming F (x) I.
inline ComplexMatrix apply_with_ancilla(const KrausChannel& ch, Eigen::Index dim_a, const ComplexMatrix& rho) {
  const Eigen::Index ds = ch.dim_in(), dout = ch.dim_out();
  if (rho.rows() != ds * dim_a || rho.cols() != ds * dim_a)
    fail(ErrorCode::DimMismatch, "apply_with_ancilla: state does not live on system (x) ancilla");
  if (dim_a == 1) {
    ComplexMatrix out = ComplexMatrix::Zero(dout, dout);
    for (const auto& f : ch.kraus()) out.noalias() += f * rho * f.adjoint();
    return out;
  }
  ComplexMatrix out = ComplexMatrix::Zero(dout * dim_a, dout * dim_a);
  ComplexMatrix left(dout * dim_a, ds * dim_a);
  for (const auto& f : ch.kraus()) {
    // left = (F (x) I) rho, block row o: sum_s F(o,s) rho[block row s]
    left.setZero();
    for (Eigen::Index o = 0; o < dout; ++o)
      for (Eigen::Index s = 0; s < ds; ++s) {
        const Complex c = f(o, s);
        if (c != Complex(0.0, 0.0)) left.middleRows(o * dim_a, dim_a) += c * rho.middleRows(s * dim_a, dim_a);
      }
    // out += left (F (x) I)^H, block column o': sum_s' conj(F(o',s')) left[block column s']
    for (Eigen::Index o = 0; o < dout; ++o)
      for (Eigen::Index s = 0; s < ds; ++s) {
        const Complex c = std::conj(f(o, s));
        if (c != Complex(0.0, 0.0)) out.middleCols(o * dim_a, dim_a) += c * left.middleCols(s * dim_a, dim_a);
      }
  }
  return out;
}

inline KrausChannel extend_with_ancilla(const KrausChannel& ch, Eigen::Index dim_a) {
  if (dim_a < 1) fail(ErrorCode::InvalidArgument, "extend_with_ancilla: dim_A must be >= 1");
  if (dim_a == 1) return ch;
  std::vector<ComplexMatrix> ks;
  ks.reserve(ch.rank());
  for (const auto& f : ch.kraus()) ks.push_back(linalg::kron(f, linalg::identity(dim_a)));
  return KrausChannel(std::move(ks));
}

inline constexpr Eigen::Index kDefaultTensorCap = 64;

/// N-fold parallel use: all products F_{j1} (x) ... (x) F_{jN}.
inline KrausChannel tensor_power(const KrausChannel& ch, int n, Eigen::Index dim_cap = kDefaultTensorCap) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "tensor_power: N must be >= 1");
  const double dmax = static_cast<double>(std::max(ch.dim_in(), ch.dim_out()));
  if (std::pow(dmax, n) > static_cast<double>(dim_cap))
    fail(ErrorCode::SizeBudgetExceeded, "tensor_power: dimension " + std::to_string(dmax) + "^" + std::to_string(n) +
                                            " exceeds cap " + std::to_string(dim_cap));
  std::vector<ComplexMatrix> ks = ch.kraus();
  for (int k = 1; k < n; ++k) {
    std::vector<ComplexMatrix> next;
    next.reserve(ks.size() * ch.rank());
    for (const auto& a : ks)
      for (const auto& f : ch.kraus()) next.push_back(linalg::kron(a, f));
    ks = std::move(next);
  }
  return KrausChannel(std::move(ks));
}

// ---------------------------------------------------------------------------
// Built-in channels

/// Phase rotation exp(-i sigma_z omega / 2) under dephasing of strength eta:
/// F1 = sqrt((1+eta)/2) U, F2 = sqrt((1-eta)/2) sigma_z U.
inline KrausChannel dephasing_phase(double omega, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) fail(ErrorCode::ParamOutOfRange, "dephasing_phase: eta must be in [0,1]");
  ComplexMatrix u = ComplexMatrix::Zero(2, 2);
  u(0, 0) = std::exp(-kI * (omega / 2.0));
  u(1, 1) = std::exp(kI * (omega / 2.0));
  return KrausChannel({std::sqrt((1.0 + eta) / 2.0) * u, std::sqrt((1.0 - eta) / 2.0) * linalg::pauli_z() * u});
}

/// exp(-i (x1 sigma_x + x2 sigma_y) T) in closed form.
inline KrausChannel two_param_rotation(double x1, double x2, double t) {
  if (!(t > 0.0)) fail(ErrorCode::ParamOutOfRange, "two_param_rotation: T must be positive");
  const double r = std::hypot(x1, x2);
  ComplexMatrix u = std::cos(r * t) * linalg::identity(2);
  if (r > 0.0) u -= kI * (std::sin(r * t) / r) * (x1 * linalg::pauli_x() + x2 * linalg::pauli_y());
  return KrausChannel({u});
}

/// Amplitude damping: F1 = |0><0| + sqrt(1 - gamma)|1><1|, F2 = sqrt(gamma)|0><1|.
inline KrausChannel amplitude_damping(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail(ErrorCode::ParamOutOfRange, "amplitude_damping: gamma must be in [0,1]");
  ComplexMatrix f1 = ComplexMatrix::Zero(2, 2), f2 = ComplexMatrix::Zero(2, 2);
  f1(0, 0) = 1.0;
  f1(1, 1) = std::sqrt(1.0 - gamma);
  f2(0, 1) = std::sqrt(gamma);
  return KrausChannel({f1, f2});
}

// ---------------------------------------------------------------------------
// Parameterized families

enum class ChannelKind { AnalyticBuiltin, Tabulated };

/// A channel family x -> K_x with fixed Kraus rank and dimensions. The
/// evaluator must be a pure function of x.
class ParamChannel {
 public:
  using Evaluator = std::function<KrausChannel(std::span<const double>)>;

  ParamChannel(std::string name, std::vector<std::string> labels, Eigen::Index dim_in, Eigen::Index dim_out,
               std::size_t rank, Evaluator eval, ChannelKind kind)
      : name_(std::move(name)),
        labels_(std::move(labels)),
        dim_in_(dim_in),
        dim_out_(dim_out),
        rank_(rank),
        eval_(std::move(eval)),
        kind_(kind) {
    if (labels_.empty()) fail(ErrorCode::InvalidArgument, "ParamChannel: needs at least one parameter");
  }

  const std::string& name() const { return name_; }
  int num_params() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  Eigen::Index dim_in() const { return dim_in_; }
  Eigen::Index dim_out() const { return dim_out_; }
  std::size_t rank() const { return rank_; }
  ChannelKind kind() const { return kind_; }
  bool is_unitary_family() const { return rank_ == 1 && dim_in_ == dim_out_; }

  KrausChannel at(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != num_params())
      fail(ErrorCode::DimMismatch, name_ + ": expected " + std::to_string(num_params()) + " parameters");
    KrausChannel ch = eval_(x);
    if (ch.rank() != rank_)
      fail(ErrorCode::RankMismatch, name_ + ": Kraus rank changed with x (" + std::to_string(ch.rank()) + " vs " +
                                        std::to_string(rank_) + ")");
    if (ch.dim_in() != dim_in_ || ch.dim_out() != dim_out_)
      fail(ErrorCode::DimMismatch, name_ + ": channel dimensions changed with x");
    return ch;
  }

  KrausChannel at(const RealVector& x) const { return at(std::span<const double>(x.data(), static_cast<std::size_t>(x.size()))); }

 private:
  std::string name_;
  std::vector<std::string> labels_;
  Eigen::Index dim_in_, dim_out_;
  std::size_t rank_;
  Evaluator eval_;
  ChannelKind kind_;
};

/// x = (omega, eta).
inline ParamChannel dephasing_family() {
  return ParamChannel("dephasing", {"omega", "eta"}, 2, 2, 2,
                      [](std::span<const double> x) { return dephasing_phase(x[0], x[1]); },
                      ChannelKind::AnalyticBuiltin);
}

/// x = (x1, x2), H(x) = x1 sigma_x + x2 sigma_y, evolution time t.
inline ParamChannel two_param_rotation_family(double t) {
  if (!(t > 0.0)) fail(ErrorCode::ParamOutOfRange, "two_param_rotation_family: T must be positive");
  return ParamChannel("two-param-rotation", {"x1", "x2"}, 2, 2, 1,
                      [t](std::span<const double> x) { return two_param_rotation(x[0], x[1], t); },
                      ChannelKind::AnalyticBuiltin);
}

/// Single phase x generated by sigma_z / 2 over time t: U = exp(-i x sigma_z t / 2).
inline ParamChannel z_rotation_family(double t) {
  return ParamChannel("z-rotation", {"x"}, 2, 2, 1,
                      [t](std::span<const double> x) {
                        return KrausChannel({linalg::herm_exp(0.5 * linalg::pauli_z(), x[0] * t)});
                      },
                      ChannelKind::AnalyticBuiltin);
}

/// N parallel copies of every member of a family.
inline ParamChannel parallel_family(const ParamChannel& base, int n, Eigen::Index dim_cap = kDefaultTensorCap) {
  const double dmax = static_cast<double>(std::max(base.dim_in(), base.dim_out()));
  if (n < 1 || std::pow(dmax, n) > static_cast<double>(dim_cap))
    fail(ErrorCode::SizeBudgetExceeded, "parallel_family: N = " + std::to_string(n) + " exceeds dimension cap");
  Eigen::Index din = 1, dout = 1;
  std::size_t rank = 1;
  for (int k = 0; k < n; ++k) {
    din *= base.dim_in();
    dout *= base.dim_out();
    rank *= base.rank();
  }
  return ParamChannel(base.name() + "^" + std::to_string(n), base.labels(), din, dout, rank,
                      [base, n, dim_cap](std::span<const double> x) { return tensor_power(base.at(x), n, dim_cap); },
                      base.kind());
}

}  // namespace maxqfi
