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

// Unit and property tests for linalg, channels, qfim, sdp and chandist.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "maxqfi/chandist.hpp"
#include "maxqfi/channels.hpp"
#include "maxqfi/linalg.hpp"
#include "maxqfi/qfim.hpp"
#include "maxqfi/random.hpp"
#include "maxqfi/sdp.hpp"

namespace {

using namespace maxqfi;
using std::numbers::pi;

ComplexMatrix diag(std::initializer_list<double> v) {
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) m(k, k) = x, ++k;
  return m;
}

ComplexVector ket(std::initializer_list<Complex> v) {
  ComplexVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (Complex x : v) out(k++) = x;
  return out;
}

ComplexVector plus() { return ket({1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)}); }

RealVector vec(std::initializer_list<double> v) {
  RealVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

template <class F>
void expect_code(ErrorCode code, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

// ---------------------------------------------------------------------------
// linalg

TEST(Linalg, EigenvaluesOfSimpleMatrices) {
  EXPECT_TRUE(linalg::herm_eig(linalg::pauli_x()).values.isApprox(vec({-1, 1})));
  EXPECT_TRUE(linalg::herm_eig(linalg::identity(2)).values.isApprox(vec({1, 1})));
  EXPECT_TRUE(linalg::herm_eig(diag({3, -2, 0})).values.isApprox(vec({-2, 0, 3})));
  expect_code(ErrorCode::NotHermitian, [] { linalg::herm_eig(linalg::pauli_x() * Complex(0, 1) + linalg::identity(2)); });
}

TEST(Linalg, Norms) {
  ComplexMatrix nil = ComplexMatrix::Zero(2, 2);
  nil(0, 1) = 3.0;
  EXPECT_NEAR(linalg::op_norm(linalg::pauli_x()), 1.0, 1e-14);
  EXPECT_NEAR(linalg::op_norm(2.0 * linalg::identity(3)), 2.0, 1e-14);
  EXPECT_NEAR(linalg::op_norm(nil), 3.0, 1e-14);
  EXPECT_NEAR(linalg::trace_norm(diag({1, -2})), 3.0, 1e-14);
  EXPECT_NEAR(linalg::trace_norm(nil), 3.0, 1e-14);
  std::mt19937_64 rng(1);
  EXPECT_NEAR(linalg::trace_norm(random::unitary(5, rng)), 5.0, 1e-12);
}

TEST(Linalg, TraceNormDominatesOperatorNorm) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    const ComplexMatrix a = random::ginibre(4, 4, rng);
    EXPECT_GE(linalg::trace_norm(a), linalg::op_norm(a) - 1e-12);
    const ComplexMatrix r1 = random::ginibre(4, 1, rng) * random::ginibre(1, 4, rng);
    EXPECT_NEAR(linalg::trace_norm(r1), linalg::op_norm(r1), 1e-10 * linalg::op_norm(r1));
  }
}

TEST(Linalg, PsdSqrt) {
  EXPECT_TRUE(linalg::psd_sqrt(diag({4, 9})).isApprox(diag({2, 3}), 1e-12));
  EXPECT_TRUE(linalg::psd_sqrt(linalg::identity(3)).isApprox(linalg::identity(3), 1e-12));
  const ComplexMatrix p = plus() * plus().adjoint();
  EXPECT_LT((linalg::psd_sqrt(p) - p).norm(), 1e-7);
  expect_code(ErrorCode::NotPSD, [] { linalg::psd_sqrt(diag({1, -1})); });
}

TEST(Linalg, HermExp) {
  ComplexMatrix want = ComplexMatrix::Zero(2, 2);
  want(0, 0) = Complex(0, -1);
  want(1, 1) = Complex(0, 1);
  EXPECT_LT((linalg::herm_exp(linalg::pauli_z(), pi / 2) - want).norm(), 1e-12);
  EXPECT_LT((linalg::herm_exp(linalg::pauli_y(), 0.0) - linalg::identity(2)).norm(), 1e-14);
  EXPECT_LT((linalg::herm_exp(linalg::pauli_x(), pi) + linalg::identity(2)).norm(), 1e-12);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    const ComplexMatrix h = random::hermitian(4, rng);
    const ComplexMatrix lhs = linalg::herm_exp(h, 0.3) * linalg::herm_exp(h, 0.5);
    EXPECT_LT((lhs - linalg::herm_exp(h, 0.8)).norm(), 1e-9);
    EXPECT_LT(linalg::unitarity_defect(linalg::herm_exp(h, 0.7)), 1e-10);
  }
}

TEST(Linalg, RandomReconstruction) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 10; ++k) {
    const ComplexMatrix a = random::hermitian(6, rng);
    const linalg::EigenSystem es = linalg::herm_eig(a);
    const ComplexMatrix back = es.vectors * es.values.asDiagonal() * es.vectors.adjoint();
    EXPECT_LT((back - a).norm(), 1e-10 * linalg::norm_scale(a));
  }
}

// ---------------------------------------------------------------------------
// channels

TEST(Channels, KrausCompletenessEnforced) {
  expect_code(ErrorCode::NotCompletelyPositive, [] { KrausChannel({diag({1, 0.5})}); });
  expect_code(ErrorCode::DimMismatch, [] { KrausChannel({linalg::identity(2), linalg::identity(3)}); });
  expect_code(ErrorCode::NotAState, [] { DensityMatrix(diag({0.7, 0.7})); });
  expect_code(ErrorCode::NotAState, [] { DensityMatrix(diag({1.2, -0.2})); });
}

TEST(Channels, Apply) {
  const KrausChannel id({linalg::identity(2)});
  std::mt19937_64 rng(5);
  const DensityMatrix rho = random::mixed_state(2, rng);
  EXPECT_LT((apply(id, rho).matrix() - rho.matrix()).norm(), 1e-14);
  const DensityMatrix p = DensityMatrix::pure(plus());
  EXPECT_LT((apply(dephasing_phase(0.0, 0.0), p).matrix() - linalg::identity(2) / 2.0).norm(), 1e-14);
  const ComplexMatrix u = linalg::herm_exp(linalg::pauli_z() / 2.0, 0.7);
  EXPECT_LT((apply(dephasing_phase(0.7, 1.0), rho).matrix() - u * rho.matrix() * u.adjoint()).norm(), 1e-13);
}

TEST(Channels, ApplyPreservesStates) {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 20; ++k) {
    const KrausChannel ch = random::kraus_channel(3, 3, 2, rng);
    const ComplexMatrix out = apply(ch, random::mixed_state(3, rng)).matrix();
    EXPECT_LT(linalg::hermitian_defect(out), 1e-12);
    EXPECT_NEAR(out.trace().real(), 1.0, 1e-12);
    EXPECT_GE(linalg::min_eigenvalue(out), -1e-9);
  }
}

TEST(Channels, AncillaExtension) {
  const KrausChannel ch = dephasing_phase(0.4, 0.6);
  EXPECT_EQ(extend_with_ancilla(ch, 1).dim_in(), 2);
  const KrausChannel id2 = extend_with_ancilla(KrausChannel({linalg::identity(2)}), 2);
  EXPECT_LT((id2[0] - linalg::identity(4)).norm(), 1e-15);
  std::mt19937_64 rng(7);
  const DensityMatrix rs = random::mixed_state(2, rng), ra = random::mixed_state(3, rng);
  const ComplexMatrix lhs = apply(extend_with_ancilla(ch, 3), tensor(rs, ra)).matrix();
  const ComplexMatrix rhs = tensor(apply(ch, rs), ra).matrix();
  EXPECT_LT((lhs - rhs).norm(), 1e-13);
  EXPECT_LT((apply_with_ancilla(ch, 3, tensor(rs, ra).matrix()) - rhs).norm(), 1e-13);
}

TEST(Channels, TensorPower) {
  const KrausChannel ch = dephasing_phase(0.3, 0.5);
  EXPECT_LT((tensor_power(ch, 1)[1] - ch[1]).norm(), 1e-15);
  const KrausChannel id3 = tensor_power(KrausChannel({linalg::identity(2)}), 3);
  EXPECT_EQ(id3.dim_in(), 8);
  EXPECT_LT((id3[0] - linalg::identity(8)).norm(), 1e-15);
  const KrausChannel two = tensor_power(ch, 2);
  EXPECT_EQ(two.rank(), 4u);
  EXPECT_LE(two.completeness_residual(), 1e-9);
  std::mt19937_64 rng(8);
  for (int n : {2, 3}) {
    const DensityMatrix r = random::mixed_state(2, rng);
    DensityMatrix prod = r, outs = apply(ch, r);
    for (int k = 1; k < n; ++k) {
      prod = tensor(prod, r);
      outs = tensor(outs, apply(ch, r));
    }
    EXPECT_LT((apply(tensor_power(ch, n), prod).matrix() - outs.matrix()).norm(), 1e-13);
  }
  expect_code(ErrorCode::SizeBudgetExceeded, [&] { tensor_power(ch, 7); });
}

TEST(Channels, DephasingKraus) {
  const KrausChannel a = dephasing_phase(0.0, 1.0);
  EXPECT_LT((a[0] - linalg::identity(2)).norm(), 1e-15);
  EXPECT_LT(a[1].norm(), 1e-15);
  const KrausChannel b = dephasing_phase(0.0, 0.0);
  EXPECT_LT((b[0] - linalg::identity(2) / std::sqrt(2.0)).norm(), 1e-15);
  EXPECT_LT((b[1] - linalg::pauli_z() / std::sqrt(2.0)).norm(), 1e-15);
  ComplexMatrix want = ComplexMatrix::Zero(2, 2);
  want(0, 0) = Complex(0, -1);
  want(1, 1) = Complex(0, 1);
  EXPECT_LT((dephasing_phase(pi, 0.5)[0] - std::sqrt(0.75) * want).norm(), 1e-14);
  expect_code(ErrorCode::ParamOutOfRange, [] { dephasing_phase(0.0, 1.5); });
}

TEST(Channels, TwoParamRotation) {
  EXPECT_LT((two_param_rotation(0, 0, 1.0)[0] - linalg::identity(2)).norm(), 1e-15);
  const double x1 = 0.4, t = 1.3;
  const ComplexMatrix want = std::cos(x1 * t) * linalg::identity(2) - kI * std::sin(x1 * t) * linalg::pauli_x();
  EXPECT_LT((two_param_rotation(x1, 0.0, t)[0] - want).norm(), 1e-14);
  const EigenAngles e = eigen_angles(two_param_rotation(0.7, 0.3, 1.0)[0]);
  EXPECT_NEAR(e.angles(0), std::sqrt(0.58), 1e-12);
  EXPECT_NEAR(e.angles(1), -std::sqrt(0.58), 1e-12);
}

TEST(Channels, FamiliesAreContinuousAndChecked) {
  const ParamChannel deph = dephasing_family();
  const RealVector x = vec({0.3, 0.5});
  double prev = 1.0;
  for (double s : {1e-2, 1e-3, 1e-4}) {
    const double d = (deph.at(RealVector(x + vec({s, s})))[0] - deph.at(x)[0]).norm();
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_LT(prev, 1e-3);
  expect_code(ErrorCode::DimMismatch, [&] { deph.at(vec({0.3})); });
  const ParamChannel bad("bad", {"x"}, 2, 2, 2,
                         [](std::span<const double> y) {
                           return y[0] > 0 ? KrausChannel({linalg::identity(2)}) : dephasing_phase(0.0, 0.5);
                         },
                         ChannelKind::Tabulated);
  expect_code(ErrorCode::RankMismatch, [&] { bad.at(vec({1.0})); });
}

// ---------------------------------------------------------------------------
// qfim

TEST(Qfim, Fidelity) {
  const DensityMatrix z0 = DensityMatrix::pure(ket({1, 0})), z1 = DensityMatrix::pure(ket({0, 1}));
  const DensityMatrix p = DensityMatrix::pure(plus());
  std::mt19937_64 rng(9);
  const DensityMatrix r = random::mixed_state(3, rng);
  EXPECT_NEAR(fidelity(r, r), 1.0, 1e-7);
  EXPECT_NEAR(fidelity(z0, z1), 0.0, 1e-7);
  EXPECT_NEAR(fidelity(z0, p), 1.0 / std::sqrt(2.0), 1e-7);
  EXPECT_NEAR(bures_distance(r, r), 0.0, 1e-3);
  EXPECT_NEAR(bures_distance(z0, z1), std::sqrt(2.0), 1e-7);
  EXPECT_NEAR(bures_distance(z0, p), 0.76537, 1e-5);
}

TEST(Qfim, FidelityDataProcessing) {
  std::mt19937_64 rng(10);
  for (int k = 0; k < 20; ++k) {
    const DensityMatrix a = random::mixed_state(3, rng), b = random::mixed_state(3, rng);
    const KrausChannel ch = random::kraus_channel(3, 3, 2, rng);
    EXPECT_NEAR(fidelity(a, b), fidelity(b, a), 1e-9);
    EXPECT_GE(fidelity(apply(ch, a), apply(ch, b)), fidelity(a, b) - 1e-9);
  }
}

TEST(Qfim, SldOnPureAndConstantFamilies) {
  // |psi_w> = exp(-i sigma_z w / 2)|+>, derivative at w = 0.
  const ComplexVector psi = plus();
  const ComplexVector dpsi = -0.5 * kI * linalg::pauli_z() * psi;
  const ComplexMatrix drho = dpsi * psi.adjoint() + psi * dpsi.adjoint();
  const SldResult r = sld_qfim(DensityMatrix::pure(psi), {drho});
  EXPECT_NEAR(r.j(0, 0), 1.0, 1e-12);
  // SLD equation on the support.
  const ComplexMatrix rho = psi * psi.adjoint();
  EXPECT_LT((drho - 0.5 * (rho * r.sld[0] + r.sld[0] * rho)).norm(), 1e-8);

  std::mt19937_64 rng(11);
  const DensityMatrix mixed = random::mixed_state(3, rng);
  EXPECT_LT(sld_qfim(mixed, {ComplexMatrix::Zero(3, 3)}).j.norm(), 1e-15);
  expect_code(ErrorCode::NonTracelessDerivative, [&] { sld_qfim(mixed, {ComplexMatrix(linalg::identity(3))}); });
}

TEST(Qfim, DephasingAtPlusProbe) {
  const ParamChannel deph = dephasing_family();
  for (double eta : {0.2, 0.5, 0.8}) {
    const QFIMatrix j = qfim_of_probe(deph, vec({0.3, eta}), DensityMatrix::pure(plus()));
    EXPECT_NEAR(j(0, 0), eta * eta, 1e-5);
    EXPECT_NEAR(j(1, 1), 1.0 / (1.0 - eta * eta), 1e-5);
    EXPECT_NEAR(j(0, 1), 0.0, 1e-5);
  }
}

TEST(Qfim, MaximallyEntangledAndMixedProbes) {
  const ParamChannel rot = two_param_rotation_family(1.0);
  const RealVector x = vec({0.7, 0.3});
  const QFIMatrix j = qfim_of_probe(rot, x, maximally_entangled(2));
  // Closed form of the pure-state QFIM for this family at (0.7, 0.3), T = 1.
  RealMatrix want(2, 2);
  want << 3.888905281, 0.259221010, 0.259221010, 3.395150976;
  EXPECT_LT((j - want).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT(qfim_of_probe(rot, x, DensityMatrix::maximally_mixed(2)).norm(), 1e-8);
}

TEST(Qfim, LowRankPathAgreesWithFullSld) {
  std::mt19937_64 rng(12);
  const ParamChannel fam = random::channel_family(2, 2, 2, rng);
  const RealVector x = vec({0.1, -0.2});
  const DensityMatrix pure = random_purified_probe(2, rng);
  const QFIMatrix fast = qfim_of_probe(fam, x, pure);
  std::vector<ComplexMatrix> drho;
  for (int i = 0; i < 2; ++i) {
    RealVector xp = x, xm = x;
    xp(i) += 1e-4;
    xm(i) -= 1e-4;
    drho.push_back(linalg::hermitian_part(
        (extended_output(fam, xp, pure.matrix()) - extended_output(fam, xm, pure.matrix())) / 2e-4));
  }
  const QFIMatrix slow = sld_qfim(DensityMatrix::trusted(extended_output(fam, x, pure.matrix())), drho).j;
  EXPECT_LT((fast - slow).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Qfim, MonotoneUnderPostProcessing) {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 5; ++k) {
    const ParamChannel fam = random::channel_family(2, 2, 2, rng);
    const KrausChannel post = random::kraus_channel(2, 2, 2, rng);
    const ParamChannel composed("post", fam.labels(), 2, 2, 4,
                                [&](std::span<const double> y) {
                                  const KrausChannel inner = fam.at(y);
                                  std::vector<ComplexMatrix> ks;
                                  for (const auto& g : post.kraus())
                                    for (const auto& f : inner.kraus()) ks.push_back(g * f);
                                  return KrausChannel(ks);
                                },
                                ChannelKind::AnalyticBuiltin);
    const DensityMatrix probe = random::mixed_state(2, rng);
    const RealVector x = vec({0.05, 0.1});
    const RealMatrix diff = qfim_of_probe(fam, x, probe) - qfim_of_probe(composed, x, probe);
    EXPECT_GE(linalg::min_eigenvalue(diff), -1e-8);
  }
}

TEST(Qfim, Crb) {
  RealMatrix j(2, 2);
  j << 4, 0, 0, 1;
  RealMatrix want(2, 2);
  want << 0.25, 0, 0, 1;
  EXPECT_LT((crb(j, 1) - want).norm(), 1e-14);
  EXPECT_LT((crb(j, 100) * 100.0 - crb(j, 1)).norm(), 1e-14);
  const double eta = 0.5;
  RealMatrix jd(2, 2);
  jd << eta * eta, 0, 0, 1.0 / (1.0 - eta * eta);
  EXPECT_NEAR(crb(jd, 1)(0, 0), 1.0 / (eta * eta), 1e-12);
  EXPECT_NEAR(crb(jd, 1)(1, 1), 1.0 - eta * eta, 1e-12);
  RealMatrix sing(2, 2);
  sing << 1, 1, 1, 1;
  expect_code(ErrorCode::SingularQFIM, [&] { crb(sing, 1); });
}

// ---------------------------------------------------------------------------
// sdp

sdp::SdpProblem single_var(const ComplexMatrix& a0, const ComplexMatrix& a1) {
  sdp::SdpProblem p;
  p.num_vars = 1;
  p.objective = RealVector::Ones(1);
  p.blocks = {{a0, {a1}}};
  return p;
}

TEST(Sdp, SmallestEigenvalue) {
  const auto sol = sdp::solve(single_var(diag({1, 2}), -linalg::identity(2)));
  EXPECT_EQ(sol.status, sdp::SdpStatus::Optimal);
  EXPECT_NEAR(sol.y(0), 1.0, 1e-7);
  EXPECT_LE(std::abs(sol.gap), 1e-8);
}

TEST(Sdp, OffDiagonalVariable) {
  ComplexMatrix a1 = ComplexMatrix::Zero(2, 2);
  a1(0, 1) = a1(1, 0) = 1.0;
  const auto sol = sdp::solve(single_var(linalg::identity(2), a1));
  EXPECT_NEAR(sol.y(0), 1.0, 1e-7);
}

TEST(Sdp, InfeasibleIsReported) {
  // -I + t * 0 >= 0 has no solution.
  sdp::SdpProblem p = single_var(-linalg::identity(2), ComplexMatrix::Zero(2, 2));
  const auto sol = sdp::solve(p);
  EXPECT_NE(sol.status, sdp::SdpStatus::Optimal);
}

TEST(Sdp, ScaleInvarianceAndBisection) {
  std::mt19937_64 rng(14);
  for (int k = 0; k < 5; ++k) {
    const ComplexMatrix h = random::hermitian(3, rng);
    const ComplexMatrix a0 = h + 5.0 * linalg::identity(3);
    const ComplexMatrix g = random::ginibre(3, 3, rng);
    const ComplexMatrix a1p = -(g * g.adjoint() + 0.1 * linalg::identity(3));
    const auto s1 = sdp::solve(single_var(a0, a1p));
    const auto s2 = sdp::solve(single_var(3.0 * a0, 3.0 * a1p));
    EXPECT_NEAR(s1.y(0), s2.y(0), 1e-7);
    double lo = 0.0, hi = 1e6;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (linalg::min_eigenvalue(ComplexMatrix(a0 + mid * a1p)) >= 0.0 ? lo : hi) = mid;
    }
    EXPECT_NEAR(s1.y(0), lo, 1e-7 * std::max(1.0, lo));
  }
}

// ---------------------------------------------------------------------------
// chandist

TEST(Chandist, KwAndMMatrices) {
  const KrausChannel id({linalg::identity(2)});
  EXPECT_LT((kw_matrix(id, id, linalg::identity(1)) - linalg::identity(2)).norm(), 1e-15);
  const KrausChannel d = dephasing_phase(0.3, 0.5);
  EXPECT_LT((kw_matrix(d, d, linalg::identity(2)) - linalg::identity(2)).norm(), 1e-14);
  for (double eta : {0.2, 0.5, 0.8}) {
    const KrausChannel de = dephasing_phase(0.3, eta);
    const ComplexMatrix m = m_matrix(DensityMatrix::maximally_mixed(2), de, de);
    EXPECT_LT((m - diag({(1 + eta) / 2, (1 - eta) / 2})).norm(), 1e-14);
    EXPECT_NEAR(linalg::trace_norm(m), 1.0, 1e-14);
  }
  const KrausChannel u({two_param_rotation(0.3, 0.2, 1.0)[0]});
  std::mt19937_64 rng(15);
  EXPECT_NEAR(std::abs(m_matrix(random::mixed_state(2, rng), u, u)(0, 0) - 1.0), 0.0, 1e-14);
}

TEST(Chandist, MMatrixSecondOrderExpansion) {
  const double eta = 0.5, w = 0.3, dw = 2e-3, de = 1e-3;
  const DensityMatrix half = DensityMatrix::maximally_mixed(2);
  const double got = linalg::trace_norm(m_matrix(half, dephasing_phase(w, eta), dephasing_phase(w + dw, eta + de)));
  const double want = 1.0 - 0.5 * 0.25 * eta * eta * dw * dw - 0.25 * de * de / (2.0 * (1.0 - eta * eta));
  EXPECT_NEAR(got, want, 1e-8);
}

TEST(Chandist, IdenticalChannels) {
  const KrausChannel d = dephasing_phase(0.3, 0.5);
  const FidelityResult p = min_fidelity_primal(d, d), q = min_fidelity_dual(d, d);
  EXPECT_NEAR(p.f_min, 1.0, 1e-9);
  EXPECT_NEAR(q.f_min, 1.0, 1e-9);
}

TEST(Chandist, PhaseKick) {
  for (double dw : {0.1, 0.5, 1.0}) {
    const ComplexMatrix ua = linalg::identity(2);
    const ComplexMatrix ub = linalg::herm_exp(linalg::pauli_z() / 2.0, dw);
    EXPECT_NEAR(min_fidelity_unitary(ua, ub), std::cos(dw / 2), 1e-12);
    EXPECT_NEAR(min_fidelity_primal(KrausChannel({ua}), KrausChannel({ub})).f_min, std::cos(dw / 2), 1e-8);
    EXPECT_NEAR(min_fidelity_unitary(ub, ub), 1.0, 1e-12);
  }
}

TEST(Chandist, DephasingSmallDisplacement) {
  const double eta = 0.5, dw = 1e-2, de = 1e-2;
  const KrausChannel a = dephasing_phase(0.3, eta), b = dephasing_phase(0.3 + dw, eta + de);
  const FidelityResult p = min_fidelity_primal(a, b);
  const double want = 1.0 - eta * eta * dw * dw / 8.0 - de * de / (8.0 * (1.0 - eta * eta));
  EXPECT_NEAR(p.f_min, want, 5e-6);
  const FidelityResult q = min_fidelity_dual(a, b);
  EXPECT_NEAR(q.probe_opt(0, 0).real(), 0.5, 1e-4);
  EXPECT_LE(linalg::op_norm(p.w_opt), 1.0 + 1e-9);
  EXPECT_LE(linalg::op_norm(q.w_opt), 1.0 + 1e-9);
}

double rotation_cos_a(const RealVector& x, const RealVector& y, double t) {
  const double rx = x.norm(), ry = y.norm();
  return std::cos(rx * t) * std::cos(ry * t) + x.dot(y) / (rx * ry) * std::sin(rx * t) * std::sin(ry * t);
}

TEST(Chandist, TwoParamRotationPairs) {
  const RealVector x = vec({0.7, 0.3});
  for (const RealVector& dx : {vec({0.05, 0.0}), vec({0.0, -0.03}), vec({0.2, 0.1})}) {
    const RealVector y = x + dx;
    const double want = rotation_cos_a(x, y, 1.0);
    const KrausChannel a = two_param_rotation(x(0), x(1), 1.0), b = two_param_rotation(y(0), y(1), 1.0);
    EXPECT_NEAR(min_fidelity_unitary(a[0], b[0]), want, 1e-12);
    EXPECT_NEAR(min_fidelity_dual(a, b).f_min, want, 1e-8);
    EXPECT_NEAR(min_fidelity_primal(a, b).f_min, min_fidelity_unitary(a[0], b[0]), 1e-7);
  }
}

TEST(Chandist, EigenAngles) {
  EXPECT_LT(eigen_angles(linalg::identity(3)).angles.cwiseAbs().maxCoeff(), 1e-14);
  const double th = 0.9;
  ComplexMatrix u = ComplexMatrix::Zero(2, 2);
  u(0, 0) = std::exp(Complex(0, -th));
  u(1, 1) = std::exp(Complex(0, th));
  const EigenAngles e = eigen_angles(u);
  EXPECT_NEAR(e.angles(0), th, 1e-14);
  EXPECT_NEAR(e.angles(1), -th, 1e-14);
  EXPECT_NEAR(e.spread(), 2 * th, 1e-14);
  const EigenAngles f = eigen_angles(linalg::herm_exp(linalg::pauli_x(), pi / 4));
  EXPECT_NEAR(f.angles(0), pi / 4, 1e-12);
  EXPECT_NEAR(f.angles(1), -pi / 4, 1e-12);
  expect_code(ErrorCode::NotUnitary, [] { eigen_angles(diag({1, 0.5})); });
  // Arc wider than pi: fidelity formula does not apply.
  expect_code(ErrorCode::SpreadExceedsPi,
              [] { min_fidelity_unitary(linalg::identity(3), linalg::herm_exp(diag({-1.0, 0.0, 1.0}), 2.0)); });
}

TEST(Chandist, PrimalDualAgreementOnRandomChannels) {
  std::mt19937_64 rng(16);
  for (int k = 0; k < 10; ++k) {
    const KrausChannel a = random::kraus_channel(2, 2, 2, rng), b = random::kraus_channel(2, 2, 2, rng);
    const FidelityResult p = min_fidelity_primal(a, b), q = min_fidelity_dual(a, b);
    EXPECT_LE(p.gap, 1e-8);
    EXPECT_LE(q.gap, 1e-8);
    EXPECT_NEAR(p.f_min, q.f_min, 1e-8);
  }
}

TEST(Chandist, InvariantUnderKrausRemixing) {
  std::mt19937_64 rng(18);
  const KrausChannel a = random::kraus_channel(2, 2, 2, rng), b = random::kraus_channel(2, 2, 2, rng);
  const ComplexMatrix u = random::unitary(2, rng);
  std::vector<ComplexMatrix> mixed;
  for (int k = 0; k < 2; ++k) mixed.push_back(u(k, 0) * a[0] + u(k, 1) * a[1]);
  EXPECT_NEAR(min_fidelity_dual(KrausChannel(mixed), b).f_min, min_fidelity_dual(a, b).f_min, 1e-8);
}

TEST(Chandist, AchievabilityAgainstRandomProbes) {
  std::mt19937_64 rng(17);
  const KrausChannel a = random::kraus_channel(2, 2, 2, rng), b = random::kraus_channel(2, 2, 2, rng);
  const FidelityResult r = min_fidelity_dual(a, b);
  const KrausChannel ea = extend_with_ancilla(a, 2), eb = extend_with_ancilla(b, 2);
  double best = 1.0;
  for (int k = 0; k < 200; ++k) {
    const DensityMatrix probe = random_purified_probe(2, rng);
    const double f = fidelity(apply(ea, probe), apply(eb, probe));
    EXPECT_GE(f, r.f_min - 1e-6);
    best = std::min(best, f);
  }
  EXPECT_LE(best - r.f_min, 2e-2);  // sampling only gets near the minimum
  // The optimal probe itself attains the bound.
  const DensityMatrix opt = [&] {
    const ComplexMatrix s = linalg::psd_sqrt(r.probe_opt);
    ComplexVector v(4);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) v(2 * i + j) = s(i, j);
    return DensityMatrix::pure(v);
  }();
  EXPECT_NEAR(fidelity(apply(ea, opt), apply(eb, opt)), r.f_min, 1e-6);
}

}  // namespace
