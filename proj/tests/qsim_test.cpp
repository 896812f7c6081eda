// Copyright 2026 The nqasm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nqasm/qsim.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "nqasm/error.hpp"
#include "nqasm/gates.hpp"
#include "nqasm/params.hpp"

namespace nqasm::qsim {
namespace {

using C = std::complex<double>;

Matrix ket0() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1;
  return m;
}

Vector vec(std::initializer_list<C> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const auto& x : v) out(i++) = x;
  return out.normalized();
}

Vector phi_plus() { return vec({1, 0, 0, 1}); }

double trace_distance_bound(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

TEST(ChannelTest, ClosedFormDiagonal) {
  for (const double f : {1.0, 0.997, 0.9}) {
    const double p = depolarizing_probability(f);
    const Matrix out = depolarize(ket0(), 1, 0, p);
    // X|0><0|X = Y|0><0|Y = |1><1|, Z|0><0|Z = |0><0|.
    Matrix expected = Matrix::Zero(2, 2);
    expected(0, 0) = 1 - 2 * p / 3;
    expected(1, 1) = 2 * p / 3;
    EXPECT_LT(trace_distance_bound(out, expected), 1e-12) << f;
  }
  EXPECT_NEAR(depolarizing_probability(0.997), 0.004, 1e-15);
}

TEST(ChannelTest, ChoiIsPositive) {
  for (const double f : {1.0, 0.999, 0.98, 0.9, 0.5, 0.25}) {
    const Eigen::SelfAdjointEigenSolver<Matrix> es(
        depolarizing_choi(depolarizing_probability(f)));
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9) << f;
  }
}

TEST(ChannelTest, JointChannelPreservesTrace) {
  Simulator sim(1, TwoQubitNoise::kJoint);
  const QubitId a = sim.new_qubit(), b = sim.new_qubit();
  const QubitId ab[2] = {a, b};
  sim.apply(gates::kron(gates::hadamard(), gates::identity()), ab, 1.0);
  sim.apply(gates::cnot(), ab, 0.9);
  const Matrix rho = sim.reduced_state(ab);
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-9);
  // (1-p) + p/15 * (3 Paulis keeping Phi+ invariant) with p = 4/3 * 0.1
  const double p = depolarizing_probability(0.9);
  EXPECT_NEAR(sim.fidelity(ab, phi_plus()), 1 - p + p / 5, 1e-9);
}

TEST(SimulatorTest, UnitaryEvolutionAtFullFidelity) {
  Simulator sim(3);
  const QubitId q = sim.new_qubit();
  const QubitId qs[1] = {q};
  sim.apply(gates::hadamard(), qs, 1.0);
  EXPECT_NEAR(sim.fidelity(qs, vec({1, 1})), 1.0, 1e-12);
}

TEST(SimulatorTest, ErrorsOnBadInput) {
  Simulator sim(3);
  const QubitId q = sim.new_qubit();
  const QubitId qs[1] = {q};
  Matrix bad = Matrix::Ones(2, 2);
  EXPECT_THROW(sim.apply(bad, qs, 1.0), Error);
  const QubitId missing[1] = {99};
  EXPECT_THROW(sim.apply(gates::pauli_x(), missing, 1.0), Error);
  EXPECT_THROW(sim.apply(gates::cnot(), qs, 1.0), Error);
  EXPECT_THROW(sim.fidelity(qs, phi_plus()), Error);
}

TEST(SimulatorTest, HadamardStatistics) {
  Simulator sim(42);
  int zeros = 0;
  const int shots = 10000;
  for (int i = 0; i < shots; ++i) {
    const QubitId q = sim.new_qubit();
    const QubitId qs[1] = {q};
    sim.apply(gates::hadamard(), qs, 1.0);
    zeros += sim.measure(q) == 0;
    sim.free_qubit(q);
  }
  EXPECT_NEAR(zeros / double(shots), 0.5, 0.02);
  EXPECT_EQ(sim.qubit_count(), 0u);
}

TEST(SimulatorTest, MeasurementFlips) {
  Simulator sim(7);
  int ones = 0;
  const int shots = 10000;
  for (int i = 0; i < shots; ++i) {
    const QubitId q = sim.new_qubit();
    ones += sim.measure(q, 0.05, 0.005);
    sim.free_qubit(q);
  }
  EXPECT_NEAR(ones / double(shots), 0.05, 0.01);
  const QubitId q = sim.new_qubit();
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sim.measure(q), 0);
}

TEST(SimulatorTest, MeasurementCollapsesAndSplits) {
  Simulator sim(11);
  const QubitId a = sim.new_qubit(), b = sim.new_qubit();
  const QubitId ab[2] = {a, b};
  sim.apply(gates::kron(gates::hadamard(), gates::identity()), ab, 1.0);
  sim.apply(gates::cnot(), ab, 1.0);
  EXPECT_EQ(sim.group_count(), 1u);
  const int m = sim.measure(a);
  EXPECT_EQ(sim.group_count(), 2u);
  const QubitId bs[1] = {b};
  EXPECT_NEAR(sim.fidelity(bs, m == 0 ? vec({1, 0}) : vec({0, 1})), 1.0, 1e-12);
  const QubitId as[1] = {a};
  EXPECT_NEAR(sim.fidelity(as, m == 0 ? vec({1, 0}) : vec({0, 1})), 1.0, 1e-12);
}

TEST(SimulatorTest, EprFidelity) {
  for (const double f : {1.0, 0.9}) {
    Simulator sim(5);
    const auto [a, b] = sim.make_epr_pair(f);
    const QubitId ab[2] = {a, b};
    EXPECT_NEAR(sim.fidelity(ab, phi_plus()), f, 1e-9);
  }
}

TEST(SimulatorTest, EprCorrelations) {
  Simulator sim(9);
  int equal = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto [a, b] = sim.make_epr_pair(1.0);
    equal += sim.measure(a) == sim.measure(b);
    sim.free_qubit(a);
    sim.free_qubit(b);
  }
  EXPECT_EQ(equal, 10000);
}

TEST(SimulatorTest, InitAndFree) {
  Simulator sim(1);
  const QubitId q = sim.new_qubit();
  const QubitId qs[1] = {q};
  sim.apply(gates::pauli_x(), qs, 1.0);
  sim.init_qubit(q, 1.0);
  EXPECT_NEAR(sim.fidelity(qs, vec({1, 0})), 1.0, 1e-12);
  const auto p = nv_noise();
  sim.init_qubit(q, p.gate(gate_names::kElectronInit).fidelity);
  // Diagonal (1 - 2p/3, 2p/3), not F itself.
  const double pe = depolarizing_probability(0.99);
  EXPECT_NEAR(sim.fidelity(qs, vec({1, 0})), 1 - 2 * pe / 3, 1e-12);

  const auto [a, b] = sim.make_epr_pair(1.0);
  sim.free_qubit(a);
  const QubitId bs[1] = {b};
  const Matrix rho = sim.reduced_state(bs);
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-9);
  EXPECT_LT(trace_distance_bound(rho, gates::identity() / 2.0), 1e-12);
  EXPECT_NEAR(sim.fidelity(bs, vec({1, 0})), 0.5, 1e-12);
}

TEST(SimulatorTest, GroupCap) {
  Simulator sim(1);
  std::vector<QubitId> qs;
  for (int i = 0; i < kMaxGroupQubits + 1; ++i) qs.push_back(sim.new_qubit());
  for (int i = 1; i < kMaxGroupQubits; ++i) {
    const QubitId pair[2] = {qs[0], qs[static_cast<std::size_t>(i)]};
    sim.apply(gates::cnot(), pair, 1.0);
  }
  const QubitId over[2] = {qs[0], qs.back()};
  try {
    sim.apply(gates::cnot(), over, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooManyQubits);
  }
}

// Random 1- and 2-qubit gates with noise; trace and hermiticity must hold and
// the state must stay positive.
TEST(SimulatorTest, RandomProgramsKeepStatesPhysical) {
  Simulator sim(123);
  std::mt19937_64 rng(4);
  std::vector<QubitId> qs;
  for (int i = 0; i < 4; ++i) qs.push_back(sim.new_qubit());
  for (int step = 0; step < 200; ++step) {
    const auto a = qs[rng() % 4];
    auto b = qs[rng() % 4];
    const double angle = (rng() % 1000) / 100.0;
    if (a != b && rng() % 2) {
      const QubitId pair[2] = {a, b};
      sim.apply(gates::ec_x(angle), pair, 0.97);
    } else if (rng() % 7 == 0) {
      sim.measure(a, 0.05, 0.005);
    } else {
      const QubitId one[1] = {a};
      sim.apply(gates::rot_y(angle), one, 0.99);
    }
    const Matrix rho = sim.reduced_state(qs);
    ASSERT_NEAR(rho.trace().real(), 1.0, 1e-9);
    ASSERT_LT((rho - rho.adjoint()).cwiseAbs().maxCoeff(), 1e-9);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    ASSERT_GE(es.eigenvalues().minCoeff(), -1e-9);
  }
}

// Operations on disjoint groups commute.
TEST(SimulatorTest, DisjointGroupsCommute) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const double t1 = (rng() % 628) / 100.0, t2 = (rng() % 628) / 100.0;
    Matrix results[2];
    for (int order = 0; order < 2; ++order) {
      Simulator sim(1);
      const QubitId a = sim.new_qubit(), b = sim.new_qubit();
      const QubitId c = sim.new_qubit(), d = sim.new_qubit();
      const QubitId ab[2] = {a, b}, cd[2] = {c, d};
      auto first = [&] { sim.apply(gates::ec_y(t1), ab, 0.95); };
      auto second = [&] { sim.apply(gates::ec_x(t2), cd, 0.9); };
      if (order == 0) {
        first();
        second();
      } else {
        second();
        first();
      }
      const QubitId all[4] = {a, b, c, d};
      results[order] = sim.reduced_state(all);
    }
    EXPECT_LT((results[0] - results[1]).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SimulatorTest, Determinism) {
  auto run = [] {
    Simulator sim(77);
    std::vector<int> out;
    for (int i = 0; i < 200; ++i) {
      const auto [a, b] = sim.make_epr_pair(0.9);
      out.push_back(sim.measure(a, 0.05, 0.005));
      out.push_back(sim.measure(b, 0.05, 0.005));
      sim.free_qubit(a);
      sim.free_qubit(b);
    }
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(SimulatorTest, ReducedStateOrdering) {
  Simulator sim(1);
  const QubitId a = sim.new_qubit(), b = sim.new_qubit();
  const QubitId bs[1] = {b};
  sim.apply(gates::pauli_x(), bs, 1.0);
  const QubitId ab[2] = {a, b}, ba[2] = {b, a};
  EXPECT_NEAR(sim.fidelity(ab, vec({0, 1, 0, 0})), 1.0, 1e-12);
  EXPECT_NEAR(sim.fidelity(ba, vec({0, 0, 1, 0})), 1.0, 1e-12);
}

TEST(GatesTest, EcMatrix) {
  const Matrix ec = gates::ec_x(M_PI / 2);
  EXPECT_LT((ec.topLeftCorner(2, 2) - gates::rot_x(M_PI / 2)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((ec.bottomRightCorner(2, 2) - gates::rot_x(-M_PI / 2)).cwiseAbs().maxCoeff(),
            1e-15);
  EXPECT_LT(ec.topRightCorner(2, 2).cwiseAbs().maxCoeff(), 1e-15);
  for (const auto& g : {gates::hadamard(), gates::k_gate(), gates::t_gate(),
                        gates::phase_s(), gates::cphase(), gates::ec_y(0.3)}) {
    EXPECT_TRUE(gates::is_unitary(g));
  }
  EXPECT_LT(gates::phase_distance(gates::rot_x(M_PI), gates::pauli_x()), 1e-15);
  EXPECT_GT(gates::phase_distance(gates::pauli_z(), gates::pauli_x()), 0.5);
}

}  // namespace
}  // namespace nqasm::qsim
