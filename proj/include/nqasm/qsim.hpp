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

// Density-matrix backend. Qubits live in groups; each group holds the joint
// state of the qubits that have interacted, so unrelated qubits never share a
// matrix. Noise is depolarizing with p = 4/3 (1 - F).

#ifndef NQASM_QSIM_HPP_
#define NQASM_QSIM_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace nqasm::qsim {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using QubitId = std::int64_t;

inline constexpr int kMaxGroupQubits = 12;

// p for a target fidelity F.
double depolarizing_probability(double fidelity);

// rho -> (1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z) on qubit `target` of an
// n-qubit matrix (qubit 0 is the most significant).
Matrix depolarize(const Matrix& rho, int n, int target, double p);
// Two-qubit channel: rho -> (1-p) rho + p/15 sum of the 15 non-identity
// two-qubit Pauli conjugations.
Matrix depolarize_joint(const Matrix& rho, int n, int a, int b, double p);
// Choi matrix of the single-qubit channel, for complete-positivity checks.
Matrix depolarizing_choi(double p);

// U rho U^dagger with U acting on `targets` (in U's qubit order).
Matrix apply_unitary(const Matrix& rho, int n, const Matrix& u,
                     std::span<const int> targets);
// Partial trace over every qubit not in `keep`; result in `keep` order.
Matrix reduced(const Matrix& rho, int n, std::span<const int> keep);

enum class TwoQubitNoise { kPerQubit, kJoint };

struct DensityState {
  std::vector<QubitId> roster;
  Matrix rho;
  double clock_ns = 0.0;

  int size() const { return static_cast<int>(roster.size()); }
  int position(QubitId q) const;
};

class Simulator {
 public:
  explicit Simulator(std::uint64_t seed,
                     TwoQubitNoise two_qubit_noise = TwoQubitNoise::kPerQubit);

  // Fresh qubit in |0>.
  QubitId new_qubit();
  bool exists(QubitId q) const { return group_of_.contains(q); }
  std::size_t qubit_count() const { return group_of_.size(); }

  // Discards the qubit's old content and prepares |0> depolarized to
  // `fidelity`.
  void init_qubit(QubitId q, double fidelity, double duration_ns = 0.0);
  // Traces the qubit out and forgets it.
  void free_qubit(QubitId q);

  // Throws kNotUnitary, kNoSuchQubit, kTooManyQubits, kDimensionMismatch.
  void apply(const Matrix& u, std::span<const QubitId> qubits, double fidelity,
             double duration_ns = 0.0);

  // Z-basis measurement. The qubit stays in the simulator, collapsed to the
  // true outcome and split off into its own group. The returned bit is the
  // reported one, flipped with the given probabilities.
  int measure(QubitId q, double prob_error_meas_0 = 0.0,
              double prob_error_meas_1 = 0.0, double duration_ns = 0.0);
  // Same, with both draws taken from the stream named by `key` instead of
  // the shared generator. Runs that measure at the same keys in a different
  // order then see the same randomness at each key.
  int measure_keyed(QubitId q, std::uint64_t key, double prob_error_meas_0 = 0.0,
                    double prob_error_meas_1 = 0.0, double duration_ns = 0.0);

  // Two fresh qubits holding (1-p) Phi+ + p I/4, fidelity `link_fidelity`
  // with Phi+.
  std::pair<QubitId, QubitId> make_epr_pair(double link_fidelity,
                                            double duration_ns = 0.0);

  // Joint reduced state of `qubits` in the given order.
  Matrix reduced_state(std::span<const QubitId> qubits) const;
  // <psi| rho |psi> for the reduced state of `qubits`. Throws
  // kDimensionMismatch.
  double fidelity(std::span<const QubitId> qubits, const Vector& psi) const;

  const DensityState& group(QubitId q) const;
  std::size_t group_count() const { return groups_.size(); }

  // Uniform double in [0, 1) from the 53 high bits of the generator.
  double uniform();
  // Draw `index` of the keyed stream `key`; a pure function of the seed.
  double keyed_uniform(std::uint64_t key, int index) const;
  std::mt19937_64& rng() { return rng_; }

 private:
  DensityState& mutable_group(QubitId q);
  // Merges the groups of all `qubits` into one and returns it.
  DensityState& merge(std::span<const QubitId> qubits);
  void remove_from_group(QubitId q);
  // Projects q onto the outcome picked by `draw`; returns the true outcome.
  int collapse(QubitId q, double draw, double duration_ns);
  std::uint64_t new_group(DensityState state);

  std::uint64_t seed_;
  std::mt19937_64 rng_;
  TwoQubitNoise two_qubit_noise_;
  QubitId next_qubit_ = 0;
  std::uint64_t next_group_ = 0;
  std::map<std::uint64_t, DensityState> groups_;
  std::map<QubitId, std::uint64_t> group_of_;
};

}  // namespace nqasm::qsim

#endif  // NQASM_QSIM_HPP_
