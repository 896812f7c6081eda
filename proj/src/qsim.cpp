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

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "nqasm/error.hpp"
#include "nqasm/gates.hpp"

namespace nqasm::qsim {

namespace {

using Index = Eigen::Index;

Index bit_of(int n, int position) { return Index{1} << (n - 1 - position); }

// M <- U M where U acts on the rows through the target qubits.
void apply_left(Matrix& m, int n, const Matrix& u, std::span<const int> targets) {
  const int k = static_cast<int>(targets.size());
  const Index dim = Index{1} << n;
  const Index sub = Index{1} << k;
  std::vector<Index> offset(static_cast<std::size_t>(sub), 0);
  Index mask = 0;
  for (Index s = 0; s < sub; ++s) {
    for (int j = 0; j < k; ++j) {
      if (s & (Index{1} << (k - 1 - j))) offset[s] |= bit_of(n, targets[j]);
    }
  }
  for (int j = 0; j < k; ++j) mask |= bit_of(n, targets[j]);

  Vector in(sub), out(sub);
  for (Index base = 0; base < dim; ++base) {
    if (base & mask) continue;
    for (Index c = 0; c < m.cols(); ++c) {
      for (Index s = 0; s < sub; ++s) in(s) = m(base | offset[s], c);
      out.noalias() = u * in;
      for (Index s = 0; s < sub; ++s) m(base | offset[s], c) = out(s);
    }
  }
}

Matrix pauli(int which) {
  switch (which) {
    case 1: return gates::pauli_x();
    case 2: return gates::pauli_y();
    case 3: return gates::pauli_z();
    default: return gates::identity();
  }
}

// out(i, j) = in(map[i], map[j]).
Matrix permute(const Matrix& in, const std::vector<Index>& map) {
  const Index dim = static_cast<Index>(map.size());
  Matrix out(dim, dim);
  for (Index j = 0; j < dim; ++j) {
    for (Index i = 0; i < dim; ++i) out(i, j) = in(map[i], map[j]);
  }
  return out;
}

}  // namespace

double depolarizing_probability(double fidelity) {
  return 4.0 / 3.0 * (1.0 - fidelity);
}

Matrix apply_unitary(const Matrix& rho, int n, const Matrix& u,
                     std::span<const int> targets) {
  Matrix m = rho;
  apply_left(m, n, u, targets);
  Matrix t = m.adjoint();
  apply_left(t, n, u, targets);
  return t.adjoint();
}

Matrix depolarize(const Matrix& rho, int n, int target, double p) {
  if (p == 0.0) return rho;
  const int t[1] = {target};
  Matrix out = (1.0 - p) * rho;
  for (int w = 1; w <= 3; ++w) {
    out += (p / 3.0) * apply_unitary(rho, n, pauli(w), t);
  }
  return out;
}

Matrix depolarize_joint(const Matrix& rho, int n, int a, int b, double p) {
  if (p == 0.0) return rho;
  const int t[2] = {a, b};
  Matrix out = (1.0 - p) * rho;
  for (int w = 1; w < 16; ++w) {
    const Matrix pp = gates::kron(pauli(w / 4), pauli(w % 4));
    out += (p / 15.0) * apply_unitary(rho, n, pp, t);
  }
  return out;
}

Matrix depolarizing_choi(double p) {
  // J = sum_ij |i><j| (x) E(|i><j|)
  Matrix choi = Matrix::Zero(4, 4);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Matrix e = Matrix::Zero(2, 2);
      e(i, j) = 1.0;
      choi.block(2 * i, 2 * j, 2, 2) = depolarize(e, 1, 0, p);
    }
  }
  return choi;
}

Matrix reduced(const Matrix& rho, int n, std::span<const int> keep) {
  const int m = static_cast<int>(keep.size());
  std::vector<int> traced;
  for (int q = 0; q < n; ++q) {
    if (std::find(keep.begin(), keep.end(), q) == keep.end()) traced.push_back(q);
  }
  const Index dk = Index{1} << m;
  const Index dt = Index{1} << traced.size();
  std::vector<Index> fk(static_cast<std::size_t>(dk), 0), ft(static_cast<std::size_t>(dt), 0);
  for (Index a = 0; a < dk; ++a) {
    for (int j = 0; j < m; ++j) {
      if (a & (Index{1} << (m - 1 - j))) fk[a] |= bit_of(n, keep[j]);
    }
  }
  const int tn = static_cast<int>(traced.size());
  for (Index t = 0; t < dt; ++t) {
    for (int j = 0; j < tn; ++j) {
      if (t & (Index{1} << (tn - 1 - j))) ft[t] |= bit_of(n, traced[j]);
    }
  }
  Matrix out = Matrix::Zero(dk, dk);
  for (Index b = 0; b < dk; ++b) {
    for (Index a = 0; a < dk; ++a) {
      std::complex<double> sum = 0.0;
      for (Index t = 0; t < dt; ++t) sum += rho(fk[a] | ft[t], fk[b] | ft[t]);
      out(a, b) = sum;
    }
  }
  return out;
}

int DensityState::position(QubitId q) const {
  const auto it = std::find(roster.begin(), roster.end(), q);
  return it == roster.end() ? -1 : static_cast<int>(it - roster.begin());
}

Simulator::Simulator(std::uint64_t seed, TwoQubitNoise two_qubit_noise)
    : seed_(seed), rng_(seed), two_qubit_noise_(two_qubit_noise) {}

double Simulator::uniform() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

double Simulator::keyed_uniform(std::uint64_t key, int index) const {
  const std::uint64_t x =
      splitmix64(splitmix64(seed_ ^ splitmix64(key)) + static_cast<std::uint64_t>(index));
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

std::uint64_t Simulator::new_group(DensityState state) {
  const std::uint64_t id = next_group_++;
  for (const QubitId q : state.roster) group_of_[q] = id;
  groups_.emplace(id, std::move(state));
  return id;
}

QubitId Simulator::new_qubit() {
  const QubitId q = next_qubit_++;
  DensityState s;
  s.roster = {q};
  s.rho = Matrix::Zero(2, 2);
  s.rho(0, 0) = 1.0;
  new_group(std::move(s));
  return q;
}

const DensityState& Simulator::group(QubitId q) const {
  const auto it = group_of_.find(q);
  if (it == group_of_.end()) {
    throw Error(ErrorCode::kNoSuchQubit, "qubit " + std::to_string(q));
  }
  return groups_.at(it->second);
}

DensityState& Simulator::mutable_group(QubitId q) {
  return const_cast<DensityState&>(std::as_const(*this).group(q));
}

void Simulator::remove_from_group(QubitId q) {
  const std::uint64_t gid = group_of_.at(q);
  DensityState& g = groups_.at(gid);
  const int pos = g.position(q);
  std::vector<int> keep;
  for (int i = 0; i < g.size(); ++i) {
    if (i != pos) keep.push_back(i);
  }
  if (keep.empty()) {
    groups_.erase(gid);
  } else {
    g.rho = reduced(g.rho, g.size(), keep);
    g.roster.erase(g.roster.begin() + pos);
  }
  group_of_.erase(q);
}

void Simulator::init_qubit(QubitId q, double fidelity, double duration_ns) {
  const double clock = group(q).clock_ns;
  remove_from_group(q);
  DensityState s;
  s.roster = {q};
  s.rho = Matrix::Zero(2, 2);
  s.rho(0, 0) = 1.0;
  s.rho = depolarize(s.rho, 1, 0, depolarizing_probability(fidelity));
  s.clock_ns = clock + duration_ns;
  new_group(std::move(s));
}

void Simulator::free_qubit(QubitId q) {
  group(q);  // existence check
  remove_from_group(q);
}

DensityState& Simulator::merge(std::span<const QubitId> qubits) {
  std::vector<std::uint64_t> ids;
  for (const QubitId q : qubits) {
    group(q);
    const std::uint64_t gid = group_of_.at(q);
    if (std::find(ids.begin(), ids.end(), gid) == ids.end()) ids.push_back(gid);
  }
  if (ids.size() == 1) return groups_.at(ids[0]);
  int total = 0;
  for (const auto gid : ids) total += groups_.at(gid).size();
  if (total > kMaxGroupQubits) {
    throw Error(ErrorCode::kTooManyQubits,
                std::to_string(total) + " qubits in one entangled group");
  }
  DensityState merged;
  merged.rho = Matrix::Ones(1, 1);
  for (const auto gid : ids) {
    DensityState& g = groups_.at(gid);
    merged.rho = gates::kron(merged.rho, g.rho);
    merged.roster.insert(merged.roster.end(), g.roster.begin(), g.roster.end());
    merged.clock_ns = std::max(merged.clock_ns, g.clock_ns);
    groups_.erase(gid);
  }
  return groups_.at(new_group(std::move(merged)));
}

void Simulator::apply(const Matrix& u, std::span<const QubitId> qubits,
                      double fidelity, double duration_ns) {
  const Index expected = Index{1} << qubits.size();
  if (u.rows() != expected || u.cols() != expected) {
    throw Error(ErrorCode::kDimensionMismatch,
                "gate of dimension " + std::to_string(u.rows()) + " on " +
                    std::to_string(qubits.size()) + " qubits");
  }
  if (!gates::is_unitary(u)) throw Error(ErrorCode::kNotUnitary, "gate matrix");
  if (std::set<QubitId>(qubits.begin(), qubits.end()).size() != qubits.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "repeated qubit operand");
  }
  DensityState& g = merge(qubits);
  std::vector<int> pos;
  for (const QubitId q : qubits) pos.push_back(g.position(q));
  const int n = g.size();
  g.rho = apply_unitary(g.rho, n, u, pos);
  const double p = depolarizing_probability(fidelity);
  if (p != 0.0) {
    if (pos.size() == 2 && two_qubit_noise_ == TwoQubitNoise::kJoint) {
      g.rho = depolarize_joint(g.rho, n, pos[0], pos[1], p);
    } else {
      for (const int t : pos) g.rho = depolarize(g.rho, n, t, p);
    }
  }
  g.clock_ns += duration_ns;
}

int Simulator::collapse(QubitId q, double draw, double duration_ns) {
  DensityState& g = mutable_group(q);
  const int n = g.size();
  const Index bit = bit_of(n, g.position(q));
  double p1 = 0.0;
  for (Index i = 0; i < g.rho.rows(); ++i) {
    if (i & bit) p1 += g.rho(i, i).real();
  }
  p1 = std::clamp(p1, 0.0, 1.0);
  const int outcome = draw < p1 ? 1 : 0;
  const double prob = outcome == 1 ? p1 : 1.0 - p1;
  for (Index j = 0; j < g.rho.cols(); ++j) {
    for (Index i = 0; i < g.rho.rows(); ++i) {
      if (((i & bit) != 0) != (outcome == 1) || ((j & bit) != 0) != (outcome == 1)) {
        g.rho(i, j) = 0.0;
      }
    }
  }
  g.rho /= prob;
  const double clock = g.clock_ns + duration_ns;
  g.clock_ns = clock;
  remove_from_group(q);
  DensityState s;
  s.roster = {q};
  s.rho = Matrix::Zero(2, 2);
  s.rho(outcome, outcome) = 1.0;
  s.clock_ns = clock;
  new_group(std::move(s));
  return outcome;
}

int Simulator::measure(QubitId q, double prob_error_meas_0,
                       double prob_error_meas_1, double duration_ns) {
  const int outcome = collapse(q, uniform(), duration_ns);
  const double flip = outcome == 0 ? prob_error_meas_0 : prob_error_meas_1;
  if (flip > 0.0 && uniform() < flip) return 1 - outcome;
  return outcome;
}

int Simulator::measure_keyed(QubitId q, std::uint64_t key, double prob_error_meas_0,
                             double prob_error_meas_1, double duration_ns) {
  const int outcome = collapse(q, keyed_uniform(key, 0), duration_ns);
  const double flip = outcome == 0 ? prob_error_meas_0 : prob_error_meas_1;
  return keyed_uniform(key, 1) < flip ? 1 - outcome : outcome;
}

std::pair<QubitId, QubitId> Simulator::make_epr_pair(double link_fidelity,
                                                     double duration_ns) {
  const QubitId a = next_qubit_++;
  const QubitId b = next_qubit_++;
  const double p = std::clamp(depolarizing_probability(link_fidelity), 0.0, 4.0 / 3.0);
  Matrix phi = Matrix::Zero(4, 4);
  phi(0, 0) = phi(0, 3) = phi(3, 0) = phi(3, 3) = 0.5;
  DensityState s;
  s.roster = {a, b};
  s.rho = (1.0 - p) * phi + (p / 4.0) * Matrix::Identity(4, 4);
  s.clock_ns = duration_ns;
  new_group(std::move(s));
  return {a, b};
}

Matrix Simulator::reduced_state(std::span<const QubitId> qubits) const {
  std::vector<std::uint64_t> ids;
  for (const QubitId q : qubits) {
    group(q);
    const auto gid = group_of_.at(q);
    if (std::find(ids.begin(), ids.end(), gid) == ids.end()) ids.push_back(gid);
  }
  Matrix joint = Matrix::Ones(1, 1);
  std::vector<QubitId> order;
  for (const auto gid : ids) {
    const DensityState& g = groups_.at(gid);
    std::vector<int> keep;
    for (const QubitId q : qubits) {
      if (group_of_.at(q) == gid) {
        keep.push_back(g.position(q));
        order.push_back(q);
      }
    }
    joint = gates::kron(joint, reduced(g.rho, g.size(), keep));
  }
  const int n = static_cast<int>(qubits.size());
  const Index dim = Index{1} << n;
  std::vector<Index> map(static_cast<std::size_t>(dim), 0);
  for (Index i = 0; i < dim; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i & bit_of(n, j)) {
        const auto at = std::find(order.begin(), order.end(), qubits[j]) - order.begin();
        map[i] |= bit_of(n, static_cast<int>(at));
      }
    }
  }
  return permute(joint, map);
}

double Simulator::fidelity(std::span<const QubitId> qubits, const Vector& psi) const {
  const Matrix rho = reduced_state(qubits);
  if (psi.size() != rho.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "state of dimension " + std::to_string(psi.size()) + " vs " +
                    std::to_string(rho.rows()));
  }
  return std::clamp((psi.adjoint() * rho * psi)(0, 0).real(), 0.0, 1.0);
}

}  // namespace nqasm::qsim
