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

#include "nqasm/gates.hpp"

#include <cmath>
#include <complex>

namespace nqasm::gates {

namespace {
using C = std::complex<double>;
constexpr C kI{0.0, 1.0};

Matrix m2(C a, C b, C c, C d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Matrix rotation(const Matrix& pauli, double angle) {
  return std::cos(angle / 2) * identity() - kI * std::sin(angle / 2) * pauli;
}

Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix m = Matrix::Zero(4, 4);
  m.topLeftCorner(2, 2) = a;
  m.bottomRightCorner(2, 2) = b;
  return m;
}
}  // namespace

Matrix identity(int qubits) {
  const auto dim = Eigen::Index{1} << qubits;
  return Matrix::Identity(dim, dim);
}

Matrix pauli_x() { return m2(0, 1, 1, 0); }
Matrix pauli_y() { return m2(0, -kI, kI, 0); }
Matrix pauli_z() { return m2(1, 0, 0, -1); }
Matrix hadamard() { return m2(1, 1, 1, -1) / std::sqrt(2.0); }
Matrix phase_s() { return m2(1, 0, 0, kI); }
Matrix k_gate() { return m2(1, -kI, kI, -1) / std::sqrt(2.0); }
Matrix t_gate() { return m2(1, 0, 0, std::exp(kI * (M_PI / 4))); }
Matrix rot_x(double angle) { return rotation(pauli_x(), angle); }
Matrix rot_y(double angle) { return rotation(pauli_y(), angle); }
Matrix rot_z(double angle) { return rotation(pauli_z(), angle); }

Matrix cnot() { return block_diag(identity(), pauli_x()); }
Matrix cphase() { return block_diag(identity(), pauli_z()); }
Matrix ec_x(double angle) { return block_diag(rot_x(angle), rot_x(-angle)); }
Matrix ec_y(double angle) { return block_diag(rot_y(angle), rot_y(-angle)); }

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

bool is_unitary(const Matrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  const Matrix diff = u.adjoint() * u - Matrix::Identity(u.rows(), u.cols());
  return diff.cwiseAbs().maxCoeff() <= tol;
}

double phase_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  // Align on the largest entry of b.
  Eigen::Index r = 0, c = 0;
  b.cwiseAbs().maxCoeff(&r, &c);
  if (std::abs(b(r, c)) == 0.0) return a.cwiseAbs().maxCoeff();
  C phase = a(r, c) / b(r, c);
  if (std::abs(phase) == 0.0) return (a - b).cwiseAbs().maxCoeff();
  phase /= std::abs(phase);
  return (a - phase * b).cwiseAbs().maxCoeff();
}

}  // namespace nqasm::gates
