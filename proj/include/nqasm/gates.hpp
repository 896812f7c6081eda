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

// Gate matrices. Rotations follow R_P(a) = exp(-i a P / 2). For two-qubit
// gates the first qubit is the most significant one.

#ifndef NQASM_GATES_HPP_
#define NQASM_GATES_HPP_

#include <Eigen/Dense>

namespace nqasm::gates {

using Matrix = Eigen::MatrixXcd;

Matrix identity(int qubits = 1);
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
Matrix hadamard();
Matrix phase_s();
Matrix k_gate();
Matrix t_gate();
Matrix rot_x(double angle);
Matrix rot_y(double angle);
Matrix rot_z(double angle);
// Control first.
Matrix cnot();
Matrix cphase();
// diag(R_x(a), R_x(-a)) and diag(R_y(a), R_y(-a)), control (electron) first.
Matrix ec_x(double angle);
Matrix ec_y(double angle);

Matrix kron(const Matrix& a, const Matrix& b);
bool is_unitary(const Matrix& u, double tol = 1e-9);
// max |a - e^{i phi} b| over entries for the best global phase phi.
double phase_distance(const Matrix& a, const Matrix& b);

}  // namespace nqasm::gates

#endif  // NQASM_GATES_HPP_
