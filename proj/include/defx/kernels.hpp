#pragma once

namespace defx::kernels {

// Serial reference kernels. Ground truth for the OpenMP versions below;
// kept deliberately dumb.
namespace serial {

// y = A x, A is m x k.
void matvec(const double* a, const double* x, double* y, int m, int k);
// dx += A^T dy, A is m x k, dy has length m.
void matvec_t_acc(const double* a, const double* dy, double* dx, int m, int k);
// dA += dy x^T, dA is m x k.
void outer_acc(const double* dy, const double* x, double* da, int m, int k);
// C = A B, A is m x k, B is k x n.
void matmul(const double* a, const double* b, double* c, int m, int k, int n);
// dA += dC B^T, dC is m x n, B is k x n, dA is m x k.
void matmul_nt_acc(const double* dc, const double* b, double* da, int m, int n, int k);
// dB += A^T dC, A is m x k, dC is m x n, dB is k x n.
void matmul_tn_acc(const double* a, const double* dc, double* db, int m, int k, int n);

}  // namespace serial

// OpenMP kernels, same contracts as the serial ones. Each output element is
// reduced by exactly one thread in the same summation order as the serial
// version, so the results are bit-identical for any thread count.
void matvec(const double* a, const double* x, double* y, int m, int k);
void matvec_t_acc(const double* a, const double* dy, double* dx, int m, int k);
void outer_acc(const double* dy, const double* x, double* da, int m, int k);
void matmul(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_nt_acc(const double* dc, const double* b, double* da, int m, int n, int k);
void matmul_tn_acc(const double* a, const double* dc, double* db, int m, int k, int n);

}  // namespace defx::kernels
