#include "defx/kernels.hpp"

#include <cstdint>

namespace defx::kernels {

namespace {
// Below this many multiply-adds the fork/join overhead dominates.
constexpr std::int64_t kParallelCutoff = 1 << 15;
}  // namespace

namespace serial {

void matvec(const double* a, const double* x, double* y, int m, int k) {
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    const double* row = a + static_cast<std::size_t>(i) * k;
    for (int l = 0; l < k; ++l) acc += row[l] * x[l];
    y[i] = acc;
  }
}

void matvec_t_acc(const double* a, const double* dy, double* dx, int m, int k) {
  // Same reduction structure as the parallel kernel: one local accumulator
  // per output element, added to dx in a single store.
  for (int l = 0; l < k; ++l) {
    double acc = 0.0;
    for (int i = 0; i < m; ++i) acc += a[static_cast<std::size_t>(i) * k + l] * dy[i];
    dx[l] += acc;
  }
}

void outer_acc(const double* dy, const double* x, double* da, int m, int k) {
  for (int i = 0; i < m; ++i) {
    double* row = da + static_cast<std::size_t>(i) * k;
    const double g = dy[i];
    for (int l = 0; l < k; ++l) row[l] += g * x[l];
  }
}

void matmul(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    double* crow = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int l = 0; l < k; ++l) acc += arow[l] * b[static_cast<std::size_t>(l) * n + j];
      crow[j] = acc;
    }
  }
}

void matmul_nt_acc(const double* dc, const double* b, double* da, int m, int n, int k) {
  for (int i = 0; i < m; ++i) {
    const double* dcrow = dc + static_cast<std::size_t>(i) * n;
    double* darow = da + static_cast<std::size_t>(i) * k;
    for (int l = 0; l < k; ++l) {
      double acc = 0.0;
      const double* brow = b + static_cast<std::size_t>(l) * n;
      for (int j = 0; j < n; ++j) acc += dcrow[j] * brow[j];
      darow[l] += acc;
    }
  }
}

void matmul_tn_acc(const double* a, const double* dc, double* db, int m, int k, int n) {
  for (int l = 0; l < k; ++l) {
    double* dbrow = db + static_cast<std::size_t>(l) * n;
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int i = 0; i < m; ++i)
        acc += a[static_cast<std::size_t>(i) * k + l] * dc[static_cast<std::size_t>(i) * n + j];
      dbrow[j] += acc;
    }
  }
}

}  // namespace serial

void matvec(const double* a, const double* x, double* y, int m, int k) {
  const std::int64_t work = static_cast<std::int64_t>(m) * k;
#pragma omp parallel for schedule(static) if (work >= kParallelCutoff)
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    const double* row = a + static_cast<std::size_t>(i) * k;
    for (int l = 0; l < k; ++l) acc += row[l] * x[l];
    y[i] = acc;
  }
}

void matvec_t_acc(const double* a, const double* dy, double* dx, int m, int k) {
  const std::int64_t work = static_cast<std::int64_t>(m) * k;
#pragma omp parallel for schedule(static) if (work >= kParallelCutoff)
  for (int l = 0; l < k; ++l) {
    double acc = 0.0;
    for (int i = 0; i < m; ++i) acc += a[static_cast<std::size_t>(i) * k + l] * dy[i];
    dx[l] += acc;
  }
}

void outer_acc(const double* dy, const double* x, double* da, int m, int k) {
  const std::int64_t work = static_cast<std::int64_t>(m) * k;
#pragma omp parallel for schedule(static) if (work >= kParallelCutoff)
  for (int i = 0; i < m; ++i) {
    double* row = da + static_cast<std::size_t>(i) * k;
    const double g = dy[i];
    for (int l = 0; l < k; ++l) row[l] += g * x[l];
  }
}

void matmul(const double* a, const double* b, double* c, int m, int k, int n) {
  const std::int64_t work = static_cast<std::int64_t>(m) * k * n;
#pragma omp parallel for schedule(static) if (work >= kParallelCutoff)
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    double* crow = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int l = 0; l < k; ++l) acc += arow[l] * b[static_cast<std::size_t>(l) * n + j];
      crow[j] = acc;
    }
  }
}

void matmul_nt_acc(const double* dc, const double* b, double* da, int m, int n, int k) {
  const std::int64_t work = static_cast<std::int64_t>(m) * n * k;
#pragma omp parallel for schedule(static) if (work >= kParallelCutoff)
  for (int i = 0; i < m; ++i) {
    const double* dcrow = dc + static_cast<std::size_t>(i) * n;
    double* darow = da + static_cast<std::size_t>(i) * k;
    for (int l = 0; l < k; ++l) {
      double acc = 0.0;
      const double* brow = b + static_cast<std::size_t>(l) * n;
      for (int j = 0; j < n; ++j) acc += dcrow[j] * brow[j];
      darow[l] += acc;
    }
  }
}

void matmul_tn_acc(const double* a, const double* dc, double* db, int m, int k, int n) {
  const std::int64_t work = static_cast<std::int64_t>(m) * k * n;
#pragma omp parallel for schedule(static) if (work >= kParallelCutoff)
  for (int l = 0; l < k; ++l) {
    double* dbrow = db + static_cast<std::size_t>(l) * n;
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int i = 0; i < m; ++i)
        acc += a[static_cast<std::size_t>(i) * k + l] * dc[static_cast<std::size_t>(i) * n + j];
      dbrow[j] += acc;
    }
  }
}

}  // namespace defx::kernels
