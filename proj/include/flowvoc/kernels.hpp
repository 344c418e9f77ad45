#pragma once

#include <cstddef>

// Dense compute primitives for the velocity-field network. Activations use a
// channels-last layout [rows, frames, channels]; weight matrices are
// row-major [out, in].
//
// The functions in kernels:: are the OpenMP-parallel production path. Each
// output element is produced by exactly one thread with a fixed accumulation
// order, so results do not depend on the thread count. kernels::ref:: holds
// plain serial implementations kept as a correctness reference for tests and
// the kernel benchmark.

namespace flowvoc::kernels {

using idx = std::size_t;

// C[M,N] = A[M,K] * B[K,N] (+ C if accumulate), row-major.
template <typename T>
void gemm_nn(idx M, idx N, idx K, const T* A, const T* B, T* C, bool accumulate);

// C[M,N] = A^T * B with A stored [K,M], B [K,N] (+ C if accumulate).
template <typename T>
void gemm_tn(idx M, idx N, idx K, const T* A, const T* B, T* C, bool accumulate);

// y[M,N] = x[M,K] * w[N,K]^T + b. Packs w transposed into scratch [K*N].
template <typename T>
void linear_fwd(idx M, idx N, idx K, const T* x, const T* w, const T* b, T* y, T* scratch_kn);

// Depthwise conv over the frame axis, zero padding, odd kernel size.
// x,y: [rows, frames, ch]; w: [ch, ktaps]; b: [ch] (nullable).
template <typename T>
void dwconv_fwd(idx rows, idx frames, idx ch, idx ktaps, const T* x, const T* w, const T* b, T* y);

template <typename T>
void dwconv_bwd_input(idx rows, idx frames, idx ch, idx ktaps, const T* dy, const T* w, T* dx);

// Accumulates into dw/db.
template <typename T>
void dwconv_bwd_params(idx rows, idx frames, idx ch, idx ktaps, const T* x, const T* dy, T* dw, T* db);

// Layer norm over the channel axis with per-row scale/shift tables
// (adaptive conditioning): y = scale_rows[r][c] * xhat + shift_rows[r][c].
// mean/rstd are saved per (row, frame) for the backward pass.
template <typename T>
void layernorm_adaln_fwd(idx rows, idx frames, idx ch, const T* x,
                         const T* const* scale_rows, const T* const* shift_rows,
                         T eps, T* y, T* mean, T* rstd);

// dx from dy; accumulates per-row grads into dscale_rows/dshift_rows
// (callers pass one grad slot per row; rows sharing a table must pass the
// same pointer and accept serial accumulation order).
template <typename T>
void layernorm_adaln_bwd(idx rows, idx frames, idx ch, const T* x, const T* dy,
                         const T* const* scale_rows, const T* mean, const T* rstd,
                         T* dx, T* const* dscale_rows, T* const* dshift_rows);

// Exact (erf) GELU.
template <typename T>
void gelu_fwd(idx n, const T* x, T* y);

template <typename T>
void gelu_bwd(idx n, const T* x, const T* dy, T* dx);

// Global response normalization over the frame axis (per row):
//   gx[c] = ||x[r,:,c]||_2, nx = gx / (mean_c gx + eps),
//   y = gamma * (x * nx) + beta + x.
// gx and nx are saved per row [rows, ch].
template <typename T>
void grn_fwd(idx rows, idx frames, idx ch, const T* x, const T* gamma, const T* beta,
             T eps, T* y, T* gx, T* nx);

template <typename T>
void grn_bwd(idx rows, idx frames, idx ch, const T* x, const T* dy, const T* gamma,
             const T* gx, const T* nx, T eps, T* dx, T* dgamma, T* dbeta);

// y[r,f,:] += v[r,:] for every frame.
template <typename T>
void add_row_vec(idx rows, idx frames, idx ch, const T* v, T* y);

// out[n,m] = in[m,n]
template <typename T>
void transpose(idx m, idx n, const T* in, T* out);

namespace ref {

template <typename T>
void gemm_nn(idx M, idx N, idx K, const T* A, const T* B, T* C, bool accumulate);

template <typename T>
void gemm_tn(idx M, idx N, idx K, const T* A, const T* B, T* C, bool accumulate);

template <typename T>
void dwconv_fwd(idx rows, idx frames, idx ch, idx ktaps, const T* x, const T* w, const T* b, T* y);

template <typename T>
void layernorm_adaln_fwd(idx rows, idx frames, idx ch, const T* x,
                         const T* const* scale_rows, const T* const* shift_rows,
                         T eps, T* y, T* mean, T* rstd);

template <typename T>
void gelu_fwd(idx n, const T* x, T* y);

template <typename T>
void grn_fwd(idx rows, idx frames, idx ch, const T* x, const T* gamma, const T* beta,
             T eps, T* y, T* gx, T* nx);

}  // namespace ref

}  // namespace flowvoc::kernels
