#include "flowvoc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <vector>

namespace flowvoc::kernels {

namespace {

// Register-blocked GEMM micro-kernel: MR rows of A broadcast against an
// NR-wide strip of B rows. acc stays in vector registers after unrolling.
template <typename T, int MR, int NR>
inline void micro_nn(idx K, const T* A, idx lda, const T* B, idx ldb, T* C, idx ldc,
                     bool accumulate) {
    T acc[MR][NR] = {};
    for (idx k = 0; k < K; ++k) {
        const T* brow = B + k * ldb;
        for (int i = 0; i < MR; ++i) {
            const T a = A[i * lda + k];
            for (int j = 0; j < NR; ++j) acc[i][j] += a * brow[j];
        }
    }
    for (int i = 0; i < MR; ++i) {
        T* crow = C + i * ldc;
        if (accumulate)
            for (int j = 0; j < NR; ++j) crow[j] += acc[i][j];
        else
            for (int j = 0; j < NR; ++j) crow[j] = acc[i][j];
    }
}

// Edge tile with runtime bounds.
template <typename T>
inline void micro_nn_edge(idx mr, idx nr, idx K, const T* A, idx lda, const T* B, idx ldb,
                          T* C, idx ldc, bool accumulate) {
    for (idx i = 0; i < mr; ++i) {
        for (idx j = 0; j < nr; ++j) {
            T s = accumulate ? C[i * ldc + j] : T(0);
            for (idx k = 0; k < K; ++k) s += A[i * lda + k] * B[k * ldb + j];
            C[i * ldc + j] = s;
        }
    }
}

template <typename T, int MR, int NR>
inline void micro_tn(idx K, const T* A, idx lda, const T* B, idx ldb, T* C, idx ldc,
                     bool accumulate) {
    T acc[MR][NR] = {};
    for (idx k = 0; k < K; ++k) {
        const T* arow = A + k * lda;
        const T* brow = B + k * ldb;
        for (int i = 0; i < MR; ++i) {
            const T a = arow[i];
            for (int j = 0; j < NR; ++j) acc[i][j] += a * brow[j];
        }
    }
    for (int i = 0; i < MR; ++i) {
        T* crow = C + i * ldc;
        if (accumulate)
            for (int j = 0; j < NR; ++j) crow[j] += acc[i][j];
        else
            for (int j = 0; j < NR; ++j) crow[j] = acc[i][j];
    }
}

template <typename T>
inline void micro_tn_edge(idx mr, idx nr, idx K, const T* A, idx lda, const T* B, idx ldb,
                          T* C, idx ldc, bool accumulate) {
    for (idx i = 0; i < mr; ++i) {
        for (idx j = 0; j < nr; ++j) {
            T s = accumulate ? C[i * ldc + j] : T(0);
            for (idx k = 0; k < K; ++k) s += A[k * lda + i] * B[k * ldb + j];
            C[i * ldc + j] = s;
        }
    }
}

constexpr int kMR = 4;
constexpr int kNR = 32;

}  // namespace

template <typename T>
void gemm_nn(idx M, idx N, idx K, const T* A, const T* B, T* C, bool accumulate) {
    const idx mfull = M / kMR * kMR;
    const idx nfull = N / kNR * kNR;
#pragma omp parallel for schedule(static)
    for (idx m = 0; m < mfull; m += kMR) {
        for (idx n = 0; n < nfull; n += kNR)
            micro_nn<T, kMR, kNR>(K, A + m * K, K, B + n, N, C + m * N + n, N, accumulate);
        if (nfull < N)
            micro_nn_edge<T>(kMR, N - nfull, K, A + m * K, K, B + nfull, N,
                             C + m * N + nfull, N, accumulate);
    }
    if (mfull < M)
        micro_nn_edge<T>(M - mfull, N, K, A + mfull * K, K, B, N, C + mfull * N, N, accumulate);
}

template <typename T>
void gemm_tn(idx M, idx N, idx K, const T* A, const T* B, T* C, bool accumulate) {
    const idx mfull = M / kMR * kMR;
    const idx nfull = N / kNR * kNR;
#pragma omp parallel for schedule(static)
    for (idx m = 0; m < mfull; m += kMR) {
        for (idx n = 0; n < nfull; n += kNR)
            micro_tn<T, kMR, kNR>(K, A + m, M, B + n, N, C + m * N + n, N, accumulate);
        if (nfull < N)
            micro_tn_edge<T>(kMR, N - nfull, K, A + m, M, B + nfull, N,
                             C + m * N + nfull, N, accumulate);
    }
    if (mfull < M)
        micro_tn_edge<T>(M - mfull, N, K, A + mfull, M, B, N, C + mfull * N, N, accumulate);
}

template <typename T>
void linear_fwd(idx M, idx N, idx K, const T* x, const T* w, const T* b, T* y, T* scratch_kn) {
    transpose(N, K, w, scratch_kn);  // w [N,K] -> scratch [K,N]
    gemm_nn(M, N, K, x, scratch_kn, y, false);
    if (b) {
#pragma omp parallel for schedule(static)
        for (idx m = 0; m < M; ++m) {
            T* row = y + m * N;
            for (idx j = 0; j < N; ++j) row[j] += b[j];
        }
    }
}

template <typename T>
void dwconv_fwd(idx rows, idx frames, idx ch, idx ktaps, const T* x, const T* w, const T* b,
                T* y) {
    const idx pad = (ktaps - 1) / 2;
#pragma omp parallel for schedule(static)
    for (idx rf = 0; rf < rows * frames; ++rf) {
        const idx r = rf / frames;
        const idx f = rf % frames;
        T* out = y + (r * frames + f) * ch;
        if (b)
            std::copy(b, b + ch, out);
        else
            std::fill(out, out + ch, T(0));
        for (idx k = 0; k < ktaps; ++k) {
            const idx fsrc = f + k;  // padded coordinate
            if (fsrc < pad || fsrc >= frames + pad) continue;
            const T* src = x + (r * frames + (fsrc - pad)) * ch;
            const T* wk = w;  // w[c, k] accessed strided below
            for (idx c = 0; c < ch; ++c) out[c] += wk[c * ktaps + k] * src[c];
        }
    }
}

template <typename T>
void dwconv_bwd_input(idx rows, idx frames, idx ch, idx ktaps, const T* dy, const T* w, T* dx) {
    const idx pad = (ktaps - 1) / 2;
#pragma omp parallel for schedule(static)
    for (idx rf = 0; rf < rows * frames; ++rf) {
        const idx r = rf / frames;
        const idx f = rf % frames;
        T* out = dx + (r * frames + f) * ch;
        std::fill(out, out + ch, T(0));
        // dx[f] gathers dy[f'] where f' + k - pad == f
        for (idx k = 0; k < ktaps; ++k) {
            const idx fdst = f + pad;  // f' + k == f + pad
            if (fdst < k) continue;
            const idx fp = fdst - k;
            if (fp >= frames) continue;
            const T* src = dy + (r * frames + fp) * ch;
            for (idx c = 0; c < ch; ++c) out[c] += w[c * ktaps + k] * src[c];
        }
    }
}

template <typename T>
void dwconv_bwd_params(idx rows, idx frames, idx ch, idx ktaps, const T* x, const T* dy,
                       T* dw, T* db) {
    const idx pad = (ktaps - 1) / 2;
#pragma omp parallel for schedule(static)
    for (idx k = 0; k < ktaps; ++k) {
        for (idx r = 0; r < rows; ++r) {
            for (idx f = 0; f < frames; ++f) {
                const idx fsrc = f + k;
                if (fsrc < pad || fsrc >= frames + pad) continue;
                const T* xin = x + (r * frames + (fsrc - pad)) * ch;
                const T* g = dy + (r * frames + f) * ch;
                for (idx c = 0; c < ch; ++c) dw[c * ktaps + k] += g[c] * xin[c];
            }
        }
    }
    if (db) {
        for (idx r = 0; r < rows; ++r)
            for (idx f = 0; f < frames; ++f) {
                const T* g = dy + (r * frames + f) * ch;
                for (idx c = 0; c < ch; ++c) db[c] += g[c];
            }
    }
}

template <typename T>
void layernorm_adaln_fwd(idx rows, idx frames, idx ch, const T* x,
                         const T* const* scale_rows, const T* const* shift_rows,
                         T eps, T* y, T* mean, T* rstd) {
#pragma omp parallel for schedule(static)
    for (idx rf = 0; rf < rows * frames; ++rf) {
        const idx r = rf / frames;
        const T* in = x + rf * ch;
        T* out = y + rf * ch;
        T s = 0, ss = 0;
        for (idx c = 0; c < ch; ++c) {
            s += in[c];
            ss += in[c] * in[c];
        }
        const T mu = s / static_cast<T>(ch);
        T var = ss / static_cast<T>(ch) - mu * mu;
        if (var < T(0)) var = T(0);
        const T rs = T(1) / std::sqrt(var + eps);
        mean[rf] = mu;
        rstd[rf] = rs;
        const T* sc = scale_rows[r];
        const T* sh = shift_rows[r];
        for (idx c = 0; c < ch; ++c) out[c] = sc[c] * (in[c] - mu) * rs + sh[c];
    }
}

template <typename T>
void layernorm_adaln_bwd(idx rows, idx frames, idx ch, const T* x, const T* dy,
                         const T* const* scale_rows, const T* mean, const T* rstd,
                         T* dx, T* const* dscale_rows, T* const* dshift_rows) {
#pragma omp parallel for schedule(static)
    for (idx rf = 0; rf < rows * frames; ++rf) {
        const idx r = rf / frames;
        const T* in = x + rf * ch;
        const T* g = dy + rf * ch;
        T* out = dx + rf * ch;
        const T* sc = scale_rows[r];
        const T mu = mean[rf];
        const T rs = rstd[rf];
        T m1 = 0, m2 = 0;  // mean(dxhat), mean(dxhat * xhat)
        for (idx c = 0; c < ch; ++c) {
            const T xhat = (in[c] - mu) * rs;
            const T dxhat = g[c] * sc[c];
            m1 += dxhat;
            m2 += dxhat * xhat;
        }
        m1 /= static_cast<T>(ch);
        m2 /= static_cast<T>(ch);
        for (idx c = 0; c < ch; ++c) {
            const T xhat = (in[c] - mu) * rs;
            const T dxhat = g[c] * sc[c];
            out[c] = rs * (dxhat - m1 - xhat * m2);
        }
    }
    // Table grads accumulate serially: rows may share the same slot.
    for (idx r = 0; r < rows; ++r) {
        T* dsc = dscale_rows[r];
        T* dsh = dshift_rows[r];
        for (idx f = 0; f < frames; ++f) {
            const idx rf = r * frames + f;
            const T* in = x + rf * ch;
            const T* g = dy + rf * ch;
            const T mu = mean[rf];
            const T rs = rstd[rf];
            for (idx c = 0; c < ch; ++c) {
                dsc[c] += g[c] * (in[c] - mu) * rs;
                dsh[c] += g[c];
            }
        }
    }
}

namespace {
template <typename T>
inline T gelu_one(T x) {
    return T(0.5) * x * (T(1) + std::erf(x * T(std::numbers::sqrt2 / 2.0)));
}
template <typename T>
inline T gelu_grad_one(T x) {
    const T phi = T(0.5) * (T(1) + std::erf(x * T(std::numbers::sqrt2 / 2.0)));
    const T pdf = std::exp(T(-0.5) * x * x) * T(0.3989422804014327);
    return phi + x * pdf;
}
}  // namespace

template <typename T>
void gelu_fwd(idx n, const T* x, T* y) {
#pragma omp parallel for schedule(static)
    for (idx i = 0; i < n; ++i) y[i] = gelu_one(x[i]);
}

template <typename T>
void gelu_bwd(idx n, const T* x, const T* dy, T* dx) {
#pragma omp parallel for schedule(static)
    for (idx i = 0; i < n; ++i) dx[i] = dy[i] * gelu_grad_one(x[i]);
}

template <typename T>
void grn_fwd(idx rows, idx frames, idx ch, const T* x, const T* gamma, const T* beta,
             T eps, T* y, T* gx, T* nx) {
#pragma omp parallel for schedule(static)
    for (idx r = 0; r < rows; ++r) {
        T* g = gx + r * ch;
        T* n = nx + r * ch;
        std::fill(g, g + ch, T(0));
        const T* base = x + r * frames * ch;
        for (idx f = 0; f < frames; ++f) {
            const T* in = base + f * ch;
            for (idx c = 0; c < ch; ++c) g[c] += in[c] * in[c];
        }
        T msum = 0;
        for (idx c = 0; c < ch; ++c) {
            g[c] = std::sqrt(g[c]);
            msum += g[c];
        }
        const T denom = msum / static_cast<T>(ch) + eps;
        for (idx c = 0; c < ch; ++c) n[c] = g[c] / denom;
        T* outbase = y + r * frames * ch;
        for (idx f = 0; f < frames; ++f) {
            const T* in = base + f * ch;
            T* out = outbase + f * ch;
            for (idx c = 0; c < ch; ++c) out[c] = gamma[c] * in[c] * n[c] + beta[c] + in[c];
        }
    }
}

template <typename T>
void grn_bwd(idx rows, idx frames, idx ch, const T* x, const T* dy, const T* gamma,
             const T* gx, const T* nx, T eps, T* dx, T* dgamma, T* dbeta) {
    std::vector<T> dnx_buf(rows * ch);
#pragma omp parallel for schedule(static)
    for (idx r = 0; r < rows; ++r) {
        const T* base = x + r * frames * ch;
        const T* gbase = dy + r * frames * ch;
        const T* g = gx + r * ch;
        const T* n = nx + r * ch;
        T* dnx = dnx_buf.data() + r * ch;
        std::fill(dnx, dnx + ch, T(0));
        for (idx f = 0; f < frames; ++f) {
            const T* in = base + f * ch;
            const T* gr = gbase + f * ch;
            for (idx c = 0; c < ch; ++c) dnx[c] += gr[c] * in[c];
        }
        // dnx currently holds sum_f dy*x; scale by gamma to get dL/dnx
        T msum = 0;
        for (idx c = 0; c < ch; ++c) msum += g[c];
        const T denom = msum / static_cast<T>(ch) + eps;
        T s = 0;
        for (idx c = 0; c < ch; ++c) s += gamma[c] * dnx[c] * g[c];
        s /= denom * denom * static_cast<T>(ch);
        T* dxbase = dx + r * frames * ch;
        for (idx f = 0; f < frames; ++f) {
            const T* in = base + f * ch;
            const T* gr = gbase + f * ch;
            T* out = dxbase + f * ch;
            for (idx c = 0; c < ch; ++c) {
                const T dgx = gamma[c] * dnx[c] / denom - s;
                const T gsafe = g[c] > T(1e-30) ? g[c] : T(1e-30);
                out[c] = gr[c] * (T(1) + gamma[c] * n[c]) + dgx * in[c] / gsafe;
            }
        }
    }
    // dgamma[c] += sum_{r,f} dy * x * nx ; dbeta[c] += sum dy. Serial over rows.
    for (idx r = 0; r < rows; ++r) {
        const T* n = nx + r * ch;
        const T* dnx = dnx_buf.data() + r * ch;  // sum_f dy*x per channel
        for (idx c = 0; c < ch; ++c) dgamma[c] += dnx[c] * n[c];
        const T* gbase = dy + r * frames * ch;
        for (idx f = 0; f < frames; ++f) {
            const T* gr = gbase + f * ch;
            for (idx c = 0; c < ch; ++c) dbeta[c] += gr[c];
        }
    }
}

template <typename T>
void add_row_vec(idx rows, idx frames, idx ch, const T* v, T* y) {
#pragma omp parallel for schedule(static)
    for (idx rf = 0; rf < rows * frames; ++rf) {
        const T* vr = v + (rf / frames) * ch;
        T* out = y + rf * ch;
        for (idx c = 0; c < ch; ++c) out[c] += vr[c];
    }
}

template <typename T>
void transpose(idx m, idx n, const T* in, T* out) {
#pragma omp parallel for schedule(static)
    for (idx i = 0; i < m; ++i)
        for (idx j = 0; j < n; ++j) out[j * m + i] = in[i * n + j];
}

namespace ref {

template <typename T>
void gemm_nn(idx M, idx N, idx K, const T* A, const T* B, T* C, bool accumulate) {
    for (idx m = 0; m < M; ++m)
        for (idx n = 0; n < N; ++n) {
            T s = accumulate ? C[m * N + n] : T(0);
            for (idx k = 0; k < K; ++k) s += A[m * K + k] * B[k * N + n];
            C[m * N + n] = s;
        }
}

template <typename T>
void gemm_tn(idx M, idx N, idx K, const T* A, const T* B, T* C, bool accumulate) {
    for (idx m = 0; m < M; ++m)
        for (idx n = 0; n < N; ++n) {
            T s = accumulate ? C[m * N + n] : T(0);
            for (idx k = 0; k < K; ++k) s += A[k * M + m] * B[k * N + n];
            C[m * N + n] = s;
        }
}

template <typename T>
void dwconv_fwd(idx rows, idx frames, idx ch, idx ktaps, const T* x, const T* w, const T* b,
                T* y) {
    const std::ptrdiff_t pad = (ktaps - 1) / 2;
    for (idx r = 0; r < rows; ++r)
        for (idx f = 0; f < frames; ++f)
            for (idx c = 0; c < ch; ++c) {
                T s = b ? b[c] : T(0);
                for (idx k = 0; k < ktaps; ++k) {
                    const std::ptrdiff_t fs = static_cast<std::ptrdiff_t>(f) + k - pad;
                    if (fs < 0 || fs >= static_cast<std::ptrdiff_t>(frames)) continue;
                    s += w[c * ktaps + k] * x[(r * frames + fs) * ch + c];
                }
                y[(r * frames + f) * ch + c] = s;
            }
}

template <typename T>
void layernorm_adaln_fwd(idx rows, idx frames, idx ch, const T* x,
                         const T* const* scale_rows, const T* const* shift_rows,
                         T eps, T* y, T* mean, T* rstd) {
    for (idx r = 0; r < rows; ++r)
        for (idx f = 0; f < frames; ++f) {
            const idx rf = r * frames + f;
            T mu = 0;
            for (idx c = 0; c < ch; ++c) mu += x[rf * ch + c];
            mu /= static_cast<T>(ch);
            T var = 0;
            for (idx c = 0; c < ch; ++c) {
                const T d = x[rf * ch + c] - mu;
                var += d * d;
            }
            var /= static_cast<T>(ch);
            const T rs = T(1) / std::sqrt(var + eps);
            mean[rf] = mu;
            rstd[rf] = rs;
            for (idx c = 0; c < ch; ++c)
                y[rf * ch + c] = scale_rows[r][c] * (x[rf * ch + c] - mu) * rs + shift_rows[r][c];
        }
}

template <typename T>
void gelu_fwd(idx n, const T* x, T* y) {
    for (idx i = 0; i < n; ++i) y[i] = gelu_one(x[i]);
}

template <typename T>
void grn_fwd(idx rows, idx frames, idx ch, const T* x, const T* gamma, const T* beta,
             T eps, T* y, T* gx, T* nx) {
    for (idx r = 0; r < rows; ++r) {
        for (idx c = 0; c < ch; ++c) {
            T s = 0;
            for (idx f = 0; f < frames; ++f) {
                const T v = x[(r * frames + f) * ch + c];
                s += v * v;
            }
            gx[r * ch + c] = std::sqrt(s);
        }
        T msum = 0;
        for (idx c = 0; c < ch; ++c) msum += gx[r * ch + c];
        const T denom = msum / static_cast<T>(ch) + eps;
        for (idx c = 0; c < ch; ++c) nx[r * ch + c] = gx[r * ch + c] / denom;
        for (idx f = 0; f < frames; ++f)
            for (idx c = 0; c < ch; ++c) {
                const T v = x[(r * frames + f) * ch + c];
                y[(r * frames + f) * ch + c] = gamma[c] * v * nx[r * ch + c] + beta[c] + v;
            }
    }
}

}  // namespace ref

// Explicit instantiations for the two scalar types used in the project.
#define FLOWVOC_INSTANTIATE_KERNELS(T)                                                        \
    template void gemm_nn<T>(idx, idx, idx, const T*, const T*, T*, bool);                    \
    template void gemm_tn<T>(idx, idx, idx, const T*, const T*, T*, bool);                    \
    template void linear_fwd<T>(idx, idx, idx, const T*, const T*, const T*, T*, T*);         \
    template void dwconv_fwd<T>(idx, idx, idx, idx, const T*, const T*, const T*, T*);        \
    template void dwconv_bwd_input<T>(idx, idx, idx, idx, const T*, const T*, T*);            \
    template void dwconv_bwd_params<T>(idx, idx, idx, idx, const T*, const T*, T*, T*);       \
    template void layernorm_adaln_fwd<T>(idx, idx, idx, const T*, const T* const*,            \
                                         const T* const*, T, T*, T*, T*);                     \
    template void layernorm_adaln_bwd<T>(idx, idx, idx, const T*, const T*, const T* const*,  \
                                         const T*, const T*, T*, T* const*, T* const*);       \
    template void gelu_fwd<T>(idx, const T*, T*);                                             \
    template void gelu_bwd<T>(idx, const T*, const T*, T*);                                   \
    template void grn_fwd<T>(idx, idx, idx, const T*, const T*, const T*, T, T*, T*, T*);     \
    template void grn_bwd<T>(idx, idx, idx, const T*, const T*, const T*, const T*, const T*, \
                             T, T*, T*, T*);                                                  \
    template void add_row_vec<T>(idx, idx, idx, const T*, T*);                                \
    template void transpose<T>(idx, idx, const T*, T*);                                       \
    namespace ref {                                                                           \
    template void gemm_nn<T>(idx, idx, idx, const T*, const T*, T*, bool);                    \
    template void gemm_tn<T>(idx, idx, idx, const T*, const T*, T*, bool);                    \
    template void dwconv_fwd<T>(idx, idx, idx, idx, const T*, const T*, const T*, T*);        \
    template void layernorm_adaln_fwd<T>(idx, idx, idx, const T*, const T* const*,            \
                                         const T* const*, T, T*, T*, T*);                     \
    template void gelu_fwd<T>(idx, const T*, T*);                                             \
    template void grn_fwd<T>(idx, idx, idx, const T*, const T*, const T*, T, T*, T*, T*);     \
    }

FLOWVOC_INSTANTIATE_KERNELS(float)
FLOWVOC_INSTANTIATE_KERNELS(double)

}  // namespace flowvoc::kernels
