// Copyright 2026 the kernmem authors
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

// AVX2 + FMA variants. This translation unit is the only one compiled with
// -mavx2 -mfma; it must not instantiate standard-library templates, which
// the linker could otherwise merge into code paths run on older CPUs.

#include <immintrin.h>

#include <cstddef>
#include <cstdint>

#include "kernmem/simd/kernels.hpp"

namespace kernmem::simd::avx2 {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
        acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
        acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double sum = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
        _mm256_storeu_pd(y + i + 4,
                         _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
    }
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

std::int64_t dot_i8(const std::int8_t* a, const std::int8_t* b, std::size_t n) {
    // Each madd lane gains at most 2 * 128 * 128 per 32-byte step.
    constexpr std::size_t kFlushSteps = 1u << 14;
    std::int64_t total = 0;
    std::size_t i = 0;
    while (i + 32 <= n) {
        __m256i acc = _mm256_setzero_si256();
        for (std::size_t steps = 0; steps < kFlushSteps && i + 32 <= n; ++steps, i += 32) {
            const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
            const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
            const __m256i a_lo = _mm256_cvtepi8_epi16(_mm256_castsi256_si128(va));
            const __m256i a_hi = _mm256_cvtepi8_epi16(_mm256_extracti128_si256(va, 1));
            const __m256i b_lo = _mm256_cvtepi8_epi16(_mm256_castsi256_si128(vb));
            const __m256i b_hi = _mm256_cvtepi8_epi16(_mm256_extracti128_si256(vb, 1));
            acc = _mm256_add_epi32(acc, _mm256_madd_epi16(a_lo, b_lo));
            acc = _mm256_add_epi32(acc, _mm256_madd_epi16(a_hi, b_hi));
        }
        alignas(32) std::int32_t lanes[8];
        _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
        for (std::int32_t lane : lanes) total += lane;
    }
    for (; i < n; ++i) total += static_cast<std::int64_t>(a[i]) * b[i];
    return total;
}

double dot_f64_i8(const double* w, const std::int8_t* s, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m128i bytes = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(s + i));
        const __m256i ints = _mm256_cvtepi8_epi32(bytes);
        const __m256d lo = _mm256_cvtepi32_pd(_mm256_castsi256_si128(ints));
        const __m256d hi = _mm256_cvtepi32_pd(_mm256_extracti128_si256(ints, 1));
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), lo, acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(w + i + 4), hi, acc1);
    }
    double sum = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) sum += w[i] * static_cast<double>(s[i]);
    return sum;
}

constexpr std::size_t kMr = 4;
constexpr std::size_t kNr = 8;
constexpr std::size_t kKc = 128;
constexpr std::size_t kNc = 512;

// Packs B[0:kc, 0:nc] into column panels of width kNr, zero padded.
void pack_b(std::size_t kc, std::size_t nc, const double* b, std::size_t ldb, double* out) {
    for (std::size_t j0 = 0; j0 < nc; j0 += kNr) {
        const std::size_t w = (nc - j0 < kNr) ? nc - j0 : kNr;
        for (std::size_t p = 0; p < kc; ++p) {
            const double* src = b + p * ldb + j0;
            std::size_t j = 0;
            for (; j < w; ++j) out[j] = src[j];
            for (; j < kNr; ++j) out[j] = 0.0;
            out += kNr;
        }
    }
}

// C[0:4, 0:w] += A[0:4, 0:kc] * panel, w <= 8.
void micro_4x8(std::size_t kc, const double* a, std::size_t lda, const double* panel,
               double* c, std::size_t ldc, std::size_t w) {
    __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
    __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
    __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
    __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
    const double* a0 = a;
    const double* a1 = a + lda;
    const double* a2 = a + 2 * lda;
    const double* a3 = a + 3 * lda;
    for (std::size_t p = 0; p < kc; ++p) {
        const __m256d b0 = _mm256_loadu_pd(panel);
        const __m256d b1 = _mm256_loadu_pd(panel + 4);
        panel += kNr;
        __m256d av = _mm256_broadcast_sd(a0 + p);
        c00 = _mm256_fmadd_pd(av, b0, c00);
        c01 = _mm256_fmadd_pd(av, b1, c01);
        av = _mm256_broadcast_sd(a1 + p);
        c10 = _mm256_fmadd_pd(av, b0, c10);
        c11 = _mm256_fmadd_pd(av, b1, c11);
        av = _mm256_broadcast_sd(a2 + p);
        c20 = _mm256_fmadd_pd(av, b0, c20);
        c21 = _mm256_fmadd_pd(av, b1, c21);
        av = _mm256_broadcast_sd(a3 + p);
        c30 = _mm256_fmadd_pd(av, b0, c30);
        c31 = _mm256_fmadd_pd(av, b1, c31);
    }
    const __m256d rows[4][2] = {{c00, c01}, {c10, c11}, {c20, c21}, {c30, c31}};
    for (std::size_t r = 0; r < kMr; ++r) {
        double* crow = c + r * ldc;
        if (w == kNr) {
            _mm256_storeu_pd(crow, _mm256_add_pd(_mm256_loadu_pd(crow), rows[r][0]));
            _mm256_storeu_pd(crow + 4, _mm256_add_pd(_mm256_loadu_pd(crow + 4), rows[r][1]));
        } else {
            alignas(32) double tmp[kNr];
            _mm256_store_pd(tmp, rows[r][0]);
            _mm256_store_pd(tmp + 4, rows[r][1]);
            for (std::size_t j = 0; j < w; ++j) crow[j] += tmp[j];
        }
    }
}

// Single-row remainder: C[0, 0:w] += A[0, 0:kc] * panel.
void micro_1x8(std::size_t kc, const double* a, const double* panel, double* c, std::size_t w) {
    __m256d c0 = _mm256_setzero_pd(), c1 = _mm256_setzero_pd();
    for (std::size_t p = 0; p < kc; ++p) {
        const __m256d av = _mm256_broadcast_sd(a + p);
        c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(panel), c0);
        c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(panel + 4), c1);
        panel += kNr;
    }
    alignas(32) double tmp[kNr];
    _mm256_store_pd(tmp, c0);
    _mm256_store_pd(tmp + 4, c1);
    for (std::size_t j = 0; j < w; ++j) c[j] += tmp[j];
}

void gemm(std::size_t m, std::size_t n, std::size_t k,
          const double* a, std::size_t lda,
          const double* b, std::size_t ldb,
          double* c, std::size_t ldc) {
    if (m == 0 || n == 0 || k == 0) return;
    const std::size_t nc_max = n < kNc ? n : kNc;
    const std::size_t panels_max = (nc_max + kNr - 1) / kNr;
    double* packed = new double[kKc * panels_max * kNr];
    for (std::size_t jc = 0; jc < n; jc += kNc) {
        const std::size_t nc = (n - jc < kNc) ? n - jc : kNc;
        const std::size_t panels = (nc + kNr - 1) / kNr;
        for (std::size_t pc = 0; pc < k; pc += kKc) {
            const std::size_t kc = (k - pc < kKc) ? k - pc : kKc;
            pack_b(kc, nc, b + pc * ldb + jc, ldb, packed);
            std::size_t i = 0;
            for (; i + kMr <= m; i += kMr) {
                for (std::size_t jp = 0; jp < panels; ++jp) {
                    const std::size_t j0 = jp * kNr;
                    const std::size_t w = (nc - j0 < kNr) ? nc - j0 : kNr;
                    micro_4x8(kc, a + i * lda + pc, lda, packed + jp * kc * kNr, c + i * ldc + jc + j0, ldc, w);
                }
            }
            for (; i < m; ++i) {
                for (std::size_t jp = 0; jp < panels; ++jp) {
                    const std::size_t j0 = jp * kNr;
                    const std::size_t w = (nc - j0 < kNr) ? nc - j0 : kNr;
                    micro_1x8(kc, a + i * lda + pc, packed + jp * kc * kNr, c + i * ldc + jc + j0, w);
                }
            }
        }
    }
    delete[] packed;
}

constexpr KernelTable kTable{Isa::avx2, "avx2", dot, axpy, dot_i8, dot_f64_i8, gemm};

}  // namespace

const KernelTable& table() noexcept { return kTable; }

}  // namespace kernmem::simd::avx2
