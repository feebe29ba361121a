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

#pragma once

// Arithmetic inner loops, each provided as a portable scalar reference and
// as ISA-specific variants. The variant is picked once at startup from the
// CPU's capabilities (override with KERNMEM_ISA=scalar|avx2 or set_isa()).
//
// Integer kernels are exact and agree bit-for-bit across variants. Floating
// point kernels may differ from the reference by reassociation only.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace kernmem::simd {

enum class Isa { scalar, avx2 };

struct KernelTable {
    Isa isa;
    const char* name;

    /// sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);

    /// y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

    /// sum_i a[i] * b[i] over int8, exact.
    std::int64_t (*dot_i8)(const std::int8_t* a, const std::int8_t* b, std::size_t n);

    /// sum_i w[i] * s[i] with an int8 right operand.
    double (*dot_f64_i8)(const double* w, const std::int8_t* s, std::size_t n);

    /// C (m x n) += A (m x k) * B (k x n); all row-major with leading dimensions.
    void (*gemm)(std::size_t m, std::size_t n, std::size_t k,
                 const double* a, std::size_t lda,
                 const double* b, std::size_t ldb,
                 double* c, std::size_t ldc);
};

/// Currently selected table.
const KernelTable& kernels() noexcept;

/// Table for a specific ISA; nullptr when it was not built or the CPU lacks it.
const KernelTable* table_for(Isa isa) noexcept;

bool isa_available(Isa isa) noexcept;

/// Best ISA the running CPU supports.
Isa detect_best_isa() noexcept;

/// Switches the active table. Throws OutOfRangeError if unavailable.
void set_isa(Isa isa);

std::string_view isa_name(Isa isa) noexcept;
std::optional<Isa> parse_isa(std::string_view name) noexcept;

namespace scalar {
const KernelTable& table() noexcept;
}

namespace avx2 {
/// Defined only when built with KERNMEM_HAVE_AVX2.
const KernelTable& table() noexcept;
}

}  // namespace kernmem::simd
