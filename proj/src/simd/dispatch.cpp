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

#include <atomic>
#include <cstdlib>

#include "kernmem/error.hpp"
#include "kernmem/simd/kernels.hpp"

namespace kernmem::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(KERNMEM_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* initial_table() noexcept {
    if (const char* env = std::getenv("KERNMEM_ISA")) {
        if (auto isa = parse_isa(env)) {
            if (const KernelTable* t = table_for(*isa)) return t;
        }
    }
    return table_for(detect_best_isa());
}

std::atomic<const KernelTable*>& active() noexcept {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

const KernelTable* table_for(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar:
            return &scalar::table();
        case Isa::avx2:
#if defined(KERNMEM_HAVE_AVX2)
            if (cpu_has_avx2()) return &avx2::table();
#endif
            return nullptr;
    }
    return nullptr;
}

bool isa_available(Isa isa) noexcept { return table_for(isa) != nullptr; }

Isa detect_best_isa() noexcept { return cpu_has_avx2() ? Isa::avx2 : Isa::scalar; }

const KernelTable& kernels() noexcept { return *active().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
    const KernelTable* t = table_for(isa);
    if (t == nullptr) {
        throw OutOfRangeError("instruction set '" + std::string(isa_name(isa)) + "' is not available on this CPU/build");
    }
    active().store(t, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar:
            return "scalar";
        case Isa::avx2:
            return "avx2";
    }
    return "unknown";
}

std::optional<Isa> parse_isa(std::string_view name) noexcept {
    if (name == "scalar") return Isa::scalar;
    if (name == "avx2") return Isa::avx2;
    return std::nullopt;
}

}  // namespace kernmem::simd
