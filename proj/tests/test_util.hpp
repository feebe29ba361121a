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

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "kernmem/simd/kernels.hpp"

namespace kernmem::testing {

/// Restores the active kernel table on scope exit.
class IsaGuard {
public:
    IsaGuard() : saved_(simd::kernels().isa) {}
    ~IsaGuard() { simd::set_isa(saved_); }
    IsaGuard(const IsaGuard&) = delete;
    IsaGuard& operator=(const IsaGuard&) = delete;

private:
    simd::Isa saved_;
};

/// Fresh path under the system temp directory; the file is removed on scope exit.
class TempPath {
public:
    explicit TempPath(const std::string& stem) {
        static std::mt19937_64 gen{std::random_device{}()};
        path_ = std::filesystem::temp_directory_path() / ("kernmem_test_" + stem + "_" + std::to_string(gen()));
    }
    ~TempPath() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

}  // namespace kernmem::testing
