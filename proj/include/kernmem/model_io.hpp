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

#include <filesystem>
#include <string>
#include <string_view>

#include "kernmem/learning.hpp"

namespace kernmem {

// Model text format:
//   RULE N P LAMBDA GAMMA
//   matrix rows (W: N rows of N; alpha: P rows of N), 17 significant digits
//   dual models only: the stored patterns in the pattern file format
// Weight models write GAMMA as 0.

std::string format_model(const Model& model);
Model parse_model(std::string_view text);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace kernmem
