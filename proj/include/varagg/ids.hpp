// Copyright 2026 The varagg Authors
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

#include <compare>
#include <cstdint>
#include <functional>

namespace varagg {

/// Strongly typed integer identifier. Tags keep variable, constraint and
/// definition ids from being mixed up.
template <typename Tag>
struct Id {
  std::uint32_t value = 0;

  constexpr Id() = default;
  constexpr explicit Id(std::uint32_t v) : value(v) {}

  friend constexpr auto operator<=>(Id, Id) = default;
};

using VariableId = Id<struct VariableTag>;
using ConstraintId = Id<struct ConstraintTag>;
using DefinedId = Id<struct DefinedTag>;

}  // namespace varagg

template <typename Tag>
struct std::hash<varagg::Id<Tag>> {
  std::size_t operator()(varagg::Id<Tag> id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
