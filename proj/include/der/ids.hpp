// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>

namespace der {

// Dense index assigned by interning a user's identity string. Interning is
// stable for the lifetime of the owning graph, so the index doubles as the
// deterministic tie-break order wherever ranked output needs one.
struct UserId {
  std::uint32_t index = 0;

  friend constexpr auto operator<=>(UserId, UserId) = default;
};

}  // namespace der
