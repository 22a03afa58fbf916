#pragma once

#include <cstdint>
#include <string>

namespace trustweave {

// Entity ids are opaque, unique per network, and stable for the entity's
// lifetime. Plain strings keep them printable and orderable.
using EntityId = std::string;

// Logical simulation time. No wall clocks anywhere.
using Tick = std::int64_t;

}  // namespace trustweave
