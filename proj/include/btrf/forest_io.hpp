#pragma once

#include <iosfwd>
#include <string>

#include "btrf/forest.hpp"

namespace btrf {

inline constexpr std::uint32_t kForestFormatVersion = 1;

/// Binary model container, little-endian, doubles as IEEE-754 bit patterns:
///   "BTRF" | u32 version | u8 mode | u8 descriptor kind | u32 trees | u32 dim
///   | config snapshot | descriptor convention (patch, coeffs/channel, order)
///   | per tree: u32 node count, nodes in pre-order.
void save_forest(std::ostream& out, const Forest& forest);
Forest load_forest(std::istream& in, const std::string& name = "<stream>");

void save_forest_file(const std::string& path, const Forest& forest);
Forest load_forest_file(const std::string& path);

std::string serialize_forest(const Forest& forest);
Forest deserialize_forest(const std::string& bytes);

}  // namespace btrf
