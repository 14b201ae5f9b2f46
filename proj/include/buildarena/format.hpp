// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "buildarena/math.hpp"

namespace buildarena {

/// Shortest round-trip decimal ("0.3", "1", "13.76").
std::string num(double value);

/// Fixed three-decimal tuple "(x, y, z)" used in all agent-facing prose.
std::string fixed3(const Vec3& v);
std::string fixed3(double value);

}  // namespace buildarena
