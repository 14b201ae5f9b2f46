// SPDX-License-Identifier: Apache-2.0
#include "buildarena/format.hpp"

#include <cmath>

#include <fmt/format.h>

namespace buildarena {

std::string num(double value)
{
    if (value == 0.0)
        value = 0.0;
    return fmt::format("{}", value);
}

std::string fixed3(double value)
{
    if (std::abs(value) < 5e-4)
        value = 0.0;
    return fmt::format("{:.3f}", value);
}

std::string fixed3(const Vec3& v)
{
    return fmt::format("({}, {}, {})", fixed3(v.x()), fixed3(v.y()), fixed3(v.z()));
}

}  // namespace buildarena
