// SPDX-License-Identifier: Apache-2.0
#include "buildarena/hash.hpp"

#include <bit>

#include <fmt/format.h>

namespace buildarena {

Hasher& Hasher::bytes(const void* data, std::size_t size)
{
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        state_ ^= p[i];
        state_ *= 0x100000001b3ULL;
    }
    return *this;
}

Hasher& Hasher::u64(std::uint64_t value)
{
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i)
        buf[i] = static_cast<unsigned char>(value >> (8 * i));
    return bytes(buf, sizeof buf);
}

Hasher& Hasher::f64(double value)
{
    // -0.0 and 0.0 describe the same geometry
    if (value == 0.0)
        value = 0.0;
    return u64(std::bit_cast<std::uint64_t>(value));
}

Hasher& Hasher::str(std::string_view value)
{
    u64(value.size());
    return bytes(value.data(), value.size());
}

std::string Hasher::hex() const
{
    return to_hex(state_);
}

std::string to_hex(std::uint64_t value)
{
    return fmt::format("{:016x}", value);
}

}  // namespace buildarena
