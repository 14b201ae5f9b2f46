// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace buildarena {

/// Incremental FNV-1a (64-bit) digest used for catalog, scene and transcript hashes.
/// Doubles are fed as their exact bit patterns, strings with a length prefix.
class Hasher {
public:
    Hasher& bytes(const void* data, std::size_t size);
    Hasher& u64(std::uint64_t value);
    Hasher& i64(std::int64_t value) { return u64(static_cast<std::uint64_t>(value)); }
    Hasher& f64(double value);
    Hasher& str(std::string_view value);
    Hasher& flag(bool value) { return u64(value ? 1 : 0); }

    std::uint64_t value() const { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string to_hex(std::uint64_t value);

}  // namespace buildarena
