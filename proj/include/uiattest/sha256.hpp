#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace uiattest {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> bytes);
Digest sha256(const std::string& bytes);

std::string to_hex(std::span<const std::uint8_t> bytes);
// Strict: even length, lowercase or uppercase hex only.
std::vector<std::uint8_t> from_hex(const std::string& hex);

} // namespace uiattest
