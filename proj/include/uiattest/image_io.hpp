#pragma once

#include "uiattest/context.hpp"

#include <filesystem>

namespace uiattest {

// PNG, 8-bit RGB or RGBA (alpha discarded). Anything else is a ParseError.
Frame load_png(const std::filesystem::path& p);
void save_png(const Frame& f, const std::filesystem::path& p);

// Raw container: 8-byte header (u32 BE width, u32 BE height) then
// width*height*3 RGB bytes.
Frame load_raw(const std::filesystem::path& p);
void save_raw(const Frame& f, const std::filesystem::path& p);

// Sniffs the PNG signature, falls back to the raw container.
Frame load_frame(const std::filesystem::path& p);

} // namespace uiattest
