#pragma once

namespace uiattest {

// Shared by the fixture renderer and the template recognizer. Cell is
// 8x14, ink occupies columns 1..6 only (bearing exactly 1 on every glyph),
// so cells never touch and a caret bar fits between them. Index 0 is space.
inline constexpr int kFontCellW = 8;
inline constexpr int kFontCellH = 14;
inline constexpr int kFontFirstChar = 0x20;
inline constexpr int kFontNumChars = 95;
inline constexpr int kFontBearing = 1; // first ink column of every glyph

extern const unsigned char kFont8x14[95][14];

inline bool glyph_bit(char c, int x, int y) {
    if (c < 0x20 || c > 0x7e) return false;
    return (kFont8x14[c - 0x20][y] >> (7 - x)) & 1;
}

} // namespace uiattest
