#pragma once

#include "uiattest/manifest.hpp"
#include "uiattest/validate.hpp"

#include <optional>
#include <string>
#include <vector>

namespace uiattest {

// Focus indicator geometry and color bands. One table serves both sides:
// the fixture renderer paints with the *_rgb colors, the detector accepts
// the hue/sat/val bands around them. Keeping them together guarantees the
// renderer never paints outside what the detector reads back.
struct PofStyle {
    std::uint8_t focus_rgb[3] = {30, 80, 220};
    std::uint8_t caret_rgb[3] = {0, 170, 60};
    std::uint8_t selection_rgb[3] = {140, 180, 240};

    int ring_px = 3; // focus ring thickness, just outside the input rect

    double focus_hue_lo = 200, focus_hue_hi = 250;
    double focus_s_min = 0.4, focus_v_min = 0.4;
    double ring_coverage_focused = 0.8; // band coverage of the ring area
    double ring_coverage_noise = 0.2;   // below this the ring is just clean

    double caret_hue_lo = 90, caret_hue_hi = 150;
    double caret_s_min = 0.4, caret_v_min = 0.4;
    int caret_w_min = 1, caret_w_max = 3;
    double caret_h_frac = 0.6; // of the input rect height

    double sel_hue_lo = 200, sel_hue_hi = 250;
    double sel_s_min = 0.2, sel_v_min = 0.5;
    int sel_w_min = 4;
    double sel_h_frac = 0.5;

    bool in_focus_band(const HsvPixel& p) const {
        return p.h >= focus_hue_lo && p.h <= focus_hue_hi && p.s >= focus_s_min && p.v >= focus_v_min;
    }
    bool in_caret_band(const HsvPixel& p) const {
        return p.h >= caret_hue_lo && p.h <= caret_hue_hi && p.s >= caret_s_min && p.v >= caret_v_min;
    }
    bool in_selection_band(const HsvPixel& p) const {
        return p.h >= sel_hue_lo && p.h <= sel_hue_hi && p.s >= sel_s_min && p.v >= sel_v_min;
    }
};

struct CaretMark {
    std::string region;
    int column = 0; // glyph column the bar maps to
    int x_px = 0;   // bar position, region-relative
    bool operator==(const CaretMark&) const = default;
};

struct SelectionMark {
    std::string region;
    int col_a = 0, col_b = 0; // glyph columns, half-open [a,b)
    bool operator==(const SelectionMark&) const = default;
};

struct PofState {
    std::optional<std::string> focus;
    std::optional<CaretMark> caret;
    std::optional<SelectionMark> selection;
    bool operator==(const PofState&) const = default;
};

struct PofViolation {
    std::string region_id; // empty when not attributable to one region
    std::string detail;
};

struct PofOutcome {
    PofState state;
    std::vector<PofViolation> violations;
};

// Scans input regions for the focus ring, caret bar and selection run.
// ocr reads a region's current value (the engine passes its masking,
// caching recognizer); it is consulted only to map pixel positions onto
// glyph columns.
PofOutcome detect_pof(const Frame& frame, const PageBreakdown& breakdown,
                      const OcrFn& ocr, const PofStyle& style = {});

// Maps a caret bar x (region-relative) onto a glyph column given the char
// boxes of the region's value. Bars within half a median char width of a
// box edge snap to that edge; otherwise the first box whose center lies
// right of the bar wins, falling back to one past the last glyph.
int caret_column(int caret_x, const OcrResult& value);

// Replaces caret-band and selection-band pixels with white so extraction
// sees the value exactly as rendered without focus furniture.
Frame mask_pof_colors(const Frame& region_crop, const PofStyle& style = {});

} // namespace uiattest
