#pragma once

#include "uiattest/context.hpp"
#include "uiattest/manifest.hpp"
#include "uiattest/ocr.hpp"

#include <functional>
#include <string>
#include <vector>

namespace uiattest {

struct ValidatorConfig {
    double hue_threshold_deg = 54.0;   // circular distance
    double sat_threshold = 0.15;
    double val_threshold = 0.15;
    double ocr_confidence_gate = kOcrConfidenceGate;
    double noise_fraction = 1.0 / 70.0; // of region width/height, per axis
    double position_fraction = 0.10;    // alignment search bound

    // uniform percentage knob: scales hue (of 360), sat and val together
    static ValidatorConfig with_hsv_percent(double pct);
};

enum class RegionStatus { pass, content_difference, color_difference, position_difference, text_mismatch };
const char* to_string(RegionStatus s);

struct RegionVerdict {
    RegionStatus status = RegionStatus::pass;
    std::string detail;
};

// 8-connected components of nonzero mask pixels, as bounding boxes.
std::vector<Rect> connected_components(const std::vector<std::uint8_t>& mask, int w, int h);

// Word-level text boxes: Otsu ink, components, then merge boxes that share
// rows and sit within 1.2 median component widths horizontally.
std::vector<Rect> detect_text_boxes(const Frame& frame);

// Per-pixel channel comparison; 1 where any of hue/sat/val exceeds its
// threshold. Frames must be the same size.
std::vector<std::uint8_t> hsv_flag_mask(const Frame& a, const Frame& b, const ValidatorConfig& cfg);

// Drops flag components whose box fits within noise_fraction of the region
// extent on both axes. Returns surviving component boxes.
std::vector<Rect> remove_noise_components(const std::vector<std::uint8_t>& mask, int w, int h,
                                          int region_w, int region_h, const ValidatorConfig& cfg);

struct TextPosFailure {
    std::string region_id; // empty for unattributable content
    std::string detail;
};

// (a) every detected box center must sit inside some declared region;
// boxes outside `scope` rects are exempt from (a) (unchanged area).
// (b) every textual region in `must_have_text` must contain at least one
// box center (checked against the full box list).
std::vector<TextPosFailure> text_pos_check(const std::vector<Rect>& boxes,
                                           const PageBreakdown& breakdown,
                                           const std::vector<Rect>& scope,
                                           const std::vector<std::string>& must_have_text);

using OcrFn = std::function<OcrResult(const Frame& crop)>;
OcrFn direct_ocr(std::shared_ptr<const OcrEngine> engine);

// Align within the position bound, flag HSV differences over the overlap,
// drop noise-sized components. Surviving flags mean position_difference
// when the best shift sits on the search boundary, else color_difference.
RegionVerdict validate_graphic_region(const Frame& local, const Frame& trusted,
                                      const ValidatorConfig& cfg);

// Dual route: position gate first, then OCR both sides and compare
// normalized strings when both confidences pass the gate; pixel fallback
// (validate_graphic_region) otherwise.
RegionVerdict validate_text_region(const Frame& local, const Frame& trusted,
                                   const OcrFn& ocr, const ValidatorConfig& cfg);

} // namespace uiattest
