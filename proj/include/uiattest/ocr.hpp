#pragma once

#include "uiattest/context.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace uiattest {

struct GrayImage {
    int w = 0, h = 0;
    std::vector<std::uint8_t> px; // row-major, one byte per pixel

    std::uint8_t at(int x, int y) const { return px[static_cast<size_t>(y) * w + x]; }
    void set(int x, int y, std::uint8_t v) { px[static_cast<size_t>(y) * w + x] = v; }
};

struct OcrResult {
    std::string text;
    double confidence = 0.0;          // 0..100
    std::vector<Rect> char_boxes;     // one per non-whitespace char, region coords
};

// Otsu threshold over a 256-bin histogram; empty when the image has no
// contrast. Exposed for the detector and tests.
std::optional<int> otsu_threshold(const std::vector<std::uint32_t>& hist);

// Binarize (Otsu), normalize polarity to dark ink on light ground (ink is
// the minority class, darker class on a tie), upscale 3x nearest-neighbour,
// then one pass of 3x3 ink dilation. Output pixels are 0 (ink) or 255.
GrayImage preprocess_for_ocr(const Frame& region);

inline constexpr int kOcrScale = 3;
inline constexpr double kOcrConfidenceGate = 70.0;

// Minimum luma separation between the two Otsu classes before either counts
// as ink. Capture noise on a bare surface spans well under this; glyph ink
// against paper sits far above it.
inline constexpr double kOcrContrastFloor = 96.0;

// Pluggable recognizer: processed raster in, text + confidence + boxes out.
class OcrEngine {
public:
    virtual ~OcrEngine() = default;
    virtual OcrResult recognize(const GrayImage& processed) const = 0;
    virtual std::string name() const = 0;
};

// Reference engine. Matches glyph cells against the embedded font processed
// through the same pipeline; per-cell score is the Dice overlap of ink
// pixels, confidence is 100 * mean best score.
class TemplateOcrEngine : public OcrEngine {
public:
    TemplateOcrEngine();
    OcrResult recognize(const GrayImage& processed) const override;
    std::string name() const override { return "reference"; }
};

// Engine that recognizes nothing; forces the pixel fallback everywhere.
class NullOcrEngine : public OcrEngine {
public:
    OcrResult recognize(const GrayImage&) const override { return {}; }
    std::string name() const override { return "none"; }
};

// nullptr when the name is unknown
std::shared_ptr<const OcrEngine> make_ocr_engine(const std::string& name);

// Reference-engine convenience: preprocess + recognize a region crop.
OcrResult recognize_text(const Frame& region);

// Trim ends, collapse internal whitespace runs to single spaces. Case is
// preserved: comparisons stay case-sensitive.
std::string normalize_text(const std::string& s);

} // namespace uiattest
