#include "uiattest/ocr.hpp"

#include "uiattest/font8x14.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace uiattest {

namespace {

// Processed-space geometry. Cells are glyph cells after 3x upscaling; a
// band is a run of text rows. Band merging tolerates glyph-internal gaps
// (':' etc) which stay well under half a cell height.
constexpr int kCellW = kFontCellW * kOcrScale;        // 24
constexpr int kBandMergeGap = kFontCellH * kOcrScale / 2; // 21
// Uniform left bearing of 1 raw px puts dilated ink 3*1-1 = 2 processed
// columns into its cell. First ink column minus this anchors the cell grid.
constexpr int kInkStartCol = kFontBearing * kOcrScale - 1; // 2

struct Template {
    std::vector<std::pair<int, int>> ink; // (x, y), y in canvas coords
    int ink_top = 0;
    char ch = ' ';
};

// Glyph bitmaps pushed through the same upscale+dilate as region crops.
// Canvas gets one pad row above and below so dilation never clips.
std::vector<Template> build_templates() {
    constexpr int cw = kCellW;
    constexpr int ch = kFontCellH * kOcrScale + 2;
    std::vector<Template> out;
    out.reserve(kFontNumChars);
    for (int g = 0; g < kFontNumChars; ++g) {
        char c = static_cast<char>(kFontFirstChar + g);
        std::vector<std::uint8_t> scaled(static_cast<size_t>(cw) * ch, 0);
        for (int y = 0; y < kFontCellH; ++y)
            for (int x = 0; x < kFontCellW; ++x)
                if (glyph_bit(c, x, y))
                    for (int dy = 0; dy < kOcrScale; ++dy)
                        for (int dx = 0; dx < kOcrScale; ++dx)
                            scaled[static_cast<size_t>(y * kOcrScale + 1 + dy) * cw +
                                   x * kOcrScale + dx] = 1;
        Template t;
        t.ch = c;
        t.ink_top = ch;
        for (int y = 0; y < ch; ++y)
            for (int x = 0; x < cw; ++x) {
                bool on = false;
                for (int dy = -1; dy <= 1 && !on; ++dy)
                    for (int dx = -1; dx <= 1 && !on; ++dx) {
                        int nx = x + dx, ny = y + dy;
                        if (nx >= 0 && nx < cw && ny >= 0 && ny < ch &&
                            scaled[static_cast<size_t>(ny) * cw + nx])
                            on = true;
                    }
                if (on) {
                    t.ink.emplace_back(x, y);
                    t.ink_top = std::min(t.ink_top, y);
                }
            }
        out.push_back(std::move(t));
    }
    return out;
}

const std::vector<Template>& templates() {
    static const std::vector<Template> t = build_templates();
    return t;
}

int floor_div3(int v) { return v >= 0 ? v / 3 : -((-v + 2) / 3); }

} // namespace

std::optional<int> otsu_threshold(const std::vector<std::uint32_t>& hist) {
    std::uint64_t total = 0, sum = 0;
    for (size_t i = 0; i < hist.size(); ++i) {
        total += hist[i];
        sum += static_cast<std::uint64_t>(i) * hist[i];
    }
    if (total == 0)
        return std::nullopt;
    std::uint64_t w0 = 0, sum0 = 0;
    double best = -1.0;
    int best_t = -1;
    for (size_t t = 0; t + 1 < hist.size(); ++t) {
        w0 += hist[t];
        sum0 += static_cast<std::uint64_t>(t) * hist[t];
        std::uint64_t w1 = total - w0;
        if (w0 == 0 || w1 == 0)
            continue;
        double m0 = static_cast<double>(sum0) / w0;
        double m1 = static_cast<double>(sum - sum0) / w1;
        double var = static_cast<double>(w0) * static_cast<double>(w1) * (m0 - m1) * (m0 - m1);
        if (var > best) {
            best = var;
            best_t = static_cast<int>(t);
        }
    }
    if (best_t < 0)
        return std::nullopt; // single populated bin: no contrast
    return best_t;
}

GrayImage preprocess_for_ocr(const Frame& region) {
    const int w = region.width(), h = region.height();
    GrayImage out;
    out.w = w * kOcrScale;
    out.h = h * kOcrScale;
    out.px.assign(static_cast<size_t>(out.w) * out.h, 255);
    if (w <= 0 || h <= 0)
        return out;

    std::vector<std::uint8_t> gray(static_cast<size_t>(w) * h);
    std::vector<std::uint32_t> hist(256, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::uint8_t* p = region.at(x, y);
            int v = static_cast<int>(std::lround(luma(p[0], p[1], p[2])));
            v = std::clamp(v, 0, 255);
            gray[static_cast<size_t>(y) * w + x] = static_cast<std::uint8_t>(v);
            ++hist[v];
        }
    auto thr = otsu_threshold(hist);
    if (!thr)
        return out; // uniform image: no ink

    // A split inside the capture-noise envelope is not ink. Without this, a
    // blank field under benign jitter binarizes into garbage glyphs.
    double sum0 = 0, n0 = 0, sum1 = 0, n1 = 0;
    for (int i = 0; i <= *thr; ++i) {
        sum0 += static_cast<double>(i) * hist[i];
        n0 += hist[i];
    }
    for (int i = *thr + 1; i < 256; ++i) {
        sum1 += static_cast<double>(i) * hist[i];
        n1 += hist[i];
    }
    if (n0 <= 0 || n1 <= 0 || sum1 / n1 - sum0 / n0 < kOcrContrastFloor)
        return out;

    // ink is the minority class; on a tie the darker one
    std::uint64_t dark = 0;
    for (int i = 0; i <= *thr; ++i)
        dark += hist[i];
    std::uint64_t light = static_cast<std::uint64_t>(w) * h - dark;
    bool ink_is_dark = dark <= light;

    std::vector<std::uint8_t> scaled(static_cast<size_t>(out.w) * out.h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            bool ink = (gray[static_cast<size_t>(y) * w + x] <= *thr) == ink_is_dark;
            if (!ink)
                continue;
            for (int dy = 0; dy < kOcrScale; ++dy)
                for (int dx = 0; dx < kOcrScale; ++dx)
                    scaled[static_cast<size_t>(y * kOcrScale + dy) * out.w +
                           x * kOcrScale + dx] = 1;
        }
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x) {
            bool on = false;
            for (int dy = -1; dy <= 1 && !on; ++dy)
                for (int dx = -1; dx <= 1 && !on; ++dx) {
                    int nx = x + dx, ny = y + dy;
                    if (nx >= 0 && nx < out.w && ny >= 0 && ny < out.h &&
                        scaled[static_cast<size_t>(ny) * out.w + nx])
                        on = true;
                }
            if (on)
                out.px[static_cast<size_t>(y) * out.w + x] = 0;
        }
    return out;
}

TemplateOcrEngine::TemplateOcrEngine() { templates(); }

OcrResult TemplateOcrEngine::recognize(const GrayImage& img) const {
    OcrResult res;
    const int w = img.w, h = img.h;
    if (w <= 0 || h <= 0)
        return res;

    auto ink_at = [&](int x, int y) {
        return x >= 0 && x < w && y >= 0 && y < h &&
               img.px[static_cast<size_t>(y) * w + x] == 0;
    };

    std::vector<char> row_ink(h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (img.px[static_cast<size_t>(y) * w + x] == 0) {
                row_ink[y] = 1;
                break;
            }

    // text bands: ink row runs, merged across glyph-internal gaps
    std::vector<std::pair<int, int>> bands;
    for (int y = 0; y < h; ++y) {
        if (!row_ink[y])
            continue;
        int y1 = y;
        while (y1 + 1 < h && row_ink[y1 + 1])
            ++y1;
        if (!bands.empty() && y - bands.back().second <= kBandMergeGap)
            bands.back().second = y1;
        else
            bands.emplace_back(y, y1);
        y = y1;
    }
    if (bands.empty())
        return res;

    const auto& tpls = templates();
    double score_sum = 0.0;
    int scored_cells = 0;
    std::string text;

    for (size_t bi = 0; bi < bands.size(); ++bi) {
        auto [r0, r1] = bands[bi];
        int c_first = w, c_last = -1;
        for (int x = 0; x < w; ++x)
            for (int y = r0; y <= r1; ++y)
                if (ink_at(x, y)) {
                    c_first = std::min(c_first, x);
                    c_last = std::max(c_last, x);
                    break;
                }
        if (c_last < 0)
            continue;
        int anchor = c_first - kInkStartCol;
        int ncells = (c_last - anchor) / kCellW + 1;
        if (bi)
            text.push_back('\n');

        for (int k = 0; k < ncells; ++k) {
            int x0 = anchor + k * kCellW;
            std::vector<std::pair<int, int>> cell;
            int cell_top = -1;
            for (int y = r0; y <= r1; ++y)
                for (int x = std::max(0, x0); x < std::min(w, x0 + kCellW); ++x)
                    if (ink_at(x, y)) {
                        cell.emplace_back(x, y);
                        if (cell_top < 0)
                            cell_top = y;
                    }
            if (cell.empty()) {
                text.push_back(' ');
                continue;
            }
            double best = -1.0;
            size_t best_i = 0;
            int best_dy = 0;
            for (size_t ti = 0; ti < tpls.size(); ++ti) {
                const auto& t = tpls[ti];
                if (t.ink.empty())
                    continue;
                int dy = cell_top - t.ink_top;
                int inter = 0;
                for (auto [tx, ty] : t.ink)
                    if (ink_at(x0 + tx, dy + ty))
                        ++inter;
                double dice = 2.0 * inter / (static_cast<double>(cell.size()) + t.ink.size());
                if (dice > best) {
                    best = dice;
                    best_i = ti;
                    best_dy = dy;
                }
            }
            text.push_back(tpls[best_i].ch);
            score_sum += best;
            ++scored_cells;
            Rect box;
            box.x = std::max(0, floor_div3(x0));
            box.y = std::max(0, floor_div3(best_dy + 1));
            box.w = kFontCellW;
            box.h = kFontCellH;
            res.char_boxes.push_back(box);
        }
    }

    res.text = std::move(text);
    res.confidence = scored_cells ? 100.0 * score_sum / scored_cells : 0.0;
    return res;
}

std::shared_ptr<const OcrEngine> make_ocr_engine(const std::string& name) {
    if (name == "reference")
        return std::make_shared<TemplateOcrEngine>();
    if (name == "none")
        return std::make_shared<NullOcrEngine>();
    return nullptr;
}

OcrResult recognize_text(const Frame& region) {
    static const TemplateOcrEngine engine;
    return engine.recognize(preprocess_for_ocr(region));
}

std::string normalize_text(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = true; // leading whitespace dropped
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_ws = true;
            continue;
        }
        if (in_ws && !out.empty())
            out.push_back(' ');
        in_ws = false;
        out.push_back(c);
    }
    return out;
}

} // namespace uiattest
