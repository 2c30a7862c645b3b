#include "uiattest/pof.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace uiattest {

namespace {

HsvPixel hsv_at(const Frame& f, int x, int y) {
    const std::uint8_t* p = f.at(x, y);
    return rgb_to_hsv(p[0], p[1], p[2]);
}

// Fraction of the ring area (Chebyshev distance 1..ring_px outside rect,
// clipped to the frame) whose pixels sit in the focus band.
double ring_coverage(const Frame& f, const Rect& rect, const PofStyle& st) {
    Rect outer = rect.inflated(st.ring_px, f.bounds());
    long total = 0, hit = 0;
    for (int y = outer.y; y < outer.bottom(); ++y)
        for (int x = outer.x; x < outer.right(); ++x) {
            if (rect.contains(x, y))
                continue;
            ++total;
            if (st.in_focus_band(hsv_at(f, x, y)))
                ++hit;
        }
    return total ? static_cast<double>(hit) / total : 0.0;
}

struct ColumnStat {
    int count = 0, row_lo = 0, row_hi = -1;
};

struct BarRun {
    int col_lo = 0, col_hi = 0; // inclusive, region-relative
    int row_lo = 0, row_hi = 0;
};

// Contiguous column runs of marked pixels with their row extent.
std::vector<BarRun> column_runs(const std::vector<ColumnStat>& cols) {
    std::vector<BarRun> runs;
    int n = static_cast<int>(cols.size());
    for (int c = 0; c < n; ++c) {
        if (!cols[c].count)
            continue;
        BarRun r{c, c, cols[c].row_lo, cols[c].row_hi};
        while (r.col_hi + 1 < n && cols[r.col_hi + 1].count) {
            ++r.col_hi;
            r.row_lo = std::min(r.row_lo, cols[r.col_hi].row_lo);
            r.row_hi = std::max(r.row_hi, cols[r.col_hi].row_hi);
        }
        runs.push_back(r);
        c = r.col_hi;
    }
    return runs;
}

} // namespace

int caret_column(int caret_x, const OcrResult& value) {
    std::vector<Rect> boxes = value.char_boxes;
    if (boxes.empty())
        return 0;
    std::sort(boxes.begin(), boxes.end(), [](const Rect& a, const Rect& b) { return a.x < b.x; });
    std::vector<int> widths;
    for (const auto& b : boxes)
        widths.push_back(b.w);
    std::nth_element(widths.begin(), widths.begin() + widths.size() / 2, widths.end());
    int half = std::max(1, widths[widths.size() / 2] / 2);
    for (size_t k = 0; k < boxes.size(); ++k) {
        if (std::abs(caret_x - boxes[k].x) <= half)
            return static_cast<int>(k);
        if (std::abs(caret_x - boxes[k].right()) <= half)
            return static_cast<int>(k) + 1;
    }
    for (size_t k = 0; k < boxes.size(); ++k)
        if (caret_x < boxes[k].x + boxes[k].w / 2)
            return static_cast<int>(k);
    return static_cast<int>(boxes.size());
}

Frame mask_pof_colors(const Frame& region_crop, const PofStyle& style) {
    Frame out = region_crop;
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) {
            HsvPixel p = hsv_at(out, x, y);
            if (style.in_caret_band(p) || style.in_selection_band(p))
                out.set(x, y, 255, 255, 255);
        }
    return out;
}

PofOutcome detect_pof(const Frame& frame, const PageBreakdown& breakdown,
                      const OcrFn& ocr, const PofStyle& st) {
    PofOutcome out;
    int focus_count = 0, caret_count = 0, sel_count = 0;

    struct RawCaret { std::string region; int x_px; };
    struct RawSel { std::string region; int px_lo, px_hi; };
    std::optional<RawCaret> raw_caret;
    std::optional<RawSel> raw_sel;

    for (const auto& reg : breakdown.regions) {
        if (reg.kind != RegionKind::input)
            continue;
        const Rect& rect = reg.rect;

        double cov = ring_coverage(frame, rect, st);
        if (cov >= st.ring_coverage_focused) {
            ++focus_count;
            out.state.focus = reg.id;
        } else if (cov > st.ring_coverage_noise) {
            std::ostringstream os;
            os << "partial focus ring, coverage " << cov;
            out.violations.push_back({reg.id, os.str()});
        }

        std::vector<ColumnStat> caret_cols(rect.w), sel_cols(rect.w);
        for (int y = 0; y < rect.h; ++y)
            for (int x = 0; x < rect.w; ++x) {
                HsvPixel p = hsv_at(frame, rect.x + x, rect.y + y);
                auto mark = [&](std::vector<ColumnStat>& cols) {
                    auto& c = cols[x];
                    if (!c.count) {
                        c.row_lo = c.row_hi = y;
                    } else {
                        c.row_lo = std::min(c.row_lo, y);
                        c.row_hi = std::max(c.row_hi, y);
                    }
                    ++c.count;
                };
                if (st.in_caret_band(p))
                    mark(caret_cols);
                else if (st.in_selection_band(p))
                    mark(sel_cols);
            }

        for (const auto& run : column_runs(caret_cols)) {
            int bw = run.col_hi - run.col_lo + 1;
            int bh = run.row_hi - run.row_lo + 1;
            if (bw >= st.caret_w_min && bw <= st.caret_w_max && bh >= st.caret_h_frac * rect.h) {
                ++caret_count;
                raw_caret = RawCaret{reg.id, (run.col_lo + run.col_hi + 1) / 2};
            } else {
                std::ostringstream os;
                os << "malformed caret mark " << bw << "x" << bh << " at column " << run.col_lo;
                out.violations.push_back({reg.id, os.str()});
            }
        }

        for (const auto& run : column_runs(sel_cols)) {
            int bw = run.col_hi - run.col_lo + 1;
            int bh = run.row_hi - run.row_lo + 1;
            if (bw >= st.sel_w_min && bh >= st.sel_h_frac * rect.h) {
                ++sel_count;
                raw_sel = RawSel{reg.id, run.col_lo, run.col_hi};
            } else {
                std::ostringstream os;
                os << "malformed selection mark " << bw << "x" << bh << " at column " << run.col_lo;
                out.violations.push_back({reg.id, os.str()});
            }
        }
    }

    if (focus_count > 1)
        out.violations.push_back({"", "multiple focus rings"});
    if (caret_count > 1)
        out.violations.push_back({"", "multiple caret marks"});
    if (sel_count > 1)
        out.violations.push_back({"", "multiple selection marks"});
    if (raw_caret && (!out.state.focus || *out.state.focus != raw_caret->region))
        out.violations.push_back({raw_caret->region, "caret outside the focused region"});
    if (raw_sel && (!out.state.focus || *out.state.focus != raw_sel->region))
        out.violations.push_back({raw_sel->region, "selection outside the focused region"});
    if (raw_caret && raw_sel && raw_caret->region == raw_sel->region)
        out.violations.push_back({raw_caret->region, "caret drawn inside a selection"});

    // map pixel marks onto glyph columns using the region's recognized value
    if (raw_caret) {
        const Region* reg = breakdown.find(raw_caret->region);
        OcrResult value = ocr(crop(frame, reg->rect));
        out.state.caret = CaretMark{raw_caret->region, caret_column(raw_caret->x_px, value), raw_caret->x_px};
    }
    if (raw_sel) {
        const Region* reg = breakdown.find(raw_sel->region);
        OcrResult value = ocr(crop(frame, reg->rect));
        std::vector<Rect> boxes = value.char_boxes;
        std::sort(boxes.begin(), boxes.end(), [](const Rect& a, const Rect& b) { return a.x < b.x; });
        int a = -1, b = -1;
        for (size_t k = 0; k < boxes.size(); ++k) {
            int cx = boxes[k].x + boxes[k].w / 2;
            if (cx >= raw_sel->px_lo && cx <= raw_sel->px_hi + 1) {
                if (a < 0)
                    a = static_cast<int>(k);
                b = static_cast<int>(k) + 1;
            }
        }
        if (a < 0)
            a = b = 0;
        out.state.selection = SelectionMark{raw_sel->region, a, b};
    }
    return out;
}

} // namespace uiattest
