#include "uiattest/validate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace uiattest {

ValidatorConfig ValidatorConfig::with_hsv_percent(double pct) {
    ValidatorConfig cfg;
    cfg.hue_threshold_deg = 360.0 * pct / 100.0;
    cfg.sat_threshold = pct / 100.0;
    cfg.val_threshold = pct / 100.0;
    return cfg;
}

const char* to_string(RegionStatus s) {
    switch (s) {
    case RegionStatus::pass: return "pass";
    case RegionStatus::content_difference: return "content_difference";
    case RegionStatus::color_difference: return "color_difference";
    case RegionStatus::position_difference: return "position_difference";
    case RegionStatus::text_mismatch: return "text_mismatch";
    }
    return "?";
}

std::vector<Rect> connected_components(const std::vector<std::uint8_t>& mask, int w, int h) {
    std::vector<Rect> out;
    std::vector<std::uint8_t> seen(mask.size(), 0);
    std::deque<std::pair<int, int>> q;
    for (int sy = 0; sy < h; ++sy)
        for (int sx = 0; sx < w; ++sx) {
            size_t si = static_cast<size_t>(sy) * w + sx;
            if (!mask[si] || seen[si])
                continue;
            int x0 = sx, x1 = sx, y0 = sy, y1 = sy;
            seen[si] = 1;
            q.emplace_back(sx, sy);
            while (!q.empty()) {
                auto [x, y] = q.front();
                q.pop_front();
                x0 = std::min(x0, x); x1 = std::max(x1, x);
                y0 = std::min(y0, y); y1 = std::max(y1, y);
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        int nx = x + dx, ny = y + dy;
                        if (nx < 0 || nx >= w || ny < 0 || ny >= h)
                            continue;
                        size_t ni = static_cast<size_t>(ny) * w + nx;
                        if (mask[ni] && !seen[ni]) {
                            seen[ni] = 1;
                            q.emplace_back(nx, ny);
                        }
                    }
            }
            out.push_back(Rect{x0, y0, x1 - x0 + 1, y1 - y0 + 1});
        }
    return out;
}

std::vector<Rect> detect_text_boxes(const Frame& frame) {
    const int w = frame.width(), h = frame.height();
    std::vector<std::uint32_t> hist(256, 0);
    std::vector<std::uint8_t> gray(static_cast<size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::uint8_t* p = frame.at(x, y);
            int v = std::clamp(static_cast<int>(std::lround(luma(p[0], p[1], p[2]))), 0, 255);
            gray[static_cast<size_t>(y) * w + x] = static_cast<std::uint8_t>(v);
            ++hist[v];
        }
    auto thr = otsu_threshold(hist);
    if (!thr)
        return {};
    std::uint64_t dark = 0;
    for (int i = 0; i <= *thr; ++i)
        dark += hist[i];
    bool ink_is_dark = dark <= static_cast<std::uint64_t>(w) * h - dark;
    std::vector<std::uint8_t> mask(gray.size());
    for (size_t i = 0; i < gray.size(); ++i)
        mask[i] = (gray[i] <= *thr) == ink_is_dark;

    std::vector<Rect> boxes = connected_components(mask, w, h);
    if (boxes.size() < 2)
        return boxes;

    std::vector<int> widths;
    widths.reserve(boxes.size());
    for (const auto& b : boxes)
        widths.push_back(b.w);
    std::nth_element(widths.begin(), widths.begin() + widths.size() / 2, widths.end());
    double merge_gap = 1.2 * widths[widths.size() / 2];

    std::sort(boxes.begin(), boxes.end(),
              [](const Rect& a, const Rect& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    std::vector<char> dead(boxes.size(), 0);
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < boxes.size(); ++i) {
            if (dead[i])
                continue;
            for (size_t j = 0; j < boxes.size(); ++j) {
                if (i == j || dead[j])
                    continue;
                const Rect &a = boxes[i], &b = boxes[j];
                bool rows = a.y < b.bottom() && b.y < a.bottom();
                bool cols = a.x < b.right() && b.x < a.right();
                int xgap = std::max(a.x, b.x) - std::min(a.right(), b.right());
                int ygap = std::max(a.y, b.y) - std::min(a.bottom(), b.bottom());
                // same line, or stacked pieces of one glyph (i, j, colon)
                bool join = (rows && xgap <= merge_gap) || (cols && ygap <= 4);
                if (!join)
                    continue;
                int x0 = std::min(a.x, b.x), y0 = std::min(a.y, b.y);
                int x1 = std::max(a.right(), b.right()), y1 = std::max(a.bottom(), b.bottom());
                boxes[i] = Rect{x0, y0, x1 - x0, y1 - y0};
                dead[j] = 1;
                changed = true;
            }
        }
    }
    std::vector<Rect> out;
    for (size_t i = 0; i < boxes.size(); ++i)
        if (!dead[i])
            out.push_back(boxes[i]);
    return out;
}

std::vector<std::uint8_t> hsv_flag_mask(const Frame& a, const Frame& b, const ValidatorConfig& cfg) {
    if (a.width() != b.width() || a.height() != b.height())
        throw std::invalid_argument("hsv_flag_mask: size mismatch");
    std::vector<std::uint8_t> mask(static_cast<size_t>(a.width()) * a.height(), 0);
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x) {
            const std::uint8_t* pa = a.at(x, y);
            const std::uint8_t* pb = b.at(x, y);
            HsvPixel p = rgb_to_hsv(pa[0], pa[1], pa[2]);
            HsvPixel q = rgb_to_hsv(pb[0], pb[1], pb[2]);
            bool flag = hue_distance(p.h, q.h) > cfg.hue_threshold_deg ||
                        std::abs(p.s - q.s) > cfg.sat_threshold ||
                        std::abs(p.v - q.v) > cfg.val_threshold;
            if (flag)
                mask[static_cast<size_t>(y) * a.width() + x] = 1;
        }
    return mask;
}

std::vector<Rect> remove_noise_components(const std::vector<std::uint8_t>& mask, int w, int h,
                                          int region_w, int region_h, const ValidatorConfig& cfg) {
    double max_w = cfg.noise_fraction * region_w;
    double max_h = cfg.noise_fraction * region_h;
    std::vector<Rect> out;
    for (const auto& c : connected_components(mask, w, h))
        if (!(c.w <= max_w && c.h <= max_h))
            out.push_back(c);
    return out;
}

std::vector<TextPosFailure> text_pos_check(const std::vector<Rect>& boxes,
                                           const PageBreakdown& breakdown,
                                           const std::vector<Rect>& scope,
                                           const std::vector<std::string>& must_have_text) {
    std::vector<TextPosFailure> fails;
    auto center_in = [](const Rect& r, const Rect& box) {
        return r.contains(box.x + box.w / 2, box.y + box.h / 2);
    };
    for (const auto& box : boxes) {
        bool in_scope = scope.empty();
        for (const auto& s : scope)
            if (s.intersects(box)) {
                in_scope = true;
                break;
            }
        if (!in_scope)
            continue;
        bool owned = false;
        for (const auto& r : breakdown.regions)
            if (center_in(r.rect, box)) {
                owned = true;
                break;
            }
        if (!owned && center_in(breakdown.submit_button, box))
            owned = true;
        if (!owned) {
            std::ostringstream os;
            os << "text outside any declared region at (" << box.x << "," << box.y
               << " " << box.w << "x" << box.h << ")";
            fails.push_back({"", os.str()});
        }
    }
    for (const auto& id : must_have_text) {
        const Region* r = breakdown.find(id);
        if (!r)
            continue;
        bool any = false;
        for (const auto& box : boxes)
            if (center_in(r->rect, box)) {
                any = true;
                break;
            }
        if (!any)
            fails.push_back({id, "expected text missing from region"});
    }
    return fails;
}

OcrFn direct_ocr(std::shared_ptr<const OcrEngine> engine) {
    return [engine](const Frame& crop) { return engine->recognize(preprocess_for_ocr(crop)); };
}

namespace {

struct Aligned {
    Shift shift;
    int bound = 0;
    Frame local_ov, trusted_ov;
};

Aligned overlap_at_best_shift(const Frame& local, const Frame& trusted, const ValidatorConfig& cfg) {
    Aligned a;
    a.bound = alignment_bound(local.width(), local.height(), cfg.position_fraction);
    a.shift = align_translation(local, trusted, a.bound);
    int dx = a.shift.dx, dy = a.shift.dy;
    Rect lr{std::max(0, dx), std::max(0, dy),
            local.width() - std::abs(dx), local.height() - std::abs(dy)};
    Rect tr{std::max(0, -dx), std::max(0, -dy), lr.w, lr.h};
    a.local_ov = crop(local, lr);
    a.trusted_ov = crop(trusted, tr);
    return a;
}

std::string shift_detail(const Shift& s, const std::vector<Rect>& survivors) {
    std::ostringstream os;
    os << "shift (" << s.dx << "," << s.dy << ")";
    if (!survivors.empty()) {
        const Rect& r = survivors.front();
        os << ", " << survivors.size() << " flagged area(s), first ("
           << r.x << "," << r.y << " " << r.w << "x" << r.h << ")";
    }
    return os.str();
}

} // namespace

RegionVerdict validate_graphic_region(const Frame& local, const Frame& trusted,
                                      const ValidatorConfig& cfg) {
    Aligned a = overlap_at_best_shift(local, trusted, cfg);
    auto mask = hsv_flag_mask(a.local_ov, a.trusted_ov, cfg);
    auto survivors = remove_noise_components(mask, a.local_ov.width(), a.local_ov.height(),
                                             local.width(), local.height(), cfg);
    if (survivors.empty())
        return {};
    bool on_boundary = std::abs(a.shift.dx) == a.bound || std::abs(a.shift.dy) == a.bound;
    RegionVerdict v;
    v.status = on_boundary ? RegionStatus::position_difference : RegionStatus::color_difference;
    v.detail = shift_detail(a.shift, survivors);
    return v;
}

RegionVerdict validate_text_region(const Frame& local, const Frame& trusted,
                                   const OcrFn& ocr, const ValidatorConfig& cfg) {
    Aligned a = overlap_at_best_shift(local, trusted, cfg);
    if (std::abs(a.shift.dx) == a.bound || std::abs(a.shift.dy) == a.bound) {
        auto mask = hsv_flag_mask(a.local_ov, a.trusted_ov, cfg);
        auto survivors = remove_noise_components(mask, a.local_ov.width(), a.local_ov.height(),
                                                 local.width(), local.height(), cfg);
        if (!survivors.empty())
            return {RegionStatus::position_difference, shift_detail(a.shift, survivors)};
    }

    // the recognizer is translation invariant, so OCR runs on the unaligned crops
    OcrResult lo = ocr(local);
    OcrResult to = ocr(trusted);
    if (lo.confidence >= cfg.ocr_confidence_gate && to.confidence >= cfg.ocr_confidence_gate) {
        std::string ls = normalize_text(lo.text), ts = normalize_text(to.text);
        if (ls == ts)
            return {};
        return {RegionStatus::text_mismatch, "expected \"" + ts + "\" saw \"" + ls + "\""};
    }

    RegionVerdict v = validate_graphic_region(local, trusted, cfg);
    if (v.status != RegionStatus::pass)
        v.detail = "ocr fallback: " + v.detail;
    return v;
}

} // namespace uiattest
