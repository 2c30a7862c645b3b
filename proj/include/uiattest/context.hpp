#pragma once

#include "uiattest/sha256.hpp"

#include <cstdint>
#include <vector>

namespace uiattest {

struct Rect {
    int x = 0, y = 0, w = 0, h = 0;

    bool contains(int px, int py) const {
        return px >= x && px < x + w && py >= y && py < y + h;
    }
    bool contains(const Rect& r) const {
        return r.x >= x && r.y >= y && r.x + r.w <= x + w && r.y + r.h <= y + h;
    }
    bool intersects(const Rect& r) const {
        return x < r.x + r.w && r.x < x + w && y < r.y + r.h && r.y < y + h;
    }
    Rect intersect(const Rect& r) const;
    // Grows by d on every side, then clips to bounds.
    Rect inflated(int d, const Rect& bounds) const;
    int right() const { return x + w; }
    int bottom() const { return y + h; }
    int cx() const { return x + w / 2; }
    int cy() const { return y + h / 2; }
    bool empty() const { return w <= 0 || h <= 0; }
    bool operator==(const Rect&) const = default;
};

// 8-bit RGB raster with a capture timestamp. Pixels are row-major, 3 bytes
// per pixel, no padding. t_ms is milliseconds from session start.
class Frame {
public:
    Frame() = default;
    Frame(int w, int h, std::int64_t t = 0)
        : w_(w), h_(h), t_ms_(t), px_(static_cast<size_t>(w) * h * 3, 0) {}
    Frame(int w, int h, std::vector<std::uint8_t> px, std::int64_t t = 0);

    static Frame solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b,
                       std::int64_t t = 0);

    int width() const { return w_; }
    int height() const { return h_; }
    Rect bounds() const { return {0, 0, w_, h_}; }
    std::int64_t t_ms() const { return t_ms_; }
    void set_t_ms(std::int64_t t) { t_ms_ = t; }

    const std::uint8_t* at(int x, int y) const { return px_.data() + (static_cast<size_t>(y) * w_ + x) * 3; }
    std::uint8_t* at(int x, int y) { return px_.data() + (static_cast<size_t>(y) * w_ + x) * 3; }
    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        auto* p = at(x, y);
        p[0] = r; p[1] = g; p[2] = b;
    }

    const std::vector<std::uint8_t>& pixels() const { return px_; }
    std::vector<std::uint8_t>& pixels() { return px_; }

    bool same_pixels(const Frame& o) const { return w_ == o.w_ && h_ == o.h_ && px_ == o.px_; }

private:
    int w_ = 0, h_ = 0;
    std::int64_t t_ms_ = 0;
    std::vector<std::uint8_t> px_;
};

// Hue in degrees [0,360), saturation and value in [0,1].
// Invariant: s==0 implies h==0 (achromatic pixels get a fixed hue).
struct HsvPixel {
    double h = 0, s = 0, v = 0;
};

struct Shift {
    int dx = 0, dy = 0;
    bool operator==(const Shift&) const = default;
};

HsvPixel rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// Inverse transform; h in degrees (any value, wrapped), s and v clamped
// to [0,1] before conversion.
void hsv_to_rgb(double h, double s, double v, std::uint8_t& r, std::uint8_t& g, std::uint8_t& b);

// Circular distance in degrees, always in [0,180].
double hue_distance(double h1, double h2);

// Rec.601 luma of an RGB pixel, in [0,255].
inline double luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    return 0.299 * r + 0.587 * g + 0.114 * b;
}

// SHA-256 over the cropped RGB rows, top to bottom. Throws std::out_of_range
// if the rect leaves the frame.
Digest digest_region(const Frame& f, const Rect& r);
inline Digest digest_frame(const Frame& f) { return digest_region(f, f.bounds()); }

Frame crop(const Frame& f, const Rect& r);

// Search bound used by the region validators: ceil(10% of the larger side).
int alignment_bound(int w, int h, double fraction = 0.10);

// Finds the integer translation of local content relative to trusted content,
// i.e. local(x,y) matches trusted(x-dx, y-dy). Minimizes mean absolute luma
// difference over the overlap for |dx|,|dy| <= bound; ties prefer smaller
// |dx|+|dy|, then smaller dy, then smaller dx. Sizes must match.
Shift align_translation(const Frame& local, const Frame& trusted, int bound);

} // namespace uiattest
