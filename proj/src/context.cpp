#include "uiattest/context.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace uiattest {

Rect Rect::intersect(const Rect& r) const {
    int x0 = std::max(x, r.x);
    int y0 = std::max(y, r.y);
    int x1 = std::min(right(), r.right());
    int y1 = std::min(bottom(), r.bottom());
    if (x1 <= x0 || y1 <= y0) return {0, 0, 0, 0};
    return {x0, y0, x1 - x0, y1 - y0};
}

Rect Rect::inflated(int d, const Rect& bounds) const {
    Rect g{x - d, y - d, w + 2 * d, h + 2 * d};
    return g.intersect(bounds);
}

Frame::Frame(int w, int h, std::vector<std::uint8_t> px, std::int64_t t)
    : w_(w), h_(h), t_ms_(t), px_(std::move(px)) {
    if (px_.size() != static_cast<size_t>(w) * h * 3)
        throw std::invalid_argument("frame pixel buffer size mismatch");
}

Frame Frame::solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b, std::int64_t t) {
    Frame f(w, h, t);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            f.set(x, y, r, g, b);
    return f;
}

HsvPixel rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
    double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
    double mx = std::max({r, g, b});
    double mn = std::min({r, g, b});
    double d = mx - mn;
    HsvPixel out;
    out.v = mx;
    if (mx <= 0.0 || d <= 0.0) {
        // achromatic: s=0 forces h=0
        out.s = (mx <= 0.0) ? 0.0 : 0.0;
        out.h = 0.0;
        return out;
    }
    out.s = d / mx;
    double h;
    if (mx == r)
        h = 60.0 * ((g - b) / d);
    else if (mx == g)
        h = 60.0 * ((b - r) / d) + 120.0;
    else
        h = 60.0 * ((r - g) / d) + 240.0;
    if (h < 0) h += 360.0;
    if (h >= 360.0) h -= 360.0;
    out.h = h;
    return out;
}

void hsv_to_rgb(double h, double s, double v, std::uint8_t& r, std::uint8_t& g, std::uint8_t& b) {
    h = std::fmod(h, 360.0);
    if (h < 0)
        h += 360.0;
    s = std::clamp(s, 0.0, 1.0);
    v = std::clamp(v, 0.0, 1.0);
    double c = v * s;
    double hp = h / 60.0;
    double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double r1 = 0, g1 = 0, b1 = 0;
    switch (static_cast<int>(hp)) {
    case 0: r1 = c; g1 = x; break;
    case 1: r1 = x; g1 = c; break;
    case 2: g1 = c; b1 = x; break;
    case 3: g1 = x; b1 = c; break;
    case 4: r1 = x; b1 = c; break;
    default: r1 = c; b1 = x; break;
    }
    double m = v - c;
    r = static_cast<std::uint8_t>(std::lround((r1 + m) * 255.0));
    g = static_cast<std::uint8_t>(std::lround((g1 + m) * 255.0));
    b = static_cast<std::uint8_t>(std::lround((b1 + m) * 255.0));
}

double hue_distance(double h1, double h2) {
    double d = std::fabs(h1 - h2);
    return std::min(d, 360.0 - d);
}

Digest digest_region(const Frame& f, const Rect& r) {
    if (r.w <= 0 || r.h <= 0 || r.x < 0 || r.y < 0 || r.right() > f.width() || r.bottom() > f.height())
        throw std::out_of_range("digest_region: rect outside frame");
    std::vector<std::uint8_t> bytes;
    bytes.reserve(static_cast<size_t>(r.w) * r.h * 3);
    for (int y = r.y; y < r.bottom(); ++y) {
        const std::uint8_t* row = f.at(r.x, y);
        bytes.insert(bytes.end(), row, row + static_cast<size_t>(r.w) * 3);
    }
    return sha256(bytes);
}

Frame crop(const Frame& f, const Rect& r) {
    if (r.w <= 0 || r.h <= 0 || r.x < 0 || r.y < 0 || r.right() > f.width() || r.bottom() > f.height())
        throw std::out_of_range("crop: rect outside frame");
    Frame out(r.w, r.h, f.t_ms());
    for (int y = 0; y < r.h; ++y) {
        const std::uint8_t* src = f.at(r.x, r.y + y);
        std::copy(src, src + static_cast<size_t>(r.w) * 3, out.at(0, y));
    }
    return out;
}

int alignment_bound(int w, int h, double fraction) {
    return static_cast<int>(std::ceil(fraction * std::max(w, h)));
}

Shift align_translation(const Frame& local, const Frame& trusted, int bound) {
    if (local.width() != trusted.width() || local.height() != trusted.height())
        throw std::invalid_argument("align_translation: size mismatch");
    const int w = local.width(), h = local.height();

    // precomputed luma planes; SAD below is the hot loop
    std::vector<double> ll(static_cast<size_t>(w) * h), tl(static_cast<size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::uint8_t* p = local.at(x, y);
            const std::uint8_t* q = trusted.at(x, y);
            ll[static_cast<size_t>(y) * w + x] = luma(p[0], p[1], p[2]);
            tl[static_cast<size_t>(y) * w + x] = luma(q[0], q[1], q[2]);
        }

    Shift best{0, 0};
    double best_cost = std::numeric_limits<double>::infinity();
    long best_l1 = 0;
    bool first = true;
    for (int dy = -bound; dy <= bound; ++dy) {
        for (int dx = -bound; dx <= bound; ++dx) {
            int x0 = std::max(0, dx), x1 = std::min(w, w + dx);
            int y0 = std::max(0, dy), y1 = std::min(h, h + dy);
            if (x0 >= x1 || y0 >= y1) continue;
            double sad = 0;
            for (int y = y0; y < y1; ++y) {
                const double* lr = &ll[static_cast<size_t>(y) * w];
                const double* tr = &tl[static_cast<size_t>(y - dy) * w - dx];
                for (int x = x0; x < x1; ++x)
                    sad += std::fabs(lr[x] - tr[x]);
            }
            double cost = sad / (static_cast<double>(x1 - x0) * (y1 - y0));
            long l1 = std::labs(dx) + std::labs(dy);
            bool better = first || cost < best_cost ||
                          (cost == best_cost && (l1 < best_l1 ||
                           (l1 == best_l1 && (dy < best.dy || (dy == best.dy && dx < best.dx)))));
            if (better) {
                best = {dx, dy};
                best_cost = cost;
                best_l1 = l1;
                first = false;
            }
        }
    }
    return best;
}

} // namespace uiattest
