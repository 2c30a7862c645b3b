#include "doctest.h"

#include "uiattest/context.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

using namespace uiattest;

namespace {
constexpr double kEps = 1e-9;
}

TEST_CASE("sha256 known answers") {
    std::vector<std::uint8_t> zeros(12, 0);
    CHECK(to_hex(sha256(zeros)) ==
          "15ec7bf0b50732b49f8228e07d24365338f9e3ab994b00af08e5a3bffe55fd8b");
    CHECK(to_hex(sha256(std::string())) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    std::vector<std::uint8_t> pat;
    for (int i = 0; i < 6; ++i) {
        pat.push_back(7);
        pat.push_back(20);
        pat.push_back(33);
    }
    CHECK(to_hex(sha256(pat)) ==
          "2141834dfd5cc60eb43c576d7d0c5e1525ce1ac3197a8b33a078c99eb600eb81");
}

TEST_CASE("hex round trip is strict") {
    CHECK(to_hex(from_hex("00ff10")) == "00ff10");
    CHECK(from_hex("AB")[0] == 0xab);
    CHECK_THROWS(from_hex("abc"));  // odd length
    CHECK_THROWS(from_hex("zz"));
}

TEST_CASE("rgb_to_hsv frozen values") {
    auto check = [](int r, int g, int b, double h, double s, double v) {
        HsvPixel p = rgb_to_hsv(static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                                static_cast<std::uint8_t>(b));
        CHECK(p.h == doctest::Approx(h).epsilon(1e-9));
        CHECK(p.s == doctest::Approx(s).epsilon(1e-9));
        CHECK(p.v == doctest::Approx(v).epsilon(1e-9));
    };
    check(30, 80, 220, 224.2105263158, 0.8636363636, 0.8627450980);
    check(0, 170, 60, 141.1764705882, 1.0, 0.6666666667);
    check(140, 180, 240, 216.0, 0.4166666667, 0.9411764706);
    check(128, 128, 128, 0.0, 0.0, 0.5019607843);
    check(12, 200, 77, 140.7446808511, 0.94, 0.7843137255);
}

TEST_CASE("achromatic pixels get hue zero") {
    for (int v = 0; v <= 255; v += 17) {
        HsvPixel p = rgb_to_hsv(static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v),
                                static_cast<std::uint8_t>(v));
        CHECK(p.h == 0.0);
        CHECK(p.s == 0.0);
    }
}

TEST_CASE("hsv round trip recovers every sampled rgb exactly") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 20000; ++i) {
        auto r = static_cast<std::uint8_t>(rng());
        auto g = static_cast<std::uint8_t>(rng());
        auto b = static_cast<std::uint8_t>(rng());
        HsvPixel p = rgb_to_hsv(r, g, b);
        std::uint8_t r2, g2, b2;
        hsv_to_rgb(p.h, p.s, p.v, r2, g2, b2);
        CHECK(r2 == r);
        CHECK(g2 == g);
        CHECK(b2 == b);
    }
}

TEST_CASE("hue distance is circular") {
    CHECK(hue_distance(0.0, 359.0) == doctest::Approx(1.0).epsilon(kEps));
    CHECK(hue_distance(10.0, 355.0) == doctest::Approx(15.0).epsilon(kEps));
    CHECK(hue_distance(90.0, 270.0) == doctest::Approx(180.0).epsilon(kEps));
    CHECK(hue_distance(123.4, 123.4) == doctest::Approx(0.0));
    // symmetry and the 180 cap
    std::mt19937_64 rng(7);
    for (int i = 0; i < 1000; ++i) {
        double a = (rng() % 36000) / 100.0;
        double b = (rng() % 36000) / 100.0;
        double d = hue_distance(a, b);
        CHECK(d == doctest::Approx(hue_distance(b, a)).epsilon(kEps));
        CHECK(d >= 0.0);
        CHECK(d <= 180.0 + kEps);
    }
}

TEST_CASE("rect algebra") {
    Rect a{2, 3, 10, 5};
    CHECK(a.right() == 12);
    CHECK(a.bottom() == 8);
    CHECK(a.contains(2, 3));
    CHECK_FALSE(a.contains(12, 3));
    Rect b{10, 4, 6, 6};
    CHECK(a.intersects(b));
    Rect i = a.intersect(b);
    CHECK(i == Rect{10, 4, 2, 4});
    CHECK(a.intersect(Rect{100, 100, 5, 5}).empty());
    CHECK(a.inflated(2, Rect{0, 0, 100, 100}) == Rect{0, 1, 14, 9});
    CHECK(a.inflated(5, Rect{0, 0, 100, 100}) == Rect{0, 0, 17, 13});
}

TEST_CASE("digest_region is content addressed and bounds checked") {
    Frame f(20, 10);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 20; ++x)
            f.set(x, y, static_cast<std::uint8_t>(x * 7), static_cast<std::uint8_t>(y * 11), 9);
    // same bytes at two offsets hash identically
    Frame g(20, 10);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            const auto* p = f.at(x + 1, y + 2);
            g.set(x + 9, y + 5, p[0], p[1], p[2]);
        }
    CHECK(to_hex(digest_region(f, {1, 2, 4, 4})) == to_hex(digest_region(g, {9, 5, 4, 4})));
    CHECK(to_hex(digest_region(f, {0, 0, 20, 10})) != to_hex(digest_region(f, {0, 0, 19, 10})));
    CHECK_THROWS_AS(digest_region(f, {15, 5, 10, 4}), std::out_of_range);
    CHECK_THROWS_AS(digest_region(f, {-1, 0, 4, 4}), std::out_of_range);
}

TEST_CASE("alignment recovers every translation inside the bound") {
    Frame trusted(24, 24);
    std::mt19937_64 rng(99);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 24; ++x) {
            auto v = static_cast<std::uint8_t>(rng());
            trusted.set(x, y, v, v, v);
        }
    for (int dy = -3; dy <= 3; ++dy)
        for (int dx = -3; dx <= 3; ++dx) {
            Frame local(24, 24);
            for (int y = 0; y < 24; ++y)
                for (int x = 0; x < 24; ++x) {
                    int sx = x - dx, sy = y - dy;
                    if (sx >= 0 && sx < 24 && sy >= 0 && sy < 24) {
                        const auto* p = trusted.at(sx, sy);
                        local.set(x, y, p[0], p[1], p[2]);
                    }
                }
            Shift s = align_translation(local, trusted, 3);
            CHECK(s.dx == dx);
            CHECK(s.dy == dy);
        }
}

TEST_CASE("alignment tie break prefers the smallest move") {
    // uniform frames: every shift costs zero, so (0,0) must win
    Frame a = Frame::solid(16, 16, 77, 77, 77);
    Frame b = Frame::solid(16, 16, 77, 77, 77);
    Shift s = align_translation(a, b, 4);
    CHECK(s == Shift{0, 0});
}

TEST_CASE("alignment bound formula") {
    CHECK(alignment_bound(120, 64) == 12);
    CHECK(alignment_bound(64, 120) == 12);
    CHECK(alignment_bound(10, 10) == 1);
    CHECK(alignment_bound(1, 1) == 1);
    CHECK(alignment_bound(95, 10) == 10); // ceil(9.5)
}

TEST_CASE("crop copies the subrect") {
    Frame f(8, 8);
    f.set(3, 4, 1, 2, 3);
    Frame c = crop(f, {2, 3, 4, 4});
    CHECK(c.width() == 4);
    CHECK(c.height() == 4);
    const auto* p = c.at(1, 1);
    CHECK(p[0] == 1);
    CHECK(p[1] == 2);
    CHECK(p[2] == 3);
}
