#include "doctest.h"

#include "uiattest/errors.hpp"
#include "uiattest/manifest.hpp"
#include "uiattest/sha256.hpp"

#include <string>

using namespace uiattest;

namespace {

PageBreakdown sample_breakdown() {
    PageBreakdown b;
    b.page_id = "demo";
    b.viewport_w = 200;
    b.viewport_h = 100;
    b.regions.push_back({"logo", RegionKind::graphical, {0, 0, 40, 30}, std::nullopt});
    b.regions.push_back({"title", RegionKind::textual, {50, 0, 100, 20}, std::nullopt});
    b.regions.push_back({"amount", RegionKind::input, {50, 40, 80, 20}, std::string("Amount")});
    b.submit_button = {50, 70, 60, 24};
    return b;
}

} // namespace

TEST_CASE("breakdown round trip") {
    PageBreakdown b = sample_breakdown();
    PageBreakdown c = parse_breakdown(serialize_breakdown(b));
    CHECK(c.page_id == b.page_id);
    CHECK(c.viewport_w == 200);
    CHECK(c.viewport_h == 100);
    REQUIRE(c.regions.size() == 3);
    CHECK(c.regions[0].id == "logo");
    CHECK(c.regions[0].kind == RegionKind::graphical);
    CHECK(c.regions[1].rect == Rect{50, 0, 100, 20});
    CHECK(c.regions[2].kind == RegionKind::input);
    REQUIRE(c.regions[2].label_hint.has_value());
    CHECK(*c.regions[2].label_hint == "Amount");
    CHECK_FALSE(c.regions[1].label_hint.has_value());
    CHECK(c.submit_button == Rect{50, 70, 60, 24});
    CHECK(c.find("title") != nullptr);
    CHECK(c.find("nope") == nullptr);
    CHECK(c.of_kind(RegionKind::input).size() == 1);
}

TEST_CASE("breakdown rejects structural violations") {
    PageBreakdown b = sample_breakdown();
    b.regions.push_back({"amount", RegionKind::textual, {0, 40, 10, 10}, std::nullopt});
    CHECK_THROWS_AS(parse_breakdown(serialize_breakdown(b)), ParseError); // duplicate id

    b = sample_breakdown();
    b.regions.push_back({"other", RegionKind::input, {60, 45, 40, 10}, std::nullopt});
    CHECK_THROWS_AS(parse_breakdown(serialize_breakdown(b)), ParseError); // inputs overlap

    b = sample_breakdown();
    b.regions[0].rect = {190, 90, 40, 30};
    CHECK_THROWS_AS(parse_breakdown(serialize_breakdown(b)), ParseError); // leaves viewport

    CHECK_THROWS_AS(parse_breakdown("{ not json"), ParseError);
    CHECK_THROWS_AS(parse_breakdown("{}"), ParseError);
}

TEST_CASE("rendering manifest round trip") {
    RenderingManifest m{480, 320};
    RenderingManifest n = parse_rendering_manifest(serialize_rendering_manifest(m));
    CHECK(n.width == 480);
    CHECK(n.height == 320);
    CHECK_THROWS_AS(parse_rendering_manifest("[]"), ParseError);
    CHECK_THROWS_AS(parse_rendering_manifest(R"({"width":0,"height":5})"), ParseError);
}

TEST_CASE("hid log round trip") {
    std::vector<HidEvent> ev{
        {0, HidDevice::keyboard, HidAction::key, 0, 0},
        {5, HidDevice::mouse, HidAction::move, 10, 20},
        {5, HidDevice::mouse, HidAction::click, 10, 20},
        {900, HidDevice::keyboard, HidAction::key, 0, 0},
    };
    auto back = parse_hid_log(serialize_hid_log(ev));
    REQUIRE(back.size() == 4);
    CHECK(back[1].device == HidDevice::mouse);
    CHECK(back[1].action == HidAction::move);
    CHECK(back[1].x == 10);
    CHECK(back[1].y == 20);
    CHECK(back[3].t_ms == 900);
    CHECK(parse_hid_log("").empty());
}

TEST_CASE("hid log rejects malformed lines") {
    CHECK_THROWS_AS(parse_hid_log("5 mouse click 3 4\n4 keyboard key\n"), ParseError);
    CHECK_THROWS_AS(parse_hid_log("1 gamepad key\n"), ParseError);
    CHECK_THROWS_AS(parse_hid_log("1 mouse click\n"), ParseError); // needs x y
    CHECK_THROWS_AS(parse_hid_log("1 keyboard click\n"), ParseError);
    CHECK_THROWS_AS(parse_hid_log("x keyboard key\n"), ParseError);
}

TEST_CASE("request round trip keeps order and splits at the first '='") {
    Request r;
    r.pairs.emplace_back("To", "a=b");
    r.pairs.emplace_back("Amount", "120");
    Request s = parse_request(serialize_request(r));
    REQUIRE(s.pairs.size() == 2);
    CHECK(s.pairs[0].first == "To");
    CHECK(s.pairs[0].second == "a=b");
    CHECK(s.pairs[1].first == "Amount");
    CHECK_THROWS_AS(parse_request("novalue\n"), ParseError);
    CHECK_THROWS_AS(parse_request("A=1\nA=1\n"), ParseError); // duplicate label
    CHECK(parse_request("").pairs.empty());
}

TEST_CASE("session manifest round trip and ordering rules") {
    SessionManifest m;
    m.start_t_ms = 0;
    m.end_t_ms = 900;
    m.frames = {{0, "frames/0000.png"}, {250, "frames/0001.png"}, {700, "frames/0002.png"}};
    m.hid_path = "hid.log";
    m.trusted_path = "trusted.png";
    m.breakdown_path = "breakdown.json";
    SessionManifest n = parse_session_manifest(serialize_session_manifest(m));
    CHECK(n.start_t_ms == 0);
    CHECK(n.end_t_ms == 900);
    REQUIRE(n.frames.size() == 3);
    CHECK(n.frames[2].path == "frames/0002.png");
    CHECK(n.hid_path == "hid.log");

    m.frames[1].t_ms = 0; // not strictly increasing
    CHECK_THROWS_AS(parse_session_manifest(serialize_session_manifest(m)), ParseError);
    m.frames[1].t_ms = 250;
    m.end_t_ms = 600; // before last frame
    CHECK_THROWS_AS(parse_session_manifest(serialize_session_manifest(m)), ParseError);
    m.end_t_ms = 900;
    m.start_t_ms = 10; // after first frame
    CHECK_THROWS_AS(parse_session_manifest(serialize_session_manifest(m)), ParseError);
}

TEST_CASE("parsers survive arbitrary bytes") {
    // junk never crashes or leaks a foreign exception type
    std::string seed = "fuzz";
    for (int i = 0; i < 300; ++i) {
        Digest d = sha256(seed + std::to_string(i));
        std::string junk(d.begin(), d.end());
        junk += junk;
        for (auto parse : {+[](const std::string& s) { (void)parse_breakdown(s); },
                           +[](const std::string& s) { (void)parse_rendering_manifest(s); },
                           +[](const std::string& s) { (void)parse_hid_log(s); },
                           +[](const std::string& s) { (void)parse_request(s); },
                           +[](const std::string& s) { (void)parse_session_manifest(s); }}) {
            try {
                parse(junk);
            } catch (const ParseError&) {
                // expected for junk
            }
        }
    }
    CHECK(true);
}
