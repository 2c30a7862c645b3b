#include "doctest.h"

#include "uiattest/edits.hpp"
#include "uiattest/engine.hpp"
#include "uiattest/fixtures.hpp"
#include "uiattest/ocr.hpp"
#include "uiattest/pof.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

using namespace uiattest;

namespace {

OcrFn masking_ocr() {
    auto eng = make_ocr_engine("reference");
    return [eng](const Frame& c) { return eng->recognize(preprocess_for_ocr(mask_pof_colors(c))); };
}

bool rect_near(const Rect& a, const Rect& b, int tol) {
    return std::abs(a.x - b.x) <= tol && std::abs(a.y - b.y) <= tol &&
           std::abs(a.w - b.w) <= tol && std::abs(a.h - b.h) <= tol;
}

std::filesystem::path fresh_dir(const char* name) {
    auto dir = std::filesystem::temp_directory_path() / "uiattest_fixture_test" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// All pixels where two equally sized frames differ.
std::vector<std::pair<int, int>> diff_pixels(const Frame& a, const Frame& b) {
    std::vector<std::pair<int, int>> out;
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x) {
            const std::uint8_t *p = a.at(x, y), *q = b.at(x, y);
            if (p[0] != q[0] || p[1] != q[1] || p[2] != q[2])
                out.emplace_back(x, y);
        }
    return out;
}

} // namespace

TEST_CASE("demo page renders deterministically") {
    PageSpec spec = PageSpec::demo();
    RenderedPage a = render_page(spec);
    RenderedPage b = render_page(spec);
    CHECK(a.trusted.same_pixels(b.trusted));
    CHECK(a.trusted.width() == 480);
    CHECK(a.trusted.height() == 320);

    REQUIRE(a.breakdown.regions.size() == 9);
    CHECK(a.breakdown.regions.front().id == "logo");
    CHECK(a.breakdown.regions.front().kind == RegionKind::graphical);
    CHECK(a.breakdown.regions.back().id == "submit");
    CHECK(a.breakdown.regions.back().kind == RegionKind::textual);
    CHECK(a.breakdown.find("amount")->kind == RegionKind::input);
    CHECK(a.breakdown.submit_button.w == 96);

    // every region sits inside the viewport
    Rect vp{0, 0, 480, 320};
    for (const auto& r : a.breakdown.regions) {
        CHECK(vp.contains(r.rect.x, r.rect.y));
        CHECK(r.rect.right() <= vp.right());
        CHECK(r.rect.bottom() <= vp.bottom());
    }
}

TEST_CASE("word ink boxes line up with detected text") {
    PageSpec spec = PageSpec::demo();
    RenderedPage page = render_page(spec);

    for (const auto& [id, words] : page.word_boxes) {
        const Region* reg = page.breakdown.find(id);
        REQUIRE(reg != nullptr);
        for (const auto& wbox : words) {
            CHECK(wbox.x >= reg->rect.x);
            CHECK(wbox.y >= reg->rect.y);
            CHECK(wbox.right() <= reg->rect.right());
            CHECK(wbox.bottom() <= reg->rect.bottom());
        }

        std::vector<Rect> found = detect_text_boxes(crop(page.trusted, reg->rect));
        REQUIRE(found.size() == words.size());
        std::sort(found.begin(), found.end(), [](const Rect& a, const Rect& b) { return a.x < b.x; });
        std::vector<Rect> expect = words;
        std::sort(expect.begin(), expect.end(),
                  [](const Rect& a, const Rect& b) { return a.x < b.x; });
        for (size_t i = 0; i < found.size(); ++i) {
            Rect abs{found[i].x + reg->rect.x, found[i].y + reg->rect.y, found[i].w, found[i].h};
            CHECK(rect_near(abs, expect[i], 2));
        }
    }
}

TEST_CASE("random scripts replay to the oracle") {
    PageSpec spec = PageSpec::demo();
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        CAPTURE(seed);
        SessionScript sc = random_script(spec, seed);
        auto oracle = oracle_extract(spec, sc);
        BuiltSession b = script_to_session(spec, sc);

        CHECK(b.oracle == oracle);
        REQUIRE(b.request.pairs.size() == spec.inputs.size());
        for (const auto& [label, value] : b.request.pairs) {
            bool matched = false;
            for (const auto& [id, lv] : oracle)
                if (lv.first == label && lv.second == value)
                    matched = true;
            CHECK(matched);
        }
        bool any_value = false;
        for (const auto& [id, lv] : oracle)
            any_value |= !lv.second.empty();
        CHECK(any_value);

        REQUIRE(!b.frames.empty());
        CHECK(b.frames.front().t_ms() == 0);
        CHECK(b.states.size() == b.frames.size());
        for (size_t i = 1; i < b.frames.size(); ++i)
            CHECK(b.frames[i].t_ms() > b.frames[i - 1].t_ms());
        for (size_t i = 1; i < b.hid.size(); ++i)
            CHECK(b.hid[i].t_ms >= b.hid[i - 1].t_ms);

        REQUIRE(!b.hid.empty());
        const HidEvent& last = b.hid.back();
        CHECK(last.action == HidAction::click);
        CHECK(last.x == spec.submit.rect.cx());
        CHECK(last.y == spec.submit.rect.cy());
        CHECK(b.manifest.start_t_ms == 0);
        CHECK(b.manifest.end_t_ms == last.t_ms + 50);

        // each value transition is logged as an edit at the frame's time
        std::vector<std::pair<std::int64_t, std::string>> transitions;
        for (size_t i = 1; i < b.states.size(); ++i) {
            if (b.states[i].values == b.states[i - 1].values)
                continue;
            for (const auto& [id, v] : b.states[i].values)
                if (b.states[i - 1].values.at(id) != v)
                    transitions.emplace_back(b.frames[i].t_ms(), id);
        }
        CHECK(transitions == b.edit_times);
    }
}

TEST_CASE("prefilled sessions show values from the first frame") {
    BuiltSession b = make_prefilled_session(PageSpec::demo());
    CHECK(b.scenario == "prefilled");
    CHECK(b.expect == "rejected");
    REQUIRE(b.frames.size() == 1);
    CHECK(b.frames[0].t_ms() == 0);

    OcrFn ocr = masking_ocr();
    for (const auto& [id, lv] : b.oracle) {
        const Region* reg = b.page.breakdown.find(id);
        REQUIRE(reg != nullptr);
        OcrResult r = ocr(crop(b.frames[0], reg->rect));
        CHECK(normalize_text(r.text) == lv.second);
        CHECK(lv.second.size() == 3);
    }

    REQUIRE(b.hid.size() == 1);
    CHECK(b.hid[0].action == HidAction::click);
    CHECK(b.hid[0].x == b.spec.submit.rect.cx());
    CHECK(b.manifest.end_t_ms > b.hid[0].t_ms);
}

TEST_CASE("perturbation stays inside every detector band") {
    BuiltSession base = build_scenario("benign", 17);
    BuiltSession pert = base;
    perturb_benign(pert, PerturbOptions{1.0, 99});

    REQUIRE(pert.frames.size() == base.frames.size());
    CHECK(pert.page.trusted.same_pixels(base.page.trusted));
    CHECK(pert.hid.size() == base.hid.size());

    bool any_change = false;
    OcrFn ocr = masking_ocr();
    const PageBreakdown& bd = base.page.breakdown;

    for (size_t i = 0; i < base.frames.size(); ++i) {
        CAPTURE(i);
        const Frame& f0 = base.frames[i];
        const Frame& f1 = pert.frames[i];
        CHECK(f1.t_ms() == f0.t_ms());
        any_change |= !f1.same_pixels(f0);

        PofOutcome p0 = detect_pof(f0, bd, ocr);
        PofOutcome p1 = detect_pof(f1, bd, ocr);
        CHECK(p1.violations.empty());
        CHECK(p0.state == p1.state);

        for (const auto& reg : bd.regions) {
            if (reg.kind != RegionKind::input)
                continue;
            // binarized value pixels survive the jitter byte for byte
            GrayImage g0 = preprocess_for_ocr(mask_pof_colors(crop(f0, reg.rect)));
            GrayImage g1 = preprocess_for_ocr(mask_pof_colors(crop(f1, reg.rect)));
            CHECK(g0.px == g1.px);

            // per-pixel drift keeps a wide margin below the comparison bands
            for (int y = reg.rect.y; y < reg.rect.bottom(); ++y)
                for (int x = reg.rect.x; x < reg.rect.right(); ++x) {
                    const std::uint8_t *p = f0.at(x, y), *q = f1.at(x, y);
                    HsvPixel a = rgb_to_hsv(p[0], p[1], p[2]);
                    HsvPixel b = rgb_to_hsv(q[0], q[1], q[2]);
                    CHECK(hue_distance(a.h, b.h) <= 49.0);
                    CHECK(std::abs(a.s - b.s) <= 0.14);
                    CHECK(std::abs(a.v - b.v) <= 0.14);
                }
        }
    }
    CHECK(any_change);

    // seeded reproducibility
    BuiltSession again = base;
    perturb_benign(again, PerturbOptions{1.0, 99});
    for (size_t i = 0; i < pert.frames.size(); ++i)
        CHECK(again.frames[i].same_pixels(pert.frames[i]));
    BuiltSession other = base;
    perturb_benign(other, PerturbOptions{1.0, 100});
    bool differs = false;
    for (size_t i = 0; i < pert.frames.size(); ++i)
        differs |= !other.frames[i].same_pixels(pert.frames[i]);
    CHECK(differs);
}

TEST_CASE("scenario builder covers every attack variant") {
    const std::uint64_t seed = 42;
    BuiltSession benign = build_scenario("benign", seed);
    CHECK(benign.expect == "intended");
    CHECK(benign.attack_info.is_null());

    SUBCASE("min_tamper confines its edit to one text region") {
        BuiltSession b = build_scenario("min_tamper", seed);
        CHECK(b.expect == "rejected");
        CHECK(b.attack_info.at("variant") == "min_tamper");
        REQUIRE(b.frames.size() == benign.frames.size());

        const Region* account = b.page.breakdown.find("account");
        REQUIRE(account != nullptr);
        CHECK(b.attack_info.at("region") == "account");
        for (size_t i = 0; i < b.frames.size(); ++i) {
            auto diffs = diff_pixels(b.frames[i], benign.frames[i]);
            CHECK(!diffs.empty());
            for (const auto& [x, y] : diffs)
                CHECK(account->rect.contains(x, y));
        }
    }
    SUBCASE("context_hide rewrites the chrome") {
        BuiltSession b = build_scenario("context_hide", seed);
        CHECK(b.expect == "rejected");
        CHECK(b.attack_info.at("variant") == "context_hide");
        REQUIRE(b.frames.size() == benign.frames.size());
        // the logo is gone from every frame
        const Region* logo = b.page.breakdown.find("logo");
        auto diffs = diff_pixels(b.frames[0], benign.frames[0]);
        bool logo_touched = false;
        for (const auto& [x, y] : diffs)
            logo_touched |= logo->rect.contains(x, y);
        CHECK(logo_touched);
    }
    SUBCASE("host_tamper_hidden keeps the honest request") {
        BuiltSession b = build_scenario("host_tamper_hidden", seed);
        CHECK(b.expect == "rejected");
        CHECK(b.attack_info.at("stage") == "gate");
        std::string field = b.attack_info.at("field");
        REQUIRE(b.oracle.count(field) == 1);
        // request still carries the oracle's value for the tampered field
        const auto& lv = b.oracle.at(field);
        bool present = false;
        for (const auto& [label, value] : b.request.pairs)
            present |= label == lv.first && value == lv.second;
        CHECK(present);
        // but the last frame renders one char fewer
        const Region* reg = b.page.breakdown.find(field);
        OcrResult shown = masking_ocr()(crop(b.frames.back(), reg->rect));
        CHECK(normalize_text(shown.text).size() + 1 == lv.second.size());
    }
    SUBCASE("host_tamper_ghost adds a frame with no input event") {
        BuiltSession b = build_scenario("host_tamper_ghost", seed);
        CHECK(b.expect == "rejected");
        std::int64_t t_ghost = b.attack_info.at("t_ms").get<std::int64_t>();
        bool found = false;
        for (const auto& f : b.frames)
            found |= f.t_ms() == t_ghost;
        CHECK(found);
        CHECK(!correlate_hid(t_ghost, b.hid, 1000.0));
    }
    SUBCASE("host_tamper_nonpof grows an unfocused field") {
        BuiltSession b = build_scenario("host_tamper_nonpof", seed);
        CHECK(b.expect == "rejected");
        CHECK(b.attack_info.at("variant") == "host_tamper_nonpof");
        CHECK(b.attack_info.contains("field"));
        CHECK(b.attack_info.contains("from_t"));
    }
    SUBCASE("temporal flashes a popup and restores the page") {
        BuiltSession b = build_scenario("temporal", seed);
        CHECK(b.expect == "rejected");
        std::int64_t t0 = b.attack_info.at("t0").get<std::int64_t>();
        std::int64_t dur = b.attack_info.at("duration").get<std::int64_t>();
        CHECK(dur >= 600);

        size_t popup_i = b.frames.size(), restore_i = b.frames.size();
        for (size_t i = 0; i < b.frames.size(); ++i) {
            if (b.frames[i].t_ms() == t0)
                popup_i = i;
            if (b.frames[i].t_ms() >= t0 + dur && restore_i == b.frames.size())
                restore_i = i;
        }
        REQUIRE(popup_i < b.frames.size());
        REQUIRE(restore_i < b.frames.size());
        REQUIRE(popup_i > 0);
        CHECK(b.frames[restore_i].t_ms() <= t0 + dur + 1);
        CHECK(!b.frames[popup_i].same_pixels(b.frames[popup_i - 1]));

        // the popup stays clear of every declared region
        auto rect = b.attack_info.at("rect");
        Rect popup{rect[0].get<int>(), rect[1].get<int>(), rect[2].get<int>(), rect[3].get<int>()};
        for (const auto& reg : b.page.breakdown.regions)
            CHECK(!popup.intersects(reg.rect));

        // off window the popup area is bare page background; on window every
        // recorded frame shows the overlay
        auto popup_visible = [&](const Frame& f) {
            Frame c = crop(f, popup);
            for (int y = 0; y < c.height(); ++y)
                for (int x = 0; x < c.width(); ++x) {
                    const auto* p = c.at(x, y);
                    if (p[0] != 255 || p[1] != 255 || p[2] != 255)
                        return true;
                }
            return false;
        };
        for (const auto& f : b.frames) {
            bool in_window = f.t_ms() >= t0 && f.t_ms() < t0 + dur;
            CHECK(popup_visible(f) == in_window);
        }
    }
    SUBCASE("unknown variants are refused") {
        BuiltSession b = build_scenario("benign", 1);
        AttackSpec spec;
        spec.variant = "nonsense";
        CHECK_THROWS_AS(inject_attack(b, spec), std::invalid_argument);
    }
}

TEST_CASE("session directories round trip through the loader") {
    BuiltSession b = build_scenario("benign", 5, 0.5);

    for (bool png : {true, false}) {
        CAPTURE(png);
        auto dir = fresh_dir(png ? "roundtrip_png" : "roundtrip_raw");
        auto manifest_path = write_session_dir(b, dir, png);
        CHECK(manifest_path.filename() == "manifest.json");

        SessionData d = load_session(manifest_path);
        REQUIRE(d.frames.size() == b.frames.size());
        for (size_t i = 0; i < d.frames.size(); ++i) {
            CHECK(d.frames[i].same_pixels(b.frames[i]));
            CHECK(d.frames[i].t_ms() == b.frames[i].t_ms());
        }
        CHECK(d.trusted.same_pixels(b.page.trusted));
        REQUIRE(d.hid.size() == b.hid.size());
        for (size_t i = 0; i < d.hid.size(); ++i) {
            CHECK(d.hid[i].t_ms == b.hid[i].t_ms);
            CHECK(d.hid[i].action == b.hid[i].action);
        }
        CHECK(d.breakdown.regions.size() == b.page.breakdown.regions.size());
        CHECK(d.manifest.start_t_ms == b.manifest.start_t_ms);
        CHECK(d.manifest.end_t_ms == b.manifest.end_t_ms);
        CHECK(d.rendering.width == 480);

        Request req = parse_request(slurp(dir / "request.txt"));
        CHECK(req.pairs == b.request.pairs);

        auto truth = nlohmann::json::parse(slurp(dir / "ground_truth.json"));
        CHECK(truth.at("scenario") == "benign");
        CHECK(truth.at("expect") == "intended");
        CHECK(truth.at("final_inputs").size() == b.oracle.size());
    }
}
