#include "doctest.h"

#include "uiattest/fixtures.hpp"
#include "uiattest/ocr.hpp"
#include "uiattest/pof.hpp"

#include <algorithm>
#include <string>

using namespace uiattest;

namespace {

// Extraction-style recognizer: indicator colors whited out before OCR,
// same as the engine wires it up.
OcrFn masking_ocr() {
    auto eng = make_ocr_engine("reference");
    return [eng](const Frame& crop) { return eng->recognize(preprocess_for_ocr(mask_pof_colors(crop))); };
}

void paint_ring(Frame& f, const Rect& rect, int d_lo, int d_hi, const std::uint8_t rgb[3]) {
    for (int y = rect.y - d_hi; y < rect.bottom() + d_hi; ++y)
        for (int x = rect.x - d_hi; x < rect.right() + d_hi; ++x) {
            if (x < 0 || y < 0 || x >= f.width() || y >= f.height())
                continue;
            int dx = std::max({rect.x - x, 0, x - (rect.right() - 1)});
            int dy = std::max({rect.y - y, 0, y - (rect.bottom() - 1)});
            int d = std::max(dx, dy);
            if (d >= d_lo && d <= d_hi)
                f.set(x, y, rgb[0], rgb[1], rgb[2]);
        }
}

void paint_bar(Frame& f, int x0, int w, int y0, int y1, const std::uint8_t rgb[3]) {
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x0 + w; ++x)
            f.set(x, y, rgb[0], rgb[1], rgb[2]);
}

bool has_violation(const PofOutcome& out, const std::string& needle) {
    return std::any_of(out.violations.begin(), out.violations.end(), [&](const PofViolation& v) {
        return v.detail.find(needle) != std::string::npos;
    });
}

} // namespace

TEST_CASE("unfocused page carries no indicators") {
    PageSpec spec = PageSpec::demo();
    RenderedPage page = render_page(spec);
    PageState st;
    st.values["amount"] = "42";
    Frame f = render_state(spec, st);
    PofOutcome out = detect_pof(f, page.breakdown, masking_ocr());
    CHECK(!out.state.focus.has_value());
    CHECK(!out.state.caret.has_value());
    CHECK(!out.state.selection.has_value());
    CHECK(out.violations.empty());
}

TEST_CASE("focus ring and caret read back with the right column") {
    PageSpec spec = PageSpec::demo();
    RenderedPage page = render_page(spec);
    OcrFn ocr = masking_ocr();

    PageState st;
    st.values["amount"] = "123";
    st.focus = "amount";

    SUBCASE("caret mid-value") {
        st.caret = 2;
        PofOutcome out = detect_pof(render_state(spec, st), page.breakdown, ocr);
        REQUIRE(out.state.focus.has_value());
        CHECK(*out.state.focus == "amount");
        REQUIRE(out.state.caret.has_value());
        CHECK(out.state.caret->region == "amount");
        CHECK(out.state.caret->column == 2);
        CHECK(out.state.caret->x_px == 3 + 8 * 2);
        CHECK(!out.state.selection.has_value());
        CHECK(out.violations.empty());
    }
    SUBCASE("caret past the last glyph") {
        st.caret = 3;
        PofOutcome out = detect_pof(render_state(spec, st), page.breakdown, ocr);
        REQUIRE(out.state.caret.has_value());
        CHECK(out.state.caret->column == 3);
        CHECK(out.violations.empty());
    }
    SUBCASE("caret in an empty field") {
        st.values["amount"] = "";
        st.caret = 0;
        PofOutcome out = detect_pof(render_state(spec, st), page.breakdown, ocr);
        REQUIRE(out.state.focus.has_value());
        REQUIRE(out.state.caret.has_value());
        CHECK(out.state.caret->column == 0);
        CHECK(out.violations.empty());
    }
}

TEST_CASE("selection run maps onto glyph columns") {
    PageSpec spec = PageSpec::demo();
    RenderedPage page = render_page(spec);
    PageState st;
    st.values["to"] = "HELLO";
    st.focus = "to";
    st.caret = 4;
    st.selection = std::pair<int, int>{1, 4};
    PofOutcome out = detect_pof(render_state(spec, st), page.breakdown, masking_ocr());
    REQUIRE(out.state.focus.has_value());
    CHECK(*out.state.focus == "to");
    REQUIRE(out.state.selection.has_value());
    CHECK(out.state.selection->region == "to");
    CHECK(out.state.selection->col_a == 1);
    CHECK(out.state.selection->col_b == 4);
    // the renderer suppresses the caret while a selection is visible
    CHECK(!out.state.caret.has_value());
    CHECK(out.violations.empty());
}

TEST_CASE("caret_column snaps to box edges") {
    OcrResult value;
    for (int k = 0; k < 4; ++k)
        value.char_boxes.push_back(Rect{3 + 8 * k, 3, 8, 14});

    CHECK(caret_column(3, value) == 0);
    CHECK(caret_column(6, value) == 0);   // within half a char of box 0's left edge
    CHECK(caret_column(11, value) == 1);
    CHECK(caret_column(18, value) == 2);  // 1px short of the exact edge
    CHECK(caret_column(35, value) == 4);  // right edge of the last box
    CHECK(caret_column(0, OcrResult{}) == 0);

    // wide boxes exercise the center fallback
    OcrResult wide;
    wide.char_boxes.push_back(Rect{0, 0, 20, 14});
    CHECK(caret_column(15, wide) == 1);
}

TEST_CASE("mask_pof_colors wipes indicator pixels only") {
    Frame f = Frame::solid(20, 10, 255, 255, 255);
    PofStyle st;
    paint_bar(f, 2, 2, 1, 9, st.caret_rgb);
    paint_bar(f, 8, 6, 1, 9, st.selection_rgb);
    f.set(10, 4, 0, 0, 0); // glyph ink inside the selection
    f.set(16, 2, 0, 0, 0);

    Frame masked = mask_pof_colors(f);
    const std::uint8_t* caret_px = masked.at(2, 3);
    CHECK(caret_px[0] == 255);
    CHECK(caret_px[1] == 255);
    CHECK(caret_px[2] == 255);
    const std::uint8_t* sel_px = masked.at(9, 5);
    CHECK(sel_px[0] == 255);
    const std::uint8_t* ink = masked.at(10, 4);
    CHECK(ink[0] == 0);
    const std::uint8_t* ink2 = masked.at(16, 2);
    CHECK(ink2[0] == 0);
}

TEST_CASE("indicator anomalies surface as violations") {
    PageSpec spec = PageSpec::demo();
    RenderedPage page = render_page(spec);
    OcrFn ocr = masking_ocr();
    PofStyle style;
    const Rect amount = page.breakdown.find("amount")->rect;
    const Rect to = page.breakdown.find("to")->rect;

    SUBCASE("two focus rings") {
        PageState st;
        st.focus = "amount";
        st.caret = 0;
        Frame f = render_state(spec, st);
        paint_ring(f, to, 1, style.ring_px, style.focus_rgb);
        PofOutcome out = detect_pof(f, page.breakdown, ocr);
        CHECK(has_violation(out, "multiple focus rings"));
    }
    SUBCASE("caret without a focus ring") {
        Frame f = render_state(spec, PageState{});
        paint_bar(f, amount.x + 10, 2, amount.y + 2, amount.bottom() - 2, style.caret_rgb);
        PofOutcome out = detect_pof(f, page.breakdown, ocr);
        CHECK(has_violation(out, "caret outside the focused region"));
    }
    SUBCASE("caret bar too wide") {
        PageState st;
        st.focus = "amount";
        st.caret = 0;
        Frame f = render_state(spec, st);
        paint_bar(f, amount.x + 40, 6, amount.y + 2, amount.bottom() - 2, style.caret_rgb);
        PofOutcome out = detect_pof(f, page.breakdown, ocr);
        CHECK(has_violation(out, "malformed caret mark"));
    }
    SUBCASE("selection sliver") {
        PageState st;
        st.focus = "amount";
        st.caret = 0;
        Frame f = render_state(spec, st);
        paint_bar(f, amount.x + 40, 2, amount.y + 2, amount.bottom() - 2, style.selection_rgb);
        PofOutcome out = detect_pof(f, page.breakdown, ocr);
        CHECK(has_violation(out, "malformed selection mark"));
    }
    SUBCASE("caret drawn inside a selection") {
        PageState st;
        st.values["to"] = "ABCD";
        st.focus = "to";
        st.caret = 3;
        st.selection = std::pair<int, int>{0, 3};
        Frame f = render_state(spec, st);
        paint_bar(f, to.x + 60, 2, to.y + 2, to.bottom() - 2, style.caret_rgb);
        PofOutcome out = detect_pof(f, page.breakdown, ocr);
        CHECK(has_violation(out, "caret drawn inside a selection"));
    }
    SUBCASE("partial focus ring") {
        Frame f = render_state(spec, PageState{});
        for (int y = amount.y - 3; y < amount.y; ++y)
            for (int x = amount.x - 3; x < amount.right() + 3; ++x)
                f.set(x, y, style.focus_rgb[0], style.focus_rgb[1], style.focus_rgb[2]);
        PofOutcome out = detect_pof(f, page.breakdown, ocr);
        CHECK(has_violation(out, "partial focus ring"));
        CHECK(!out.state.focus.has_value());
    }
}

TEST_CASE("scripted session frames read back their own states") {
    PageSpec spec = PageSpec::demo();
    RenderedPage page = render_page(spec);
    OcrFn ocr = masking_ocr();

    SessionScript script;
    script.actions.push_back({ActionKind::focus, "amount", "", 0, 0, 1, 300, 150});
    script.actions.push_back({ActionKind::type_text, "amount", "77", 0, 0, 1, 250, 150});
    script.actions.push_back({ActionKind::select, "amount", "", 0, 1, 1, 400, 150});
    script.actions.push_back({ActionKind::submit, "", "", 0, 0, 1, 900, 150});
    BuiltSession b = script_to_session(spec, script);
    REQUIRE(b.frames.size() == b.states.size());
    REQUIRE(b.frames.size() > 2);

    for (size_t i = 0; i < b.frames.size(); ++i) {
        const PageState& st = b.states[i];
        PofOutcome out = detect_pof(b.frames[i], page.breakdown, ocr);
        CHECK(out.violations.empty());
        CHECK(out.state.focus == st.focus);
        if (st.selection) {
            REQUIRE(out.state.selection.has_value());
            CHECK(out.state.selection->col_a == st.selection->first);
            CHECK(out.state.selection->col_b == st.selection->second);
            CHECK(!out.state.caret.has_value());
        } else if (st.caret) {
            REQUIRE(out.state.caret.has_value());
            CHECK(out.state.caret->column == *st.caret);
            CHECK(!out.state.selection.has_value());
        } else {
            CHECK(!out.state.caret.has_value());
            CHECK(!out.state.selection.has_value());
        }
    }
}
