#include "uiattest/fixtures.hpp"

#include "uiattest/errors.hpp"
#include "uiattest/font8x14.hpp"
#include "uiattest/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace uiattest {

namespace {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

void draw_text(Frame& f, int x, int y, const std::string& s,
               std::uint8_t r = 0, std::uint8_t g = 0, std::uint8_t b = 0) {
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c < 0x20 || c > 0x7e)
            continue;
        for (int gy = 0; gy < kFontCellH; ++gy)
            for (int gx = 0; gx < kFontCellW; ++gx) {
                if (!glyph_bit(c, gx, gy))
                    continue;
                int px = x + static_cast<int>(i) * kFontCellW + gx;
                int py = y + gy;
                if (px >= 0 && px < f.width() && py >= 0 && py < f.height())
                    f.set(px, py, r, g, b);
            }
    }
}

void fill_rect(Frame& f, const Rect& r, std::uint8_t cr, std::uint8_t cg, std::uint8_t cb) {
    Rect c = r.intersect(f.bounds());
    for (int y = c.y; y < c.bottom(); ++y)
        for (int x = c.x; x < c.right(); ++x)
            f.set(x, y, cr, cg, cb);
}

// Chebyshev ring outside rect, distances [d_lo, d_hi].
void draw_ring(Frame& f, const Rect& rect, int d_lo, int d_hi,
               std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    Rect outer = rect.inflated(d_hi, f.bounds());
    for (int y = outer.y; y < outer.bottom(); ++y)
        for (int x = outer.x; x < outer.right(); ++x) {
            int dx = std::max({rect.x - x, 0, x - (rect.right() - 1)});
            int dy = std::max({rect.y - y, 0, y - (rect.bottom() - 1)});
            int d = std::max(dx, dy);
            if (d >= d_lo && d <= d_hi)
                f.set(x, y, r, g, b);
        }
}

// Aperiodic tile art: distinct hues at least 60 degrees apart, luma varied
// per tile, so translation search has a unique lock.
void draw_art(Frame& f, const Rect& r, std::uint64_t seed) {
    constexpr int tile = 16;
    for (int ty = r.y; ty < r.bottom(); ty += tile)
        for (int tx = r.x; tx < r.right(); tx += tile) {
            std::uint64_t h = mix64(seed ^ mix64((static_cast<std::uint64_t>(tx) << 20) |
                                                 static_cast<std::uint64_t>(ty)));
            double hue = 10.0 + 60.0 * static_cast<double>(h % 6);
            double sat = 0.60 + 0.35 * static_cast<double>((h >> 8) % 100) / 99.0;
            double val = 0.55 + 0.40 * static_cast<double>((h >> 16) % 100) / 99.0;
            std::uint8_t cr, cg, cb;
            hsv_to_rgb(hue, sat, val, cr, cg, cb);
            Rect t{tx, ty, std::min(tile, r.right() - tx), std::min(tile, r.bottom() - ty)};
            fill_rect(f, t, cr, cg, cb);
        }
}

constexpr int kInputPad = 3; // text inset inside the input rect

std::vector<Rect> word_ink_boxes(int x, int y, const std::string& s) {
    std::vector<Rect> out;
    size_t i = 0;
    while (i < s.size()) {
        if (s[i] == ' ') {
            ++i;
            continue;
        }
        size_t j = i;
        int x0 = 1 << 30, x1 = -1, y0 = 1 << 30, y1 = -1;
        while (j < s.size() && s[j] != ' ') {
            for (int gy = 0; gy < kFontCellH; ++gy)
                for (int gx = 0; gx < kFontCellW; ++gx)
                    if (glyph_bit(s[j], gx, gy)) {
                        int px = x + static_cast<int>(j) * kFontCellW + gx;
                        int py = y + gy;
                        x0 = std::min(x0, px); x1 = std::max(x1, px);
                        y0 = std::min(y0, py); y1 = std::max(y1, py);
                    }
            ++j;
        }
        if (x1 >= 0)
            out.push_back(Rect{x0, y0, x1 - x0 + 1, y1 - y0 + 1});
        i = j;
    }
    return out;
}

Rect text_region_rect(const PageText& t) {
    return Rect{t.x - 4, t.y - 4, kFontCellW * static_cast<int>(t.text.size()) + 8,
                kFontCellH + 8};
}

void draw_page_chrome(Frame& f, const PageSpec& spec) {
    fill_rect(f, f.bounds(), 255, 255, 255);
    for (const auto& img : spec.images)
        draw_art(f, img.rect, img.art_seed);
    for (const auto& t : spec.texts)
        draw_text(f, t.x, t.y, t.text);
    fill_rect(f, spec.submit.rect, 210, 210, 210);
    int bx = spec.submit.rect.x +
             (spec.submit.rect.w - kFontCellW * static_cast<int>(spec.submit.text.size())) / 2;
    int by = spec.submit.rect.y + (spec.submit.rect.h - kFontCellH) / 2;
    draw_text(f, bx, by, spec.submit.text);
}

} // namespace

const PageInput* PageSpec::input(const std::string& id) const {
    for (const auto& i : inputs)
        if (i.id == id)
            return &i;
    return nullptr;
}

PageSpec PageSpec::demo() {
    PageSpec s;
    s.page_id = "payment-demo";
    s.viewport_w = 480;
    s.viewport_h = 320;
    s.images.push_back({"logo", Rect{16, 12, 120, 64}, 0xA11CEull});
    s.texts.push_back({"title", 160, 24, "Payment Portal"});
    s.texts.push_back({"account", 160, 48, "Account 8003 1421"});
    s.texts.push_back({"info", 24, 96, "Check the details before sending"});
    s.texts.push_back({"amount_label", 24, 140, "Amount"});
    s.texts.push_back({"to_label", 24, 180, "To"});
    s.inputs.push_back({"amount", Rect{116, 134, 102, 20}, "Amount", "0123456789", 12});
    s.inputs.push_back({"to", Rect{116, 174, 134, 20}, "To",
                        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789", 16});
    s.submit = {"submit", Rect{116, 220, 96, 28}, "Submit"};
    return s;
}

RenderedPage render_page(const PageSpec& spec) {
    RenderedPage page;
    page.rendering = {spec.viewport_w, spec.viewport_h};
    page.trusted = Frame(spec.viewport_w, spec.viewport_h);
    draw_page_chrome(page.trusted, spec);
    // empty unfocused inputs
    for (const auto& in : spec.inputs)
        draw_ring(page.trusted, in.rect, 1, 1, 80, 80, 80);

    PageBreakdown& bd = page.breakdown;
    bd.page_id = spec.page_id;
    bd.viewport_w = spec.viewport_w;
    bd.viewport_h = spec.viewport_h;
    for (const auto& img : spec.images)
        bd.regions.push_back({img.id, RegionKind::graphical, img.rect, std::nullopt});
    for (const auto& t : spec.texts) {
        bd.regions.push_back({t.id, RegionKind::textual, text_region_rect(t), std::nullopt});
        page.word_boxes[t.id] = word_ink_boxes(t.x, t.y, t.text);
    }
    for (const auto& in : spec.inputs)
        bd.regions.push_back({in.id, RegionKind::input, in.rect, std::nullopt});
    bd.regions.push_back({spec.submit.id, RegionKind::textual, spec.submit.rect, std::nullopt});
    bd.submit_button = spec.submit.rect;
    {
        int bx = spec.submit.rect.x +
                 (spec.submit.rect.w - kFontCellW * static_cast<int>(spec.submit.text.size())) / 2;
        int by = spec.submit.rect.y + (spec.submit.rect.h - kFontCellH) / 2;
        page.word_boxes[spec.submit.id] = word_ink_boxes(bx, by, spec.submit.text);
    }
    return page;
}

Frame render_state(const PageSpec& spec, const PageState& st, const PofStyle& style) {
    Frame f(spec.viewport_w, spec.viewport_h);
    draw_page_chrome(f, spec);
    for (const auto& in : spec.inputs) {
        bool focused = st.focus && *st.focus == in.id;
        if (focused)
            draw_ring(f, in.rect, 1, style.ring_px, style.focus_rgb[0], style.focus_rgb[1],
                      style.focus_rgb[2]);
        else
            draw_ring(f, in.rect, 1, 1, 80, 80, 80);

        auto vit = st.values.find(in.id);
        const std::string value = vit == st.values.end() ? std::string() : vit->second;
        int tx0 = in.rect.x + kInputPad;
        int ty0 = in.rect.y + (in.rect.h - kFontCellH) / 2;

        if (focused && st.selection && st.selection->first < st.selection->second) {
            auto [a, b] = *st.selection;
            Rect sel{tx0 + kFontCellW * a, in.rect.y + 2, kFontCellW * (b - a), in.rect.h - 4};
            fill_rect(f, sel, style.selection_rgb[0], style.selection_rgb[1],
                      style.selection_rgb[2]);
        }
        draw_text(f, tx0, ty0, value);
        if (focused && st.caret && !(st.selection && st.selection->first < st.selection->second)) {
            int cx = tx0 + kFontCellW * *st.caret;
            for (int y = in.rect.y + 2; y < in.rect.bottom() - 2; ++y)
                for (int x = cx - 1; x <= cx; ++x)
                    if (in.rect.contains(x, y))
                        f.set(x, y, style.caret_rgb[0], style.caret_rgb[1], style.caret_rgb[2]);
        }
    }
    return f;
}

namespace {

// One symbolic interpreter serves the oracle, the session builder and the
// script generator, so they can never disagree about what a script does.
struct Machine {
    const PageSpec& spec;
    PageState st;

    explicit Machine(const PageSpec& s) : spec(s) {
        for (const auto& in : s.inputs)
            st.values[in.id] = "";
    }

    std::string& val(const std::string& f) { return st.values.at(f); }

    void focus(const std::string& f) {
        if (!spec.input(f))
            throw std::invalid_argument("focus: unknown field " + f);
        st.focus = f;
        st.caret = static_cast<int>(val(f).size());
        st.selection.reset();
    }
    void require_focus(const std::string& f) {
        if (!st.focus || *st.focus != f)
            throw std::invalid_argument("action on unfocused field " + f);
    }
    void set_caret(const std::string& f, int col) {
        require_focus(f);
        if (col < 0 || col > static_cast<int>(val(f).size()))
            throw std::invalid_argument("caret out of range");
        st.caret = col;
        st.selection.reset();
    }
    void insert(const std::string& f, const std::string& text) {
        require_focus(f);
        auto& v = val(f);
        const PageInput* in = spec.input(f);
        if (v.size() + text.size() > static_cast<size_t>(in->max_chars))
            throw std::invalid_argument("field overflow in " + f);
        v.insert(static_cast<size_t>(*st.caret), text);
        *st.caret += static_cast<int>(text.size());
        st.selection.reset();
    }
    void select(const std::string& f, int a, int b) {
        require_focus(f);
        int n = static_cast<int>(val(f).size());
        if (!(0 <= a && a < b && b <= n))
            throw std::invalid_argument("bad selection span");
        st.selection = {a, b};
        st.caret = a;
    }
    void del_selection(const std::string& f) {
        require_focus(f);
        if (!st.selection)
            throw std::invalid_argument("no selection to delete");
        auto [a, b] = *st.selection;
        val(f).erase(static_cast<size_t>(a), static_cast<size_t>(b - a));
        st.caret = a;
        st.selection.reset();
    }
    void backspace(const std::string& f) {
        require_focus(f);
        if (*st.caret <= 0)
            throw std::invalid_argument("backspace at column 0");
        val(f).erase(static_cast<size_t>(*st.caret - 1), 1);
        --*st.caret;
        st.selection.reset();
    }
    void del_forward(const std::string& f) {
        require_focus(f);
        if (*st.caret >= static_cast<int>(val(f).size()))
            throw std::invalid_argument("delete past the end");
        val(f).erase(static_cast<size_t>(*st.caret), 1);
        st.selection.reset();
    }
};

} // namespace

std::map<std::string, std::pair<std::string, std::string>>
oracle_extract(const PageSpec& spec, const SessionScript& script) {
    Machine m(spec);
    for (const auto& a : script.actions) {
        switch (a.kind) {
        case ActionKind::focus: m.focus(a.field); break;
        case ActionKind::set_caret: m.set_caret(a.field, a.a); break;
        case ActionKind::type_text:
        case ActionKind::paste: m.insert(a.field, a.text); break;
        case ActionKind::select: m.select(a.field, a.a, a.b); break;
        case ActionKind::del_selection: m.del_selection(a.field); break;
        case ActionKind::backspace:
            for (int i = 0; i < a.count; ++i)
                m.backspace(a.field);
            break;
        case ActionKind::del_forward:
            for (int i = 0; i < a.count; ++i)
                m.del_forward(a.field);
            break;
        case ActionKind::idle:
        case ActionKind::submit: break;
        }
    }
    std::map<std::string, std::pair<std::string, std::string>> out;
    for (const auto& in : spec.inputs)
        out[in.id] = {in.label, m.st.values.at(in.id)};
    return out;
}

BuiltSession script_to_session(const PageSpec& spec, const SessionScript& script) {
    BuiltSession b;
    b.spec = spec;
    b.page = render_page(spec);

    Machine m(spec);
    std::int64_t t = 0;
    std::int64_t submit_t = -1;

    auto push_frame = [&](std::int64_t at) {
        b.frames.push_back(render_state(spec, m.st));
        b.frames.back().set_t_ms(at);
        b.states.push_back(m.st);
    };
    auto click_at = [&](std::int64_t at, int x, int y) {
        b.hid.push_back({at, HidDevice::mouse, HidAction::click, x, y});
    };
    auto key_at = [&](std::int64_t at) {
        b.hid.push_back({at, HidDevice::keyboard, HidAction::key, 0, 0});
    };
    auto caret_click_x = [&](const PageInput& in, int col) {
        return std::min(in.rect.x + kInputPad + kFontCellW * col, in.rect.right() - 1);
    };

    push_frame(0);

    for (const auto& a : script.actions) {
        t += std::max<std::int64_t>(a.gap_ms, 1);
        const PageInput* in = a.field.empty() ? nullptr : spec.input(a.field);
        switch (a.kind) {
        case ActionKind::focus: {
            m.focus(a.field);
            click_at(t, caret_click_x(*in, *m.st.caret), in->rect.cy());
            push_frame(t);
            break;
        }
        case ActionKind::set_caret: {
            m.set_caret(a.field, a.a);
            click_at(t, caret_click_x(*in, a.a), in->rect.cy());
            push_frame(t);
            break;
        }
        case ActionKind::type_text: {
            for (size_t i = 0; i < a.text.size(); ++i) {
                if (i)
                    t += std::max<std::int64_t>(a.char_ms, 1);
                m.insert(a.field, a.text.substr(i, 1));
                key_at(t);
                push_frame(t);
                b.edit_times.emplace_back(t, a.field);
            }
            break;
        }
        case ActionKind::paste: {
            m.insert(a.field, a.text);
            key_at(t);
            push_frame(t);
            b.edit_times.emplace_back(t, a.field);
            break;
        }
        case ActionKind::select: {
            m.set_caret(a.field, a.a);
            click_at(t, caret_click_x(*in, a.a), in->rect.cy());
            push_frame(t);
            t += 40;
            b.hid.push_back({t, HidDevice::mouse, HidAction::move,
                             caret_click_x(*in, a.b), in->rect.cy()});
            t += 40;
            m.select(a.field, a.a, a.b);
            click_at(t, caret_click_x(*in, a.b), in->rect.cy());
            push_frame(t);
            break;
        }
        case ActionKind::del_selection: {
            m.del_selection(a.field);
            key_at(t);
            push_frame(t);
            b.edit_times.emplace_back(t, a.field);
            break;
        }
        case ActionKind::backspace: {
            for (int i = 0; i < a.count; ++i) {
                if (i)
                    t += std::max<std::int64_t>(a.char_ms, 1);
                m.backspace(a.field);
                key_at(t);
                push_frame(t);
                b.edit_times.emplace_back(t, a.field);
            }
            break;
        }
        case ActionKind::del_forward: {
            for (int i = 0; i < a.count; ++i) {
                if (i)
                    t += std::max<std::int64_t>(a.char_ms, 1);
                m.del_forward(a.field);
                key_at(t);
                push_frame(t);
                b.edit_times.emplace_back(t, a.field);
            }
            break;
        }
        case ActionKind::idle:
            break;
        case ActionKind::submit: {
            click_at(t, spec.submit.rect.cx(), spec.submit.rect.cy());
            submit_t = t;
            break;
        }
        }
    }
    if (submit_t < 0)
        throw std::invalid_argument("script does not end with a submit click");

    b.manifest.start_t_ms = 0;
    b.manifest.end_t_ms = submit_t + 50;
    for (const auto& in : spec.inputs) {
        b.oracle[in.id] = {in.label, m.st.values.at(in.id)};
        b.request.pairs.emplace_back(in.label, m.st.values.at(in.id));
    }
    return b;
}

SessionScript random_script(const PageSpec& spec, std::uint64_t seed,
                            const ScriptGenOptions& opts) {
    std::mt19937_64 rng(mix64(seed ^ 0x5e5510ull));
    auto uni = [&](std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
    };

    SessionScript script;
    Machine m(spec); // legality tracking
    std::string focused;

    int bursts = static_cast<int>(uni(opts.min_bursts, opts.max_bursts));
    if (opts.ensure_two_fields && spec.inputs.size() >= 2)
        bursts = std::max(bursts, 2);

    auto add = [&](Action a) {
        script.actions.push_back(a);
        // replay on the machine to keep the generator honest
        switch (a.kind) {
        case ActionKind::focus: m.focus(a.field); break;
        case ActionKind::set_caret: m.set_caret(a.field, a.a); break;
        case ActionKind::type_text:
        case ActionKind::paste: m.insert(a.field, a.text); break;
        case ActionKind::select: m.select(a.field, a.a, a.b); break;
        case ActionKind::del_selection: m.del_selection(a.field); break;
        case ActionKind::backspace:
            for (int i = 0; i < a.count; ++i) m.backspace(a.field);
            break;
        case ActionKind::del_forward:
            for (int i = 0; i < a.count; ++i) m.del_forward(a.field);
            break;
        default: break;
        }
    };

    for (int bi = 0; bi < bursts; ++bi) {
        const PageInput& in =
            (opts.ensure_two_fields && bi < 2 && spec.inputs.size() >= 2)
                ? spec.inputs[bi]
                : spec.inputs[rng() % spec.inputs.size()];
        std::int64_t gap = uni(opts.burst_gap_lo, opts.burst_gap_hi);
        const std::string& value = m.st.values.at(in.id);

        if (focused != in.id) {
            add({ActionKind::focus, in.id, "", 0, 0, 1, gap, opts.char_ms});
            focused = in.id;
        } else {
            int col = static_cast<int>(uni(0, static_cast<std::int64_t>(value.size())));
            add({ActionKind::set_caret, in.id, "", col, 0, 1, gap, opts.char_ms});
        }

        const std::string& v = m.st.values.at(in.id);
        int len = static_cast<int>(v.size());
        int caret = *m.st.caret;
        int room = in.max_chars - len;
        int kind = static_cast<int>(uni(0, 99));
        std::int64_t egap = uni(200, 400);

        auto random_text = [&](int n) {
            std::string s;
            for (int i = 0; i < n; ++i)
                s += in.charset[rng() % in.charset.size()];
            return s;
        };

        if (kind < 45 && room > 0) {
            add({ActionKind::type_text, in.id, random_text(static_cast<int>(uni(1, std::min(6, room)))),
                 0, 0, 1, egap, opts.char_ms});
        } else if (kind < 65 && room >= 3) {
            add({ActionKind::paste, in.id, random_text(static_cast<int>(uni(3, std::min(8, room)))),
                 0, 0, 1, egap, opts.char_ms});
        } else if (kind < 80 && len >= 1) {
            int a = static_cast<int>(uni(0, len - 1));
            int b = static_cast<int>(uni(a + 1, len));
            add({ActionKind::select, in.id, "", a, b, 1, egap, opts.char_ms});
            add({ActionKind::del_selection, in.id, "", 0, 0, 1, uni(200, 350), opts.char_ms});
        } else if (kind < 92 && caret > 0) {
            add({ActionKind::backspace, in.id, "", 0, 0,
                 static_cast<int>(uni(1, std::min(2, caret))), egap, opts.char_ms});
        } else if (caret < len) {
            add({ActionKind::del_forward, in.id, "", 0, 0, 1, egap, opts.char_ms});
        } else if (room > 0) {
            add({ActionKind::type_text, in.id, random_text(1), 0, 0, 1, egap, opts.char_ms});
        }
    }

    // make sure the session says something
    bool any_value = false;
    for (const auto& [id, v] : m.st.values)
        any_value = any_value || !v.empty();
    if (!any_value) {
        const PageInput& in = spec.inputs.front();
        if (focused != in.id)
            add({ActionKind::focus, in.id, "", 0, 0, 1, uni(opts.burst_gap_lo, opts.burst_gap_hi),
                 opts.char_ms});
        add({ActionKind::type_text, in.id, std::string(1, in.charset[rng() % in.charset.size()]),
             0, 0, 1, 250, opts.char_ms});
    }

    script.actions.push_back({ActionKind::submit, "", "", 0, 0, 1, opts.presubmit_idle, 0});
    return script;
}

namespace {

double unit(std::mt19937_64& r) {
    return static_cast<double>(r() >> 11) * (1.0 / 9007199254740992.0); // [0,1)
}
double sym(std::mt19937_64& r, double m) { return (unit(r) * 2.0 - 1.0) * m; }

} // namespace

void perturb_benign(BuiltSession& s, const PerturbOptions& opts) {
    const double mag = opts.magnitude;
    std::mt19937_64 rng(mix64(opts.seed ^ 0xbe419ull));
    PofStyle style;

    // per-session translation of non-input regions, inside the alignment bound
    struct RegShift {
        Rect rect;
        int dx = 0, dy = 0;
    };
    std::vector<RegShift> shifts;
    for (const auto& reg : s.page.breakdown.regions) {
        if (reg.kind == RegionKind::input)
            continue;
        int bound = alignment_bound(reg.rect.w, reg.rect.h);
        int cap = reg.kind == RegionKind::textual ? 3 : 6;
        int m = std::min(bound - 1, static_cast<int>(std::floor(cap * mag)));
        if (m <= 0)
            continue;
        int dx = static_cast<int>(rng() % (2 * m + 1)) - m;
        int dy = static_cast<int>(rng() % (2 * m + 1)) - m;
        if (dx || dy)
            shifts.push_back({reg.rect, dx, dy});
    }

    for (size_t fi = 0; fi < s.frames.size(); ++fi) {
        Frame& f = s.frames[fi];
        const Rect bounds = f.bounds();

        // shift pass: erase everything first, then blit, so overlapping
        // inflations only trade white margin pixels
        std::vector<Frame> crops;
        crops.reserve(shifts.size());
        for (const auto& sh : shifts)
            crops.push_back(crop(f, sh.rect));
        for (const auto& sh : shifts)
            fill_rect(f, sh.rect, 255, 255, 255);
        for (size_t si = 0; si < shifts.size(); ++si) {
            const auto& sh = shifts[si];
            const Frame& c = crops[si];
            for (int y = 0; y < c.height(); ++y)
                for (int x = 0; x < c.width(); ++x) {
                    int px = sh.rect.x + sh.dx + x, py = sh.rect.y + sh.dy + y;
                    if (bounds.contains(px, py)) {
                        const auto* p = c.at(x, y);
                        f.set(px, py, p[0], p[1], p[2]);
                    }
                }
        }

        // glyph antialias candidates: bright pixels touching ink, pre-jitter
        std::vector<std::uint8_t> edge(static_cast<size_t>(f.width()) * f.height(), 0);
        for (int y = 0; y < f.height(); ++y)
            for (int x = 0; x < f.width(); ++x) {
                const auto* p = f.at(x, y);
                if (luma(p[0], p[1], p[2]) <= 200.0)
                    continue;
                bool near_ink = false;
                for (int dy = -1; dy <= 1 && !near_ink; ++dy)
                    for (int dx = -1; dx <= 1 && !near_ink; ++dx) {
                        int nx = x + dx, ny = y + dy;
                        if ((dx || dy) && bounds.contains(nx, ny)) {
                            const auto* q = f.at(nx, ny);
                            near_ink = luma(q[0], q[1], q[2]) < 100.0;
                        }
                    }
                if (near_ink)
                    edge[static_cast<size_t>(y) * f.width() + x] = 1;
            }

        std::mt19937_64 frng(mix64(opts.seed ^ mix64(0xf00dull + fi)));
        for (int y = 0; y < f.height(); ++y)
            for (int x = 0; x < f.width(); ++x) {
                auto* p = f.at(x, y);
                HsvPixel hp = rgb_to_hsv(p[0], p[1], p[2]);
                std::uint8_t r, g, b;
                if (style.in_focus_band(hp) || style.in_caret_band(hp) ||
                    style.in_selection_band(hp)) {
                    // value-only, darken: stays inside the detector band
                    hsv_to_rgb(hp.h, hp.s, hp.v - unit(frng) * 0.05 * mag, r, g, b);
                } else if (hp.s < 0.10) {
                    double v;
                    if (edge[static_cast<size_t>(y) * f.width() + x])
                        v = hp.v * (1.0 - (0.03 + unit(frng) * 0.10) * mag);
                    else
                        v = hp.v + sym(frng, 0.10 * mag);
                    int gray = static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
                    r = g = b = static_cast<std::uint8_t>(std::clamp(gray, 0, 255));
                } else if (hp.s * hp.v >= 0.25) {
                    hsv_to_rgb(hp.h + sym(frng, 40.0 * mag), hp.s + sym(frng, 0.10 * mag),
                               hp.v + sym(frng, 0.10 * mag), r, g, b);
                } else {
                    // low chroma: hue readback is too quantized to jitter
                    hsv_to_rgb(hp.h, hp.s + sym(frng, 0.05 * mag), hp.v + sym(frng, 0.05 * mag),
                               r, g, b);
                }
                p[0] = r; p[1] = g; p[2] = b;
            }
    }
}

namespace {

const PageText* find_text(const PageSpec& spec, const std::string& id) {
    for (const auto& t : spec.texts)
        if (t.id == id)
            return &t;
    return nullptr;
}

void insert_frame_sorted(BuiltSession& s, Frame f, PageState st) {
    auto it = std::upper_bound(s.frames.begin(), s.frames.end(), f.t_ms(),
                               [](std::int64_t t, const Frame& fr) { return t < fr.t_ms(); });
    size_t idx = static_cast<size_t>(it - s.frames.begin());
    s.frames.insert(it, std::move(f));
    s.states.insert(s.states.begin() + static_cast<std::ptrdiff_t>(idx), std::move(st));
}

void attack_min_tamper(BuiltSession& s, std::mt19937_64& rng, const nlohmann::json& P) {
    std::string region = P.value("region", std::string("account"));
    const PageText* el = find_text(s.spec, region);
    if (!el)
        throw std::invalid_argument("min_tamper: no text element " + region);
    int idx = P.value("index", -1);
    if (idx < 0) {
        std::vector<int> cand;
        for (size_t i = 0; i < el->text.size(); ++i)
            if (el->text[i] != ' ')
                cand.push_back(static_cast<int>(i));
        idx = cand[rng() % cand.size()];
    }
    if (idx >= static_cast<int>(el->text.size()) || el->text[idx] == ' ')
        throw std::invalid_argument("min_tamper: bad glyph index");
    char orig = el->text[static_cast<size_t>(idx)];
    char rep;
    if (orig >= '0' && orig <= '9') {
        do rep = static_cast<char>('0' + rng() % 10); while (rep == orig);
    } else {
        do rep = static_cast<char>('A' + rng() % 26); while (rep == orig);
    }
    std::int64_t from_t = P.value("from_t", 0);
    Rect cell{el->x + kFontCellW * idx, el->y, kFontCellW, kFontCellH};
    for (auto& f : s.frames) {
        if (f.t_ms() < from_t)
            continue;
        fill_rect(f, cell, 255, 255, 255);
        draw_text(f, cell.x, cell.y, std::string(1, rep));
    }
    s.attack_info["region"] = region;
    s.attack_info["index"] = idx;
    s.attack_info["original"] = std::string(1, orig);
    s.attack_info["replacement"] = std::string(1, rep);
}

void attack_context_hide(BuiltSession& s, const nlohmann::json& P) {
    std::vector<std::string> keep_v =
        P.value("keep", std::vector<std::string>{"amount", "amount_label", "submit"});
    std::set<std::string> keep(keep_v.begin(), keep_v.end());
    const PageText* title = s.spec.texts.empty() ? nullptr : &s.spec.texts.front();
    for (auto& f : s.frames) {
        for (const auto& reg : s.page.breakdown.regions)
            if (!keep.count(reg.id))
                fill_rect(f, reg.rect.inflated(3, f.bounds()), 255, 255, 255);
        if (title)
            draw_text(f, title->x, title->y, "Confirm to continue");
        draw_text(f, 24, 264, "Session verified by HostGuard");
    }
    s.attack_info["kept"] = keep_v;
}

void attack_host_tamper_hidden(BuiltSession& s, const nlohmann::json& P) {
    std::string field = P.value(
        "field", s.edit_times.empty() ? std::string("amount") : s.edit_times.front().second);
    if (!s.spec.input(field))
        throw std::invalid_argument("host_tamper_hidden: unknown field " + field);
    size_t final_len = s.states.back().values.at(field).size();
    if (final_len == 0)
        throw std::invalid_argument("host_tamper_hidden: field ends empty");
    int k = P.value("index", final_len >= 2 ? 1 : 0);
    for (size_t i = 0; i < s.frames.size(); ++i) {
        const PageState& st = s.states[i];
        if (st.values.at(field).size() <= static_cast<size_t>(k))
            continue;
        PageState st2 = st;
        st2.values.at(field).erase(static_cast<size_t>(k), 1);
        if (st2.focus && *st2.focus == field) {
            if (st2.caret && *st2.caret > k)
                --*st2.caret;
            if (st2.selection) {
                auto [a, b] = *st2.selection;
                int a2 = a > k ? a - 1 : a;
                int b2 = b > k ? b - 1 : b;
                if (a2 < b2)
                    st2.selection = {a2, b2};
                else
                    st2.selection.reset();
            }
        }
        Frame nf = render_state(s.spec, st2);
        nf.set_t_ms(s.frames[i].t_ms());
        s.frames[i] = std::move(nf);
    }
    // every display transition stays a legal edit; refusal happens when the
    // extracted history is matched against the request
    s.attack_info["stage"] = "gate";
    s.attack_info["field"] = field;
    s.attack_info["hidden_index"] = k;
}

void attack_host_tamper_ghost(BuiltSession& s, std::mt19937_64& rng, const nlohmann::json& P) {
    if (s.hid.size() < 2 || s.edit_times.empty())
        throw std::invalid_argument("host_tamper_ghost: session has no edits");
    std::int64_t t_sub = s.hid.back().t_ms;
    std::int64_t h_prev = s.hid[s.hid.size() - 2].t_ms;
    std::int64_t t_ghost = h_prev + P.value("delay", 1100);
    if (t_ghost >= t_sub - 50)
        throw std::invalid_argument("host_tamper_ghost: pre-submit idle too short");

    PageState st2 = s.states.back();
    if (!st2.focus || st2.selection)
        throw std::invalid_argument("host_tamper_ghost: needs a focused caret at the end");
    std::string field = *st2.focus;
    const PageInput* in = s.spec.input(field);
    std::string& v = st2.values.at(field);
    if (static_cast<int>(v.size()) >= in->max_chars)
        throw std::invalid_argument("host_tamper_ghost: field is full");
    char c = in->charset[rng() % in->charset.size()];
    v.insert(static_cast<size_t>(*st2.caret), 1, c);
    ++*st2.caret;

    Frame nf = render_state(s.spec, st2);
    nf.set_t_ms(t_ghost);
    insert_frame_sorted(s, std::move(nf), std::move(st2));
    s.attack_info["field"] = field;
    s.attack_info["inserted"] = std::string(1, c);
    s.attack_info["t_ms"] = t_ghost;
}

void attack_host_tamper_nonpof(BuiltSession& s, const nlohmann::json& P) {
    if (s.edit_times.empty())
        throw std::invalid_argument("host_tamper_nonpof: session has no edits");
    std::string f = s.edit_times.front().second;
    auto it = std::find_if(s.edit_times.begin(), s.edit_times.end(),
                           [&](const auto& p) { return p.second != f; });
    if (it == s.edit_times.end())
        throw std::invalid_argument("host_tamper_nonpof: script edits a single field");
    std::int64_t t_star = it->first + P.value("delay", 50);
    std::int64_t t_end = std::numeric_limits<std::int64_t>::max();
    for (const auto& [te, fe] : s.edit_times)
        if (fe == f && te >= t_star) {
            t_end = te;
            break;
        }

    const PageInput* in = s.spec.input(f);
    auto tamper = [&](std::string& v) {
        if (static_cast<int>(v.size()) < in->max_chars)
            v += in->charset[0];
        else
            v.back() = v.back() == in->charset[0] ? in->charset[1 % in->charset.size()]
                                                  : in->charset[0];
    };
    bool touched = false, at_star = false;
    for (size_t i = 0; i < s.frames.size(); ++i) {
        std::int64_t t = s.frames[i].t_ms();
        if (t < t_star || t >= t_end)
            continue;
        if (t == t_star)
            at_star = true;
        PageState st2 = s.states[i];
        tamper(st2.values.at(f));
        Frame nf = render_state(s.spec, st2);
        nf.set_t_ms(t);
        s.frames[i] = std::move(nf);
        touched = true;
    }
    // the host repaints the moment it tampers: the altered value is on
    // screen for the whole window, not only from the next recorded frame
    if (!at_star && t_star < t_end && t_star < s.manifest.end_t_ms) {
        size_t bi = 0;
        for (size_t i = 0; i < s.frames.size(); ++i)
            if (s.frames[i].t_ms() <= t_star)
                bi = i;
        PageState st2 = s.states[bi];
        tamper(st2.values.at(f));
        Frame nf = render_state(s.spec, st2);
        nf.set_t_ms(t_star);
        insert_frame_sorted(s, std::move(nf), std::move(st2));
        touched = true;
    }
    if (!touched)
        throw std::invalid_argument("host_tamper_nonpof: no frame falls in the tamper window");
    s.attack_info["field"] = f;
    s.attack_info["from_t"] = t_star;
}

void attack_temporal(BuiltSession& s, const nlohmann::json& P) {
    Rect popup{256, 192, 180, 64};
    if (P.contains("rect")) {
        auto& r = P.at("rect");
        popup = {r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<int>(), r.at(3).get<int>()};
    }
    std::int64_t t0 = P.value("t0", (s.manifest.start_t_ms + s.manifest.end_t_ms) / 2);
    std::int64_t dur = P.value("duration", 700);
    auto collides = [&](std::int64_t t) {
        for (const auto& fr : s.frames)
            if (fr.t_ms() == t)
                return true;
        return false;
    };
    while (collides(t0))
        ++t0;
    std::int64_t t1 = t0 + dur;
    while (collides(t1))
        ++t1;

    auto at_or_before = [&](std::int64_t t) -> size_t {
        size_t best = 0;
        for (size_t i = 0; i < s.frames.size(); ++i)
            if (s.frames[i].t_ms() <= t)
                best = i;
        return best;
    };
    auto overlay = [&](Frame& f) {
        fill_rect(f, popup, 60, 60, 60);
        fill_rect(f, popup.inflated(-2, f.bounds()), 255, 255, 255);
        draw_text(f, popup.x + 12, popup.y + 14, "You won a prize");
        draw_text(f, popup.x + 12, popup.y + 38, "Click to claim");
    };

    size_t bi = at_or_before(t0);
    Frame shown = s.frames[bi];
    PageState shown_st = s.states[bi];
    overlay(shown);
    shown.set_t_ms(t0);

    size_t ri = at_or_before(t1);
    Frame restore = s.frames[ri];
    PageState restore_st = s.states[ri];
    restore.set_t_ms(t1);

    // the overlay covers the whole window: frames recorded while it is up
    // show it too, not just the one inserted at t0; exposure ends at t0+dur
    // even when the restore slot had to slide past a recorded frame
    for (size_t i = 0; i < s.frames.size(); ++i)
        if (s.frames[i].t_ms() > t0 && s.frames[i].t_ms() < t0 + dur)
            overlay(s.frames[i]);

    insert_frame_sorted(s, std::move(shown), std::move(shown_st));
    insert_frame_sorted(s, std::move(restore), std::move(restore_st));
    s.attack_info["rect"] = {popup.x, popup.y, popup.w, popup.h};
    s.attack_info["t0"] = t0;
    s.attack_info["duration"] = dur;
}

} // namespace

void inject_attack(BuiltSession& s, const AttackSpec& spec) {
    std::mt19937_64 rng(mix64(spec.seed ^ 0xa77ac4ull));
    s.scenario = spec.variant;
    s.expect = "rejected";
    s.attack_info = nlohmann::json{{"variant", spec.variant}};

    if (spec.variant == "min_tamper")
        attack_min_tamper(s, rng, spec.params);
    else if (spec.variant == "context_hide")
        attack_context_hide(s, spec.params);
    else if (spec.variant == "host_tamper_hidden")
        attack_host_tamper_hidden(s, spec.params);
    else if (spec.variant == "host_tamper_ghost")
        attack_host_tamper_ghost(s, rng, spec.params);
    else if (spec.variant == "host_tamper_nonpof")
        attack_host_tamper_nonpof(s, spec.params);
    else if (spec.variant == "temporal")
        attack_temporal(s, spec.params);
    else
        throw std::invalid_argument("unknown attack variant: " + spec.variant);
}

BuiltSession make_prefilled_session(const PageSpec& spec) {
    BuiltSession b;
    b.spec = spec;
    b.page = render_page(spec);
    PageState st;
    for (const auto& in : spec.inputs) {
        std::string v;
        for (int i = 0; i < 3 && i < static_cast<int>(in.charset.size()); ++i)
            v += in.charset[static_cast<size_t>(i) % in.charset.size()];
        st.values[in.id] = v;
    }
    b.frames.push_back(render_state(spec, st));
    b.frames.back().set_t_ms(0);
    b.states.push_back(st);
    b.hid.push_back({400, HidDevice::mouse, HidAction::click, spec.submit.rect.cx(),
                     spec.submit.rect.cy()});
    b.manifest.start_t_ms = 0;
    b.manifest.end_t_ms = 450;
    for (const auto& in : spec.inputs) {
        b.oracle[in.id] = {in.label, st.values.at(in.id)};
        b.request.pairs.emplace_back(in.label, st.values.at(in.id));
    }
    b.scenario = "prefilled";
    b.expect = "rejected";
    return b;
}

BuiltSession build_scenario(const std::string& scenario, std::uint64_t seed, double perturb) {
    PageSpec spec = PageSpec::demo();
    if (scenario == "prefilled") {
        BuiltSession b = make_prefilled_session(spec);
        if (perturb > 0.0)
            perturb_benign(b, {perturb, seed ^ 0x5eedull});
        return b;
    }
    ScriptGenOptions gopts;
    gopts.ensure_two_fields = scenario == "host_tamper_nonpof";
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::uint64_t s2 = seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(attempt);
        try {
            SessionScript sc = random_script(spec, s2, gopts);
            BuiltSession b = script_to_session(spec, sc);
            if (scenario != "benign")
                inject_attack(b, {scenario, s2, nlohmann::json::object()});
            if (perturb > 0.0)
                perturb_benign(b, {perturb, s2 ^ 0x5eedull});
            return b;
        } catch (const std::invalid_argument&) {
            // this script shape cannot host the scenario; rehash and retry
        }
    }
    throw std::runtime_error("no usable script for scenario " + scenario);
}

SessionData to_session_data(const BuiltSession& b) {
    SessionData d;
    d.manifest = b.manifest;
    d.rendering = b.page.rendering;
    d.breakdown = b.page.breakdown;
    d.frames = b.frames;
    d.trusted = b.page.trusted;
    d.hid = b.hid;
    return d;
}

std::filesystem::path write_session_dir(BuiltSession& s, const std::filesystem::path& dir,
                                        bool png) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "frames");
    auto write_file = [&](const fs::path& p, const std::string& bytes) {
        std::ofstream out(p, std::ios::binary);
        if (!out)
            throw IoError("cannot write " + p.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    };

    s.manifest.frames.clear();
    const char* ext = png ? "png" : "raw";
    for (size_t i = 0; i < s.frames.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "%04zu.%s", i, ext);
        fs::path rel = fs::path("frames") / name;
        if (png)
            save_png(s.frames[i], dir / rel);
        else
            save_raw(s.frames[i], dir / rel);
        s.manifest.frames.push_back({s.frames[i].t_ms(), rel.generic_string()});
    }
    s.manifest.trusted_path = std::string("trusted.") + ext;
    if (png)
        save_png(s.page.trusted, dir / s.manifest.trusted_path);
    else
        save_raw(s.page.trusted, dir / s.manifest.trusted_path);

    s.manifest.hid_path = "hid.log";
    write_file(dir / s.manifest.hid_path, serialize_hid_log(s.hid));
    s.manifest.breakdown_path = "breakdown.json";
    write_file(dir / s.manifest.breakdown_path, serialize_breakdown(s.page.breakdown));
    write_file(dir / "rendering_manifest.json", serialize_rendering_manifest(s.page.rendering));
    write_file(dir / "request.txt", serialize_request(s.request));

    nlohmann::json truth;
    truth["scenario"] = s.scenario;
    truth["expect"] = s.expect;
    truth["final_inputs"] = nlohmann::json::object();
    for (const auto& [id, lv] : s.oracle)
        truth["final_inputs"][id] = {{"label", lv.first}, {"value", lv.second}};
    truth["attack"] = s.attack_info.is_null() ? nlohmann::json() : s.attack_info;
    write_file(dir / "ground_truth.json", truth.dump(2) + "\n");

    write_file(dir / "manifest.json", serialize_session_manifest(s.manifest));
    return dir / "manifest.json";
}

} // namespace uiattest
