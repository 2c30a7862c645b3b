#pragma once

#include "uiattest/engine.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace uiattest {

// Synthetic page construction and session recording. Everything here is
// deterministic under a seed so corpora can be pinned in tests.

struct PageText {
    std::string id;
    int x = 0, y = 0; // glyph grid origin
    std::string text;
};

struct PageImage {
    std::string id;
    Rect rect;
    std::uint64_t art_seed = 0;
};

struct PageInput {
    std::string id;
    Rect rect;            // inner text area; border/ring paint outside it
    std::string label;    // expected label string (a PageText must carry it)
    std::string charset;  // value alphabet, never contains a space
    int max_chars = 0;
};

struct PageButton {
    std::string id;
    Rect rect;
    std::string text;
};

struct PageSpec {
    std::string page_id;
    int viewport_w = 0, viewport_h = 0;
    std::vector<PageText> texts;
    std::vector<PageImage> images;
    std::vector<PageInput> inputs;
    PageButton submit;

    const PageInput* input(const std::string& id) const;

    // Payment form used across tests and corpora.
    static PageSpec demo();
};

// Live display state during a session.
struct PageState {
    std::map<std::string, std::string> values; // input id -> text
    std::optional<std::string> focus;
    std::optional<int> caret;                       // column, focused field
    std::optional<std::pair<int, int>> selection;   // columns [a,b), focused field
};

struct RenderedPage {
    Frame trusted; // empty inputs, nothing focused
    PageBreakdown breakdown;
    RenderingManifest rendering;
    // per text element: ink bounding box of each word, document order
    std::map<std::string, std::vector<Rect>> word_boxes;
};

RenderedPage render_page(const PageSpec& spec);
Frame render_state(const PageSpec& spec, const PageState& st, const PofStyle& style = {});

enum class ActionKind {
    focus,        // click a field, caret lands after the last char
    set_caret,    // click inside the focused field at column `a`
    type_text,    // text, one key event per char, char_ms apart
    paste,        // text in one key event
    select,       // drag columns a..b
    del_selection,
    backspace,    // count times
    del_forward,  // count times
    idle,         // dwell only
    submit        // click the submit control
};

struct Action {
    ActionKind kind = ActionKind::idle;
    std::string field;
    std::string text;
    int a = 0, b = 0;
    int count = 1;
    std::int64_t gap_ms = 300;  // quiet time before this action starts
    std::int64_t char_ms = 150; // intra-action key spacing
};

struct SessionScript {
    std::vector<Action> actions;
};

struct BuiltSession {
    PageSpec spec;
    RenderedPage page;
    std::vector<Frame> frames;      // t_ms set, strictly increasing
    std::vector<PageState> states;  // parallel to frames
    std::vector<HidEvent> hid;
    SessionManifest manifest;       // frame paths filled by write_session_dir
    Request request;
    // symbolic ground truth: input id -> (label, final value)
    std::map<std::string, std::pair<std::string, std::string>> oracle;
    // (t_ms, field) for every value-changing event, in order
    std::vector<std::pair<std::int64_t, std::string>> edit_times;
    std::string scenario = "benign";
    std::string expect = "intended";
    nlohmann::json attack_info;
};

// Replays the script symbolically; throws std::invalid_argument on scripts
// that are not executable (deleting from an empty field and the like).
std::map<std::string, std::pair<std::string, std::string>>
oracle_extract(const PageSpec& spec, const SessionScript& script);

BuiltSession script_to_session(const PageSpec& spec, const SessionScript& script);

struct ScriptGenOptions {
    int min_bursts = 2, max_bursts = 5;
    std::int64_t burst_gap_lo = 800, burst_gap_hi = 1400;
    std::int64_t char_ms = 150;
    std::int64_t presubmit_idle = 1500;
    bool ensure_two_fields = false;
};

// Random but always-legal editing session: one positioning move and one
// edit group per burst, bursts separated by at least burst_gap_lo of
// quiet, closing with an idle and a submit click.
SessionScript random_script(const PageSpec& spec, std::uint64_t seed,
                            const ScriptGenOptions& opts = {});

struct PerturbOptions {
    double magnitude = 1.0; // 1.0 keeps every per-pixel delta under 90% of
                            // the validator thresholds
    std::uint64_t seed = 7;
};

// Benign capture noise on the local frames only: per-session region
// translations under the alignment bound, per-frame HSV jitter capped
// below the comparison thresholds, dimmed antialias pixels at glyph
// edges. Indicator pixels get value-only jitter so they stay inside the
// detector bands.
void perturb_benign(BuiltSession& s, const PerturbOptions& opts = {});

struct AttackSpec {
    std::string variant; // min_tamper, context_hide, host_tamper_hidden,
                         // host_tamper_ghost, host_tamper_nonpof, temporal
    std::uint64_t seed = 0;
    nlohmann::json params; // per-variant overrides
};

void inject_attack(BuiltSession& s, const AttackSpec& spec);

// Session whose first frame already carries field values.
BuiltSession make_prefilled_session(const PageSpec& spec);

// In-memory view of a built session, ready for run_session.
SessionData to_session_data(const BuiltSession& b);

// One deterministic session on the demo page: "benign", "prefilled", or an
// attack variant name. Seeds that cannot host the scenario (field already
// full, single-field script) are skipped by rehashing, so any seed works.
// perturb > 0 layers benign capture noise on top.
BuiltSession build_scenario(const std::string& scenario, std::uint64_t seed,
                            double perturb = 0.0);

// Writes manifest.json, rendering_manifest.json, breakdown.json, hid.log,
// trusted image, frames/, request.txt and ground_truth.json. Returns the
// manifest path. PNG by default, the raw container otherwise.
std::filesystem::path write_session_dir(BuiltSession& s, const std::filesystem::path& dir,
                                        bool png = true);

} // namespace uiattest
