#include "uiattest/engine.hpp"

#include "uiattest/errors.hpp"
#include "uiattest/image_io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <future>
#include <mutex>
#include <set>
#include <sstream>
#include <unordered_map>

namespace uiattest {

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw IoError("cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string digest_key(const Frame& f, const Rect& r) {
    return to_hex(digest_region(f, r));
}

} // namespace

SessionData load_session(const std::filesystem::path& manifest_path) {
    SessionData d;
    auto dir = manifest_path.parent_path();
    auto resolve = [&](const std::string& rel) { return dir / rel; };

    d.manifest = parse_session_manifest(read_file(manifest_path));
    d.breakdown = parse_breakdown(read_file(resolve(d.manifest.breakdown_path)));
    d.rendering = parse_rendering_manifest(read_file(resolve("rendering_manifest.json")));
    d.hid = parse_hid_log(read_file(resolve(d.manifest.hid_path)));
    d.trusted = load_frame(resolve(d.manifest.trusted_path));

    if (d.rendering.width != d.breakdown.viewport_w || d.rendering.height != d.breakdown.viewport_h)
        throw ParseError("breakdown viewport disagrees with the rendering manifest");
    if (d.trusted.width() != d.rendering.width || d.trusted.height() != d.rendering.height)
        throw ParseError("trusted render size disagrees with the rendering manifest");

    d.frames.reserve(d.manifest.frames.size());
    for (const auto& ref : d.manifest.frames) {
        Frame f = load_frame(resolve(ref.path));
        if (f.width() != d.rendering.width || f.height() != d.rendering.height)
            throw ParseError("frame " + ref.path + " size disagrees with the rendering manifest");
        f.set_t_ms(ref.t_ms);
        d.frames.push_back(std::move(f));
    }
    return d;
}

std::vector<Rect> frame_diff_bbox(const Frame& prev, const Frame& cur) {
    if (prev.width() != cur.width() || prev.height() != cur.height())
        return {cur.bounds()};
    const int w = cur.width(), h = cur.height();
    std::vector<std::uint8_t> mask(static_cast<size_t>(w) * h, 0);
    const auto& a = prev.pixels();
    const auto& b = cur.pixels();
    for (size_t i = 0; i < mask.size(); ++i) {
        size_t o = i * 3;
        if (a[o] != b[o] || a[o + 1] != b[o + 1] || a[o + 2] != b[o + 2])
            mask[i] = 1;
    }
    std::vector<Rect> out;
    for (const auto& c : connected_components(mask, w, h))
        out.push_back(c.inflated(2, cur.bounds()));
    return out;
}

namespace {

bool intersects_any(const Rect& r, const std::vector<Rect>& rects) {
    for (const auto& d : rects)
        if (r.intersects(d))
            return true;
    return false;
}

struct Runner {
    const SessionData& data;
    const EngineOptions& opts;
    SessionVerdict v;

    // value edits must trace back to key events; a mouse click near the
    // sample must not launder text appearing in a field
    std::vector<HidEvent> key_events;

    std::shared_ptr<const OcrEngine> validation_engine;
    TemplateOcrEngine reference;

    std::mutex text_mtx;
    std::unordered_map<std::string, OcrResult> text_cache;
    std::unordered_map<std::string, RegionVerdict> graphic_cache;
    std::unordered_map<std::string, PofState> frame_cache;

    std::unordered_map<std::string, OcrResult> trusted_ocr;
    std::unordered_map<std::string, bool> trusted_has_text;
    std::unordered_map<std::string, std::string> trusted_digest;

    std::map<std::string, RegionVerdict> region_status;
    std::set<std::string> failing_boxes;  // unattributable text, by position
    std::set<std::string> open_pof_viols; // violations already reported
    int focus_gap_streak = 0;

    const Frame* prev_frame = nullptr;
    PofState prev_pof;
    bool have_prev_pof = false;

    explicit Runner(const SessionData& d, const EngineOptions& o) : data(d), opts(o) {
        for (const auto& e : data.hid)
            if (e.device == HidDevice::keyboard)
                key_events.push_back(e);
        validation_engine = make_ocr_engine(opts.ocr_engine);
        if (!validation_engine)
            throw std::invalid_argument("unknown ocr engine: " + opts.ocr_engine);
    }

    void fail(std::int64_t t, std::string region, std::string rule, std::string detail) {
        v.failures.push_back({t, std::move(region), std::move(rule), std::move(detail)});
    }

    // Recognition through the shared digest-keyed cache. Masked reads are
    // for extraction (indicator pixels whited out first); unmasked reads
    // feed text-region validation. Preprocessing is binarized, so benign
    // jitter maps to the same key.
    OcrResult cached_ocr(const Frame& region_crop, bool masked, const OcrEngine& eng) {
        Frame m = masked ? mask_pof_colors(region_crop, opts.pof) : region_crop;
        GrayImage g = preprocess_for_ocr(m);
        std::string key;
        {
            std::string dims = std::to_string(g.w) + "x" + std::to_string(g.h) +
                               ":" + (masked ? "m" : "u") + eng.name() + ":";
            key = dims + to_hex(sha256(std::span<const std::uint8_t>(g.px.data(), g.px.size())));
        }
        if (opts.use_cache) {
            std::lock_guard<std::mutex> lk(text_mtx);
            auto it = text_cache.find(key);
            if (it != text_cache.end()) {
                ++v.cache.text_hits;
                return it->second;
            }
        }
        OcrResult r = eng.recognize(g);
        {
            std::lock_guard<std::mutex> lk(text_mtx);
            ++v.cache.text_misses;
            if (opts.use_cache)
                text_cache.emplace(std::move(key), r);
        }
        return r;
    }

    OcrFn extraction_fn() {
        return [this](const Frame& c) { return cached_ocr(c, true, reference); };
    }
    OcrFn validation_fn() {
        return [this](const Frame& c) { return cached_ocr(c, false, *validation_engine); };
    }

    // The verdict must be a function of the region's own pixels alone:
    // whole-frame text boxes merge across neighbours, so presence tested
    // against them would flip with content elsewhere in the frame.
    RegionVerdict validate_region(const Frame& frame, const Region& reg) {
        Rect rect = reg.rect;
        Frame local = crop(frame, rect);
        Frame trusted = crop(data.trusted, rect);
        if (reg.kind == RegionKind::textual) {
            if (trusted_has_text.at(reg.id) && detect_text_boxes(local).empty())
                return {RegionStatus::content_difference, "expected text missing from region"};
            return validate_text_region(local, trusted, validation_fn(), opts.validator);
        }
        // graphical
        std::string key = digest_key(frame, rect) + ":" + trusted_digest.at(reg.id);
        if (opts.use_cache) {
            std::lock_guard<std::mutex> lk(text_mtx);
            auto it = graphic_cache.find(key);
            if (it != graphic_cache.end()) {
                ++v.cache.graphic_hits;
                return it->second;
            }
        }
        RegionVerdict rv = validate_graphic_region(local, trusted, opts.validator);
        {
            std::lock_guard<std::mutex> lk(text_mtx);
            ++v.cache.graphic_misses;
            if (opts.use_cache)
                graphic_cache.emplace(std::move(key), rv);
        }
        return rv;
    }

    // POF bookkeeping shared by cache hits and misses: gap raciness and
    // movement-vs-input correlation.
    void pof_temporal_checks(std::int64_t t, const PofState& pof) {
        if (pof.focus && !pof.caret && !pof.selection) {
            ++focus_gap_streak;
            if (focus_gap_streak == opts.focus_gap_tolerance + 1)
                fail(t, *pof.focus, "consistency_failure",
                     "focus ring persists without caret or selection");
        } else {
            focus_gap_streak = 0;
        }
        if (have_prev_pof && !(pof == prev_pof) && !correlate_hid(t, data.hid, opts.hid_window_ms)) {
            std::string reg = pof.focus ? *pof.focus : (prev_pof.focus ? *prev_pof.focus : "");
            fail(t, reg, "hid_violation", "indicators moved without input events");
        }
        prev_pof = pof;
        have_prev_pof = true;
    }

    void handle_selection_bookkeeping(const PofState& pof) {
        if (pof.selection) {
            auto it = v.inputs.fields.find(pof.selection->region);
            if (it != v.inputs.fields.end())
                it->second.last_selection = {pof.selection->col_a, pof.selection->col_b};
        } else if (pof.caret) {
            auto it = v.inputs.fields.find(pof.caret->region);
            if (it != v.inputs.fields.end())
                it->second.last_selection.reset();
        }
    }

    void run() {
        for (const auto& reg : data.breakdown.regions)
            if (reg.kind == RegionKind::input)
                v.inputs.fields[reg.id] = {};

        std::vector<SampledFrame> samples;
        ReplayFrameSource source(&data.frames);
        try {
            samples = acquire_context(opts.sampler, source, data.manifest.start_t_ms,
                                      data.manifest.end_t_ms);
        } catch (const TruncationError& e) {
            fail(data.manifest.start_t_ms, "", "source_truncated", e.what());
            v.intended = false;
            return;
        }

        // trusted side, once per session
        for (const auto& reg : data.breakdown.regions) {
            if (reg.kind == RegionKind::textual) {
                OcrResult r = cached_ocr(crop(data.trusted, reg.rect), false, *validation_engine);
                trusted_has_text[reg.id] = !normalize_text(r.text).empty();
                trusted_ocr[reg.id] = std::move(r);
            }
            if (reg.kind == RegionKind::graphical)
                trusted_digest[reg.id] = digest_key(data.trusted, reg.rect);
            region_status[reg.id] = {};
        }

        for (size_t si = 0; si < samples.size(); ++si) {
            auto t0 = std::chrono::steady_clock::now();
            const std::int64_t t = samples[si].t_ms;
            const Frame& frame = *samples[si].frame;
            const size_t fail_mark = v.failures.size();

            std::string pre_history = to_hex(v.inputs.digest());
            std::string frame_key = to_hex(digest_frame(frame)) + ":" + pre_history;
            bool hit = false;
            if (opts.use_cache) {
                auto it = frame_cache.find(frame_key);
                if (it != frame_cache.end()) {
                    ++v.cache.frame_hits;
                    hit = true;
                    pof_temporal_checks(t, it->second);
                    prev_frame = &frame;
                }
            }
            if (!hit) {
                ++v.cache.frame_misses;
                step(si, t, frame);
                // cache steady-state frames only: clean, and the input
                // history came out exactly as it went in
                if (opts.use_cache && v.failures.size() == fail_mark &&
                    to_hex(v.inputs.digest()) == pre_history)
                    frame_cache.emplace(std::move(frame_key), prev_pof);
            }

            double ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
            v.frames.push_back({t, ms, hit});
        }

        // end checks: the session must close with a click on the submit control
        const HidEvent* last_click = nullptr;
        for (const auto& e : data.hid)
            if (e.device == HidDevice::mouse && e.action == HidAction::click &&
                e.t_ms <= data.manifest.end_t_ms)
                last_click = &e;
        v.end_checks.click_present = last_click != nullptr;
        if (!last_click) {
            fail(data.manifest.end_t_ms, "", "end_check_failed", "no click before the end signal");
        } else if (!data.breakdown.submit_button.contains(last_click->x, last_click->y)) {
            std::ostringstream os;
            os << "last click at (" << last_click->x << "," << last_click->y
               << ") is not on the submit control";
            fail(data.manifest.end_t_ms, "", "end_check_failed", os.str());
        } else {
            v.end_checks.on_submit = true;
        }

        v.intended = v.failures.empty();
    }

    void step(size_t si, std::int64_t t, const Frame& frame) {
        const bool full = si == 0 || opts.full_revalidate;
        std::vector<Rect> diffs;
        if (full || !prev_frame)
            diffs = {frame.bounds()};
        else
            diffs = frame_diff_bbox(*prev_frame, frame);

        // detection always runs on the whole frame so components are never
        // clipped by a diff rect; the diff only scopes which findings are
        // new, and boxes already reported stay silent while they persist
        std::vector<Rect> boxes = detect_text_boxes(frame);
        std::set<std::string> now_failing;
        for (const auto& b : boxes) {
            int cx = b.x + b.w / 2, cy = b.y + b.h / 2;
            bool owned = data.breakdown.submit_button.contains(cx, cy);
            for (const auto& r : data.breakdown.regions) {
                if (owned)
                    break;
                owned = r.rect.contains(cx, cy);
            }
            if (owned)
                continue;
            std::string key = std::to_string(b.x) + "," + std::to_string(b.y) + "," +
                              std::to_string(b.w) + "," + std::to_string(b.h);
            now_failing.insert(key);
            if (intersects_any(b, diffs) && !failing_boxes.count(key)) {
                std::ostringstream os;
                os << "text outside any declared region at (" << b.x << "," << b.y << " "
                   << b.w << "x" << b.h << ")";
                fail(t, "", "content_difference", os.str());
            }
        }
        failing_boxes = std::move(now_failing);

        // indicators
        PofOutcome pof = detect_pof(frame, data.breakdown, extraction_fn(), opts.pof);
        std::set<std::string> viol_now;
        for (const auto& pv : pof.violations) {
            std::string key = pv.region_id + "|" + pv.detail;
            viol_now.insert(key);
            if (!open_pof_viols.count(key))
                fail(t, pv.region_id, "consistency_failure", pv.detail);
        }
        open_pof_viols = std::move(viol_now);
        pof_temporal_checks(t, pof.state);

        // input extraction
        for (const auto& reg : data.breakdown.regions) {
            if (reg.kind != RegionKind::input)
                continue;
            if (!full && !intersects_any(reg.rect, diffs))
                continue;
            OcrResult r = cached_ocr(crop(frame, reg.rect), true, reference);
            const std::string& extracted = r.text;
            FieldState& field = v.inputs.fields[reg.id];
            if (si == 0) {
                LabelResult lr = extract_label(frame, reg, data.breakdown, extraction_fn());
                if (lr.label)
                    field.label = *lr.label;
                else
                    fail(t, reg.id, "artifact_error", lr.err);
                if (!extracted.empty())
                    fail(t, reg.id, "prefilled_input",
                         "input holds \"" + extracted + "\" at session start");
                // the history starts from what is on screen; otherwise a
                // revalidated later frame re-reports the same text as an edit
                field.value = extracted;
                continue;
            }
            if (extracted == field.value)
                continue;
            EditClass ec = classify_edit(field.value, extracted, pof.state, field, reg.id);
            if (ec.kind == EditKind::violation)
                fail(t, reg.id, "edit_violation", ec.reason);
            else if (!correlate_hid(t, key_events, opts.hid_window_ms))
                fail(t, reg.id, "hid_violation", "field edit without key events in the window");
            // carry the displayed value regardless: the verdict already
            // records the violation and repeats must not re-fire
            field.value = extracted;
            field.last_selection.reset();
        }
        handle_selection_bookkeeping(pof.state);

        // region validation against the trusted render
        std::vector<const Region*> cands;
        for (const auto& reg : data.breakdown.regions) {
            if (reg.kind == RegionKind::input)
                continue;
            if (full || intersects_any(reg.rect, diffs))
                cands.push_back(&reg);
        }
        std::vector<RegionVerdict> verdicts(cands.size());
        if (opts.jobs > 1 && cands.size() > 1) {
            std::vector<std::future<void>> fs;
            std::atomic<size_t> next{0};
            int n = std::min<int>(opts.jobs, static_cast<int>(cands.size()));
            for (int k = 0; k < n; ++k)
                fs.push_back(std::async(std::launch::async, [&] {
                    for (size_t i = next.fetch_add(1); i < cands.size(); i = next.fetch_add(1))
                        verdicts[i] = validate_region(frame, *cands[i]);
                }));
            for (auto& f : fs)
                f.get();
        } else {
            for (size_t i = 0; i < cands.size(); ++i)
                verdicts[i] = validate_region(frame, *cands[i]);
        }
        for (size_t i = 0; i < cands.size(); ++i) {
            RegionVerdict& now = verdicts[i];
            RegionVerdict& before = region_status[cands[i]->id];
            if (now.status != before.status && now.status != RegionStatus::pass)
                fail(t, cands[i]->id, to_string(now.status), now.detail);
            before = now;
        }

        prev_frame = &frame;
    }
};

} // namespace

SessionVerdict run_session(const SessionData& data, const EngineOptions& opts) {
    opts.sampler.validate();
    Runner r(data, opts);
    r.run();
    return r.v;
}

namespace {

nlohmann::json canonical_json(const SessionVerdict& v) {
    nlohmann::json j;
    j["status"] = v.intended ? "intended" : "rejected";
    j["failures"] = nlohmann::json::array();
    for (const auto& f : v.failures)
        j["failures"].push_back({{"t_ms", f.t_ms},
                                 {"region_id", f.region_id},
                                 {"rule", f.rule},
                                 {"detail", f.detail}});
    j["inputs"] = nlohmann::json::array();
    for (const auto& [id, f] : v.inputs.fields)
        j["inputs"].push_back({{"region", id}, {"label", f.label}, {"value", f.value}});
    j["end_checks"] = {{"click_present", v.end_checks.click_present},
                       {"on_submit", v.end_checks.on_submit}};
    return j;
}

} // namespace

std::string canonical_verdict_bytes(const SessionVerdict& v) {
    return canonical_json(v).dump();
}

nlohmann::json verdict_to_json(const SessionVerdict& v) {
    nlohmann::json j = canonical_json(v);
    nlohmann::json frames = nlohmann::json::array();
    double first_ms = 0.0, rest = 0.0;
    std::uint64_t hits = 0;
    for (size_t i = 0; i < v.frames.size(); ++i) {
        const auto& fr = v.frames[i];
        frames.push_back({{"t_ms", fr.t_ms}, {"latency_ms", fr.latency_ms}, {"cache_hit", fr.cache_hit}});
        if (i == 0)
            first_ms = fr.latency_ms;
        else
            rest += fr.latency_ms;
        if (fr.cache_hit)
            ++hits;
    }
    j["perf"] = {
        {"frames", std::move(frames)},
        {"first_frame_ms", first_ms},
        {"mean_subsequent_ms", v.frames.size() > 1 ? rest / (v.frames.size() - 1) : 0.0},
        {"cache_hit_rate", v.frames.empty() ? 0.0 : static_cast<double>(hits) / v.frames.size()},
        {"cache",
         {{"frame_hits", v.cache.frame_hits},
          {"frame_misses", v.cache.frame_misses},
          {"text_hits", v.cache.text_hits},
          {"text_misses", v.cache.text_misses},
          {"graphic_hits", v.cache.graphic_hits},
          {"graphic_misses", v.cache.graphic_misses}}},
    };
    return j;
}

} // namespace uiattest
