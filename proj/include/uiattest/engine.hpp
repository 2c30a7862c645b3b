#pragma once

#include "uiattest/edits.hpp"
#include "uiattest/manifest.hpp"
#include "uiattest/pof.hpp"
#include "uiattest/sampler.hpp"
#include "uiattest/validate.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace uiattest {

// Failure rule vocabulary: content_difference, color_difference,
// position_difference, text_mismatch (region validators),
// consistency_failure (indicator anomalies), edit_violation,
// hid_violation, prefilled_input, end_check_failed, source_truncated,
// artifact_error.

struct EngineOptions {
    SamplerConfig sampler;
    ValidatorConfig validator;
    PofStyle pof;
    bool use_cache = true;       // frame, text and graphics caches
    bool full_revalidate = false; // ignore frame diffs, validate everything
    int jobs = 1;                // region validation fan-out per frame
    std::string ocr_engine = "reference"; // for text-region validation only;
                                          // extraction always uses the
                                          // reference recognizer
    double hid_window_ms = 1000.0;
    int focus_gap_tolerance = 1; // consecutive samples focus may lack a caret
};

struct Failure {
    std::int64_t t_ms = 0;
    std::string region_id; // empty when not attributable
    std::string rule;
    std::string detail;
};

struct FrameReport {
    std::int64_t t_ms = 0;
    double latency_ms = 0.0;
    bool cache_hit = false;
};

struct CacheStats {
    std::uint64_t frame_hits = 0, frame_misses = 0;
    std::uint64_t text_hits = 0, text_misses = 0;
    std::uint64_t graphic_hits = 0, graphic_misses = 0;
};

struct EndChecks {
    bool click_present = false;
    bool on_submit = false;
};

struct SessionVerdict {
    bool intended = false;
    std::vector<Failure> failures;
    InputHistory inputs;
    EndChecks end_checks;
    std::vector<FrameReport> frames;
    CacheStats cache;
};

struct SessionData {
    SessionManifest manifest;
    RenderingManifest rendering;
    PageBreakdown breakdown;
    std::vector<Frame> frames; // parallel to manifest.frames
    Frame trusted;
    std::vector<HidEvent> hid;
};

// Reads a session directory through its manifest. Relative paths resolve
// against the manifest's directory; rendering_manifest.json must sit next
// to it. Dimensions of every frame, the trusted render and the breakdown
// viewport must agree. Throws ParseError/IoError.
SessionData load_session(const std::filesystem::path& manifest_path);

// Bounding boxes of changed content between consecutive frames: 8-connected
// components of differing pixels, inflated by 2 and clipped.
std::vector<Rect> frame_diff_bbox(const Frame& prev, const Frame& cur);

SessionVerdict run_session(const SessionData& data, const EngineOptions& opts);

// Canonical portion only: status, failures, inputs, end_checks. Identical
// bytes regardless of caching or revalidation mode.
std::string canonical_verdict_bytes(const SessionVerdict& v);

// Canonical portion plus the perf section (latencies, cache counters).
nlohmann::json verdict_to_json(const SessionVerdict& v);

} // namespace uiattest
