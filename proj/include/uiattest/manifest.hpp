#pragma once

#include "uiattest/context.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace uiattest {

// Resolution the trusted renderer was asked to produce.
struct RenderingManifest {
    int width = 0;
    int height = 0;
};

enum class RegionKind { textual, graphical, input };

const char* to_string(RegionKind k);

struct Region {
    std::string id;
    RegionKind kind = RegionKind::textual;
    Rect rect;
    std::optional<std::string> label_hint;
};

// Machine-readable page structure shipped by the service. Input region rects
// are mutually disjoint; every rect lies inside the viewport.
struct PageBreakdown {
    std::string page_id;
    int viewport_w = 0;
    int viewport_h = 0;
    std::vector<Region> regions;
    Rect submit_button;

    const Region* find(const std::string& id) const;
    std::vector<const Region*> of_kind(RegionKind k) const;
};

enum class HidDevice { keyboard, mouse };
enum class HidAction { key, click, move };

struct HidEvent {
    std::int64_t t_ms = 0;
    HidDevice device = HidDevice::keyboard;
    HidAction action = HidAction::key;
    int x = 0, y = 0; // mouse only
};

struct FrameRef {
    std::int64_t t_ms = 0;
    std::string path;
};

// Recorded session: frame timestamps strictly increasing,
// start_t_ms <= first frame, end_t_ms >= last frame.
struct SessionManifest {
    std::int64_t start_t_ms = 0;
    std::int64_t end_t_ms = 0;
    std::vector<FrameRef> frames;
    std::string hid_path;
    std::string trusted_path;
    std::string breakdown_path;
};

// Outgoing request: ordered label/value pairs, labels unique.
struct Request {
    std::vector<std::pair<std::string, std::string>> pairs;
};

PageBreakdown parse_breakdown(const std::string& bytes);
std::string serialize_breakdown(const PageBreakdown& b);

RenderingManifest parse_rendering_manifest(const std::string& bytes);
std::string serialize_rendering_manifest(const RenderingManifest& m);

// One event per line: "<t_ms> <keyboard|mouse> <key|click|move> [<x> <y>]".
// Timestamps must be non-decreasing.
std::vector<HidEvent> parse_hid_log(const std::string& bytes);
std::string serialize_hid_log(const std::vector<HidEvent>& ev);

// LF-terminated "label=value" lines, split at the first '='.
Request parse_request(const std::string& bytes);
std::string serialize_request(const Request& r);

SessionManifest parse_session_manifest(const std::string& bytes);
std::string serialize_session_manifest(const SessionManifest& m);

} // namespace uiattest
