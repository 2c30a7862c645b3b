#include "uiattest/manifest.hpp"
#include "uiattest/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <set>
#include <sstream>

using nlohmann::json;

namespace uiattest {

const char* to_string(RegionKind k) {
    switch (k) {
        case RegionKind::textual: return "textual";
        case RegionKind::graphical: return "graphical";
        case RegionKind::input: return "input";
    }
    return "?";
}

const Region* PageBreakdown::find(const std::string& id) const {
    for (const auto& r : regions)
        if (r.id == id) return &r;
    return nullptr;
}

std::vector<const Region*> PageBreakdown::of_kind(RegionKind k) const {
    std::vector<const Region*> out;
    for (const auto& r : regions)
        if (r.kind == k) out.push_back(&r);
    return out;
}

namespace {

json parse_json(const std::string& bytes, const char* what) {
    json j = json::parse(bytes, nullptr, false);
    if (j.is_discarded())
        throw ParseError(std::string(what) + ": invalid json");
    return j;
}

Rect rect_from_json(const json& j, const char* what) {
    if (!j.is_object() || !j.contains("x") || !j.contains("y") || !j.contains("w") || !j.contains("h"))
        throw ParseError(std::string(what) + ": rect needs x,y,w,h");
    for (const char* k : {"x", "y", "w", "h"})
        if (!j.at(k).is_number_integer())
            throw ParseError(std::string(what) + ": rect fields must be integers");
    Rect r{j.at("x").get<int>(), j.at("y").get<int>(), j.at("w").get<int>(), j.at("h").get<int>()};
    if (r.w <= 0 || r.h <= 0 || r.x < 0 || r.y < 0)
        throw ParseError(std::string(what) + ": rect must have positive size and non-negative origin");
    return r;
}

json rect_to_json(const Rect& r) {
    return json{{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}};
}

} // namespace

PageBreakdown parse_breakdown(const std::string& bytes) {
    json j = parse_json(bytes, "breakdown");
    PageBreakdown b;
    try {
        b.page_id = j.at("page_id").get<std::string>();
        const json& vp = j.at("viewport");
        b.viewport_w = vp.at("width").get<int>();
        b.viewport_h = vp.at("height").get<int>();
        if (b.viewport_w <= 0 || b.viewport_h <= 0)
            throw ParseError("breakdown: viewport must be positive");
        Rect view{0, 0, b.viewport_w, b.viewport_h};

        std::set<std::string> ids;
        for (const json& rj : j.at("regions")) {
            Region r;
            r.id = rj.at("id").get<std::string>();
            if (!ids.insert(r.id).second)
                throw ParseError("breakdown: duplicate region id " + r.id);
            std::string kind = rj.at("kind").get<std::string>();
            if (kind == "textual") r.kind = RegionKind::textual;
            else if (kind == "graphical") r.kind = RegionKind::graphical;
            else if (kind == "input") r.kind = RegionKind::input;
            else throw ParseError("breakdown: unknown region kind " + kind);
            r.rect = rect_from_json(rj.at("rect"), "breakdown");
            if (!view.contains(r.rect))
                throw ParseError("breakdown: region " + r.id + " leaves the viewport");
            if (rj.contains("label_hint"))
                r.label_hint = rj.at("label_hint").get<std::string>();
            b.regions.push_back(std::move(r));
        }
        b.submit_button = rect_from_json(j.at("submit_button"), "breakdown");
        if (!view.contains(b.submit_button))
            throw ParseError("breakdown: submit_button leaves the viewport");
    } catch (const json::exception& e) {
        throw ParseError(std::string("breakdown: ") + e.what());
    }

    // input rects must not overlap each other
    auto inputs = b.of_kind(RegionKind::input);
    for (size_t i = 0; i < inputs.size(); ++i)
        for (size_t k = i + 1; k < inputs.size(); ++k)
            if (inputs[i]->rect.intersects(inputs[k]->rect))
                throw ParseError("breakdown: input regions " + inputs[i]->id + " and " +
                                 inputs[k]->id + " overlap");
    return b;
}

std::string serialize_breakdown(const PageBreakdown& b) {
    json regions = json::array();
    for (const auto& r : b.regions) {
        json rj{{"id", r.id}, {"kind", to_string(r.kind)}, {"rect", rect_to_json(r.rect)}};
        if (r.label_hint)
            rj["label_hint"] = *r.label_hint;
        regions.push_back(std::move(rj));
    }
    json j{{"page_id", b.page_id},
           {"viewport", {{"width", b.viewport_w}, {"height", b.viewport_h}}},
           {"regions", regions},
           {"submit_button", rect_to_json(b.submit_button)}};
    return j.dump(2) + "\n";
}

RenderingManifest parse_rendering_manifest(const std::string& bytes) {
    json j = parse_json(bytes, "rendering manifest");
    RenderingManifest m;
    try {
        m.width = j.at("width").get<int>();
        m.height = j.at("height").get<int>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("rendering manifest: ") + e.what());
    }
    if (m.width <= 0 || m.height <= 0)
        throw ParseError("rendering manifest: dimensions must be positive");
    return m;
}

std::string serialize_rendering_manifest(const RenderingManifest& m) {
    return json{{"width", m.width}, {"height", m.height}}.dump(2) + "\n";
}

std::vector<HidEvent> parse_hid_log(const std::string& bytes) {
    std::vector<HidEvent> out;
    std::istringstream in(bytes);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::istringstream ls(line);
        HidEvent ev;
        std::string dev, act;
        if (!(ls >> ev.t_ms >> dev >> act))
            throw ParseError("hid log line " + std::to_string(lineno) + ": expected <t> <device> <action>");
        if (ev.t_ms < 0)
            throw ParseError("hid log line " + std::to_string(lineno) + ": negative timestamp");
        if (dev == "keyboard") ev.device = HidDevice::keyboard;
        else if (dev == "mouse") ev.device = HidDevice::mouse;
        else throw ParseError("hid log line " + std::to_string(lineno) + ": unknown device " + dev);
        if (act == "key") ev.action = HidAction::key;
        else if (act == "click") ev.action = HidAction::click;
        else if (act == "move") ev.action = HidAction::move;
        else throw ParseError("hid log line " + std::to_string(lineno) + ": unknown action " + act);
        bool needs_pos = ev.device == HidDevice::mouse;
        if ((ev.device == HidDevice::keyboard) != (ev.action == HidAction::key))
            throw ParseError("hid log line " + std::to_string(lineno) + ": device/action mismatch");
        if (needs_pos) {
            if (!(ls >> ev.x >> ev.y))
                throw ParseError("hid log line " + std::to_string(lineno) + ": mouse event needs x y");
            if (ev.x < 0 || ev.y < 0)
                throw ParseError("hid log line " + std::to_string(lineno) + ": negative position");
        }
        std::string extra;
        if (ls >> extra)
            throw ParseError("hid log line " + std::to_string(lineno) + ": trailing fields");
        if (!out.empty() && ev.t_ms < out.back().t_ms)
            throw ParseError("hid log line " + std::to_string(lineno) + ": timestamps decrease");
        out.push_back(ev);
    }
    return out;
}

std::string serialize_hid_log(const std::vector<HidEvent>& events) {
    std::ostringstream out;
    for (const auto& ev : events) {
        out << ev.t_ms << ' '
            << (ev.device == HidDevice::keyboard ? "keyboard" : "mouse") << ' ';
        switch (ev.action) {
            case HidAction::key: out << "key"; break;
            case HidAction::click: out << "click"; break;
            case HidAction::move: out << "move"; break;
        }
        if (ev.device == HidDevice::mouse)
            out << ' ' << ev.x << ' ' << ev.y;
        out << '\n';
    }
    return out.str();
}

Request parse_request(const std::string& bytes) {
    Request r;
    std::set<std::string> seen;
    size_t pos = 0;
    int lineno = 0;
    while (pos < bytes.size()) {
        size_t nl = bytes.find('\n', pos);
        std::string line = bytes.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? bytes.size() : nl + 1;
        ++lineno;
        if (line.empty())
            continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("request line " + std::to_string(lineno) + ": missing '='");
        std::string label = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        if (!seen.insert(label).second)
            throw ParseError("request: duplicate label " + label);
        r.pairs.emplace_back(std::move(label), std::move(value));
    }
    return r;
}

std::string serialize_request(const Request& r) {
    std::string out;
    for (const auto& [label, value] : r.pairs) {
        out += label;
        out += '=';
        out += value;
        out += '\n';
    }
    return out;
}

SessionManifest parse_session_manifest(const std::string& bytes) {
    json j = parse_json(bytes, "session manifest");
    SessionManifest m;
    try {
        m.start_t_ms = j.at("start_t_ms").get<std::int64_t>();
        m.end_t_ms = j.at("end_t_ms").get<std::int64_t>();
        for (const json& fj : j.at("frames")) {
            FrameRef fr;
            fr.t_ms = fj.at("t_ms").get<std::int64_t>();
            fr.path = fj.at("path").get<std::string>();
            m.frames.push_back(std::move(fr));
        }
        m.hid_path = j.at("hid").get<std::string>();
        m.trusted_path = j.at("trusted").get<std::string>();
        m.breakdown_path = j.at("breakdown").get<std::string>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("session manifest: ") + e.what());
    }
    if (m.frames.empty())
        throw ParseError("session manifest: no frames");
    for (size_t i = 1; i < m.frames.size(); ++i)
        if (m.frames[i].t_ms <= m.frames[i - 1].t_ms)
            throw ParseError("session manifest: frame timestamps must strictly increase");
    if (m.start_t_ms > m.frames.front().t_ms)
        throw ParseError("session manifest: start_t_ms after first frame");
    if (m.end_t_ms < m.frames.back().t_ms)
        throw ParseError("session manifest: end_t_ms before last frame");
    return m;
}

std::string serialize_session_manifest(const SessionManifest& m) {
    json frames = json::array();
    for (const auto& fr : m.frames)
        frames.push_back(json{{"t_ms", fr.t_ms}, {"path", fr.path}});
    json j{{"start_t_ms", m.start_t_ms}, {"end_t_ms", m.end_t_ms},  {"frames", frames},
           {"hid", m.hid_path},          {"trusted", m.trusted_path}, {"breakdown", m.breakdown_path}};
    return j.dump(2) + "\n";
}

} // namespace uiattest
