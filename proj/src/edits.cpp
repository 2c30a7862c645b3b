#include "uiattest/edits.hpp"

#include <algorithm>

namespace uiattest {

Digest InputHistory::digest() const {
    std::string buf;
    for (const auto& [id, f] : fields) {
        buf += id;
        buf += '\x1f';
        buf += f.label;
        buf += '\x1f';
        buf += f.value;
        buf += '\x1f';
        if (f.last_selection) {
            buf += std::to_string(f.last_selection->first);
            buf += ',';
            buf += std::to_string(f.last_selection->second);
        }
        buf += '\x1e';
    }
    return sha256(buf);
}

const char* to_string(EditKind k) {
    switch (k) {
    case EditKind::none: return "none";
    case EditKind::left_insert: return "left_insert";
    case EditKind::adjacent_delete: return "adjacent_delete";
    case EditKind::selection_delete: return "selection_delete";
    case EditKind::violation: return "violation";
    }
    return "?";
}

EditClass classify_edit(const std::string& old_value, const std::string& new_value,
                        const PofState& pof, const FieldState& field,
                        const std::string& region_id, bool relax_one) {
    EditClass ec;
    if (old_value == new_value)
        return ec;

    std::optional<int> caret;
    if (pof.caret && pof.caret->region == region_id)
        caret = pof.caret->column;

    const auto no = [&](std::string why) {
        ec.kind = EditKind::violation;
        ec.reason = std::move(why);
        return ec;
    };

    if (new_value.size() > old_value.size()) {
        if (!caret)
            return no("value grew without a caret in the region");
        size_t len = new_value.size() - old_value.size();
        for (size_t p = 0; p <= old_value.size(); ++p) {
            if (new_value.compare(0, p, old_value, 0, p) != 0)
                break; // prefixes only shrink from here on
            if (new_value.compare(p + len, std::string::npos, old_value, p, std::string::npos) != 0)
                continue;
            int at_end = static_cast<int>(p + len);
            if (*caret == at_end || (relax_one && *caret == at_end - 1)) {
                ec.kind = EditKind::left_insert;
                ec.inserted = new_value.substr(p, len);
                return ec;
            }
        }
        return no("insertion does not end at the caret");
    }

    if (new_value.size() < old_value.size()) {
        size_t len = old_value.size() - new_value.size();
        bool shape_ok = false;
        for (size_t i = 0; i <= new_value.size(); ++i) {
            if (old_value.compare(0, i, new_value, 0, i) != 0)
                break;
            if (old_value.compare(i + len, std::string::npos, new_value, i, std::string::npos) != 0)
                continue;
            shape_ok = true;
            std::pair<int, int> span{static_cast<int>(i), static_cast<int>(i + len)};
            if (field.last_selection && *field.last_selection == span) {
                ec.kind = EditKind::selection_delete;
                ec.removed = span;
                return ec;
            }
            if (caret && *caret == span.first) {
                ec.kind = EditKind::adjacent_delete;
                ec.removed = span;
                return ec;
            }
        }
        if (!shape_ok)
            return no("removal is not one contiguous span");
        return no(caret ? "deletion does not end at the caret"
                        : "value shrank without a caret or recorded selection");
    }

    return no("replacement is not a single insert or delete");
}

LabelResult extract_label(const Frame& frame, const Region& input,
                          const PageBreakdown& breakdown, const OcrFn& ocr) {
    if (input.label_hint)
        return {*input.label_hint, {}};

    const Region* best = nullptr;
    for (const auto& r : breakdown.regions) {
        if (r.kind != RegionKind::textual || r.rect.right() > input.rect.x)
            continue;
        int lo = std::max(r.rect.y, input.rect.y);
        int hi = std::min(r.rect.bottom(), input.rect.bottom());
        if ((hi - lo) * 2 < input.rect.h)
            continue;
        if (!best || r.rect.right() > best->rect.right())
            best = &r;
    }
    if (!best)
        return {std::nullopt, "no textual region qualifies as a label"};
    std::string text = normalize_text(ocr(crop(frame, best->rect)).text);
    if (text.empty())
        return {std::nullopt, "label region \"" + best->id + "\" reads as empty"};
    return {text, {}};
}

bool correlate_hid(std::int64_t t_ms, const std::vector<HidEvent>& events, double window_ms) {
    auto it = std::upper_bound(events.begin(), events.end(), t_ms,
                               [](std::int64_t t, const HidEvent& e) { return t < e.t_ms; });
    if (it == events.begin())
        return false;
    --it;
    return static_cast<double>(t_ms - it->t_ms) < window_ms;
}

} // namespace uiattest
