#pragma once

#include "uiattest/pof.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace uiattest {

struct FieldState {
    std::string label;
    std::string value;
    // most recent selection seen in this field, glyph columns [a,b);
    // consumed by a matching deletion, dropped on any other accepted edit
    // or when a plain caret shows up in the field
    std::optional<std::pair<int, int>> last_selection;
};

// Per-field state carried across sampled frames. The digest keys the frame
// cache: a frame only means the same thing when the history behind it is
// the same.
struct InputHistory {
    std::map<std::string, FieldState> fields; // region id -> state

    Digest digest() const;
};

enum class EditKind { none, left_insert, adjacent_delete, selection_delete, violation };
const char* to_string(EditKind k);

struct EditClass {
    EditKind kind = EditKind::none;
    std::string inserted;                    // left_insert payload
    std::pair<int, int> removed{0, 0};       // delete span [i,j)
    std::string reason;                      // violation detail
};

// Decides whether new_value can follow old_value as one legal user edit in
// region_id, given where the indicators sit. Inserts must leave the caret
// at the end of the inserted run (or one short of it, covering renders
// sampled right before the final caret repaint, when relax_one is set).
// Deletions must leave the caret at the cut; a cut matching the recorded
// selection is a selection_delete.
EditClass classify_edit(const std::string& old_value, const std::string& new_value,
                        const PofState& pof, const FieldState& field,
                        const std::string& region_id, bool relax_one = true);

struct LabelResult {
    std::optional<std::string> label;
    std::string err;
};

// Label of an input: the label_hint when the breakdown carries one, else
// the nearest textual region that ends left of the input and overlaps it
// vertically by at least half the input height, read through ocr.
LabelResult extract_label(const Frame& frame, const Region& input,
                          const PageBreakdown& breakdown, const OcrFn& ocr);

// True when some event falls in (t_ms - window_ms, t_ms]. Events must be
// sorted by time.
bool correlate_hid(std::int64_t t_ms, const std::vector<HidEvent>& events, double window_ms);

} // namespace uiattest
