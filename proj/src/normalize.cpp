#include "tabtok/normalize.hpp"

#include <algorithm>
#include <map>

#include "tabtok/errors.hpp"

namespace tabtok {

namespace {

enum class Family { distorted, clean, bass, drums, pads, leads };

Family family_of(const RawTrackInfo& info) {
    if (info.percussion) return Family::drums;
    int p = info.midi_program;
    if (p >= 29 && p <= 31) return Family::distorted;
    if (p >= 24 && p <= 28) return Family::clean;
    if (p >= 32 && p <= 39) return Family::bass;
    if ((p >= 16 && p <= 23) || (p >= 40 && p <= 54) || (p >= 88 && p <= 95))
        return Family::pads;
    return Family::leads;
}

const std::vector<Slot>& family_slots(Family family) {
    static const std::vector<Slot> distorted = {Slot::distorted0, Slot::distorted1,
                                                Slot::distorted2};
    static const std::vector<Slot> clean = {Slot::clean0, Slot::clean1};
    static const std::vector<Slot> bass = {Slot::bass};
    static const std::vector<Slot> drums = {Slot::drums};
    static const std::vector<Slot> pads = {Slot::pads};
    static const std::vector<Slot> leads = {Slot::leads};
    switch (family) {
        case Family::distorted: return distorted;
        case Family::clean: return clean;
        case Family::bass: return bass;
        case Family::drums: return drums;
        case Family::pads: return pads;
        case Family::leads: return leads;
    }
    return leads;
}

}  // namespace

std::vector<Slot> assign_instrument_slots(const std::vector<RawTrackInfo>& tracks) {
    if (tracks.empty()) throw ContractError("slot assignment needs at least one track");
    std::map<Family, size_t> used;
    std::vector<Slot> out;
    out.reserve(tracks.size());
    for (const RawTrackInfo& info : tracks) {
        Family family = family_of(info);
        const std::vector<Slot>& slots = family_slots(family);
        size_t next = used[family]++;
        out.push_back(slots[std::min(next, slots.size() - 1)]);
    }
    return out;
}

namespace {

// Onset-aligned union of measures. Key extraction and capacity differ
// between percussion (drum number, 6 lanes) and pitched (string) tracks.
Measure merge_measures(const Measure& a, const Measure& b, bool percussion,
                       int capacity) {
    Measure out;
    size_t ia = 0, ib = 0;
    auto key_of = [percussion](const Note& note) {
        return percussion ? note.percussion : note.string;
    };
    while (ia < a.beats.size() || ib < b.beats.size()) {
        const Beat* pa = ia < a.beats.size() ? &a.beats[ia] : nullptr;
        const Beat* pb = ib < b.beats.size() ? &b.beats[ib] : nullptr;
        if (pa && pb && pa->onset == pb->onset) {
            Beat merged = *pa;
            for (const Note& note : pb->notes) {
                bool taken = false;
                for (const Note& present : merged.notes) {
                    if (key_of(present) == key_of(note)) {
                        taken = true;  // earlier track wins
                        break;
                    }
                }
                if (!taken && static_cast<int>(merged.notes.size()) < capacity) {
                    merged.notes.push_back(note);
                }
            }
            std::sort(merged.notes.begin(), merged.notes.end(),
                      [&](const Note& x, const Note& y) { return key_of(x) < key_of(y); });
            for (const BeatFx& fx : pb->effects) add_beat_fx(merged.effects, fx);
            out.beats.push_back(std::move(merged));
            ++ia;
            ++ib;
        } else if (pa && (!pb || pa->onset < pb->onset)) {
            out.beats.push_back(*pa);
            ++ia;
        } else {
            out.beats.push_back(*pb);
            ++ib;
        }
    }
    // Re-tile durations so the union stays contiguous; the final beat covers
    // to the further of the two source ends.
    if (!out.beats.empty()) {
        auto end_of = [](const Measure& m) {
            return m.beats.empty() ? 0 : m.beats.back().onset + m.beats.back().duration;
        };
        int final_end = std::max(end_of(a), end_of(b));
        for (size_t i = 0; i < out.beats.size(); ++i) {
            int next = i + 1 < out.beats.size() ? out.beats[i + 1].onset : final_end;
            out.beats[i].duration = next - out.beats[i].onset;
        }
    }
    return out;
}

Track merge_tracks(const std::vector<Track>& tracks, bool percussion, int capacity) {
    if (tracks.empty()) throw ContractError("merge needs at least one track");
    for (const Track& track : tracks) {
        if (track.percussion != percussion)
            throw ContractError("merge inputs mix percussion and pitched tracks");
        if (track.measures.size() != tracks.front().measures.size())
            throw ContractError("merge inputs have different measure counts");
    }
    Track out = tracks.front();
    for (size_t t = 1; t < tracks.size(); ++t) {
        for (size_t m = 0; m < out.measures.size(); ++m) {
            out.measures[m] = merge_measures(out.measures[m], tracks[t].measures[m],
                                             percussion, capacity);
        }
    }
    return out;
}

}  // namespace

Track merge_drum_tracks(const std::vector<Track>& tracks) {
    Track out = merge_tracks(tracks, true, 6);
    out.slot = Slot::drums;
    return out;
}

Track merge_overflow_tracks(const std::vector<Track>& tracks) {
    return merge_tracks(tracks, false, tracks.front().string_count);
}

std::variant<TuningReport, TuningRejection> validate_tuning(const Song& song) {
    TuningReport report;
    bool have_offset = false;
    for (const Track& track : song.tracks) {
        if (track.percussion) continue;
        const std::vector<int>& standard =
            standard_tuning(track.slot == Slot::bass, track.string_count);
        if (standard.empty() ||
            track.tuning.size() != static_cast<size_t>(track.string_count)) {
            return TuningRejection{"unsupported tuning"};
        }
        int n = track.string_count;
        int offset = track.tuning[0] - standard[0];
        bool dropped = false;
        for (int i = 0; i < n; ++i) {
            int d = track.tuning[i] - standard[i];
            if (d == offset) continue;
            if (i == n - 1 && d == offset - 2) {
                dropped = true;
                continue;
            }
            return TuningRejection{"unsupported tuning"};
        }
        if (offset > 0 || offset < -12) return TuningRejection{"unsupported tuning"};
        if (have_offset && offset != report.downtune)
            return TuningRejection{"mixed downtune"};
        report.downtune = offset;
        have_offset = true;
        report.tracks.push_back({offset, dropped});
    }
    return report;
}

NormalizeResult normalize(Song song) {
    NormalizeResult result;
    // Fold same-slot tracks together, preserving first-appearance order
    // inside each slot, then order the survivors by slot.
    std::map<Slot, std::vector<Track>> by_slot;
    std::vector<Slot> slot_order;
    for (Track& track : song.tracks) {
        if (by_slot.find(track.slot) == by_slot.end()) slot_order.push_back(track.slot);
        by_slot[track.slot].push_back(std::move(track));
    }
    song.tracks.clear();
    for (Slot slot : slot_order) {
        std::vector<Track>& group = by_slot[slot];
        if (group.size() == 1) {
            song.tracks.push_back(std::move(group.front()));
            continue;
        }
        result.merged[slot_name(slot)] = static_cast<int>(group.size() - 1);
        song.tracks.push_back(slot == Slot::drums ? merge_drum_tracks(group)
                                                  : merge_overflow_tracks(group));
    }
    std::sort(song.tracks.begin(), song.tracks.end(),
              [](const Track& a, const Track& b) { return a.slot < b.slot; });
    result.tuning = validate_tuning(song);
    if (const TuningReport* tuning = std::get_if<TuningReport>(&result.tuning)) {
        song.downtune = tuning->downtune;
    } else {
        song.downtune = 0;
    }
    result.song = std::move(song);
    return result;
}

}  // namespace tabtok
