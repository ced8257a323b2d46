#include "tabtok/song.hpp"

#include <algorithm>
#include <array>

namespace tabtok {

namespace {

constexpr std::array<const char*, kSlotCount> kSlotNames = {
    "distorted0", "distorted1", "distorted2", "clean0", "clean1",
    "bass",       "drums",      "leads",      "pads",
};

constexpr std::array<const char*, 15> kNoteFxNames = {
    "palm_mute", "bend",       "vibrato",          "slide",
    "hammer",    "tie",        "let_ring",         "ghost_note",
    "accentuated_note",        "heavy_accentuated_note",
    "harmonic",  "staccato",   "trill",            "grace",
    "tremolo_picking",
};

constexpr std::array<const char*, 6> kSlideNames = {
    "shift", "legato", "out_down", "out_up", "into_below", "into_above",
};

constexpr std::array<const char*, 5> kHarmonicNames = {
    "natural", "artificial", "tapped", "pinch", "semi",
};

constexpr std::array<const char*, 4> kBeatFxNames = {
    "tempo_change", "upstroke", "downstroke", "fade_in",
};

const std::vector<int> kGuitar6 = {64, 59, 55, 50, 45, 40};
const std::vector<int> kGuitar7 = {64, 59, 55, 50, 45, 40, 35};
const std::vector<int> kBass4 = {43, 38, 33, 28};
const std::vector<int> kBass5 = {43, 38, 33, 28, 23};
const std::vector<int> kBass6 = {48, 43, 38, 33, 28, 23};
const std::vector<int> kNoTuning = {};

}  // namespace

const char* slot_name(Slot slot) { return kSlotNames[static_cast<size_t>(slot)]; }

std::optional<Slot> slot_from_name(std::string_view name) {
    for (size_t i = 0; i < kSlotNames.size(); ++i) {
        if (name == kSlotNames[i]) return static_cast<Slot>(i);
    }
    return std::nullopt;
}

const char* note_fx_name(NoteFxKind kind) { return kNoteFxNames[static_cast<size_t>(kind)]; }
const char* slide_name(SlideKind kind) { return kSlideNames[static_cast<size_t>(kind)]; }
const char* harmonic_name(HarmonicKind kind) { return kHarmonicNames[static_cast<size_t>(kind)]; }
const char* beat_fx_name(BeatFxKind kind) { return kBeatFxNames[static_cast<size_t>(kind)]; }

std::optional<SlideKind> slide_from_name(std::string_view name) {
    for (size_t i = 0; i < kSlideNames.size(); ++i) {
        if (name == kSlideNames[i]) return static_cast<SlideKind>(i);
    }
    return std::nullopt;
}

std::optional<HarmonicKind> harmonic_from_name(std::string_view name) {
    for (size_t i = 0; i < kHarmonicNames.size(); ++i) {
        if (name == kHarmonicNames[i]) return static_cast<HarmonicKind>(i);
    }
    return std::nullopt;
}

bool note_fx_less(const NoteFx& a, const NoteFx& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.kind == NoteFxKind::slide) return a.slide < b.slide;
    return false;
}

bool add_note_fx(std::vector<NoteFx>& effects, const NoteFx& fx) {
    if (fx.kind == NoteFxKind::tie || fx.kind == NoteFxKind::let_ring ||
        fx.kind == NoteFxKind::ghost_note) {
        return false;
    }
    auto pos = std::lower_bound(effects.begin(), effects.end(), fx, note_fx_less);
    if (pos != effects.end() && !note_fx_less(fx, *pos)) return false;  // key taken
    effects.insert(pos, fx);
    return true;
}

bool add_beat_fx(std::vector<BeatFx>& effects, const BeatFx& fx) {
    const bool is_stroke =
        fx.kind == BeatFxKind::upstroke || fx.kind == BeatFxKind::downstroke;
    for (const BeatFx& present : effects) {
        if (present.kind == fx.kind) return false;
        if (is_stroke && (present.kind == BeatFxKind::upstroke ||
                          present.kind == BeatFxKind::downstroke)) {
            return false;  // one stroke direction per beat
        }
    }
    auto pos = std::lower_bound(
        effects.begin(), effects.end(), fx,
        [](const BeatFx& a, const BeatFx& b) { return a.kind < b.kind; });
    effects.insert(pos, fx);
    return true;
}

bool measure_repeats_previous(const Song& song, int index) {
    if (index <= 0 || index >= static_cast<int>(song.headers.size())) return false;
    const MeasureHeader& cur = song.headers[index];
    const MeasureHeader& prev = song.headers[index - 1];
    if (span_ticks(cur.time_signature) != span_ticks(prev.time_signature)) return false;
    if (cur.tempo_change != prev.tempo_change) return false;
    for (const Track& track : song.tracks) {
        if (index >= static_cast<int>(track.measures.size())) return false;
        if (track.measures[index].beats != track.measures[index - 1].beats) return false;
    }
    return true;
}

const std::vector<int>& standard_tuning(bool bass, int string_count) {
    if (bass) {
        switch (string_count) {
            case 4: return kBass4;
            case 5: return kBass5;
            case 6: return kBass6;
            default: return kNoTuning;
        }
    }
    switch (string_count) {
        case 6: return kGuitar6;
        case 7: return kGuitar7;
        default: return kNoTuning;
    }
}

namespace {

std::optional<std::string> check_note(const Track& track, const Note& note) {
    if (track.percussion) {
        if (note.string != 0 || note.fret != 0)
            return "percussion note with string/fret set";
        if (note.percussion < 35 || note.percussion > 81)
            return "percussion number outside 35..81";
        return std::nullopt;
    }
    if (note.percussion != 0) return "pitched note with percussion number";
    if (note.string < 1 || note.string > track.string_count)
        return "note string outside track range";
    if (note.fret < 0 || note.fret > 99) return "fret outside 0..99";
    for (const NoteFx& fx : note.effects) {
        if (fx.kind == NoteFxKind::tie || fx.kind == NoteFxKind::let_ring ||
            fx.kind == NoteFxKind::ghost_note) {
            return "flag-kind effect stored in effect set";
        }
    }
    if (!std::is_sorted(note.effects.begin(), note.effects.end(), note_fx_less))
        return "note effects not in canonical order";
    for (size_t i = 1; i < note.effects.size(); ++i) {
        if (!note_fx_less(note.effects[i - 1], note.effects[i]))
            return "duplicate note effect kind";
    }
    return std::nullopt;
}

std::optional<std::string> check_measure(const Track& track, const Measure& measure,
                                         int span) {
    int cursor = 0;
    for (const Beat& beat : measure.beats) {
        if (beat.onset != cursor) return "beats do not tile the measure";
        if (beat.duration <= 0) return "non-positive beat duration";
        cursor = beat.onset + beat.duration;
        if (cursor > span) return "beat extends past measure span";
        int last_key = -1;
        if (static_cast<int>(beat.notes.size()) > (track.percussion ? 6 : track.string_count))
            return "too many notes in one beat";
        for (const Note& note : beat.notes) {
            if (auto issue = check_note(track, note)) return issue;
            int key = track.percussion ? note.percussion : note.string;
            if (key <= last_key) return "beat notes unsorted or duplicated";
            last_key = key;
        }
        for (const BeatFx& fx : beat.effects) {
            if (fx.kind == BeatFxKind::tempo_change)
                return "tempo change stored on a beat (belongs to the header)";
        }
        int stroke_count = 0;
        for (size_t i = 0; i < beat.effects.size(); ++i) {
            if (i > 0 && !(beat.effects[i - 1].kind < beat.effects[i].kind))
                return "beat effects unsorted or duplicated";
            if (beat.effects[i].kind == BeatFxKind::upstroke ||
                beat.effects[i].kind == BeatFxKind::downstroke) {
                ++stroke_count;
            }
        }
        if (stroke_count > 1) return "both stroke directions on one beat";
    }
    if (!measure.beats.empty() && cursor != span)
        return "beats do not cover the measure span";
    return std::nullopt;
}

}  // namespace

std::optional<std::string> check_song(const Song& song) {
    if (song.initial_tempo <= 0) return "non-positive tempo";
    if (song.downtune > 0 || song.downtune < -12) return "downtune outside -12..0";
    for (size_t i = 0; i < song.headers.size(); ++i) {
        const MeasureHeader& header = song.headers[i];
        if (header.index != static_cast<int>(i)) return "header index out of sequence";
        if (header.time_signature.numerator < 1 || header.time_signature.numerator > 32)
            return "time signature numerator outside 1..32";
        int den = header.time_signature.denominator;
        if (den != 1 && den != 2 && den != 4 && den != 8 && den != 16 && den != 32)
            return "time signature denominator not a power of two";
        if (header.tempo_change && *header.tempo_change <= 0)
            return "non-positive tempo change";
    }
    bool slot_seen[kSlotCount] = {};
    const Track* previous = nullptr;
    for (const Track& track : song.tracks) {
        size_t slot_index = static_cast<size_t>(track.slot);
        if (slot_index >= kSlotCount) return "invalid slot";
        if (slot_seen[slot_index]) return "two tracks on one slot";
        slot_seen[slot_index] = true;
        if (previous && !(previous->slot < track.slot))
            return "tracks not in slot order";
        previous = &track;
        if (track.percussion != (track.slot == Slot::drums))
            return "percussion flag does not match slot";
        if (track.percussion) {
            if (!track.tuning.empty()) return "percussion track with tuning";
        } else {
            if (track.slot == Slot::bass) {
                if (track.string_count < 4 || track.string_count > 6)
                    return "bass string count outside 4..6";
            } else if (track.string_count < 6 || track.string_count > 7) {
                return "guitar string count outside 6..7";
            }
            if (static_cast<int>(track.tuning.size()) != track.string_count)
                return "tuning length does not match string count";
            for (int pitch : track.tuning) {
                if (pitch < 0 || pitch > 127) return "tuning pitch outside MIDI range";
            }
        }
        if (track.measures.size() != song.headers.size())
            return "track measure count does not match headers";
        for (size_t m = 0; m < track.measures.size(); ++m) {
            int span = span_ticks(song.headers[m].time_signature);
            if (auto issue = check_measure(track, track.measures[m], span)) {
                return "measure " + std::to_string(m) + ": " + *issue;
            }
        }
    }
    return std::nullopt;
}

}  // namespace tabtok
