#pragma once

// In-memory score model. Times are integer ticks, 960 per quarter note.
// A measure's beats tile its span: sorted by onset, gap-free, rests explicit.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tabtok {

inline constexpr int kTicksPerQuarter = 960;
inline constexpr int kMaxStrings = 7;

// Playback slots a normalized song may use, in canonical order.
enum class Slot : uint8_t {
    distorted0,
    distorted1,
    distorted2,
    clean0,
    clean1,
    bass,
    drums,
    leads,
    pads,
};
inline constexpr int kSlotCount = 9;

const char* slot_name(Slot slot);
std::optional<Slot> slot_from_name(std::string_view name);
constexpr bool slot_is_percussion(Slot slot) { return slot == Slot::drums; }

struct TimeSignature {
    int numerator = 4;
    int denominator = 4;
    bool operator==(const TimeSignature&) const = default;
};

// Measure length implied by a time signature, in ticks.
constexpr int span_ticks(TimeSignature ts) {
    return ts.numerator * (4 * kTicksPerQuarter) / ts.denominator;
}

struct BendPoint {
    int position = 0;  // 0..60 across the note's duration
    int value = 0;     // 25 units per quarter tone, may be negative
    bool vibrato = false;
    bool operator==(const BendPoint&) const = default;
};

struct Bend {
    int type = 1;   // shape id as stored in the file
    int value = 0;  // peak, 25 units per quarter tone
    std::vector<BendPoint> points;
    bool operator==(const Bend&) const = default;
};

enum class SlideKind : uint8_t { shift, legato, out_down, out_up, into_below, into_above };
enum class HarmonicKind : uint8_t { natural, artificial, tapped, pinch, semi };

struct Grace {
    int fret = 0;
    int duration = 1;    // 1 thirty-second, 2 twenty-fourth, 3 sixteenth
    int transition = 0;  // 0 none, 1 slide, 2 bend, 3 hammer
    bool dead = false;
    bool on_beat = false;
    bool operator==(const Grace&) const = default;
};

struct Trill {
    int fret = 0;
    int period = 1;  // 1 sixteenth, 2 thirty-second, 3 sixty-fourth
    bool operator==(const Trill&) const = default;
};

// Closed set of note ornaments. tie/let_ring/ghost_note exist as kinds so
// tokens can name them, but on a Note they live as flags, never in `effects`.
enum class NoteFxKind : uint8_t {
    palm_mute,
    bend,
    vibrato,
    slide,
    hammer,
    tie,
    let_ring,
    ghost_note,
    accentuated_note,
    heavy_accentuated_note,
    harmonic,
    staccato,
    trill,
    grace,
    tremolo_picking,
};

const char* note_fx_name(NoteFxKind kind);
const char* slide_name(SlideKind kind);
std::optional<SlideKind> slide_from_name(std::string_view name);
const char* harmonic_name(HarmonicKind kind);
std::optional<HarmonicKind> harmonic_from_name(std::string_view name);

struct NoteFx {
    NoteFxKind kind = NoteFxKind::palm_mute;
    // Payload, valid per kind.
    Bend bend;                                      // bend
    SlideKind slide = SlideKind::shift;             // slide
    HarmonicKind harmonic = HarmonicKind::natural;  // harmonic
    Trill trill;                                    // trill
    Grace grace;                                    // grace
    int tremolo_speed = 1;                          // tremolo_picking: 1..3

    bool operator==(const NoteFx&) const = default;
};

// Orders a note's effects for storage and rendering: by kind, slides by sub-kind.
bool note_fx_less(const NoteFx& a, const NoteFx& b);

// Keeps `effects` sorted and unique. At most one effect per kind, except
// slide where the sub-kind is part of the key. First insert wins.
// tie/let_ring/ghost_note are rejected (they are Note flags).
bool add_note_fx(std::vector<NoteFx>& effects, const NoteFx& fx);

enum class BeatFxKind : uint8_t { tempo_change, upstroke, downstroke, fade_in };

const char* beat_fx_name(BeatFxKind kind);

struct BeatFx {
    BeatFxKind kind = BeatFxKind::fade_in;
    int tempo_bpm = 0;  // tempo_change only
    bool operator==(const BeatFx&) const = default;
};

// Sorted-unique by kind, first insert wins; a beat carries at most one
// stroke direction, whichever arrived first.
bool add_beat_fx(std::vector<BeatFx>& effects, const BeatFx& fx);

struct Note {
    // Pitched tracks: string 1 = highest course, fret >= 0. Percussion
    // tracks: `percussion` holds the MIDI drum number (35..81), string/fret 0.
    int string = 0;
    int fret = 0;
    int percussion = 0;
    bool ghost = false;
    bool tied = false;
    bool let_ring = false;
    std::vector<NoteFx> effects;  // sorted per note_fx_less
    bool operator==(const Note&) const = default;
};

struct Beat {
    int onset = 0;     // ticks from measure start
    int duration = 0;  // ticks, > 0
    // Empty = rest. Pitched: sorted by string, one note per string.
    // Percussion: sorted by drum number, unique.
    std::vector<Note> notes;
    std::vector<BeatFx> effects;
    bool is_rest() const { return notes.empty(); }
    bool operator==(const Beat&) const = default;
};

struct Measure {
    std::vector<Beat> beats;
    bool operator==(const Measure&) const = default;
};

struct MeasureHeader {
    int index = 0;  // 0-based
    TimeSignature time_signature;
    std::optional<int> tempo_change;  // new bpm from this measure on
    bool operator==(const MeasureHeader&) const = default;
};

struct Track {
    Slot slot = Slot::clean0;
    bool percussion = false;
    int string_count = 6;
    std::vector<int> tuning;  // MIDI note per string, highest first; empty for percussion
    std::vector<Measure> measures;
    bool operator==(const Track&) const = default;
};

struct Song {
    std::string artist;
    std::string title;
    int initial_tempo = 120;  // bpm
    int downtune = 0;         // semitones, <= 0
    std::vector<MeasureHeader> headers;
    std::vector<Track> tracks;  // at most one per slot, canonical slot order
    bool operator==(const Song&) const = default;
};

// True when measure `index` is content-identical to its predecessor:
// same span, same tempo change, same beats on every track.
bool measure_repeats_previous(const Song& song, int index);

// Standard tunings, highest string first.
const std::vector<int>& standard_tuning(bool bass, int string_count);  // empty if none

// Checks the structural invariants writers and encoders rely on. Returns a
// description of the first violation, or nullopt when the song is sound.
std::optional<std::string> check_song(const Song& song);

}  // namespace tabtok
