#pragma once

// Tick arithmetic: time signatures from measure lengths, tick<->seconds,
// and the notated-duration code used by the gp5 files.

#include <optional>
#include <string>

#include "tabtok/song.hpp"

namespace tabtok {

struct InferredSignature {
    TimeSignature signature;
    bool rounded = false;  // true when the span was not exactly representable
};

// Maps a measure's total ticks to a time signature. Quarter multiples win,
// then eighths, then sixteenths; anything else rounds to the nearest
// sixteenth count (at least 1) and sets `rounded`.
InferredSignature infer_time_signature(long long span_ticks);

// Seconds spent over `ticks` at a fixed tempo. Exact wherever the quotient
// is representable: computed as one division of exact integer products.
double ticks_to_seconds(long long ticks, int tempo_bpm);

// Notated duration <-> ticks. `code` is the stored exponent: -2 whole ... 4
// sixty-fourth, i.e. base = 3840 >> (code + 2). Dot scales 3/2; a tuplet of
// n notes fills the time of m, scaling m/n.
struct DurationCode {
    int code = 0;
    bool dotted = false;
    int tuplet_enters = 1;  // n; 1 = no tuplet
    int tuplet_times = 1;   // m
    bool operator==(const DurationCode&) const = default;
};

// Ticks for a stored code. Non-integral results round to nearest (ties up)
// and report it, so callers can count the coarsening.
struct DecodedDuration {
    int ticks = 0;
    bool rounded = false;
};
DecodedDuration duration_from_code(const DurationCode& code);

// Best stored code for a tick count: exact plain/dotted/triplet match when
// one exists, otherwise the longest representable duration that fits (the
// remainder is carried by the caller as extra rest time). Ticks below the
// shortest representable value map to the sixty-fourth triplet.
DurationCode duration_to_code(int ticks);

// True when the tick count is exactly a plain, dotted or triplet power-of-two
// duration (whole .. sixty-fourth).
bool duration_representable(int ticks);

// Staff name for common tick values ("quarter", "eighth triplet", ...),
// nullopt for everything else.
std::optional<std::string> duration_name(int ticks);

// Tuplet "times" for a stored enters count (3->2, 5..7->4, 9..13->8).
std::optional<int> tuplet_times_for(int enters);

}  // namespace tabtok
