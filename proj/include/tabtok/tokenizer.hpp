#pragma once

// Song <-> token-stream codec plus the musical-equivalence relation the
// round-trip guarantees are stated in.

#include <map>
#include <string>
#include <vector>

#include "tabtok/song.hpp"
#include "tabtok/token.hpp"

namespace tabtok {

struct EncodeConfig {
    bool emit_measure_repeat = true;  // use measure:repeat for identical measures
};

// Serializes a normalized song (one track per slot, tiled measures; see
// check_song) into the canonical stream: header, then per measure either
// new_measure or measure:repeat followed by one time-ordered event stream.
// Equal-tick events order by slot, then string / drum number; a note's nfx
// follow it directly; a beat's bfx follow its last note; waits are merged
// and per measure sum exactly to the measure span. Throws ContractError on
// songs that violate the model invariants.
std::vector<Token> encode(const Song& song, const EncodeConfig& config = {});

struct DecodeResult {
    Song song;
    // What the stream contained but the song cannot carry, by reason:
    // e.g. "unknown_token", "orphan_nfx", "duplicate_string_note".
    std::map<std::string, int> skipped;
};

// Total: any token stream yields a song. Reads at most one artist/downtune/
// tempo (first wins, defaults "unknown"/0/120), starts at the first token,
// stops at the first `end`. Content before a measure token opens a measure;
// measure:repeat clones the previous measure. Tracks appear on first use of
// their slot and grow strings on demand within the slot family's limit.
DecodeResult decode(const std::vector<Token>& tokens);

// True when the stream is a fixed point of decode-then-encode, i.e. exactly
// what encode would emit for the song it describes.
bool is_canonical(const std::vector<Token>& tokens);

// One sounding note for equivalence checks: let_ring stretches a note to
// the end of its measure, cut short at the next onset on the same string.
struct SoundingNote {
    Slot slot = Slot::distorted0;
    int measure = 0;
    int onset = 0;  // ticks from measure start
    int string = 0;
    int fret = 0;
    int percussion = 0;
    int duration = 0;  // sounding ticks
    bool ghost = false;
    bool tied = false;
    std::vector<NoteFx> effects;
    bool operator==(const SoundingNote&) const = default;
    bool operator<(const SoundingNote& other) const;
};

std::vector<SoundingNote> sounding_notes(const Song& song);

struct EquivalenceReport {
    bool equivalent = true;
    std::vector<std::string> differences;  // human-readable, first few only
};

// Same performance, not same bytes: normalized artist, downtune, initial
// tempo, measure spans (compared after re-inference, so equal-length
// signatures match), tempo changes, and per-slot sounding notes with their
// flags and effects. Rests and empty tracks are not part of the relation.
EquivalenceReport musically_equivalent(const Song& a, const Song& b);

}  // namespace tabtok
