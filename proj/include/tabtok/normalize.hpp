#pragma once

// Normalization: squeeze an arbitrary multi-track score into the nine
// playback slots, fold duplicate drum tracks, and reduce per-track tunings
// to one whole-song downtune.

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "tabtok/song.hpp"

namespace tabtok {

struct RawTrackInfo {
    int midi_program = 0;
    bool percussion = false;
};

// One slot per input track, same order. Families fill in slot order
// (distorted0..2, clean0..1); overflow lands on the family's last slot.
std::vector<Slot> assign_instrument_slots(const std::vector<RawTrackInfo>& tracks);

// Union of several percussion tracks with identical measure counts: beats
// merge per onset, duplicate drum numbers collapse (first track wins).
// Throws ContractError on empty input or measure-count mismatch.
Track merge_drum_tracks(const std::vector<Track>& tracks);

// Same idea for pitched tracks sharing a slot: per-onset union with one
// note per string, earlier track wins. Tuning/string count come from the
// first track. Throws ContractError on empty input or count mismatch.
Track merge_overflow_tracks(const std::vector<Track>& tracks);

struct TrackTuning {
    int offset = 0;      // semitones relative to standard, <= 0
    bool dropped = false;  // lowest string an extra 2 below the offset
};

struct TuningReport {
    int downtune = 0;
    std::vector<TrackTuning> tracks;  // pitched tracks, song order
};

struct TuningRejection {
    std::string reason;  // "mixed downtune" or "unsupported tuning"
};

// Accepts songs whose pitched tracks all sit a uniform k <= 0 semitones
// below standard tuning, with an optional dropped lowest string per track.
std::variant<TuningReport, TuningRejection> validate_tuning(const Song& song);

struct NormalizeResult {
    Song song;
    std::variant<TuningReport, TuningRejection> tuning;
    std::map<std::string, int> merged;  // slot name -> extra tracks folded in
};

// Full pipeline: slot assignment, drum and overflow merging, slot-order
// sort, tuning reduction onto Song.downtune. The returned song has at most
// one track per slot. A tuning rejection leaves downtune at 0.
NormalizeResult normalize(Song song);

}  // namespace tabtok
