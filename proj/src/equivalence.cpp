#include <algorithm>
#include <tuple>

#include "tabtok/meter.hpp"
#include "tabtok/tokenizer.hpp"

namespace tabtok {

namespace {

bool ghost_only(const Beat& beat) {
    if (beat.notes.empty()) return false;
    return std::all_of(beat.notes.begin(), beat.notes.end(),
                       [](const Note& n) { return n.ghost; });
}

bool hits_same_lane(const Beat& beat, const Note& note, bool percussion) {
    for (const Note& other : beat.notes) {
        if (percussion ? other.percussion == note.percussion
                       : other.string == note.string) {
            return true;
        }
    }
    return false;
}

// let_ring rings to the measure end unless a later note retakes the lane;
// other notes last their notated slot, stretched through beats that hold
// only ghost notes (which never silence what is already sounding). Ghost
// notes themselves keep their notated length.
int sounding_end(const Measure& measure, size_t beat_index, const Note& note,
                 bool percussion, int span) {
    const Beat& beat = measure.beats[beat_index];
    if (note.let_ring) {
        for (size_t j = beat_index + 1; j < measure.beats.size(); ++j) {
            if (hits_same_lane(measure.beats[j], note, percussion)) {
                return measure.beats[j].onset;
            }
        }
        return span;
    }
    if (note.ghost) return beat.onset + beat.duration;
    for (size_t j = beat_index + 1; j < measure.beats.size(); ++j) {
        if (!ghost_only(measure.beats[j])) return measure.beats[j].onset;
    }
    return span;
}

std::string describe(const SoundingNote& note) {
    std::string out = slot_name(note.slot);
    out += " m" + std::to_string(note.measure);
    out += " t" + std::to_string(note.onset);
    if (slot_is_percussion(note.slot)) {
        out += " drum" + std::to_string(note.percussion);
    } else {
        out += " s" + std::to_string(note.string) + "f" + std::to_string(note.fret);
    }
    out += " len" + std::to_string(note.duration);
    return out;
}

constexpr size_t kMaxDifferences = 8;

void note_diff(EquivalenceReport& report, const char* side,
               const SoundingNote& note) {
    if (report.differences.size() >= kMaxDifferences) return;
    report.differences.push_back(std::string("only in ") + side + ": " +
                                 describe(note));
}

}  // namespace

bool SoundingNote::operator<(const SoundingNote& other) const {
    return std::tie(slot, measure, onset, string, percussion, fret, duration,
                    ghost, tied) < std::tie(other.slot, other.measure,
                                            other.onset, other.string,
                                            other.percussion, other.fret,
                                            other.duration, other.ghost,
                                            other.tied);
}

std::vector<SoundingNote> sounding_notes(const Song& song) {
    std::vector<SoundingNote> out;
    for (const Track& track : song.tracks) {
        for (size_t m = 0; m < track.measures.size(); ++m) {
            const Measure& measure = track.measures[m];
            int span = m < song.headers.size()
                           ? span_ticks(song.headers[m].time_signature)
                           : 4 * kTicksPerQuarter;
            for (size_t b = 0; b < measure.beats.size(); ++b) {
                const Beat& beat = measure.beats[b];
                for (const Note& note : beat.notes) {
                    SoundingNote sounding;
                    sounding.slot = track.slot;
                    sounding.measure = static_cast<int>(m);
                    sounding.onset = beat.onset;
                    sounding.string = track.percussion ? 0 : note.string;
                    sounding.fret = track.percussion ? 0 : note.fret;
                    sounding.percussion = track.percussion ? note.percussion : 0;
                    int end = sounding_end(measure, b, note, track.percussion, span);
                    sounding.duration = std::max(0, end - beat.onset);
                    sounding.ghost = note.ghost;
                    sounding.tied = note.tied;
                    sounding.effects = note.effects;
                    out.push_back(std::move(sounding));
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

EquivalenceReport musically_equivalent(const Song& a, const Song& b) {
    EquivalenceReport report;
    auto mismatch = [&report](const std::string& message) {
        report.equivalent = false;
        if (report.differences.size() < kMaxDifferences) {
            report.differences.push_back(message);
        }
    };

    if (normalize_artist(a.artist) != normalize_artist(b.artist)) {
        mismatch("artist: " + normalize_artist(a.artist) + " vs " +
                 normalize_artist(b.artist));
    }
    if (a.downtune != b.downtune) {
        mismatch("downtune: " + std::to_string(a.downtune) + " vs " +
                 std::to_string(b.downtune));
    }
    if (a.initial_tempo != b.initial_tempo) {
        mismatch("tempo: " + std::to_string(a.initial_tempo) + " vs " +
                 std::to_string(b.initial_tempo));
    }
    if (a.headers.size() != b.headers.size()) {
        mismatch("measure count: " + std::to_string(a.headers.size()) + " vs " +
                 std::to_string(b.headers.size()));
    } else {
        for (size_t m = 0; m < a.headers.size(); ++m) {
            TimeSignature sa =
                infer_time_signature(span_ticks(a.headers[m].time_signature))
                    .signature;
            TimeSignature sb =
                infer_time_signature(span_ticks(b.headers[m].time_signature))
                    .signature;
            if (!(sa == sb)) {
                mismatch("measure " + std::to_string(m) + " span: " +
                         std::to_string(span_ticks(sa)) + " vs " +
                         std::to_string(span_ticks(sb)));
            }
            if (a.headers[m].tempo_change != b.headers[m].tempo_change) {
                mismatch("measure " + std::to_string(m) + " tempo change differs");
            }
        }
    }

    std::vector<SoundingNote> notes_a = sounding_notes(a);
    std::vector<SoundingNote> notes_b = sounding_notes(b);
    size_t ia = 0;
    size_t ib = 0;
    while (ia < notes_a.size() || ib < notes_b.size()) {
        if (ia < notes_a.size() && ib < notes_b.size() &&
            notes_a[ia] == notes_b[ib]) {
            ++ia;
            ++ib;
            continue;
        }
        report.equivalent = false;
        if (ib >= notes_b.size() ||
            (ia < notes_a.size() && notes_a[ia] < notes_b[ib])) {
            note_diff(report, "first", notes_a[ia]);
            ++ia;
        } else {
            note_diff(report, "second", notes_b[ib]);
            ++ib;
        }
    }
    return report;
}

}  // namespace tabtok
