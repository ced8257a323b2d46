#include <algorithm>

#include "tabtok/errors.hpp"
#include "tabtok/tokenizer.hpp"

namespace tabtok {

namespace {

// One emitted event: a beat of some track, placed in the global stream.
struct Event {
    int onset;
    int slot_order;
    const Track* track;
    const Beat* beat;
};

void emit_note(std::vector<Token>& out, const Track& track, const Note& note) {
    if (track.percussion) {
        out.push_back(make_drum_hit(note.percussion));
    } else {
        out.push_back(make_note_on(track.slot, note.string, note.fret));
    }
    // Flags and stored effects interleave in NoteFxKind order.
    auto emit_flag = [&](NoteFxKind kind, bool set) {
        if (!set) return;
        NoteFx fx;
        fx.kind = kind;
        out.push_back(make_nfx(fx));
    };
    size_t next = 0;
    for (int k = 0; k < 15; ++k) {
        NoteFxKind kind = static_cast<NoteFxKind>(k);
        if (kind == NoteFxKind::tie) {
            emit_flag(kind, note.tied);
            continue;
        }
        if (kind == NoteFxKind::let_ring) {
            emit_flag(kind, note.let_ring);
            continue;
        }
        if (kind == NoteFxKind::ghost_note) {
            emit_flag(kind, note.ghost);
            continue;
        }
        while (next < note.effects.size() && note.effects[next].kind == kind) {
            out.push_back(make_nfx(note.effects[next]));
            ++next;
        }
    }
}

}  // namespace

std::vector<Token> encode(const Song& song, const EncodeConfig& config) {
    if (auto issue = check_song(song)) {
        throw ContractError("encode rejected song: " + *issue);
    }
    std::vector<Token> out;
    out.push_back(make_artist(song.artist));
    out.push_back(make_downtune(song.downtune));
    out.push_back(make_tempo(song.initial_tempo));
    out.push_back(make_start());

    for (size_t m = 0; m < song.headers.size(); ++m) {
        const MeasureHeader& header = song.headers[m];
        int span = span_ticks(header.time_signature);
        if (config.emit_measure_repeat &&
            measure_repeats_previous(song, static_cast<int>(m))) {
            out.push_back(make_measure_repeat());
            out.push_back(make_wait(span));
            continue;
        }
        out.push_back(make_new_measure());

        std::vector<Event> events;
        for (const Track& track : song.tracks) {
            for (const Beat& beat : track.measures[m].beats) {
                events.push_back({beat.onset, static_cast<int>(track.slot), &track, &beat});
            }
        }
        std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
            if (a.onset != b.onset) return a.onset < b.onset;
            return a.slot_order < b.slot_order;
        });

        int cursor = 0;
        bool tempo_pending = header.tempo_change.has_value();
        for (const Event& event : events) {
            if (event.onset > cursor) {
                out.push_back(make_wait(event.onset - cursor));
                cursor = event.onset;
            }
            if (event.beat->is_rest()) {
                out.push_back(make_rest(event.track->slot));
            } else {
                for (const Note& note : event.beat->notes) {
                    emit_note(out, *event.track, note);
                }
            }
            if (tempo_pending && event.onset == 0) {
                BeatFx fx;
                fx.kind = BeatFxKind::tempo_change;
                fx.tempo_bpm = *header.tempo_change;
                out.push_back(make_bfx(fx));
                tempo_pending = false;
            }
            for (const BeatFx& fx : event.beat->effects) {
                out.push_back(make_bfx(fx));
            }
        }
        if (tempo_pending) {
            // No beat at tick 0 carries it; announce right after new_measure.
            BeatFx fx;
            fx.kind = BeatFxKind::tempo_change;
            fx.tempo_bpm = *header.tempo_change;
            out.push_back(make_bfx(fx));
        }
        if (span > cursor) out.push_back(make_wait(span - cursor));
    }
    out.push_back(make_end());
    return out;
}

}  // namespace tabtok
