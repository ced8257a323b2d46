#include <algorithm>
#include <map>

#include "tabtok/meter.hpp"
#include "tabtok/tokenizer.hpp"

namespace tabtok {

namespace {

// Largest span infer_time_signature can produce (32/4). Events at or past
// this tick can never survive measure finalization.
constexpr long long kMaxSpanTicks = 32LL * kTicksPerQuarter;
constexpr int kMaxDrumLanes = 6;

struct PendingNoteRef {
    Slot slot = Slot::distorted0;
    size_t beat = 0;
    size_t note = 0;
    bool valid = false;
};

struct PendingBeatRef {
    Slot slot = Slot::distorted0;
    size_t beat = 0;
    bool valid = false;
};

struct SlotState {
    bool used = false;
    int first_measure = 0;  // headers already closed when the track appeared
    int string_count = 0;
    std::vector<Measure> measures;  // finalized
    std::vector<Beat> pending;      // current measure, onset order
};

struct BeatLookup {
    Beat* beat = nullptr;     // existing beat at the cursor, if any
    bool appendable = false;  // a new beat may be opened at the cursor
};

int max_strings_for(Slot slot) { return slot == Slot::bass ? 6 : kMaxStrings; }
int initial_strings_for(Slot slot) { return slot == Slot::bass ? 4 : 6; }

class Decoder {
  public:
    DecodeResult run(const std::vector<Token>& tokens) {
        for (const Token& token : tokens) {
            if (token.kind == TokenKind::end) break;
            step(token);
        }
        if (measure_open_) finalize_measure();
        return finish();
    }

  private:
    void skip(const char* reason) { ++result_.skipped[reason]; }

    void step(const Token& token) {
        switch (token.kind) {
            case TokenKind::artist:
                if (artist_seen_) return skip("duplicate_header_token");
                artist_seen_ = true;
                result_.song.artist = token.text;
                return;
            case TokenKind::downtune:
                if (downtune_seen_) return skip("duplicate_header_token");
                downtune_seen_ = true;
                result_.song.downtune = token.value;
                return;
            case TokenKind::tempo:
                if (tempo_seen_) return skip("duplicate_header_token");
                tempo_seen_ = true;
                result_.song.initial_tempo = token.value;
                return;
            case TokenKind::start:
                if (start_seen_) return skip("duplicate_header_token");
                start_seen_ = true;
                return;
            case TokenKind::unknown:
                return skip("unknown_token");
            case TokenKind::new_measure:
                if (measure_open_) finalize_measure();
                open_measure(false);
                return;
            case TokenKind::measure_repeat:
                if (measure_open_) finalize_measure();
                if (headers_.empty()) {
                    skip("orphan_measure_repeat");
                    open_measure(false);
                } else {
                    open_measure(true);
                }
                return;
            case TokenKind::wait:
                require_measure();
                cursor_ += token.value;
                wait_sum_ += token.value;
                return;
            case TokenKind::note_on:
                require_measure();
                add_note(token);
                return;
            case TokenKind::drum_hit:
                require_measure();
                add_drum(token);
                return;
            case TokenKind::rest:
                require_measure();
                add_rest(token.slot);
                return;
            case TokenKind::nfx:
                require_measure();
                add_nfx(token.nfx);
                return;
            case TokenKind::bfx:
                require_measure();
                add_bfx(token.bfx);
                return;
            case TokenKind::end:
                return;  // handled by run()
        }
    }

    void require_measure() {
        if (!measure_open_) open_measure(false);
    }

    void open_measure(bool repeat_previous) {
        measure_open_ = true;
        repeat_measure_ = repeat_previous;
        cursor_ = 0;
        wait_sum_ = 0;
        tempo_change_.reset();
        last_note_ = {};
        last_beat_ = {};
        if (repeat_previous) {
            const MeasureHeader& prev = headers_.back();
            repeat_signature_ = prev.time_signature;
            tempo_change_ = prev.tempo_change;
            for (auto& [slot, state] : slots_) {
                if (state.used) state.pending = state.measures.back().beats;
            }
        }
    }

    SlotState& ensure_track(Slot slot) {
        SlotState& state = slots_[slot];
        if (!state.used) {
            state.used = true;
            state.first_measure = static_cast<int>(headers_.size());
            state.string_count = slot_is_percussion(slot) ? kMaxDrumLanes
                                                          : initial_strings_for(slot);
        }
        return state;
    }

    // A pending beat with no notes is a rest: first occupant of an onset wins.
    BeatLookup find_beat(SlotState& state) {
        if (state.pending.empty()) return {nullptr, true};
        int back_onset = state.pending.back().onset;
        if (back_onset == cursor_) return {&state.pending.back(), true};
        if (back_onset < cursor_) return {nullptr, true};
        // Inside a cloned measure: only exact beat onsets are addressable.
        for (Beat& beat : state.pending) {
            if (beat.onset == cursor_) return {&beat, true};
        }
        return {nullptr, false};
    }

    Beat& append_beat(SlotState& state) {
        Beat beat;
        beat.onset = static_cast<int>(cursor_);
        state.pending.push_back(std::move(beat));
        return state.pending.back();
    }

    void add_note(const Token& token) {
        if (cursor_ >= kMaxSpanTicks) return skip("event_beyond_measure");
        SlotState& state = ensure_track(token.slot);
        if (token.string > state.string_count) {
            if (token.string > max_strings_for(token.slot)) {
                last_note_.valid = false;
                return skip("string_out_of_range");
            }
            state.string_count = token.string;
        }
        BeatLookup found = find_beat(state);
        if (!found.beat && !found.appendable) {
            last_note_.valid = false;
            return skip("event_inside_repeat");
        }
        if (found.beat && found.beat->notes.empty()) {
            last_note_.valid = false;
            return skip("conflicting_beat");
        }
        if (found.beat) {
            for (const Note& present : found.beat->notes) {
                if (present.string == token.string) {
                    last_note_.valid = false;
                    return skip("duplicate_string_note");
                }
            }
        }
        Beat& beat = found.beat ? *found.beat : append_beat(state);
        Note note;
        note.string = token.string;
        note.fret = token.fret;
        auto pos = std::lower_bound(
            beat.notes.begin(), beat.notes.end(), note,
            [](const Note& a, const Note& b) { return a.string < b.string; });
        size_t index = static_cast<size_t>(pos - beat.notes.begin());
        beat.notes.insert(pos, std::move(note));
        remember_note(token.slot, state, beat, index);
    }

    void add_drum(const Token& token) {
        if (cursor_ >= kMaxSpanTicks) return skip("event_beyond_measure");
        SlotState& state = ensure_track(Slot::drums);
        BeatLookup found = find_beat(state);
        if (!found.beat && !found.appendable) {
            last_note_.valid = false;
            return skip("event_inside_repeat");
        }
        if (found.beat && found.beat->notes.empty()) {
            last_note_.valid = false;
            return skip("conflicting_beat");
        }
        if (found.beat) {
            for (const Note& present : found.beat->notes) {
                if (present.percussion == token.value) {
                    last_note_.valid = false;
                    return skip("duplicate_drum_note");
                }
            }
            if (found.beat->notes.size() >= kMaxDrumLanes) {
                last_note_.valid = false;
                return skip("drum_beat_overflow");
            }
        }
        Beat& beat = found.beat ? *found.beat : append_beat(state);
        Note note;
        note.percussion = token.value;
        auto pos = std::lower_bound(
            beat.notes.begin(), beat.notes.end(), note,
            [](const Note& a, const Note& b) { return a.percussion < b.percussion; });
        size_t index = static_cast<size_t>(pos - beat.notes.begin());
        beat.notes.insert(pos, std::move(note));
        remember_note(Slot::drums, state, beat, index);
    }

    void add_rest(Slot slot) {
        if (cursor_ >= kMaxSpanTicks) return skip("event_beyond_measure");
        SlotState& state = ensure_track(slot);
        BeatLookup found = find_beat(state);
        if (!found.beat && !found.appendable) return skip("event_inside_repeat");
        if (found.beat) return skip("conflicting_beat");
        Beat& beat = append_beat(state);
        size_t beat_index = static_cast<size_t>(&beat - state.pending.data());
        last_beat_ = {slot, beat_index, true};
    }

    void remember_note(Slot slot, SlotState& state, Beat& beat, size_t note_index) {
        size_t beat_index = static_cast<size_t>(&beat - state.pending.data());
        last_note_ = {slot, beat_index, note_index, true};
        last_beat_ = {slot, beat_index, true};
    }

    void add_nfx(const NoteFx& fx) {
        if (!last_note_.valid) return skip("orphan_nfx");
        SlotState& state = slots_[last_note_.slot];
        Note& note = state.pending[last_note_.beat].notes[last_note_.note];
        if (fx.kind == NoteFxKind::tie) {
            if (note.tied) return skip("duplicate_note_fx");
            note.tied = true;
        } else if (fx.kind == NoteFxKind::let_ring) {
            if (note.let_ring) return skip("duplicate_note_fx");
            note.let_ring = true;
        } else if (fx.kind == NoteFxKind::ghost_note) {
            if (note.ghost) return skip("duplicate_note_fx");
            note.ghost = true;
        } else if (!add_note_fx(note.effects, fx)) {
            return skip("duplicate_note_fx");
        }
    }

    void add_bfx(const BeatFx& fx) {
        if (fx.kind == BeatFxKind::tempo_change) {
            if (tempo_change_) return skip("duplicate_tempo_change");
            tempo_change_ = fx.tempo_bpm;
            return;
        }
        if (!last_beat_.valid) return skip("orphan_bfx");
        SlotState& state = slots_[last_beat_.slot];
        Beat& beat = state.pending[last_beat_.beat];
        if (!add_beat_fx(beat.effects, fx)) return skip("duplicate_beat_fx");
    }

    void finalize_measure() {
        measure_open_ = false;
        TimeSignature signature;
        if (repeat_measure_) {
            signature = repeat_signature_;
        } else if (wait_sum_ > 0) {
            InferredSignature inferred = infer_time_signature(wait_sum_);
            signature = inferred.signature;
            if (inferred.rounded) skip("rounded_time_signature");
        } else {
            signature = {4, 4};
            if (!pending_all_empty()) skip("measure_without_waits");
        }
        int span = span_ticks(signature);
        MeasureHeader header;
        header.index = static_cast<int>(headers_.size());
        header.time_signature = signature;
        header.tempo_change = tempo_change_;
        headers_.push_back(header);

        for (auto& [slot, state] : slots_) {
            if (!state.used) continue;
            std::vector<Beat> beats = std::move(state.pending);
            state.pending.clear();
            while (!beats.empty() && beats.back().onset >= span) {
                beats.pop_back();
                skip("event_beyond_measure");
            }
            Measure measure;
            if (!beats.empty()) {
                if (beats.front().onset > 0) {
                    Beat lead;
                    lead.onset = 0;
                    measure.beats.push_back(std::move(lead));
                }
                for (Beat& beat : beats) measure.beats.push_back(std::move(beat));
                for (size_t i = 0; i < measure.beats.size(); ++i) {
                    int next = i + 1 < measure.beats.size()
                                   ? measure.beats[i + 1].onset
                                   : span;
                    measure.beats[i].duration = next - measure.beats[i].onset;
                }
            }
            state.measures.push_back(std::move(measure));
        }
    }

    bool pending_all_empty() const {
        for (const auto& [slot, state] : slots_) {
            if (!state.pending.empty()) return false;
        }
        return true;
    }

    DecodeResult finish() {
        Song& song = result_.song;
        song.headers = std::move(headers_);
        for (auto& [slot, state] : slots_) {
            if (!state.used) continue;
            Track track;
            track.slot = slot;
            track.percussion = slot_is_percussion(slot);
            track.string_count = state.string_count;
            if (!track.percussion) {
                track.tuning = standard_tuning(slot == Slot::bass, state.string_count);
                for (int& pitch : track.tuning) pitch += song.downtune;
            }
            track.measures.assign(static_cast<size_t>(state.first_measure), Measure{});
            for (Measure& m : state.measures) track.measures.push_back(std::move(m));
            song.tracks.push_back(std::move(track));
        }
        std::sort(song.tracks.begin(), song.tracks.end(),
                  [](const Track& a, const Track& b) { return a.slot < b.slot; });
        if (song.artist.empty()) song.artist = "unknown";
        return std::move(result_);
    }

    DecodeResult result_;
    bool artist_seen_ = false;
    bool downtune_seen_ = false;
    bool tempo_seen_ = false;
    bool start_seen_ = false;

    bool measure_open_ = false;
    bool repeat_measure_ = false;
    TimeSignature repeat_signature_;
    long long cursor_ = 0;
    long long wait_sum_ = 0;
    std::optional<int> tempo_change_;
    PendingNoteRef last_note_;
    PendingBeatRef last_beat_;
    std::map<Slot, SlotState> slots_;
    std::vector<MeasureHeader> headers_;
};

}  // namespace

DecodeResult decode(const std::vector<Token>& tokens) {
    Decoder decoder;
    return decoder.run(tokens);
}

bool is_canonical(const std::vector<Token>& tokens) {
    DecodeResult decoded = decode(tokens);
    return encode(decoded.song) == tokens;
}

}  // namespace tabtok
