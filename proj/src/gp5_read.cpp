#include <algorithm>
#include <array>
#include <fstream>

#include "gp5_common.hpp"
#include "tabtok/meter.hpp"
#include "tabtok/normalize.hpp"
#include "tabtok/token.hpp"

namespace tabtok {

namespace {

using gp5detail::ByteReader;

constexpr int kChannelCount = 64;
constexpr int kPercussionChannel = 10;

struct RawTrack {
    std::string name;
    bool percussion = false;
    int string_count = 6;
    int midi_program = 0;
    std::vector<int> tuning;
    std::vector<Measure> measures;
};

int clamp_int(int value, int low, int high) {
    return std::min(std::max(value, low), high);
}

class Reader {
  public:
    explicit Reader(const std::vector<uint8_t>& bytes) : in_(bytes) {}

    Gp5ReadResult run() {
        read_version();
        read_info();
        read_lyrics();
        if (minor_ == 10) {
            in_.i32();  // master volume
            in_.i32();
            in_.skip(11);  // equalizer
        }
        read_page_setup();
        in_.int_byte_size_string();  // tempo name
        int tempo = in_.i32();
        song_.initial_tempo = clamp_int(tempo, 1, 999);
        if (song_.initial_tempo != tempo) count("tempo_range");
        if (minor_ == 10) in_.u8();  // show tempo
        in_.i8();                    // key
        in_.i32();                   // octave
        read_channels();
        for (int d = 0; d < 19; ++d) {
            if (in_.i16() != -1) count("direction");
        }
        in_.i32();  // master reverb
        int measure_count = in_.i32();
        int track_count = in_.i32();
        if (measure_count < 0) in_.fail("negative measure count");
        if (track_count < 0) in_.fail("negative track count");
        for (int m = 0; m < measure_count; ++m) read_measure_header(m);
        for (int t = 0; t < track_count; ++t) read_track(t);
        in_.skip(minor_ == 0 ? 2 : 1);
        for (int m = 0; m < measure_count; ++m) {
            for (int t = 0; t < track_count; ++t) read_measure(m, t);
        }
        return assemble();
    }

  private:
    void count(const char* reason) { ++result_.skipped[reason]; }

    void read_version() {
        int length = in_.u8();
        if (length > 30) {
            throw Gp5Error(Gp5Error::Kind::malformed, 0, "not a GP5 file");
        }
        std::string field = in_.raw(30);
        std::string version = field.substr(0, static_cast<size_t>(length));
        if (version == "FICHIER GUITAR PRO v5.00") {
            minor_ = 0;
        } else if (version == "FICHIER GUITAR PRO v5.10") {
            minor_ = 10;
        } else if (version.rfind("FICHIER GUITAR PRO", 0) == 0 ||
                   version.rfind("FICHIER GUITARE PRO", 0) == 0) {
            throw Gp5Error(Gp5Error::Kind::unsupported_version, 0,
                           "unsupported version: " + version);
        } else {
            throw Gp5Error(Gp5Error::Kind::malformed, 0, "not a GP5 file");
        }
        result_.version_minor = minor_;
    }

    void read_info() {
        song_.title = in_.int_byte_size_string();
        for (int i = 0; i < 7; ++i) {
            std::string text = in_.int_byte_size_string();
            if (i == 1) {
                song_.artist = text;
            } else if (!text.empty()) {
                count("info_text");
            }
        }
        // subtitle, artist, album, lyricist, composer, copyright, tabber,
        // instructions: nine total, title taken above, so one more to go.
        std::string instructions = in_.int_byte_size_string();
        if (!instructions.empty()) count("info_text");
        int notices = in_.i32();
        if (notices < 0) in_.fail("negative notice count");
        for (int n = 0; n < notices; ++n) {
            in_.int_byte_size_string();
            count("notice");
        }
    }

    void read_lyrics() {
        in_.i32();  // lyric track
        for (int line = 0; line < 5; ++line) {
            in_.i32();  // starting measure
            int size = in_.i32();
            if (size < 0) in_.fail("negative string size");
            if (size > 0) count("lyrics");
            in_.skip(static_cast<size_t>(size));
        }
    }

    void read_page_setup() {
        for (int i = 0; i < 7; ++i) in_.i32();  // sizes and margins
        in_.skip(2);                            // header/footer flags
        for (int i = 0; i < 10; ++i) in_.int_byte_size_string();
    }

    void read_channels() {
        for (int c = 0; c < kChannelCount; ++c) {
            programs_[static_cast<size_t>(c)] = in_.i32();
            in_.skip(8);  // volume .. tremolo + blanks
        }
    }

    void read_measure_header(int index) {
        if (index > 0) in_.skip(1);
        int flags = in_.u8();
        MeasureHeader header;
        header.index = index;
        TimeSignature previous =
            index > 0 ? headers_.back().time_signature : TimeSignature{};
        header.time_signature = previous;
        if (flags & 0x01) {
            int numerator = in_.i8();
            header.time_signature.numerator = clamp_int(numerator, 1, 32);
            if (header.time_signature.numerator != numerator)
                count("signature_range");
        }
        if (flags & 0x02) {
            int denominator = in_.i8();
            header.time_signature.denominator = nearest_denominator(denominator);
            if (header.time_signature.denominator != denominator)
                count("signature_range");
        }
        if (flags & 0x04) count("repeat_open");
        if (flags & 0x08) {
            in_.i8();
            count("repeat_close");
        }
        if (flags & 0x20) {
            in_.int_byte_size_string();  // marker label
            in_.skip(4);                 // marker color
            count("marker");
        }
        if (flags & 0x10) {
            in_.u8();
            count("repeat_alternative");
        }
        if (flags & 0x40) {
            in_.i8();
            in_.i8();
            count("key_change");
        }
        if (flags & 0x80) count("double_bar");
        if (flags & 0x03) in_.skip(4);   // beam groups are display only
        if (!(flags & 0x10)) in_.skip(1);
        if (in_.u8() != 0) count("triplet_feel");
        headers_.push_back(header);
    }

    static int nearest_denominator(int value) {
        int best = 4;
        for (int candidate : {1, 2, 4, 8, 16, 32}) {
            if (std::abs(candidate - value) < std::abs(best - value)) {
                best = candidate;
            }
        }
        return best;
    }

    void read_track(int index) {
        if (index == 0 || minor_ == 0) in_.skip(1);
        RawTrack track;
        int flags1 = in_.u8();
        track.percussion = (flags1 & 0x01) != 0;
        track.name = in_.byte_size_string(40);
        int string_count = in_.i32();
        if (string_count < 1 || string_count > kMaxStrings) {
            in_.fail("string count outside 1..7");
        }
        track.string_count = string_count;
        for (int s = 0; s < 7; ++s) {
            int pitch = in_.i32();
            if (s < string_count && !track.percussion) {
                int kept = clamp_int(pitch, 0, 127);
                if (kept != pitch) count("tuning_range");
                track.tuning.push_back(kept);
            }
        }
        in_.i32();  // port
        int channel = in_.i32();
        in_.i32();  // effect channel
        if (channel == kPercussionChannel) track.percussion = true;
        if (channel >= 1 && channel <= kChannelCount) {
            track.midi_program = programs_[static_cast<size_t>(channel - 1)];
        } else {
            count("channel_range");
        }
        in_.i32();  // fret count
        if (in_.i32() != 0) count("capo");
        in_.skip(4);  // color
        in_.i16();    // notation flags
        in_.u8();     // auto accentuation
        in_.u8();     // MIDI bank
        in_.u8();     // humanize
        in_.i32();
        in_.i32();
        in_.i32();
        in_.skip(12);
        in_.i32();  // RSE instrument
        in_.i32();
        in_.i32();
        if (minor_ == 0) {
            in_.i16();
            in_.skip(1);
        } else {
            in_.i32();
            in_.skip(4);  // equalizer
            in_.int_byte_size_string();
            in_.int_byte_size_string();
        }
        tracks_.push_back(std::move(track));
    }

    // One parsed beat. Empty-status beats dissolve into nothing but may
    // still carry a mix-table tempo, hence the separate flag.
    struct ParsedBeat {
        bool present = true;  // false: empty-status placeholder
        Beat beat;
        int ticks = 0;
        std::optional<int> tempo;
    };

    ParsedBeat read_beat(RawTrack& track) {
        ParsedBeat parsed;
        int flags = in_.u8();
        int status = 1;
        if (flags & 0x40) status = in_.u8();
        int code = in_.i8();
        int clamped_code = clamp_int(code, -2, 4);
        if (clamped_code != code) count("duration_code_range");
        int enters = 1;
        int times = 1;
        if (flags & 0x20) {
            enters = in_.i32();
            if (auto mapped = tuplet_times_for(enters)) {
                times = *mapped;
            } else {
                count("tuplet_range");
                enters = 1;
            }
        }
        DurationCode duration{clamped_code, (flags & 0x01) != 0, enters, times};
        DecodedDuration decoded = duration_from_code(duration);
        if (decoded.rounded) count("rounded_beat_duration");
        parsed.ticks = decoded.ticks;
        if (flags & 0x02) {
            in_.skip(17);
            in_.byte_size_string(21);
            in_.skip(4);
            in_.i32();
            for (int i = 0; i < 7; ++i) in_.i32();
            in_.skip(32);
            count("chord_diagram");
        }
        if (flags & 0x04) {
            in_.int_byte_size_string();
            count("beat_text");
        }
        bool beat_vibrato = false;
        if (flags & 0x08) read_beat_effects(parsed.beat, beat_vibrato);
        if (flags & 0x10) parsed.tempo = read_mix_table();
        int string_flags = in_.u8();
        std::vector<Note> notes;
        for (int string = 1; string <= track.string_count; ++string) {
            if (string_flags & (1 << (7 - string))) {
                read_note(track, string, notes);
            }
        }
        if (track.percussion) {
            std::sort(notes.begin(), notes.end(),
                      [](const Note& a, const Note& b) {
                          return a.percussion < b.percussion;
                      });
            for (const Note& note : notes) {
                if (!parsed.beat.notes.empty() &&
                    parsed.beat.notes.back().percussion == note.percussion) {
                    count("duplicate_drum_note");
                    continue;
                }
                if (parsed.beat.notes.size() >= 6) {
                    count("drum_beat_overflow");
                    continue;
                }
                parsed.beat.notes.push_back(note);
            }
        } else {
            parsed.beat.notes = std::move(notes);
        }
        if (beat_vibrato) {
            if (parsed.beat.notes.empty()) count("beat_vibrato");
            for (Note& note : parsed.beat.notes) {
                NoteFx vibrato;
                vibrato.kind = NoteFxKind::vibrato;
                add_note_fx(note.effects, vibrato);
            }
        }
        in_.u8();  // display flags, low byte
        int high = in_.u8();
        if (high & 0x08) in_.u8();
        if (status == 0) parsed.present = false;
        return parsed;
    }

    void read_beat_effects(Beat& beat, bool& beat_vibrato) {
        int flags1 = in_.i8();
        int flags2 = in_.i8();
        if (flags1 & 0x02) beat_vibrato = true;
        if (flags1 & 0x10) {
            BeatFx fade;
            fade.kind = BeatFxKind::fade_in;
            add_beat_fx(beat.effects, fade);
        }
        if (flags1 & 0x20) {
            in_.i8();
            count("slap_pop");
        }
        if (flags2 & 0x04) {
            skip_bend_payload();
            count("tremolo_bar");
        }
        if (flags1 & 0x40) {
            int down = in_.i8();
            int up = in_.i8();
            BeatFx stroke;
            if (up > 0) {
                stroke.kind = BeatFxKind::upstroke;
                add_beat_fx(beat.effects, stroke);
            } else if (down > 0) {
                stroke.kind = BeatFxKind::downstroke;
                add_beat_fx(beat.effects, stroke);
            }
        }
        if (flags2 & 0x02) {
            in_.i8();
            count("pick_stroke");
        }
    }

    void skip_bend_payload() {
        in_.i8();  // type
        in_.i32(); // value
        int points = in_.i32();
        if (points < 0) in_.fail("negative bend point count");
        for (int p = 0; p < points; ++p) {
            in_.i32();
            in_.i32();
            in_.u8();
        }
    }

    Bend read_bend_payload() {
        Bend bend;
        int type = in_.i8();
        bend.type = clamp_int(type, 0, 11);
        if (bend.type != type) count("bend_range");
        int value = in_.i32();
        bend.value = clamp_int(value, -1200, 1200);
        if (bend.value != value) count("bend_range");
        int points = in_.i32();
        if (points < 0) in_.fail("negative bend point count");
        for (int p = 0; p < points; ++p) {
            BendPoint point;
            int position = in_.i32();
            point.position = clamp_int(position, 0, 60);
            int point_value = in_.i32();
            point.value = clamp_int(point_value, -1200, 1200);
            point.vibrato = in_.u8() != 0;
            if (point.position != position || point.value != point_value)
                count("bend_range");
            if (static_cast<int>(bend.points.size()) < 30) {
                bend.points.push_back(point);
            } else {
                count("bend_points_truncated");
            }
        }
        return bend;
    }

    void read_note(RawTrack& track, int string, std::vector<Note>& notes) {
        int flags = in_.u8();
        Note note;
        note.ghost = (flags & 0x04) != 0;
        if (flags & 0x02) {
            NoteFx heavy;
            heavy.kind = NoteFxKind::heavy_accentuated_note;
            add_note_fx(note.effects, heavy);
        }
        if (flags & 0x40) {
            NoteFx accent;
            accent.kind = NoteFxKind::accentuated_note;
            add_note_fx(note.effects, accent);
        }
        int type = 1;
        int fret = 0;
        if (flags & 0x20) type = in_.u8();
        if (flags & 0x10) {
            in_.i8();
            count("note_dynamic");
        }
        if (flags & 0x20) {
            fret = in_.i8();
        } else {
            count("note_without_fret");
        }
        if (flags & 0x80) {
            in_.i8();
            in_.i8();
            count("fingering");
        }
        if (flags & 0x01) {
            in_.skip(8);  // duration percent, float64
            count("duration_percent");
        }
        int flags2 = in_.u8();
        if (flags2 & 0x02) count("swap_accidentals");
        if (flags & 0x08) read_note_effects(note);
        if (type == 2) note.tied = true;
        if (type == 3) {
            count("dead_note");
            return;
        }
        if (track.percussion) {
            int number = clamp_int(fret, kMinDrumNote, kMaxDrumNote);
            if (number != fret) count("drum_note_range");
            note.percussion = number;
        } else {
            note.string = string;
            int kept = clamp_int(fret, 0, kMaxFret);
            if (kept != fret) count("fret_range");
            note.fret = kept;
        }
        notes.push_back(std::move(note));
    }

    void read_note_effects(Note& note) {
        int flags1 = in_.i8();
        int flags2 = in_.i8();
        if (flags1 & 0x08) note.let_ring = true;
        if (flags1 & 0x02) {
            NoteFx hammer;
            hammer.kind = NoteFxKind::hammer;
            add_note_fx(note.effects, hammer);
        }
        if (flags2 & 0x01) {
            NoteFx fx;
            fx.kind = NoteFxKind::staccato;
            add_note_fx(note.effects, fx);
        }
        if (flags2 & 0x02) {
            NoteFx fx;
            fx.kind = NoteFxKind::palm_mute;
            add_note_fx(note.effects, fx);
        }
        if (flags2 & 0x40) {
            NoteFx fx;
            fx.kind = NoteFxKind::vibrato;
            add_note_fx(note.effects, fx);
        }
        if (flags1 & 0x01) {
            NoteFx fx;
            fx.kind = NoteFxKind::bend;
            fx.bend = read_bend_payload();
            add_note_fx(note.effects, fx);
        }
        if (flags1 & 0x10) {
            NoteFx fx;
            fx.kind = NoteFxKind::grace;
            int fret = in_.u8();
            fx.grace.fret = clamp_int(fret, 0, kMaxFret);
            in_.u8();  // dynamic
            fx.grace.transition = clamp_int(in_.u8(), 0, 3);
            fx.grace.duration = clamp_int(in_.u8(), 1, 3);
            int grace_flags = in_.u8();
            fx.grace.dead = (grace_flags & 0x01) != 0;
            fx.grace.on_beat = (grace_flags & 0x02) != 0;
            if (fx.grace.fret != fret) count("grace_range");
            add_note_fx(note.effects, fx);
        }
        if (flags2 & 0x04) {
            NoteFx fx;
            fx.kind = NoteFxKind::tremolo_picking;
            fx.tremolo_speed = clamp_int(in_.u8(), 1, 3);
            add_note_fx(note.effects, fx);
        }
        if (flags2 & 0x08) {
            int mask = in_.u8();
            for (int bit = 0; bit < 6; ++bit) {
                if (mask & (1 << bit)) {
                    NoteFx fx;
                    fx.kind = NoteFxKind::slide;
                    fx.slide = static_cast<SlideKind>(bit);
                    add_note_fx(note.effects, fx);
                }
            }
            if (mask & 0xc0) count("slide_range");
        }
        if (flags2 & 0x10) {
            int kind = in_.u8();
            if (kind >= 1 && kind <= 5) {
                NoteFx fx;
                fx.kind = NoteFxKind::harmonic;
                fx.harmonic = static_cast<HarmonicKind>(kind - 1);
                add_note_fx(note.effects, fx);
                if (kind == 2) in_.skip(3);  // artificial pitch
                if (kind == 3) in_.u8();     // tapped fret
            } else {
                count("harmonic_range");
            }
        }
        if (flags2 & 0x20) {
            NoteFx fx;
            fx.kind = NoteFxKind::trill;
            int fret = in_.u8();
            fx.trill.fret = clamp_int(fret, 0, kMaxFret);
            if (fx.trill.fret != fret) count("trill_range");
            fx.trill.period = clamp_int(in_.u8(), 1, 3);
            add_note_fx(note.effects, fx);
        }
    }

    // Returns the tempo if the table sets one.
    std::optional<int> read_mix_table() {
        if (in_.i8() >= 0) count("mix_instrument");
        in_.i32();  // RSE instrument
        in_.i32();
        in_.i32();
        if (minor_ == 0) {
            in_.i16();
            in_.skip(1);
        } else {
            in_.i32();
        }
        std::array<int, 6> values{};
        for (int i = 0; i < 6; ++i) {
            values[static_cast<size_t>(i)] = in_.i8();
            if (values[static_cast<size_t>(i)] >= 0) count("mix_value");
        }
        in_.int_byte_size_string();  // tempo name
        int tempo = in_.i32();
        for (int value : values) {
            if (value >= 0) in_.i8();  // transition duration
        }
        std::optional<int> result;
        if (tempo >= 0) {
            in_.i8();  // transition duration
            if (minor_ == 10) in_.u8();  // show tempo
            int clamped = clamp_int(tempo, 1, 999);
            if (clamped != tempo) count("tempo_range");
            result = clamped;
        }
        in_.i8();  // apply-to-all flags
        in_.i8();  // wah
        if (minor_ == 10) {
            in_.int_byte_size_string();
            in_.int_byte_size_string();
        }
        return result;
    }

    void read_measure(int measure_index, int track_index) {
        RawTrack& track = tracks_[static_cast<size_t>(track_index)];
        MeasureHeader& header = headers_[static_cast<size_t>(measure_index)];
        int span = span_ticks(header.time_signature);
        Measure measure;
        long long cursor = 0;
        int beat_count = in_.i32();
        if (beat_count < 0) in_.fail("negative beat count");
        for (int b = 0; b < beat_count; ++b) {
            ParsedBeat parsed = read_beat(track);
            if (parsed.tempo) {
                if (cursor == 0 && !header.tempo_change) {
                    header.tempo_change = *parsed.tempo;
                } else {
                    count("extra_tempo_change");
                }
            }
            if (!parsed.present) continue;
            if (cursor >= span) {
                count("overfull_measure");
                continue;
            }
            parsed.beat.onset = static_cast<int>(cursor);
            int ticks = parsed.ticks;
            if (cursor + ticks > span) {
                ticks = static_cast<int>(span - cursor);
                count("overfull_measure");
            }
            parsed.beat.duration = ticks;
            cursor += parsed.ticks;
            measure.beats.push_back(std::move(parsed.beat));
        }
        if (!measure.beats.empty() && cursor < span) {
            // Underfull source measure: pad with silence so the tiling
            // invariant holds.
            Beat& last = measure.beats.back();
            if (last.is_rest()) {
                last.duration = span - last.onset;
            } else {
                Beat pad;
                pad.onset = static_cast<int>(cursor);
                pad.duration = static_cast<int>(span - cursor);
                measure.beats.push_back(std::move(pad));
            }
        }
        track.measures.push_back(std::move(measure));

        int ghost_beats = in_.i32();  // voice 1, parsed and discarded
        if (ghost_beats < 0) in_.fail("negative beat count");
        if (ghost_beats > 0) result_.skipped["second_voice"] += ghost_beats;
        for (int b = 0; b < ghost_beats; ++b) read_beat(track);
        in_.u8();  // line break
    }

    Gp5ReadResult assemble() {
        song_.headers = std::move(headers_);
        std::vector<Slot> slots = recover_slots();
        for (size_t t = 0; t < tracks_.size(); ++t) {
            RawTrack& raw = tracks_[t];
            Track track;
            track.slot = slots[t];
            track.percussion = slot_is_percussion(slots[t]);
            if (track.percussion) {
                track.string_count = 6;
            } else {
                // Clamp into the slot family's legal range; notes on strings
                // the model cannot hold are dropped.
                bool bass = track.slot == Slot::bass;
                track.string_count =
                    clamp_int(raw.string_count, bass ? 4 : 6, bass ? 6 : 7);
                if (track.string_count != raw.string_count)
                    count("string_count_range");
                size_t kept = raw.tuning.size();
                track.tuning = std::move(raw.tuning);
                const std::vector<int>& standard =
                    standard_tuning(bass, track.string_count);
                track.tuning.resize(static_cast<size_t>(track.string_count));
                for (size_t s = kept; s < track.tuning.size(); ++s) {
                    track.tuning[s] = standard[s];
                }
                if (track.string_count < raw.string_count) {
                    for (Measure& measure : raw.measures) {
                        for (Beat& beat : measure.beats) {
                            size_t before = beat.notes.size();
                            std::erase_if(beat.notes, [&](const Note& n) {
                                return n.string > track.string_count;
                            });
                            if (before != beat.notes.size()) {
                                result_.skipped["string_out_of_range"] +=
                                    static_cast<int>(before - beat.notes.size());
                            }
                        }
                    }
                }
            }
            track.measures = std::move(raw.measures);
            song_.tracks.push_back(std::move(track));
        }
        NormalizeResult normalized = normalize(std::move(song_));
        for (const auto& [slot, extra] : normalized.merged) {
            result_.skipped["merged_tracks"] += extra;
        }
        result_.song = std::move(normalized.song);
        return std::move(result_);
    }

    // Track names written by this codec are slot names; trust them when
    // they form a consistent assignment, otherwise fall back to MIDI
    // programs.
    std::vector<Slot> recover_slots() {
        std::vector<Slot> slots;
        bool usable = !tracks_.empty();
        std::array<bool, kSlotCount> taken{};
        for (const RawTrack& raw : tracks_) {
            std::optional<Slot> slot = slot_from_name(raw.name);
            if (!slot || taken[static_cast<size_t>(*slot)] ||
                slot_is_percussion(*slot) != raw.percussion) {
                usable = false;
                break;
            }
            taken[static_cast<size_t>(*slot)] = true;
            slots.push_back(*slot);
        }
        if (usable) return slots;
        std::vector<RawTrackInfo> infos;
        for (const RawTrack& raw : tracks_) {
            infos.push_back({raw.midi_program, raw.percussion});
        }
        return tracks_.empty() ? std::vector<Slot>{}
                               : assign_instrument_slots(infos);
    }

    ByteReader in_;
    int minor_ = 0;
    Gp5ReadResult result_;
    Song song_;
    std::array<int, kChannelCount> programs_{};
    std::vector<MeasureHeader> headers_;
    std::vector<RawTrack> tracks_;
};

}  // namespace

Gp5ReadResult read_gp5(const std::vector<uint8_t>& bytes) {
    Reader reader(bytes);
    return reader.run();
}

Gp5ReadResult read_gp5_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return read_gp5(bytes);
}

}  // namespace tabtok
