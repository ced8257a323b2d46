#include <algorithm>
#include <array>
#include <fstream>

#include "gp5_common.hpp"
#include "tabtok/errors.hpp"
#include "tabtok/meter.hpp"

namespace tabtok {

namespace {

using gp5detail::ByteWriter;

constexpr int kChannelCount = 64;
constexpr int kPercussionChannel = 10;  // 1-based

int slot_program(Slot slot) {
    switch (slot) {
        case Slot::distorted0:
        case Slot::distorted1:
        case Slot::distorted2:
            return 30;  // distortion guitar
        case Slot::clean0:
        case Slot::clean1:
            return 25;  // steel-string acoustic
        case Slot::bass:
            return 33;  // fingered bass
        case Slot::pads:
            return 48;  // string ensemble
        case Slot::leads:
        case Slot::drums:
            return 0;
    }
    return 0;
}

struct TrackPlan {
    const Track* track = nullptr;
    int channel = 1;  // 1-based MIDI channel
};

// Pitched tracks take channels 1,2,... skipping the percussion channel;
// drums always sit on it. Port is constant, effect channel mirrors channel.
std::vector<TrackPlan> plan_channels(const Song& song) {
    std::vector<TrackPlan> plans;
    int next = 1;
    for (const Track& track : song.tracks) {
        TrackPlan plan;
        plan.track = &track;
        if (track.percussion) {
            plan.channel = kPercussionChannel;
        } else {
            if (next == kPercussionChannel) ++next;
            plan.channel = next++;
        }
        plans.push_back(plan);
    }
    return plans;
}

void write_version(ByteWriter& out, int minor) {
    std::string version = minor == 10 ? "FICHIER GUITAR PRO v5.10"
                                      : "FICHIER GUITAR PRO v5.00";
    out.u8(static_cast<int>(version.size()));
    out.raw(version);
    out.zeros(30 - static_cast<int>(version.size()));
}

void write_info(ByteWriter& out, const Song& song) {
    out.int_byte_size_string(song.title);
    out.int_byte_size_string("");  // subtitle
    out.int_byte_size_string(song.artist);
    out.int_byte_size_string("");  // album
    out.int_byte_size_string("");  // lyricist
    out.int_byte_size_string("");  // composer
    out.int_byte_size_string("");  // copyright
    out.int_byte_size_string("");  // tabber
    out.int_byte_size_string("");  // instructions
    out.i32(0);                    // notice lines
}

void write_lyrics(ByteWriter& out) {
    out.i32(0);  // lyric track
    for (int line = 0; line < 5; ++line) {
        out.i32(0);  // starting measure
        out.i32(0);  // empty text
    }
}

void write_master_effect(ByteWriter& out) {  // v5.10 only
    out.i32(100);  // master volume
    out.i32(0);
    out.zeros(11);  // equalizer knobs + gain
}

void write_page_setup(ByteWriter& out) {
    out.i32(210);  // page width (mm)
    out.i32(297);  // page height
    out.i32(10);   // left margin
    out.i32(10);   // right margin
    out.i32(15);   // top margin
    out.i32(10);   // bottom margin
    out.i32(100);  // score size %
    out.u8(0xff);  // header/footer field flags
    out.u8(0x01);
    out.int_byte_size_string("%TITLE%");
    out.int_byte_size_string("%SUBTITLE%");
    out.int_byte_size_string("%ARTIST%");
    out.int_byte_size_string("%ALBUM%");
    out.int_byte_size_string("Words by %WORDS%");
    out.int_byte_size_string("Music by %MUSIC%");
    out.int_byte_size_string("Words & Music by %WORDSMUSIC%");
    out.int_byte_size_string("Copyright %COPYRIGHT%");
    out.int_byte_size_string(
        "All Rights Reserved - International Copyright Secured");
    out.int_byte_size_string("Page %N%/%P%");
}

void write_channels(ByteWriter& out, const std::vector<TrackPlan>& plans) {
    std::array<int, kChannelCount> programs{};
    for (const TrackPlan& plan : plans) {
        programs[static_cast<size_t>(plan.channel - 1)] = slot_program(plan.track->slot);
    }
    for (int c = 0; c < kChannelCount; ++c) {
        out.i32(programs[static_cast<size_t>(c)]);
        out.u8(13);  // volume
        out.u8(8);   // balance
        out.u8(0);   // chorus
        out.u8(0);   // reverb
        out.u8(0);   // phaser
        out.u8(0);   // tremolo
        out.zeros(2);
    }
}

void write_measure_header(ByteWriter& out, const Song& song, size_t index) {
    const MeasureHeader& header = song.headers[index];
    if (index > 0) out.u8(0);
    int flags = 0;
    bool first = index == 0;
    const TimeSignature& ts = header.time_signature;
    if (first || ts.numerator != song.headers[index - 1].time_signature.numerator)
        flags |= 0x01;
    if (first || ts.denominator != song.headers[index - 1].time_signature.denominator)
        flags |= 0x02;
    out.u8(flags);
    if (flags & 0x01) out.i8(ts.numerator);
    if (flags & 0x02) out.i8(ts.denominator);
    if (flags & 0x03) {
        // Beam groups: the measure's eighth notes split across four groups.
        int total = ts.denominator <= 8 ? ts.numerator * (8 / ts.denominator) : 0;
        for (int i = 0; i < 4; ++i) {
            int group = total / 4 + (i < total % 4 ? 1 : 0);
            out.u8(std::min(group, 255));
        }
    }
    out.u8(0);  // blank (no alternate ending)
    out.u8(0);  // triplet feel off
}

void write_track(ByteWriter& out, const TrackPlan& plan, int minor, bool first) {
    const Track& track = *plan.track;
    if (first || minor == 0) out.u8(0);
    out.u8(track.percussion ? 0x09 : 0x08);  // visible; 0x01 marks drums
    out.byte_size_string(slot_name(track.slot), 40);
    out.i32(track.string_count);
    for (int s = 0; s < 7; ++s) {
        out.i32(!track.percussion && s < static_cast<int>(track.tuning.size())
                    ? track.tuning[static_cast<size_t>(s)]
                    : 0);
    }
    out.i32(1);  // port
    out.i32(plan.channel);
    out.i32(plan.channel);  // effect channel
    int max_fret = 0;
    for (const Measure& measure : track.measures) {
        for (const Beat& beat : measure.beats) {
            for (const Note& note : beat.notes) max_fret = std::max(max_fret, note.fret);
        }
    }
    out.i32(std::max(24, max_fret));
    out.i32(0);  // capo
    out.u8(255); // color
    out.u8(0);
    out.u8(0);
    out.u8(0);
    out.i16(0x0003);  // show tablature + notation
    out.u8(0);        // auto accentuation
    out.u8(0);        // MIDI bank
    out.u8(0);        // humanize
    out.i32(0);
    out.i32(0);
    out.i32(100);
    out.zeros(12);
    out.i32(-1);  // RSE instrument
    out.i32(0);
    out.i32(0);
    if (minor == 0) {
        out.i16(0);
        out.u8(0);
    } else {
        out.i32(0);
        out.zeros(4);  // equalizer
        out.int_byte_size_string("");
        out.int_byte_size_string("");
    }
}

void write_bend_payload(ByteWriter& out, const Bend& bend) {
    out.i8(bend.type);
    out.i32(bend.value);
    out.i32(static_cast<int>(bend.points.size()));
    for (const BendPoint& point : bend.points) {
        out.i32(point.position);
        out.i32(point.value);
        out.u8(point.vibrato ? 1 : 0);
    }
}

void write_note_effects(ByteWriter& out, const Note& note) {
    int flags1 = 0;
    int flags2 = 0;
    const NoteFx* bend = nullptr;
    const NoteFx* grace = nullptr;
    const NoteFx* tremolo = nullptr;
    int slide_mask = 0;
    const NoteFx* harmonic = nullptr;
    const NoteFx* trill = nullptr;
    if (note.let_ring) flags1 |= 0x08;
    for (const NoteFx& fx : note.effects) {
        switch (fx.kind) {
            case NoteFxKind::bend:
                flags1 |= 0x01;
                bend = &fx;
                break;
            case NoteFxKind::hammer:
                flags1 |= 0x02;
                break;
            case NoteFxKind::grace:
                flags1 |= 0x10;
                grace = &fx;
                break;
            case NoteFxKind::staccato:
                flags2 |= 0x01;
                break;
            case NoteFxKind::palm_mute:
                flags2 |= 0x02;
                break;
            case NoteFxKind::tremolo_picking:
                flags2 |= 0x04;
                tremolo = &fx;
                break;
            case NoteFxKind::slide:
                flags2 |= 0x08;
                slide_mask |= 1 << static_cast<int>(fx.slide);
                break;
            case NoteFxKind::harmonic:
                flags2 |= 0x10;
                harmonic = &fx;
                break;
            case NoteFxKind::trill:
                flags2 |= 0x20;
                trill = &fx;
                break;
            case NoteFxKind::vibrato:
                flags2 |= 0x40;
                break;
            default:
                break;  // accents and ghost live in the note flags byte
        }
    }
    out.i8(flags1);
    out.i8(flags2);
    if (bend) write_bend_payload(out, bend->bend);
    if (grace) {
        out.u8(grace->grace.fret);
        out.u8(6);  // dynamic: mezzo-forte
        out.u8(grace->grace.transition);
        out.u8(grace->grace.duration);
        out.u8((grace->grace.dead ? 0x01 : 0) | (grace->grace.on_beat ? 0x02 : 0));
    }
    if (tremolo) out.u8(tremolo->tremolo_speed);
    if (flags2 & 0x08) out.u8(slide_mask);
    if (harmonic) {
        int kind = static_cast<int>(harmonic->harmonic) + 1;  // file is 1-based
        out.u8(kind);
        if (harmonic->harmonic == HarmonicKind::artificial) out.zeros(3);
        if (harmonic->harmonic == HarmonicKind::tapped) out.u8(note.fret + 12);
    }
    if (trill) {
        out.u8(trill->trill.fret);
        out.u8(trill->trill.period);
    }
}

bool needs_effect_record(const Note& note) {
    if (note.let_ring) return true;
    for (const NoteFx& fx : note.effects) {
        switch (fx.kind) {
            case NoteFxKind::accentuated_note:
            case NoteFxKind::heavy_accentuated_note:
                break;  // carried by the note flags byte
            default:
                return true;
        }
    }
    return false;
}

void write_note(ByteWriter& out, const Note& note, bool percussion) {
    int flags = 0x20;  // type + fret always present
    bool effects = needs_effect_record(note);
    if (effects) flags |= 0x08;
    if (note.ghost) flags |= 0x04;
    for (const NoteFx& fx : note.effects) {
        if (fx.kind == NoteFxKind::accentuated_note) flags |= 0x40;
        if (fx.kind == NoteFxKind::heavy_accentuated_note) flags |= 0x02;
    }
    out.u8(flags);
    out.u8(note.tied ? 2 : 1);  // note type
    out.i8(percussion ? note.percussion : note.fret);
    out.u8(0);  // flags2 (no swapped accidentals)
    if (effects) write_note_effects(out, note);
}

void write_beat_effects(ByteWriter& out, const Beat& beat) {
    int flags1 = 0;
    int flags2 = 0;
    const BeatFx* stroke = nullptr;
    for (const BeatFx& fx : beat.effects) {
        switch (fx.kind) {
            case BeatFxKind::fade_in:
                flags1 |= 0x10;
                break;
            case BeatFxKind::upstroke:
            case BeatFxKind::downstroke:
                flags1 |= 0x40;
                stroke = &fx;
                break;
            case BeatFxKind::tempo_change:
                break;  // lives in the measure header, not here
        }
    }
    out.i8(flags1);
    out.i8(flags2);
    if (stroke) {
        // File order is down stroke first; speed 2 = sixteenth sweep.
        out.i8(stroke->kind == BeatFxKind::downstroke ? 2 : 0);
        out.i8(stroke->kind == BeatFxKind::upstroke ? 2 : 0);
    }
}

void write_mix_table_tempo(ByteWriter& out, int tempo, int minor) {
    out.i8(-1);  // instrument unchanged
    out.i32(-1); // RSE instrument
    out.i32(0);
    out.i32(0);
    if (minor == 0) {
        out.i16(0);
        out.u8(0);
    } else {
        out.i32(0);
    }
    out.i8(-1);  // volume
    out.i8(-1);  // balance
    out.i8(-1);  // chorus
    out.i8(-1);  // reverb
    out.i8(-1);  // phaser
    out.i8(-1);  // tremolo
    out.int_byte_size_string("");  // tempo name
    out.i32(tempo);
    out.i8(0);  // tempo change duration: immediate
    if (minor == 10) out.u8(0);  // show tempo
    out.i8(0);   // apply-to-all-tracks flags
    out.i8(-1);  // wah off
    if (minor == 10) {
        out.int_byte_size_string("");
        out.int_byte_size_string("");
    }
}

bool has_written_effects(const Beat& beat) {
    for (const BeatFx& fx : beat.effects) {
        if (fx.kind != BeatFxKind::tempo_change) return true;
    }
    return false;
}

void write_beat(ByteWriter& out, const Beat& beat, bool percussion,
                std::optional<int> tempo_change, int minor) {
    DurationCode duration = duration_to_code(beat.duration);
    int flags = 0;
    if (duration.dotted) flags |= 0x01;
    if (has_written_effects(beat)) flags |= 0x08;
    if (tempo_change) flags |= 0x10;
    if (duration.tuplet_enters != 1) flags |= 0x20;
    if (beat.is_rest()) flags |= 0x40;
    out.u8(flags);
    if (flags & 0x40) out.u8(0x02);  // rest status
    out.i8(duration.code);
    if (flags & 0x20) out.i32(duration.tuplet_enters);
    if (flags & 0x08) write_beat_effects(out, beat);
    if (flags & 0x10) write_mix_table_tempo(out, *tempo_change, minor);
    int string_flags = 0;
    for (size_t i = 0; i < beat.notes.size(); ++i) {
        int string = percussion ? static_cast<int>(i) + 1 : beat.notes[i].string;
        string_flags |= 1 << (7 - string);
    }
    out.u8(string_flags);
    for (const Note& note : beat.notes) write_note(out, note, percussion);
    out.u8(0);  // display flags
    out.u8(0);
}

void write_empty_measure(ByteWriter& out, std::optional<int> tempo_change,
                         int minor) {
    out.i32(1);  // voice 0: one placeholder beat
    int flags = 0x40 | (tempo_change ? 0x10 : 0);
    out.u8(flags);
    out.u8(0x00);  // empty status
    out.i8(-2);    // whole-note placeholder
    if (tempo_change) write_mix_table_tempo(out, *tempo_change, minor);
    out.u8(0);  // no strings
    out.u8(0);  // display flags
    out.u8(0);
}

void write_measures(ByteWriter& out, const Song& song, int minor) {
    for (size_t m = 0; m < song.headers.size(); ++m) {
        for (size_t t = 0; t < song.tracks.size(); ++t) {
            const Track& track = song.tracks[t];
            const Measure& measure = track.measures[m];
            // The measure's tempo change rides on the first track.
            std::optional<int> tempo =
                t == 0 ? song.headers[m].tempo_change : std::nullopt;
            if (measure.beats.empty()) {
                write_empty_measure(out, tempo, minor);
            } else {
                out.i32(static_cast<int>(measure.beats.size()));
                for (size_t b = 0; b < measure.beats.size(); ++b) {
                    write_beat(out, measure.beats[b], track.percussion,
                               b == 0 ? tempo : std::nullopt, minor);
                }
            }
            out.i32(0);  // voice 1: unused
            out.u8(0);   // line break
        }
    }
}

}  // namespace

std::vector<uint8_t> write_gp5_versioned(const Song& input, int version_minor) {
    if (version_minor != 0 && version_minor != 10) {
        throw ContractError("unsupported GP5 minor version");
    }
    if (auto problem = check_song(input)) {
        throw ContractError("song rejected: " + *problem);
    }
    Song song = input;
    if (song.headers.empty()) {
        song.headers.push_back(MeasureHeader{});
        for (Track& track : song.tracks) track.measures.emplace_back();
    }
    if (song.tracks.empty()) {
        Track track;
        track.slot = Slot::distorted0;
        track.tuning = standard_tuning(false, track.string_count);
        for (int& pitch : track.tuning) pitch += song.downtune;
        track.measures.resize(song.headers.size());
        song.tracks.push_back(std::move(track));
    }

    ByteWriter out;
    write_version(out, version_minor);
    write_info(out, song);
    write_lyrics(out);
    if (version_minor == 10) write_master_effect(out);
    write_page_setup(out);
    out.int_byte_size_string("");  // tempo name
    out.i32(song.initial_tempo);
    if (version_minor == 10) out.u8(0);  // show tempo
    out.i8(0);                           // key
    out.i32(0);                          // octave
    std::vector<TrackPlan> plans = plan_channels(song);
    write_channels(out, plans);
    for (int d = 0; d < 19; ++d) out.i16(-1);  // directions unused
    out.i32(0);                                // master reverb
    out.i32(static_cast<int>(song.headers.size()));
    out.i32(static_cast<int>(song.tracks.size()));
    for (size_t m = 0; m < song.headers.size(); ++m) {
        write_measure_header(out, song, m);
    }
    for (size_t t = 0; t < plans.size(); ++t) {
        write_track(out, plans[t], version_minor, t == 0);
    }
    out.zeros(version_minor == 0 ? 2 : 1);
    write_measures(out, song, version_minor);
    return out.take();
}

std::vector<uint8_t> write_gp5(const Song& song) {
    return write_gp5_versioned(song, 0);
}

void write_gp5_file(const std::filesystem::path& path, const Song& song) {
    std::vector<uint8_t> bytes = write_gp5(song);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace tabtok
