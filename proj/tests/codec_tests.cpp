#include <doctest.h>

#include <algorithm>
#include <random>

#include "gen.hpp"
#include "tabtok/errors.hpp"
#include "tabtok/tokenizer.hpp"

using namespace tabtok;

namespace {

std::vector<std::string> spellings(const std::vector<Token>& tokens) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const Token& token : tokens) {
        out.push_back(token.kind == TokenKind::unknown ? token.text : render_token(token));
    }
    return out;
}

Song quarter_note_song() {
    Song song;
    song.artist = "someone";
    song.headers = {{0, {4, 4}, std::nullopt}};
    Track track;
    track.slot = Slot::clean0;
    track.string_count = 6;
    track.tuning = standard_tuning(false, 6);
    Note note;
    note.string = 6;
    note.fret = 0;
    Measure measure;
    measure.beats = {{0, 960, {note}, {}}, {960, 2880, {}, {}}};
    track.measures.push_back(measure);
    song.tracks.push_back(track);
    return song;
}

}  // namespace

TEST_CASE("encoding a header-only song") {
    Song song;
    song.artist = "band";
    std::vector<Token> tokens = encode(song);
    CHECK(spellings(tokens) ==
          std::vector<std::string>{"artist:band", "downtune:0", "tempo:120", "start", "end"});
}

TEST_CASE("encoding a quarter note then a rest") {
    std::vector<Token> tokens = encode(quarter_note_song());
    CHECK(spellings(tokens) == std::vector<std::string>{
                                   "artist:someone", "downtune:0", "tempo:120", "start",
                                   "new_measure", "clean0:note:s6:f0", "wait:960",
                                   "clean0:note:rest", "wait:2880", "end"});
}

TEST_CASE("identical consecutive measures compress to measure:repeat") {
    Song song = quarter_note_song();
    song.headers.push_back({1, {4, 4}, std::nullopt});
    song.tracks[0].measures.push_back(song.tracks[0].measures[0]);

    std::vector<Token> with_repeat = encode(song);
    auto words = spellings(with_repeat);
    CHECK(std::count(words.begin(), words.end(), "measure:repeat") == 1);
    CHECK(std::count(words.begin(), words.end(), "new_measure") == 1);

    EncodeConfig config;
    config.emit_measure_repeat = false;
    auto words_plain = spellings(encode(song, config));
    CHECK(std::count(words_plain.begin(), words_plain.end(), "measure:repeat") == 0);
    CHECK(std::count(words_plain.begin(), words_plain.end(), "new_measure") == 2);

    // Both forms decode to the same music.
    CHECK(musically_equivalent(decode(with_repeat).song,
                               decode(encode(song, config)).song)
              .equivalent);
}

TEST_CASE("nfx tokens directly follow their note, bfx follow the beat") {
    Song song = quarter_note_song();
    Note& note = song.tracks[0].measures[0].beats[0].notes[0];
    note.let_ring = true;
    NoteFx pm;
    pm.kind = NoteFxKind::palm_mute;
    add_note_fx(note.effects, pm);
    add_beat_fx(song.tracks[0].measures[0].beats[0].effects, {BeatFxKind::downstroke, 0});

    auto words = spellings(encode(song));
    std::vector<std::string> expected = {
        "artist:someone", "downtune:0", "tempo:120", "start", "new_measure",
        "clean0:note:s6:f0", "nfx:palm_mute", "nfx:let_ring", "bfx:downstroke",
        "wait:960", "clean0:note:rest", "wait:2880", "end"};
    CHECK(words == expected);
}

TEST_CASE("tempo changes attach to the first beat of their measure") {
    Song song = quarter_note_song();
    song.headers.push_back({1, {4, 4}, 96});
    Measure rest_only;
    rest_only.beats = {{0, 3840, {}, {}}};
    song.tracks[0].measures.push_back(rest_only);

    auto words = spellings(encode(song));
    auto it = std::find(words.begin(), words.end(), "bfx:tempo_change:96");
    REQUIRE(it != words.end());
    CHECK(*(it - 1) == "clean0:note:rest");

    Song decoded = decode(encode(song)).song;
    REQUIRE(decoded.headers.size() == 2);
    CHECK(decoded.headers[0].tempo_change == std::nullopt);
    CHECK(decoded.headers[1].tempo_change == 96);
}

TEST_CASE("encode enforces the model invariants") {
    Song song = quarter_note_song();
    song.tracks[0].measures[0].beats[0].duration = 480;  // gap to the rest
    CHECK_THROWS_AS(encode(song), ContractError);
}

TEST_CASE("waits per measure sum to the span and never run adjacent") {
    for (uint32_t seed = 1; seed <= 60; ++seed) {
        CAPTURE(seed);
        Song song = testsupport::make_song(seed);
        std::vector<Token> tokens = encode(song);
        size_t measure = 0;
        long long wait_sum = 0;
        bool last_was_wait = false;
        auto close_measure = [&] {
            if (measure > 0) {
                CHECK(wait_sum == span_ticks(song.headers[measure - 1].time_signature));
            }
            wait_sum = 0;
        };
        for (const Token& token : tokens) {
            if (token.kind == TokenKind::new_measure ||
                token.kind == TokenKind::measure_repeat) {
                close_measure();
                ++measure;
            }
            if (token.kind == TokenKind::wait) {
                CHECK_FALSE(last_was_wait);
                wait_sum += token.value;
            }
            last_was_wait = token.kind == TokenKind::wait;
        }
        close_measure();
        CHECK(measure == song.headers.size());
    }
}

TEST_CASE("every nfx immediately follows a note, drum hit or another nfx") {
    std::vector<Token> tokens = encode(testsupport::kitchen_sink_song());
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i].kind != TokenKind::nfx) continue;
        REQUIRE(i > 0);
        TokenKind prev = tokens[i - 1].kind;
        CHECK((prev == TokenKind::note_on || prev == TokenKind::drum_hit ||
               prev == TokenKind::nfx));
    }
}

TEST_CASE("decoding an empty stream yields the default song") {
    DecodeResult result = decode({});
    CHECK(result.song.artist == "unknown");
    CHECK(result.song.downtune == 0);
    CHECK(result.song.initial_tempo == 120);
    CHECK(result.song.headers.empty());
    CHECK(result.song.tracks.empty());
    CHECK(result.skipped.empty());
}

TEST_CASE("round-trip: the kitchen sink song survives encode-decode") {
    Song song = testsupport::kitchen_sink_song();
    DecodeResult result = decode(encode(song));
    CHECK(result.skipped.empty());
    EquivalenceReport report = musically_equivalent(song, result.song);
    for (const std::string& diff : report.differences) {
        CAPTURE(diff);
        CHECK(false);
    }
    CHECK(report.equivalent);
}

TEST_CASE("round-trip: seeded songs survive encode-decode") {
    for (uint32_t seed = 1; seed <= 120; ++seed) {
        CAPTURE(seed);
        Song song = testsupport::make_song(seed);
        DecodeResult result = decode(encode(song));
        CHECK(result.skipped.empty());
        EquivalenceReport report = musically_equivalent(song, result.song);
        if (!report.equivalent) {
            for (const std::string& diff : report.differences) {
                CAPTURE(diff);
                CHECK(false);
            }
        }
        CHECK(report.equivalent);
    }
}

TEST_CASE("canonical streams are fixed points of decode-encode") {
    CHECK(is_canonical(encode(testsupport::kitchen_sink_song())));
    for (uint32_t seed = 1; seed <= 120; ++seed) {
        CAPTURE(seed);
        CHECK(is_canonical(encode(testsupport::make_song(seed))));
    }
    CHECK_FALSE(is_canonical({}));  // canonical form always carries the header
    CHECK_FALSE(is_canonical({make_start()}));
}

TEST_CASE("decoder skips malformed structure and keeps counts") {
    SUBCASE("headers take the first occurrence") {
        std::vector<Token> tokens = {make_artist("first"), make_artist("second"),
                                     make_tempo(100),      make_tempo(200),
                                     make_downtune(-1),    make_downtune(-2),
                                     make_start(),         make_start()};
        DecodeResult result = decode(tokens);
        CHECK(result.song.artist == "first");
        CHECK(result.song.initial_tempo == 100);
        CHECK(result.song.downtune == -1);
        CHECK(result.skipped.at("duplicate_header_token") == 4);
    }
    SUBCASE("unknown tokens are counted") {
        DecodeResult result = decode({make_unknown("xyzzy:blorp"), make_unknown("junk")});
        CHECK(result.skipped.at("unknown_token") == 2);
    }
    SUBCASE("nfx without a note is dropped") {
        NoteFx fx;
        fx.kind = NoteFxKind::vibrato;
        DecodeResult result = decode({make_new_measure(), make_nfx(fx), make_wait(960)});
        CHECK(result.skipped.at("orphan_nfx") == 1);
    }
    SUBCASE("decoding stops at the first end token") {
        std::vector<Token> tokens = {make_new_measure(), make_wait(960), make_end(),
                                     make_new_measure(), make_wait(960)};
        DecodeResult result = decode(tokens);
        CHECK(result.song.headers.size() == 1);
    }
    SUBCASE("measure:repeat with no predecessor becomes a plain measure") {
        std::vector<Token> tokens = {make_measure_repeat(), make_rest(Slot::clean0),
                                     make_wait(960)};
        DecodeResult result = decode(tokens);
        CHECK(result.skipped.at("orphan_measure_repeat") == 1);
        REQUIRE(result.song.headers.size() == 1);
        CHECK(result.song.headers[0].time_signature == TimeSignature{1, 4});
    }
    SUBCASE("second note on the same string is dropped") {
        std::vector<Token> tokens = {make_new_measure(),
                                     make_note_on(Slot::clean0, 3, 5),
                                     make_note_on(Slot::clean0, 3, 7), make_wait(960)};
        DecodeResult result = decode(tokens);
        CHECK(result.skipped.at("duplicate_string_note") == 1);
        const Track& track = result.song.tracks[0];
        REQUIRE(track.measures[0].beats.size() == 1);
        CHECK(track.measures[0].beats[0].notes[0].fret == 5);
    }
    SUBCASE("a rest cannot land on an occupied onset") {
        std::vector<Token> tokens = {make_new_measure(),
                                     make_note_on(Slot::clean0, 3, 5),
                                     make_rest(Slot::clean0), make_wait(960)};
        DecodeResult result = decode(tokens);
        CHECK(result.skipped.at("conflicting_beat") == 1);
    }
    SUBCASE("notes after a rest on the same onset are dropped") {
        std::vector<Token> tokens = {make_new_measure(), make_rest(Slot::clean0),
                                     make_note_on(Slot::clean0, 3, 5), make_wait(960)};
        DecodeResult result = decode(tokens);
        CHECK(result.skipped.at("conflicting_beat") == 1);
        CHECK(result.song.tracks[0].measures[0].beats[0].is_rest());
    }
    SUBCASE("bass strings stop at six") {
        std::vector<Token> tokens = {make_new_measure(), make_note_on(Slot::bass, 6, 0),
                                     make_note_on(Slot::bass, 7, 0), make_wait(960)};
        DecodeResult result = decode(tokens);
        CHECK(result.skipped.at("string_out_of_range") == 1);
        CHECK(result.song.tracks[0].string_count == 6);
    }
    SUBCASE("seven drum voices cannot share one beat") {
        std::vector<Token> tokens = {make_new_measure()};
        for (int n = 35; n <= 41; ++n) tokens.push_back(make_drum_hit(n));
        tokens.push_back(make_wait(960));
        DecodeResult result = decode(tokens);
        CHECK(result.skipped.at("drum_beat_overflow") == 1);
        CHECK(result.song.tracks[0].measures[0].beats[0].notes.size() == 6);
    }
    SUBCASE("events past any representable span are dropped") {
        std::vector<Token> tokens = {make_new_measure(), make_wait(40000),
                                     make_note_on(Slot::clean0, 1, 0), make_wait(960)};
        DecodeResult result = decode(tokens);
        CHECK(result.skipped.at("event_beyond_measure") == 1);
    }
    SUBCASE("a second tempo change in one measure is dropped") {
        BeatFx t1{BeatFxKind::tempo_change, 100};
        BeatFx t2{BeatFxKind::tempo_change, 140};
        std::vector<Token> tokens = {make_new_measure(), make_rest(Slot::pads),
                                     make_bfx(t1), make_bfx(t2), make_wait(960)};
        DecodeResult result = decode(tokens);
        CHECK(result.skipped.at("duplicate_tempo_change") == 1);
        CHECK(result.song.headers[0].tempo_change == 100);
    }
    SUBCASE("content with no waits still closes as a 4/4 measure") {
        DecodeResult result = decode({make_new_measure(), make_note_on(Slot::leads, 1, 1)});
        CHECK(result.skipped.at("measure_without_waits") == 1);
        REQUIRE(result.song.headers.size() == 1);
        CHECK(result.song.headers[0].time_signature == TimeSignature{4, 4});
    }
    SUBCASE("repeated measures only accept events on cloned onsets") {
        std::vector<Token> tokens = {
            make_new_measure(),  make_note_on(Slot::clean0, 1, 0), make_wait(1920),
            make_note_on(Slot::clean0, 1, 2), make_wait(1920),
            make_measure_repeat(), make_wait(960),
            make_note_on(Slot::clean0, 2, 5),  // tick 960: not a cloned onset
            make_wait(960),
            make_note_on(Slot::clean0, 2, 7),  // tick 1920: the cloned onset
            make_wait(1920)};
        DecodeResult result = decode(tokens);
        CHECK(result.skipped.at("event_inside_repeat") == 1);
        const Track& track = result.song.tracks[0];
        REQUIRE(track.measures.size() == 2);
        REQUIRE(track.measures[1].beats.size() == 2);
        CHECK(track.measures[1].beats[1].notes.size() == 2);  // clone + new note
    }
}

TEST_CASE("decoded songs always satisfy the structural checks") {
    std::mt19937 rng(7);
    std::vector<std::string> vocab = {
        "artist:x", "downtune:-1", "tempo:200", "start", "end", "new_measure",
        "measure:repeat", "wait:120", "wait:960", "wait:9999999",
        "distorted0:note:s1:f0", "bass:note:s6:f2", "drums:note:36",
        "clean0:note:rest", "nfx:vibrato", "nfx:bend:2:100", "bfx:tempo_change:55",
        "bfx:upstroke", "mystery:token"};
    for (int i = 0; i < 300; ++i) {
        std::vector<Token> tokens =
            testsupport::tokens_from_vocab(vocab, static_cast<uint32_t>(i), 1 + rng() % 200);
        DecodeResult result = decode(tokens);
        auto issue = check_song(result.song);
        if (issue) CAPTURE(*issue);
        CHECK_FALSE(issue.has_value());
    }
}

TEST_CASE("sounding notes follow the sustain rules") {
    auto build = [](std::vector<Beat> beats) {
        Song song;
        song.headers = {{0, {4, 4}, std::nullopt}};
        Track track;
        track.slot = Slot::leads;
        track.string_count = 6;
        track.tuning = standard_tuning(false, 6);
        Measure measure;
        measure.beats = std::move(beats);
        track.measures.push_back(measure);
        song.tracks.push_back(track);
        return song;
    };
    auto note = [](int string, int fret, bool ghost = false, bool ring = false) {
        Note n;
        n.string = string;
        n.fret = fret;
        n.ghost = ghost;
        n.let_ring = ring;
        return n;
    };

    SUBCASE("plain notes last until the next beat") {
        Song song = build({{0, 960, {note(1, 5)}, {}}, {960, 2880, {note(1, 7)}, {}}});
        auto sounding = sounding_notes(song);
        REQUIRE(sounding.size() == 2);
        CHECK(sounding[0].duration == 960);
        CHECK(sounding[1].duration == 2880);
    }
    SUBCASE("let ring sustains to the measure end") {
        Song song = build({{0, 960, {note(1, 5, false, true)}, {}},
                           {960, 960, {note(2, 7)}, {}},
                           {1920, 1920, {}, {}}});
        auto sounding = sounding_notes(song);
        REQUIRE(sounding.size() == 2);
        CHECK(sounding[0].duration == 3840);  // ring through the other string
        CHECK(sounding[1].duration == 960);   // plain note cut by the rest
    }
    SUBCASE("let ring stops at the next note on the same string") {
        Song song = build({{0, 960, {note(1, 5, false, true)}, {}},
                           {960, 960, {note(1, 7)}, {}},
                           {1920, 1920, {}, {}}});
        auto sounding = sounding_notes(song);
        REQUIRE(sounding.size() == 2);
        CHECK(sounding[0].duration == 960);
    }
    SUBCASE("ghost-only beats do not silence prior notes") {
        Song song = build({{0, 960, {note(1, 5)}, {}},
                           {960, 960, {note(2, 3, true)}, {}},
                           {1920, 960, {note(1, 8)}, {}},
                           {2880, 960, {}, {}}});
        auto sounding = sounding_notes(song);
        REQUIRE(sounding.size() == 3);
        CHECK(sounding[0].duration == 1920);  // extends through the ghost beat
        CHECK(sounding[1].duration == 960);   // the ghost itself keeps its beat
        CHECK(sounding[2].duration == 960);   // cut by the rest
    }
}

TEST_CASE("musical equivalence notices real differences") {
    Song a = testsupport::kitchen_sink_song();

    SUBCASE("fret change") {
        Song b = a;
        b.tracks[0].measures[0].beats[0].notes[0].fret += 1;
        EquivalenceReport report = musically_equivalent(a, b);
        CHECK_FALSE(report.equivalent);
        CHECK_FALSE(report.differences.empty());
    }
    SUBCASE("tempo change value") {
        Song b = a;
        b.headers[3].tempo_change = 97;
        CHECK_FALSE(musically_equivalent(a, b).equivalent);
    }
    SUBCASE("downtune") {
        Song b = a;
        b.downtune = 0;
        CHECK_FALSE(musically_equivalent(a, b).equivalent);
    }
    SUBCASE("artist compares after normalization") {
        Song b = a;
        b.artist = "Fixture   Band";
        CHECK(musically_equivalent(a, b).equivalent);
    }
    SUBCASE("measure count") {
        Song b = a;
        b.headers.pop_back();
        for (Track& track : b.tracks) track.measures.pop_back();
        CHECK_FALSE(musically_equivalent(a, b).equivalent);
    }
}
