#include <doctest.h>

#include "gen.hpp"
#include "tabtok/errors.hpp"
#include "tabtok/normalize.hpp"
#include "tabtok/song.hpp"

using namespace tabtok;

namespace {

Track simple_drums(std::vector<std::vector<int>> beats_notes, int beat_ticks = 960) {
    Track track;
    track.slot = Slot::drums;
    track.percussion = true;
    Measure measure;
    int onset = 0;
    for (const auto& numbers : beats_notes) {
        Beat beat;
        beat.onset = onset;
        beat.duration = beat_ticks;
        for (int n : numbers) {
            Note note;
            note.percussion = n;
            beat.notes.push_back(note);
        }
        measure.beats.push_back(std::move(beat));
        onset += beat_ticks;
    }
    track.measures.push_back(std::move(measure));
    return track;
}

}  // namespace

TEST_CASE("slot names round-trip and stay closed") {
    const char* expected[] = {"distorted0", "distorted1", "distorted2", "clean0",
                              "clean1",     "bass",       "drums",      "leads",
                              "pads"};
    for (int s = 0; s < kSlotCount; ++s) {
        Slot slot = static_cast<Slot>(s);
        CHECK(slot_name(slot) == doctest::String(expected[s]));
        REQUIRE(slot_from_name(expected[s]).has_value());
        CHECK(*slot_from_name(expected[s]) == slot);
    }
    CHECK_FALSE(slot_from_name("distorted3").has_value());
    CHECK_FALSE(slot_from_name("").has_value());
    CHECK(slot_is_percussion(Slot::drums));
    CHECK_FALSE(slot_is_percussion(Slot::bass));
}

TEST_CASE("instrument slot assignment") {
    auto slots_of = [](std::vector<RawTrackInfo> infos) {
        return assign_instrument_slots(infos);
    };

    SUBCASE("distortion, bass and drums land on their slots") {
        auto slots = slots_of({{30, false}, {33, false}, {0, true}});
        CHECK(slots == std::vector<Slot>{Slot::distorted0, Slot::bass, Slot::drums});
    }
    SUBCASE("single percussion track") {
        CHECK(slots_of({{0, true}}) == std::vector<Slot>{Slot::drums});
    }
    SUBCASE("family overflow repeats the last slot") {
        auto slots = slots_of({{30, false}, {30, false}, {30, false}, {30, false}});
        CHECK(slots == std::vector<Slot>{Slot::distorted0, Slot::distorted1,
                                         Slot::distorted2, Slot::distorted2});
    }
    SUBCASE("program table boundaries") {
        CHECK(slots_of({{24, false}}) == std::vector<Slot>{Slot::clean0});
        CHECK(slots_of({{28, false}}) == std::vector<Slot>{Slot::clean0});
        CHECK(slots_of({{29, false}}) == std::vector<Slot>{Slot::distorted0});
        CHECK(slots_of({{31, false}}) == std::vector<Slot>{Slot::distorted0});
        CHECK(slots_of({{32, false}}) == std::vector<Slot>{Slot::bass});
        CHECK(slots_of({{39, false}}) == std::vector<Slot>{Slot::bass});
        CHECK(slots_of({{16, false}}) == std::vector<Slot>{Slot::pads});
        CHECK(slots_of({{23, false}}) == std::vector<Slot>{Slot::pads});
        CHECK(slots_of({{40, false}}) == std::vector<Slot>{Slot::pads});
        CHECK(slots_of({{54, false}}) == std::vector<Slot>{Slot::pads});
        CHECK(slots_of({{88, false}}) == std::vector<Slot>{Slot::pads});
        CHECK(slots_of({{95, false}}) == std::vector<Slot>{Slot::pads});
        CHECK(slots_of({{0, false}}) == std::vector<Slot>{Slot::leads});
        CHECK(slots_of({{55, false}}) == std::vector<Slot>{Slot::leads});
        CHECK(slots_of({{127, false}}) == std::vector<Slot>{Slot::leads});
    }
    SUBCASE("deterministic") {
        std::vector<RawTrackInfo> infos = {{30, false}, {25, false}, {0, true}, {33, false}};
        CHECK(slots_of(infos) == slots_of(infos));
    }
    CHECK_THROWS_AS(assign_instrument_slots({}), ContractError);
}

TEST_CASE("drum track merging") {
    SUBCASE("singleton is the identity") {
        Track only = simple_drums({{36}, {38}, {36}, {38}});
        Track merged = merge_drum_tracks({only});
        CHECK(merged == only);
    }
    SUBCASE("kick-only and snare-only union per onset") {
        Track kick = simple_drums({{36}, {36}});
        Track snare = simple_drums({{40}, {40}});
        Track merged = merge_drum_tracks({kick, snare});
        REQUIRE(merged.measures.size() == 1);
        REQUIRE(merged.measures[0].beats.size() == 2);
        for (const Beat& beat : merged.measures[0].beats) {
            REQUIRE(beat.notes.size() == 2);
            CHECK(beat.notes[0].percussion == 36);
            CHECK(beat.notes[1].percussion == 40);
        }
    }
    SUBCASE("identical drum numbers collapse") {
        Track a = simple_drums({{36}});
        Track b = simple_drums({{36}});
        Track merged = merge_drum_tracks({a, b});
        REQUIRE(merged.measures[0].beats.size() == 1);
        CHECK(merged.measures[0].beats[0].notes.size() == 1);
        CHECK(merge_drum_tracks({merged}) == merged);  // idempotent
    }
    SUBCASE("offset beats interleave and re-tile") {
        Track a = simple_drums({{36}, {38}}, 1920);
        Track b = simple_drums({{42}, {42}, {42}, {42}}, 960);
        Track merged = merge_drum_tracks({a, b});
        REQUIRE(merged.measures[0].beats.size() == 4);
        CHECK(merged.measures[0].beats[0].notes.size() == 2);  // 36 + 42
        CHECK(merged.measures[0].beats[1].notes.size() == 1);  // 42 alone
        int end = 0;
        for (const Beat& beat : merged.measures[0].beats) {
            CHECK(beat.onset == end);
            end = beat.onset + beat.duration;
        }
        CHECK(end == 3840);
    }
    SUBCASE("measure count mismatch is a structural error") {
        Track a = simple_drums({{36}});
        Track b = simple_drums({{38}});
        b.measures.push_back(Measure{});
        CHECK_THROWS_AS(merge_drum_tracks({a, b}), ContractError);
    }
    CHECK_THROWS_AS(merge_drum_tracks({}), ContractError);
}

TEST_CASE("overflow merging keeps the earlier note per string") {
    Track a;
    a.slot = Slot::distorted2;
    a.string_count = 6;
    a.tuning = standard_tuning(false, 6);
    Note a_note;
    a_note.string = 3;
    a_note.fret = 5;
    a.measures.push_back({{{0, 3840, {a_note}, {}}}});

    Track b = a;
    b.measures[0].beats[0].notes[0].fret = 9;  // same string, different fret
    Note extra;
    extra.string = 4;
    extra.fret = 7;
    b.measures[0].beats[0].notes.insert(b.measures[0].beats[0].notes.begin(), extra);

    Track merged = merge_overflow_tracks({a, b});
    REQUIRE(merged.measures[0].beats.size() == 1);
    REQUIRE(merged.measures[0].beats[0].notes.size() == 2);
    CHECK(merged.measures[0].beats[0].notes[0].string == 3);
    CHECK(merged.measures[0].beats[0].notes[0].fret == 5);  // earlier track won
    CHECK(merged.measures[0].beats[0].notes[1].string == 4);
    CHECK(merged.measures[0].beats[0].notes[1].fret == 7);
}

TEST_CASE("tuning validation") {
    auto guitar = [](int offset, bool drop) {
        Track track;
        track.slot = Slot::distorted0;
        track.string_count = 6;
        track.tuning = standard_tuning(false, 6);
        for (int& p : track.tuning) p += offset;
        if (drop) track.tuning.back() -= 2;
        return track;
    };
    auto bass = [](int offset) {
        Track track;
        track.slot = Slot::bass;
        track.string_count = 4;
        track.tuning = standard_tuning(true, 4);
        for (int& p : track.tuning) p += offset;
        return track;
    };

    SUBCASE("standard tuning is offset zero") {
        Song song;
        song.tracks = {guitar(0, false), bass(0)};
        auto result = validate_tuning(song);
        REQUIRE(std::holds_alternative<TuningReport>(result));
        CHECK(std::get<TuningReport>(result).downtune == 0);
    }
    SUBCASE("uniform one-semitone downtune") {
        Song song;
        song.tracks = {guitar(-1, false), bass(-1)};
        auto result = validate_tuning(song);
        REQUIRE(std::holds_alternative<TuningReport>(result));
        CHECK(std::get<TuningReport>(result).downtune == -1);
    }
    SUBCASE("drop D guitar with standard bass") {
        Song song;
        song.tracks = {guitar(0, true), bass(0)};
        auto result = validate_tuning(song);
        REQUIRE(std::holds_alternative<TuningReport>(result));
        const TuningReport& report = std::get<TuningReport>(result);
        CHECK(report.downtune == 0);
        REQUIRE(report.tracks.size() == 2);
        CHECK(report.tracks[0].dropped);
        CHECK_FALSE(report.tracks[1].dropped);
    }
    SUBCASE("mixed downtune rejected") {
        Song song;
        song.tracks = {guitar(-1, false), bass(-2)};
        auto result = validate_tuning(song);
        REQUIRE(std::holds_alternative<TuningRejection>(result));
        CHECK(std::get<TuningRejection>(result).reason == "mixed downtune");
    }
    SUBCASE("irregular per-string offsets rejected") {
        Song song;
        Track odd = guitar(0, false);
        odd.tuning[2] += 1;  // one string sharp
        song.tracks = {odd};
        auto result = validate_tuning(song);
        REQUIRE(std::holds_alternative<TuningRejection>(result));
        CHECK(std::get<TuningRejection>(result).reason == "unsupported tuning");
    }
    SUBCASE("uptuning rejected") {
        Song song;
        song.tracks = {guitar(2, false)};
        CHECK(std::holds_alternative<TuningRejection>(validate_tuning(song)));
    }
    SUBCASE("whole supported range accepted") {
        for (int k = 0; k >= -12; --k) {
            Song song;
            song.tracks = {guitar(k, false), bass(k)};
            auto result = validate_tuning(song);
            CAPTURE(k);
            REQUIRE(std::holds_alternative<TuningReport>(result));
            CHECK(std::get<TuningReport>(result).downtune == k);
        }
    }
}

TEST_CASE("standard tuning tables") {
    CHECK(standard_tuning(false, 6) == std::vector<int>{64, 59, 55, 50, 45, 40});
    CHECK(standard_tuning(false, 7) == std::vector<int>{64, 59, 55, 50, 45, 40, 35});
    CHECK(standard_tuning(true, 4) == std::vector<int>{43, 38, 33, 28});
    CHECK(standard_tuning(true, 5) == std::vector<int>{43, 38, 33, 28, 23});
    CHECK(standard_tuning(true, 6) == std::vector<int>{48, 43, 38, 33, 28, 23});
    CHECK(standard_tuning(false, 4).empty());
    CHECK(standard_tuning(true, 7).empty());
}

TEST_CASE("note and beat effect containers stay sorted and unique") {
    std::vector<NoteFx> effects;
    NoteFx vib;
    vib.kind = NoteFxKind::vibrato;
    NoteFx pm;
    pm.kind = NoteFxKind::palm_mute;
    CHECK(add_note_fx(effects, vib));
    CHECK(add_note_fx(effects, pm));
    CHECK_FALSE(add_note_fx(effects, vib));  // duplicate kind
    REQUIRE(effects.size() == 2);
    CHECK(effects[0].kind == NoteFxKind::palm_mute);  // sorted by kind
    CHECK(effects[1].kind == NoteFxKind::vibrato);

    NoteFx slide_a;
    slide_a.kind = NoteFxKind::slide;
    slide_a.slide = SlideKind::legato;
    NoteFx slide_b = slide_a;
    slide_b.slide = SlideKind::out_down;
    CHECK(add_note_fx(effects, slide_a));
    CHECK(add_note_fx(effects, slide_b));  // distinct sub-kind allowed
    CHECK_FALSE(add_note_fx(effects, slide_a));

    NoteFx tie;
    tie.kind = NoteFxKind::tie;
    CHECK_FALSE(add_note_fx(effects, tie));  // flags never enter the list

    std::vector<BeatFx> beat_fx;
    CHECK(add_beat_fx(beat_fx, {BeatFxKind::downstroke, 0}));
    CHECK_FALSE(add_beat_fx(beat_fx, {BeatFxKind::upstroke, 0}));  // one stroke only
    CHECK(add_beat_fx(beat_fx, {BeatFxKind::fade_in, 0}));
    CHECK_FALSE(add_beat_fx(beat_fx, {BeatFxKind::fade_in, 0}));
}

TEST_CASE("structural checks accept the fixtures and reject broken songs") {
    Song sink = testsupport::kitchen_sink_song();
    CHECK_FALSE(check_song(sink).has_value());
    for (uint32_t seed = 1; seed <= 50; ++seed) {
        CAPTURE(seed);
        CHECK_FALSE(check_song(testsupport::make_song(seed)).has_value());
    }

    SUBCASE("beat gap") {
        Song song = sink;
        song.tracks[0].measures[0].beats[1].onset += 60;
        CHECK(check_song(song).has_value());
    }
    SUBCASE("track and header counts must agree") {
        Song song = sink;
        song.tracks[2].measures.pop_back();
        CHECK(check_song(song).has_value());
    }
    SUBCASE("percussion range enforced") {
        Song song = sink;
        for (Track& track : song.tracks) {
            if (!track.percussion) continue;
            track.measures[0].beats[0].notes[0].percussion = 34;
        }
        CHECK(check_song(song).has_value());
    }
    SUBCASE("duplicate slot rejected") {
        Song song = sink;
        song.tracks.push_back(song.tracks[0]);
        CHECK(check_song(song).has_value());
    }
}

TEST_CASE("measure repeat detection is content equality") {
    Song sink = testsupport::kitchen_sink_song();
    CHECK_FALSE(measure_repeats_previous(sink, 0));
    CHECK_FALSE(measure_repeats_previous(sink, 1));  // 4/4 vs 6/8
    CHECK(measure_repeats_previous(sink, 2));
    CHECK_FALSE(measure_repeats_previous(sink, 3));

    Song song = sink;
    song.tracks[0].measures[2].beats[0].notes[0].fret += 1;
    CHECK_FALSE(measure_repeats_previous(song, 2));
}

TEST_CASE("normalization folds same-slot tracks and recovers the downtune") {
    Song raw;
    raw.artist = "band";
    Track g1;
    g1.slot = Slot::distorted0;
    g1.string_count = 6;
    g1.tuning = standard_tuning(false, 6);
    for (int& p : g1.tuning) p -= 2;
    Note n;
    n.string = 6;
    n.fret = 0;
    g1.measures.push_back({{{0, 3840, {n}, {}}}});
    Track g2 = g1;
    g2.measures[0].beats[0].notes[0].string = 5;
    Track drums1 = simple_drums({{36}, {36}, {36}, {36}});
    Track drums2 = simple_drums({{42}, {42}, {42}, {42}});
    raw.tracks = {g2, drums1, g1, drums2};
    // Same slot twice (distorted0) and two drum tracks.

    NormalizeResult result = normalize(raw);
    REQUIRE(result.song.tracks.size() == 2);
    CHECK(result.song.tracks[0].slot == Slot::distorted0);
    CHECK(result.song.tracks[1].slot == Slot::drums);
    CHECK(result.song.downtune == -2);
    CHECK(result.merged.at("distorted0") == 1);
    CHECK(result.merged.at("drums") == 1);
    REQUIRE(result.song.tracks[0].measures.size() == 1);
    CHECK(result.song.tracks[0].measures[0].beats[0].notes.size() == 2);
    CHECK(result.song.tracks[1].measures[0].beats[0].notes.size() == 2);

    SUBCASE("tuning rejection zeroes the downtune") {
        Song odd = raw;
        odd.tracks[0].tuning[1] += 1;
        NormalizeResult rejected = normalize(odd);
        CHECK(std::holds_alternative<TuningRejection>(rejected.tuning));
        CHECK(rejected.song.downtune == 0);
    }
}
