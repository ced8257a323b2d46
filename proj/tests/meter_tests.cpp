#include <doctest.h>

#include "tabtok/errors.hpp"
#include "tabtok/meter.hpp"

using namespace tabtok;

TEST_CASE("tick-to-seconds conversion is exact") {
    // One tick at 100 bpm: 60 / (100 * 960), exactly representable checks.
    CHECK(ticks_to_seconds(1, 100) == 0.000625);
    CHECK(ticks_to_seconds(960, 60) == 1.0);
    CHECK(ticks_to_seconds(480, 120) == 0.25);
    CHECK(ticks_to_seconds(3840, 120) == 2.0);
    CHECK(ticks_to_seconds(0, 100) == 0.0);
    CHECK_THROWS_AS(ticks_to_seconds(960, 0), ContractError);
    CHECK_THROWS_AS(ticks_to_seconds(960, -10), ContractError);
}

TEST_CASE("duration codes decode to the staff tick table") {
    CHECK(duration_from_code({-2, false, 1, 1}).ticks == 3840);  // whole
    CHECK(duration_from_code({-1, false, 1, 1}).ticks == 1920);  // half
    CHECK(duration_from_code({0, false, 1, 1}).ticks == 960);    // quarter
    CHECK(duration_from_code({1, false, 1, 1}).ticks == 480);    // eighth
    CHECK(duration_from_code({2, false, 1, 1}).ticks == 240);    // sixteenth
    CHECK(duration_from_code({3, false, 1, 1}).ticks == 120);
    CHECK(duration_from_code({4, false, 1, 1}).ticks == 60);
    CHECK(duration_from_code({0, true, 1, 1}).ticks == 1440);   // dotted quarter
    CHECK(duration_from_code({1, false, 3, 2}).ticks == 320);   // triplet eighth
    CHECK(duration_from_code({2, false, 3, 2}).ticks == 160);
    CHECK_FALSE(duration_from_code({1, false, 3, 2}).rounded);
    CHECK(duration_from_code({0, false, 5, 4}).ticks == 768);
    CHECK(duration_from_code({0, false, 7, 4}).rounded);  // 3840/7 is not integral
    CHECK_THROWS_AS(duration_from_code({5, false, 1, 1}), ContractError);
    CHECK_THROWS_AS(duration_from_code({-3, false, 1, 1}), ContractError);
}

TEST_CASE("duration encoding picks exact spellings and safe fallbacks") {
    CHECK(duration_to_code(960) == DurationCode{0, false, 1, 1});
    CHECK(duration_to_code(1440) == DurationCode{0, true, 1, 1});
    CHECK(duration_to_code(320) == DurationCode{1, false, 3, 2});
    CHECK(duration_to_code(40) == DurationCode{4, false, 3, 2});
    // 1000 has no exact spelling; the longest fitting value is the quarter.
    CHECK(duration_to_code(1000) == DurationCode{0, false, 1, 1});
    // Below the shortest spellable duration, the sixty-fourth triplet stands in.
    CHECK(duration_to_code(39) == DurationCode{4, false, 3, 2});
    CHECK_THROWS_AS(duration_to_code(0), ContractError);

    for (int ticks : {3840, 2880, 1920, 1440, 960, 720, 480, 360, 320, 240, 160, 120, 60, 40}) {
        CAPTURE(ticks);
        CHECK(duration_representable(ticks));
        CHECK(duration_from_code(duration_to_code(ticks)).ticks == ticks);
    }
    CHECK_FALSE(duration_representable(1000));
    CHECK_FALSE(duration_representable(3360));
}

TEST_CASE("duration names label the histogram buckets") {
    REQUIRE(duration_name(960).has_value());
    CHECK(*duration_name(960) == "quarter");
    CHECK(*duration_name(480) == "eighth");
    CHECK(*duration_name(240) == "sixteenth");
    CHECK(*duration_name(320) == "eighth triplet");
    CHECK(*duration_name(1440) == "dotted quarter");
    CHECK_FALSE(duration_name(1000).has_value());
}

TEST_CASE("time signature inference") {
    for (int n = 1; n <= 16; ++n) {
        CAPTURE(n);
        InferredSignature sig = infer_time_signature(static_cast<long long>(n) * 960);
        CHECK(sig.signature == TimeSignature{n, 4});
        CHECK_FALSE(sig.rounded);
    }
    CHECK(infer_time_signature(3360).signature == TimeSignature{7, 8});
    CHECK(infer_time_signature(2880).signature == TimeSignature{3, 4});  // never 6/8
    CHECK(infer_time_signature(2400).signature == TimeSignature{5, 8});
    CHECK(infer_time_signature(1200).signature == TimeSignature{5, 16});
    CHECK(infer_time_signature(5 * 240).signature == TimeSignature{5, 16});

    SUBCASE("off-grid totals round to the nearest sixteenth") {
        InferredSignature sig = infer_time_signature(3841);
        CHECK(sig.rounded);
        CHECK(sig.signature == TimeSignature{4, 4});
        sig = infer_time_signature(7);
        CHECK(sig.rounded);
        CHECK(sig.signature == TimeSignature{1, 16});
    }
    SUBCASE("numerators cap at 32") {
        InferredSignature sig = infer_time_signature(100LL * 960);
        CHECK(sig.rounded);
        CHECK(sig.signature == TimeSignature{32, 4});
    }
    CHECK_THROWS_AS(infer_time_signature(0), ContractError);
    CHECK_THROWS_AS(infer_time_signature(-960), ContractError);
}

TEST_CASE("tuplet times table") {
    CHECK(tuplet_times_for(3) == 2);
    CHECK(tuplet_times_for(5) == 4);
    CHECK(tuplet_times_for(6) == 4);
    CHECK(tuplet_times_for(7) == 4);
    CHECK(tuplet_times_for(9) == 8);
    CHECK(tuplet_times_for(13) == 8);
    CHECK(tuplet_times_for(1) == 1);
    CHECK_FALSE(tuplet_times_for(2).has_value());
    CHECK_FALSE(tuplet_times_for(4).has_value());
    CHECK_FALSE(tuplet_times_for(14).has_value());
}
