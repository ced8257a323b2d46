#include "tabtok/meter.hpp"

#include <algorithm>
#include <array>

#include "tabtok/errors.hpp"

namespace tabtok {

namespace {

constexpr int kSixteenth = kTicksPerQuarter / 4;  // 240
constexpr int kMaxNumerator = 32;

// code -2..4 -> 3840, 1920, 960, 480, 240, 120, 60
constexpr int base_ticks(int code) { return 3840 >> (code + 2); }

struct NamedDuration {
    int ticks;
    const char* name;
};

// Plain, dotted and triplet staff durations; used for histogram labeling.
constexpr std::array<NamedDuration, 21> kNamedDurations = {{
    {5760, "dotted whole"},
    {3840, "whole"},
    {2880, "dotted half"},
    {2560, "whole triplet"},
    {1920, "half"},
    {1440, "dotted quarter"},
    {1280, "half triplet"},
    {960, "quarter"},
    {720, "dotted eighth"},
    {640, "quarter triplet"},
    {480, "eighth"},
    {360, "dotted sixteenth"},
    {320, "eighth triplet"},
    {240, "sixteenth"},
    {180, "dotted thirty-second"},
    {160, "sixteenth triplet"},
    {120, "thirty-second"},
    {90, "dotted sixty-fourth"},
    {80, "thirty-second triplet"},
    {60, "sixty-fourth"},
    {40, "sixty-fourth triplet"},
}};

}  // namespace

InferredSignature infer_time_signature(long long span) {
    if (span <= 0) throw ContractError("time signature inference needs positive ticks");
    InferredSignature out;
    long long snapped = span;
    if (span % kSixteenth != 0) {
        snapped = (span + kSixteenth / 2) / kSixteenth * kSixteenth;
        if (snapped == 0) snapped = kSixteenth;
        out.rounded = true;
    }
    long long numerator;
    int denominator;
    if (snapped % 960 == 0) {
        numerator = snapped / 960;
        denominator = 4;
    } else if (snapped % 480 == 0) {
        numerator = snapped / 480;
        denominator = 8;
    } else {
        numerator = snapped / 240;
        denominator = 16;
    }
    if (numerator > kMaxNumerator) {
        numerator = kMaxNumerator;
        out.rounded = true;
    }
    out.signature = {static_cast<int>(numerator), denominator};
    return out;
}

double ticks_to_seconds(long long ticks, int tempo_bpm) {
    if (tempo_bpm <= 0) throw ContractError("tempo must be positive");
    // One correctly-rounded division of exact integer products.
    return static_cast<double>(ticks * 60) /
           static_cast<double>(static_cast<long long>(tempo_bpm) * kTicksPerQuarter);
}

DecodedDuration duration_from_code(const DurationCode& code) {
    if (code.code < -2 || code.code > 4)
        throw ContractError("duration code outside -2..4");
    long long ticks = base_ticks(code.code);
    if (code.dotted) ticks = ticks * 3 / 2;  // all bases divide by 2
    DecodedDuration out;
    if (code.tuplet_enters > 1) {
        long long scaled = ticks * code.tuplet_times;
        out.ticks = static_cast<int>((scaled + code.tuplet_enters / 2) / code.tuplet_enters);
        out.rounded = scaled % code.tuplet_enters != 0;
    } else {
        out.ticks = static_cast<int>(ticks);
    }
    return out;
}

DurationCode duration_to_code(int ticks) {
    if (ticks <= 0) throw ContractError("duration must be positive");
    for (int code = -2; code <= 4; ++code) {
        int base = base_ticks(code);
        if (ticks == base) return {code, false, 1, 1};
        if (ticks == base * 3 / 2) return {code, true, 1, 1};
        if (ticks == base * 2 / 3) return {code, false, 3, 2};
    }
    // No exact spelling: longest representable value that fits.
    DurationCode best{4, false, 3, 2};  // 40 ticks, the shortest spellable
    int best_ticks = 0;
    for (int code = -2; code <= 4; ++code) {
        int base = base_ticks(code);
        const DurationCode candidates[] = {
            {code, true, 1, 1}, {code, false, 1, 1}, {code, false, 3, 2}};
        for (const DurationCode& c : candidates) {
            int t = c.dotted ? base * 3 / 2 : (c.tuplet_enters > 1 ? base * 2 / 3 : base);
            if (t <= ticks && t > best_ticks) {
                best = c;
                best_ticks = t;
            }
        }
    }
    return best;
}

bool duration_representable(int ticks) {
    for (int code = -2; code <= 4; ++code) {
        int base = base_ticks(code);
        if (ticks == base || ticks == base * 3 / 2 || ticks == base * 2 / 3) return true;
    }
    return false;
}

std::optional<std::string> duration_name(int ticks) {
    for (const NamedDuration& d : kNamedDurations) {
        if (d.ticks == ticks) return std::string(d.name);
    }
    return std::nullopt;
}

std::optional<int> tuplet_times_for(int enters) {
    if (enters == 3) return 2;
    if (enters >= 5 && enters <= 7) return 4;
    if (enters >= 9 && enters <= 13) return 8;
    if (enters == 1) return 1;
    return std::nullopt;
}

}  // namespace tabtok
