#pragma once

// Stream grammar checks: duplicated one-per-song tokens and immediate
// repetitions, plus a sanitizer that repairs both.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "tabtok/token.hpp"

namespace tabtok {

enum class StreamErrorKind : uint8_t { duplicate_singleton, adjacent_repeat };

struct StreamError {
    size_t position = 0;  // token index in the input stream
    StreamErrorKind kind = StreamErrorKind::adjacent_repeat;
    std::string token;  // offending token's canonical/raw spelling
    bool operator==(const StreamError&) const = default;
};

struct ErrorReport {
    // Extra occurrences per singleton kind: "artist", "downtune", "tempo",
    // "start", "end". Only nonzero entries appear.
    std::map<std::string, int> duplicate_singletons;
    int adjacent_repeats = 0;  // a run of n identical tokens counts n-1
    int total = 0;
    std::vector<StreamError> errors;  // stream order
};

// Pure count, input untouched. A token that is both a repeat and a
// duplicate singleton counts once, as duplicate_singleton.
ErrorReport count_errors(const std::vector<Token>& tokens);

// Repairs a stream: keeps the first of each singleton kind and drops later
// ones, sums runs of adjacent waits into one, drops other adjacent
// duplicates, removes interior `end`s, prepends any missing header tokens
// (artist "unknown", downtune 0, tempo 120, start, in canonical order) and
// terminates with exactly one `end`. Idempotent; output has zero errors.
std::vector<Token> sanitize(std::vector<Token> tokens);

std::string error_report_to_json(const ErrorReport& report);

}  // namespace tabtok
