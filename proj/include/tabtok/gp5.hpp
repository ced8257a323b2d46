#pragma once

// GuitarPro 5 binary codec. Reads v5.00 and v5.10, writes v5.00.
// Field-by-field layout notes live in docs/gp5_format.md.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tabtok/song.hpp"

namespace tabtok {

struct Gp5Error : std::runtime_error {
    enum class Kind {
        unsupported_version,  // readable header, not a 5.x file we handle
        malformed,            // truncated or self-contradictory data
    };
    Gp5Error(Kind kind, size_t offset, const std::string& message)
        : std::runtime_error(message + " (at byte " + std::to_string(offset) + ")"),
          kind(kind),
          offset(offset) {}
    Kind kind;
    size_t offset;  // byte position the failure was detected at
};

struct Gp5ReadResult {
    Song song;
    int version_minor = 0;  // 0 or 10
    // Features present in the file but not in the model, counted by name:
    // "marker", "chord_diagram", "repeat_open", ... Empty means lossless.
    std::map<std::string, int> skipped;
};

// Parses a whole file image. Throws Gp5Error; never reads out of bounds,
// arbitrary input either parses or throws (fuzz-safe totality).
Gp5ReadResult read_gp5(const std::vector<uint8_t>& bytes);

// Serializes a normalized song as v5.00. Deterministic: equal songs give
// equal bytes. Songs with no tracks or no measures are padded to the one
// empty track/measure the format requires. Throws ContractError when
// check_song rejects the input.
std::vector<uint8_t> write_gp5(const Song& song);

// Same song, chosen dialect (minor 0 or 10). v5.10 output exists to
// exercise the reader's second dialect; files we publish are v5.00.
std::vector<uint8_t> write_gp5_versioned(const Song& song, int version_minor);

Gp5ReadResult read_gp5_file(const std::filesystem::path& path);
void write_gp5_file(const std::filesystem::path& path, const Song& song);

}  // namespace tabtok
