#pragma once

// Token layer: the line-oriented text form of a song. One token per line,
// UTF-8, LF endings. parse_token is total; anything it cannot read becomes
// an `unknown` token carrying the raw text.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tabtok/song.hpp"

namespace tabtok {

inline constexpr int kMaxWaitTicks = 9999999;
inline constexpr int kMaxFret = 99;
inline constexpr int kMinDrumNote = 35;
inline constexpr int kMaxDrumNote = 81;

enum class TokenKind : uint8_t {
    artist,
    downtune,
    tempo,
    start,
    end,
    new_measure,
    measure_repeat,
    wait,
    note_on,
    drum_hit,
    rest,
    nfx,
    bfx,
    unknown,
};

const char* token_kind_name(TokenKind kind);

struct Token {
    TokenKind kind = TokenKind::unknown;
    std::string text;  // artist name, or raw text for unknown
    int value = 0;     // downtune | tempo bpm | wait ticks | drum number
    Slot slot = Slot::distorted0;  // note_on / rest
    int string = 0;                // note_on: 1..7
    int fret = 0;                  // note_on: 0..99
    NoteFx nfx;                    // kind == nfx (flag kinds allowed here)
    BeatFx bfx;                    // kind == bfx
    bool operator==(const Token&) const = default;
};

// Constructors for the common shapes.
Token make_artist(std::string name);
Token make_downtune(int semitones);
Token make_tempo(int bpm);
Token make_start();
Token make_end();
Token make_new_measure();
Token make_measure_repeat();
Token make_wait(int ticks);
Token make_note_on(Slot slot, int string, int fret);
Token make_drum_hit(int midi_note);
Token make_rest(Slot slot);
Token make_nfx(NoteFx fx);
Token make_bfx(BeatFx fx);
Token make_unknown(std::string raw);

// Lowercases ASCII, maps whitespace runs to '_', strips the rest of the
// ASCII control range; empty results become "unknown".
std::string normalize_artist(std::string_view raw);

// Total: never throws, unparseable input yields kind == unknown with the
// raw text preserved. Inverse of render_token on everything it accepts.
Token parse_token(std::string_view word);

// Canonical spelling. Throws ContractError for unknown tokens or payloads
// outside the documented ranges.
std::string render_token(const Token& token);

// Whole-file forms: one token per line, every line LF-terminated. Parsing
// splits on LF only and keeps blank lines out of the stream; CR is treated
// as part of the token text (and will round-trip as unknown).
std::vector<Token> parse_token_lines(std::string_view text);
std::string render_token_lines(const std::vector<Token>& tokens);

std::vector<Token> read_token_file(const std::filesystem::path& path);
void write_token_file(const std::filesystem::path& path, const std::vector<Token>& tokens);

}  // namespace tabtok
