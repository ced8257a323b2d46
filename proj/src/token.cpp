#include "tabtok/token.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include "tabtok/errors.hpp"

namespace tabtok {

namespace {

constexpr std::array<const char*, 14> kTokenKindNames = {
    "artist", "downtune", "tempo",   "start", "end",  "new_measure", "measure_repeat",
    "wait",   "note_on",  "drum_hit", "rest",  "nfx",  "bfx",         "unknown",
};

// Canonical integer field: optional minus, no leading zeros, no junk.
std::optional<long long> strict_int(std::string_view text) {
    if (text.empty()) return std::nullopt;
    bool negative = text.front() == '-';
    std::string_view digits = negative ? text.substr(1) : text;
    if (digits.empty() || digits.size() > 10) return std::nullopt;
    if (digits.size() > 1 && digits.front() == '0') return std::nullopt;
    if (negative && digits == "0") return std::nullopt;
    long long value = 0;
    for (char c : digits) {
        if (c < '0' || c > '9') return std::nullopt;
        value = value * 10 + (c - '0');
    }
    return negative ? -value : value;
}

std::optional<int> int_in(std::string_view text, long long lo, long long hi) {
    auto value = strict_int(text);
    if (!value || *value < lo || *value > hi) return std::nullopt;
    return static_cast<int>(*value);
}

std::vector<std::string_view> split_fields(std::string_view text) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        size_t pos = text.find(':', start);
        if (pos == std::string_view::npos) {
            out.push_back(text.substr(start));
            return out;
        }
        out.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

std::optional<NoteFx> parse_nfx_fields(const std::vector<std::string_view>& f) {
    // f[0] == "nfx"
    if (f.size() < 2) return std::nullopt;
    std::string_view kind = f[1];
    NoteFx fx;
    if (f.size() == 2) {
        static constexpr std::pair<const char*, NoteFxKind> plain[] = {
            {"palm_mute", NoteFxKind::palm_mute},
            {"vibrato", NoteFxKind::vibrato},
            {"hammer", NoteFxKind::hammer},
            {"tie", NoteFxKind::tie},
            {"let_ring", NoteFxKind::let_ring},
            {"ghost_note", NoteFxKind::ghost_note},
            {"accentuated_note", NoteFxKind::accentuated_note},
            {"heavy_accentuated_note", NoteFxKind::heavy_accentuated_note},
            {"staccato", NoteFxKind::staccato},
        };
        for (const auto& [name, value] : plain) {
            if (kind == name) {
                fx.kind = value;
                return fx;
            }
        }
        return std::nullopt;
    }
    if (kind == "slide" && f.size() == 3) {
        auto slide = slide_from_name(f[2]);
        if (!slide) return std::nullopt;
        fx.kind = NoteFxKind::slide;
        fx.slide = *slide;
        return fx;
    }
    if (kind == "harmonic" && f.size() == 3) {
        auto harmonic = harmonic_from_name(f[2]);
        if (!harmonic) return std::nullopt;
        fx.kind = NoteFxKind::harmonic;
        fx.harmonic = *harmonic;
        return fx;
    }
    if (kind == "trill" && f.size() == 4) {
        auto fret = int_in(f[2], 0, kMaxFret);
        auto period = int_in(f[3], 1, 3);
        if (!fret || !period) return std::nullopt;
        fx.kind = NoteFxKind::trill;
        fx.trill = {*fret, *period};
        return fx;
    }
    if (kind == "grace" && f.size() == 7) {
        auto fret = int_in(f[2], 0, kMaxFret);
        auto duration = int_in(f[3], 1, 3);
        auto transition = int_in(f[4], 0, 3);
        auto dead = int_in(f[5], 0, 1);
        auto on_beat = int_in(f[6], 0, 1);
        if (!fret || !duration || !transition || !dead || !on_beat) return std::nullopt;
        fx.kind = NoteFxKind::grace;
        fx.grace = {*fret, *duration, *transition, *dead == 1, *on_beat == 1};
        return fx;
    }
    if (kind == "tremolo_picking" && f.size() == 3) {
        auto speed = int_in(f[2], 1, 3);
        if (!speed) return std::nullopt;
        fx.kind = NoteFxKind::tremolo_picking;
        fx.tremolo_speed = *speed;
        return fx;
    }
    if (kind == "bend" && f.size() >= 4 && f.size() <= 4 + 30) {
        auto type = int_in(f[2], 0, 11);
        auto value = int_in(f[3], -1200, 1200);
        if (!type || !value) return std::nullopt;
        fx.kind = NoteFxKind::bend;
        fx.bend.type = *type;
        fx.bend.value = *value;
        for (size_t i = 4; i < f.size(); ++i) {
            std::string_view field = f[i];
            size_t u1 = field.find('_');
            size_t u2 = u1 == std::string_view::npos ? std::string_view::npos
                                                     : field.find('_', u1 + 1);
            if (u2 == std::string_view::npos) return std::nullopt;
            if (field.find('_', u2 + 1) != std::string_view::npos) return std::nullopt;
            auto pos = int_in(field.substr(0, u1), 0, 60);
            auto val = int_in(field.substr(u1 + 1, u2 - u1 - 1), -1200, 1200);
            auto vib = int_in(field.substr(u2 + 1), 0, 1);
            if (!pos || !val || !vib) return std::nullopt;
            fx.bend.points.push_back({*pos, *val, *vib == 1});
        }
        return fx;
    }
    return std::nullopt;
}

std::optional<BeatFx> parse_bfx_fields(const std::vector<std::string_view>& f) {
    if (f.size() == 2) {
        BeatFx fx;
        if (f[1] == "upstroke") {
            fx.kind = BeatFxKind::upstroke;
            return fx;
        }
        if (f[1] == "downstroke") {
            fx.kind = BeatFxKind::downstroke;
            return fx;
        }
        if (f[1] == "fade_in") {
            fx.kind = BeatFxKind::fade_in;
            return fx;
        }
        return std::nullopt;
    }
    if (f.size() == 3 && f[1] == "tempo_change") {
        auto bpm = int_in(f[2], 1, 999);
        if (!bpm) return std::nullopt;
        BeatFx fx;
        fx.kind = BeatFxKind::tempo_change;
        fx.tempo_bpm = *bpm;
        return fx;
    }
    return std::nullopt;
}

}  // namespace

const char* token_kind_name(TokenKind kind) {
    return kTokenKindNames[static_cast<size_t>(kind)];
}

Token make_artist(std::string name) {
    Token t;
    t.kind = TokenKind::artist;
    t.text = normalize_artist(name);
    return t;
}
Token make_downtune(int semitones) {
    Token t;
    t.kind = TokenKind::downtune;
    t.value = semitones;
    return t;
}
Token make_tempo(int bpm) {
    Token t;
    t.kind = TokenKind::tempo;
    t.value = bpm;
    return t;
}
Token make_start() {
    Token t;
    t.kind = TokenKind::start;
    return t;
}
Token make_end() {
    Token t;
    t.kind = TokenKind::end;
    return t;
}
Token make_new_measure() {
    Token t;
    t.kind = TokenKind::new_measure;
    return t;
}
Token make_measure_repeat() {
    Token t;
    t.kind = TokenKind::measure_repeat;
    return t;
}
Token make_wait(int ticks) {
    Token t;
    t.kind = TokenKind::wait;
    t.value = ticks;
    return t;
}
Token make_note_on(Slot slot, int string, int fret) {
    Token t;
    t.kind = TokenKind::note_on;
    t.slot = slot;
    t.string = string;
    t.fret = fret;
    return t;
}
Token make_drum_hit(int midi_note) {
    Token t;
    t.kind = TokenKind::drum_hit;
    t.value = midi_note;
    return t;
}
Token make_rest(Slot slot) {
    Token t;
    t.kind = TokenKind::rest;
    t.slot = slot;
    return t;
}
Token make_nfx(NoteFx fx) {
    Token t;
    t.kind = TokenKind::nfx;
    t.nfx = std::move(fx);
    return t;
}
Token make_bfx(BeatFx fx) {
    Token t;
    t.kind = TokenKind::bfx;
    t.bfx = fx;
    return t;
}
Token make_unknown(std::string raw) {
    Token t;
    t.kind = TokenKind::unknown;
    t.text = std::move(raw);
    return t;
}

std::string normalize_artist(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_separator = false;
    for (unsigned char c : raw) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
            if (!out.empty()) pending_separator = true;
            continue;
        }
        if (c < 0x20 || c == 0x7f) continue;
        if (pending_separator) {
            out.push_back('_');
            pending_separator = false;
        }
        if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
        out.push_back(static_cast<char>(c));
    }
    if (out.empty()) return "unknown";
    return out;
}

Token parse_token(std::string_view word) {
    if (word == "start") return make_start();
    if (word == "end") return make_end();
    if (word == "new_measure") return make_new_measure();
    if (word == "measure:repeat") return make_measure_repeat();
    if (word.rfind("artist:", 0) == 0) {
        std::string_view payload = word.substr(7);
        Token t;
        t.kind = TokenKind::artist;
        t.text = normalize_artist(payload);
        return t;
    }
    std::vector<std::string_view> f = split_fields(word);
    if (f.size() == 2 && f[0] == "downtune") {
        if (auto v = int_in(f[1], -12, 0)) return make_downtune(*v);
        return make_unknown(std::string(word));
    }
    if (f.size() == 2 && f[0] == "tempo") {
        if (auto v = int_in(f[1], 1, 999)) return make_tempo(*v);
        return make_unknown(std::string(word));
    }
    if (f.size() == 2 && f[0] == "wait") {
        if (auto v = int_in(f[1], 1, kMaxWaitTicks)) return make_wait(*v);
        return make_unknown(std::string(word));
    }
    if (!f.empty() && f[0] == "nfx") {
        if (auto fx = parse_nfx_fields(f)) return make_nfx(std::move(*fx));
        return make_unknown(std::string(word));
    }
    if (!f.empty() && f[0] == "bfx") {
        if (auto fx = parse_bfx_fields(f)) return make_bfx(*fx);
        return make_unknown(std::string(word));
    }
    if (f.size() >= 3 && f[1] == "note") {
        auto slot = slot_from_name(f[0]);
        if (slot) {
            if (f.size() == 3 && f[2] == "rest") return make_rest(*slot);
            if (*slot == Slot::drums && f.size() == 3) {
                if (auto v = int_in(f[2], kMinDrumNote, kMaxDrumNote))
                    return make_drum_hit(*v);
                return make_unknown(std::string(word));
            }
            if (*slot != Slot::drums && f.size() == 4 && f[2].size() >= 2 &&
                f[3].size() >= 2 && f[2][0] == 's' && f[3][0] == 'f') {
                auto string = int_in(f[2].substr(1), 1, kMaxStrings);
                auto fret = int_in(f[3].substr(1), 0, kMaxFret);
                if (string && fret) return make_note_on(*slot, *string, *fret);
            }
        }
        return make_unknown(std::string(word));
    }
    return make_unknown(std::string(word));
}

namespace {

void render_nfx(std::ostringstream& out, const NoteFx& fx) {
    out << "nfx:";
    switch (fx.kind) {
        case NoteFxKind::palm_mute:
        case NoteFxKind::vibrato:
        case NoteFxKind::hammer:
        case NoteFxKind::tie:
        case NoteFxKind::let_ring:
        case NoteFxKind::ghost_note:
        case NoteFxKind::accentuated_note:
        case NoteFxKind::heavy_accentuated_note:
        case NoteFxKind::staccato:
            out << note_fx_name(fx.kind);
            return;
        case NoteFxKind::slide:
            out << "slide:" << slide_name(fx.slide);
            return;
        case NoteFxKind::harmonic:
            out << "harmonic:" << harmonic_name(fx.harmonic);
            return;
        case NoteFxKind::trill:
            if (fx.trill.fret < 0 || fx.trill.fret > kMaxFret || fx.trill.period < 1 ||
                fx.trill.period > 3)
                throw ContractError("trill parameters out of range");
            out << "trill:" << fx.trill.fret << ':' << fx.trill.period;
            return;
        case NoteFxKind::grace:
            if (fx.grace.fret < 0 || fx.grace.fret > kMaxFret || fx.grace.duration < 1 ||
                fx.grace.duration > 3 || fx.grace.transition < 0 || fx.grace.transition > 3)
                throw ContractError("grace parameters out of range");
            out << "grace:" << fx.grace.fret << ':' << fx.grace.duration << ':'
                << fx.grace.transition << ':' << (fx.grace.dead ? 1 : 0) << ':'
                << (fx.grace.on_beat ? 1 : 0);
            return;
        case NoteFxKind::tremolo_picking:
            if (fx.tremolo_speed < 1 || fx.tremolo_speed > 3)
                throw ContractError("tremolo picking speed out of range");
            out << "tremolo_picking:" << fx.tremolo_speed;
            return;
        case NoteFxKind::bend: {
            const Bend& bend = fx.bend;
            if (bend.type < 0 || bend.type > 11 || bend.value < -1200 ||
                bend.value > 1200 || bend.points.size() > 30)
                throw ContractError("bend parameters out of range");
            out << "bend:" << bend.type << ':' << bend.value;
            for (const BendPoint& p : bend.points) {
                if (p.position < 0 || p.position > 60 || p.value < -1200 || p.value > 1200)
                    throw ContractError("bend point out of range");
                out << ':' << p.position << '_' << p.value << '_' << (p.vibrato ? 1 : 0);
            }
            return;
        }
    }
    throw ContractError("unhandled note effect kind");
}

}  // namespace

std::string render_token(const Token& token) {
    std::ostringstream out;
    switch (token.kind) {
        case TokenKind::artist: {
            std::string normalized = normalize_artist(token.text);
            return "artist:" + normalized;
        }
        case TokenKind::downtune:
            if (token.value < -12 || token.value > 0)
                throw ContractError("downtune out of range");
            return "downtune:" + std::to_string(token.value);
        case TokenKind::tempo:
            if (token.value < 1 || token.value > 999)
                throw ContractError("tempo out of range");
            return "tempo:" + std::to_string(token.value);
        case TokenKind::start:
            return "start";
        case TokenKind::end:
            return "end";
        case TokenKind::new_measure:
            return "new_measure";
        case TokenKind::measure_repeat:
            return "measure:repeat";
        case TokenKind::wait:
            if (token.value < 1 || token.value > kMaxWaitTicks)
                throw ContractError("wait out of range");
            return "wait:" + std::to_string(token.value);
        case TokenKind::note_on:
            if (token.slot == Slot::drums)
                throw ContractError("note_on token on the drums slot");
            if (token.string < 1 || token.string > kMaxStrings || token.fret < 0 ||
                token.fret > kMaxFret)
                throw ContractError("note_on parameters out of range");
            out << slot_name(token.slot) << ":note:s" << token.string << ":f" << token.fret;
            return out.str();
        case TokenKind::drum_hit:
            if (token.value < kMinDrumNote || token.value > kMaxDrumNote)
                throw ContractError("drum note out of range");
            return "drums:note:" + std::to_string(token.value);
        case TokenKind::rest:
            out << slot_name(token.slot) << ":note:rest";
            return out.str();
        case TokenKind::nfx:
            render_nfx(out, token.nfx);
            return out.str();
        case TokenKind::bfx:
            switch (token.bfx.kind) {
                case BeatFxKind::tempo_change:
                    if (token.bfx.tempo_bpm < 1 || token.bfx.tempo_bpm > 999)
                        throw ContractError("tempo change out of range");
                    return "bfx:tempo_change:" + std::to_string(token.bfx.tempo_bpm);
                case BeatFxKind::upstroke:
                    return "bfx:upstroke";
                case BeatFxKind::downstroke:
                    return "bfx:downstroke";
                case BeatFxKind::fade_in:
                    return "bfx:fade_in";
            }
            throw ContractError("unhandled beat effect kind");
        case TokenKind::unknown:
            throw ContractError("unknown tokens have no canonical spelling");
    }
    throw ContractError("unhandled token kind");
}

std::vector<Token> parse_token_lines(std::string_view text) {
    std::vector<Token> out;
    size_t start = 0;
    while (start <= text.size()) {
        size_t pos = text.find('\n', start);
        std::string_view line = pos == std::string_view::npos
                                    ? text.substr(start)
                                    : text.substr(start, pos - start);
        if (!line.empty()) out.push_back(parse_token(line));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string render_token_lines(const std::vector<Token>& tokens) {
    std::string out;
    for (const Token& token : tokens) {
        out += render_token(token);
        out += '\n';
    }
    return out;
}

std::vector<Token> read_token_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_token_lines(buffer.str());
}

void write_token_file(const std::filesystem::path& path, const std::vector<Token>& tokens) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << render_token_lines(tokens);
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace tabtok
