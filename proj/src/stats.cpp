#include <algorithm>
#include <set>

#include <json.hpp>

#include "tabtok/meter.hpp"
#include "tabtok/stats.hpp"

namespace tabtok {

namespace {

std::string spelling(const Token& token) {
    return token.kind == TokenKind::unknown ? token.text : render_token(token);
}

// Per-measure view of one stream, mirroring the decoder's segmentation.
struct MeasureTrace {
    long long wait_sum = 0;
    std::optional<int> tempo_change;
    bool repeat = false;
};

struct SongTrace {
    int initial_tempo = 120;
    std::set<Slot> slots;
    std::vector<MeasureTrace> measures;
};

SongTrace trace_song(const std::vector<Token>& tokens) {
    SongTrace trace;
    bool tempo_seen = false;
    bool open = false;
    MeasureTrace current;
    auto close = [&] {
        if (open) trace.measures.push_back(current);
        current = {};
        open = false;
    };
    auto require_open = [&] { open = true; };
    for (const Token& token : tokens) {
        switch (token.kind) {
            case TokenKind::end:
                close();
                return trace;
            case TokenKind::tempo:
                if (!tempo_seen) {
                    tempo_seen = true;
                    trace.initial_tempo = token.value;
                }
                break;
            case TokenKind::new_measure:
                close();
                open = true;
                break;
            case TokenKind::measure_repeat:
                close();
                open = true;
                current.repeat = true;
                break;
            case TokenKind::wait:
                require_open();
                current.wait_sum += token.value;
                break;
            case TokenKind::note_on:
                require_open();
                trace.slots.insert(token.slot);
                break;
            case TokenKind::drum_hit:
                require_open();
                trace.slots.insert(Slot::drums);
                break;
            case TokenKind::rest:
                require_open();
                trace.slots.insert(token.slot);
                break;
            case TokenKind::nfx:
                require_open();
                break;
            case TokenKind::bfx:
                require_open();
                if (token.bfx.kind == BeatFxKind::tempo_change &&
                    !current.tempo_change) {
                    current.tempo_change = token.bfx.tempo_bpm;
                }
                break;
            default:
                break;  // headers and unknowns are counted elsewhere
        }
    }
    close();
    return trace;
}

std::string signature_label(const TimeSignature& signature) {
    return std::to_string(signature.numerator) + "/" +
           std::to_string(signature.denominator);
}

}  // namespace

void StatsAccumulator::add_song(const std::vector<Token>& tokens) {
    ++report_.songs;
    report_.tokens += static_cast<long long>(tokens.size());
    for (const Token& token : tokens) {
        ++report_.token_counts[spelling(token)];
        switch (token.kind) {
            case TokenKind::unknown:
                ++report_.unknown_tokens;
                break;
            case TokenKind::wait:
                ++report_.wait_ticks[token.value];
                break;
            case TokenKind::nfx:
                ++report_.note_effects[note_fx_name(token.nfx.kind)];
                break;
            case TokenKind::note_on:
                ++report_.slot_notes[slot_name(token.slot)];
                break;
            case TokenKind::drum_hit:
                ++report_.slot_notes[slot_name(Slot::drums)];
                break;
            default:
                break;
        }
    }

    SongTrace trace = trace_song(tokens);
    ++report_.tracks_per_song[static_cast<int>(trace.slots.size())];
    ++report_.initial_tempo[trace.initial_tempo / 10 * 10];

    // Duration: whole ticks per constant-tempo stretch, each stretch
    // converted with one division so a constant-tempo song comes out as
    // exactly ticks * 60 / (bpm * 960).
    TimeSignature previous_signature;
    std::optional<int> previous_tempo_change;
    int tempo_changes = 0;
    int current_tempo = trace.initial_tempo;
    long long segment_ticks = 0;
    for (const MeasureTrace& measure : trace.measures) {
        TimeSignature signature;
        std::optional<int> tempo_change;
        if (measure.repeat) {
            signature = previous_signature;
            tempo_change = previous_tempo_change;
        } else if (measure.wait_sum > 0) {
            signature = infer_time_signature(measure.wait_sum).signature;
            tempo_change = measure.tempo_change;
        } else {
            signature = {4, 4};
            tempo_change = measure.tempo_change;
        }
        ++report_.time_signature[signature_label(signature)];
        if (tempo_change) {
            ++tempo_changes;
            if (*tempo_change != current_tempo) {
                if (segment_ticks > 0) {
                    report_.total_seconds +=
                        ticks_to_seconds(segment_ticks, current_tempo);
                }
                segment_ticks = 0;
                current_tempo = *tempo_change;
            }
        }
        segment_ticks += measure.wait_sum;
        previous_signature = signature;
        previous_tempo_change = tempo_change;
    }
    if (segment_ticks > 0) {
        report_.total_seconds += ticks_to_seconds(segment_ticks, current_tempo);
    }
    ++report_.tempo_changes_per_song[tempo_changes];
}

void StatsAccumulator::merge(const StatsAccumulator& other) {
    const StatsReport& o = other.report_;
    report_.songs += o.songs;
    report_.tokens += o.tokens;
    report_.unknown_tokens += o.unknown_tokens;
    report_.total_seconds += o.total_seconds;
    auto merge_map = [](auto& into, const auto& from) {
        for (const auto& [key, value] : from) into[key] += value;
    };
    merge_map(report_.tracks_per_song, o.tracks_per_song);
    merge_map(report_.initial_tempo, o.initial_tempo);
    merge_map(report_.wait_ticks, o.wait_ticks);
    merge_map(report_.time_signature, o.time_signature);
    merge_map(report_.note_effects, o.note_effects);
    merge_map(report_.tempo_changes_per_song, o.tempo_changes_per_song);
    merge_map(report_.slot_notes, o.slot_notes);
    merge_map(report_.token_counts, o.token_counts);
}

StatsReport StatsAccumulator::finalize(int top_n) const {
    StatsReport report = report_;
    std::vector<std::pair<std::string, long long>> ranked(
        report.token_counts.begin(), report.token_counts.end());
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) {
                  if (a.second != b.second) return a.second > b.second;
                  return a.first < b.first;
              });
    if (top_n >= 0 && ranked.size() > static_cast<size_t>(top_n)) {
        ranked.resize(static_cast<size_t>(top_n));
    }
    report.top_tokens = std::move(ranked);
    return report;
}

CorpusStats corpus_stats(const std::vector<std::filesystem::path>& files,
                         int top_n) {
    std::vector<std::filesystem::path> sorted = files;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.string() < b.string(); });
    CorpusStats result;
    StatsAccumulator accumulator;
    for (const auto& path : sorted) {
        try {
            accumulator.add_song(read_token_file(path));
        } catch (const std::exception&) {
            result.skipped_files.push_back(path.string());
        }
    }
    result.report = accumulator.finalize(top_n);
    return result;
}

std::string wait_bucket_label(int ticks) {
    if (auto name = duration_name(ticks)) return *name;
    return std::to_string(ticks);
}

VocabResult build_vocab(const std::vector<std::filesystem::path>& files) {
    std::vector<std::filesystem::path> sorted = files;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.string() < b.string(); });
    VocabResult result;
    std::set<std::string> seen;
    for (const auto& path : sorted) {
        std::vector<Token> tokens;
        try {
            tokens = read_token_file(path);
        } catch (const std::exception&) {
            result.skipped_files.push_back(path.string());
            continue;
        }
        for (const Token& token : tokens) {
            std::string line = spelling(token);
            if (seen.insert(line).second) {
                result.vocab.entries.push_back(std::move(line));
            }
        }
    }
    return result;
}

std::string stats_to_json(const StatsReport& report) {
    nlohmann::json j;
    j["songs"] = report.songs;
    j["tokens"] = report.tokens;
    j["unknown_tokens"] = report.unknown_tokens;
    j["total_seconds"] = report.total_seconds;
    auto int_map = [](const std::map<int, long long>& source) {
        nlohmann::json object = nlohmann::json::object();
        for (const auto& [key, value] : source) {
            object[std::to_string(key)] = value;
        }
        return object;
    };
    j["tracks_per_song"] = int_map(report.tracks_per_song);
    j["initial_tempo"] = int_map(report.initial_tempo);
    nlohmann::json waits = nlohmann::json::object();
    for (const auto& [ticks, count] : report.wait_ticks) {
        nlohmann::json entry;
        entry["count"] = count;
        entry["label"] = wait_bucket_label(ticks);
        waits[std::to_string(ticks)] = entry;
    }
    j["wait_ticks"] = waits;
    j["time_signature"] = report.time_signature;
    j["note_effects"] = report.note_effects;
    j["tempo_changes_per_song"] = int_map(report.tempo_changes_per_song);
    j["slot_notes"] = report.slot_notes;
    nlohmann::json top = nlohmann::json::array();
    for (const auto& [token, count] : report.top_tokens) {
        nlohmann::json entry;
        entry["token"] = token;
        entry["count"] = count;
        top.push_back(entry);
    }
    j["top_tokens"] = top;
    return j.dump(2);
}

std::string vocab_to_text(const Vocab& vocab) {
    std::string out;
    for (const std::string& entry : vocab.entries) {
        out += entry;
        out += '\n';
    }
    return out;
}

}  // namespace tabtok
