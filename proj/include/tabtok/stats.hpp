#pragma once

// Corpus reporting over token files: histograms, totals and the shared
// vocabulary. Pure accumulation, so per-song results merge associatively.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tabtok/token.hpp"

namespace tabtok {

struct StatsReport {
    long long songs = 0;
    long long tokens = 0;          // token count incl. unknowns
    long long unknown_tokens = 0;
    double total_seconds = 0;      // tempo-map-aware playing time

    std::map<int, long long> tracks_per_song;        // distinct slots used
    std::map<int, long long> initial_tempo;          // 10-bpm bins, keyed by floor
    std::map<int, long long> wait_ticks;             // wait value -> count
    std::map<std::string, long long> time_signature; // "4/4" etc, per measure
    std::map<std::string, long long> note_effects;   // nfx kind names
    std::map<int, long long> tempo_changes_per_song;
    std::map<std::string, long long> slot_notes;     // note events per slot

    std::map<std::string, long long> token_counts;   // every spelling
    std::vector<std::pair<std::string, long long>> top_tokens;  // filled by finalize
};

class StatsAccumulator {
  public:
    void add_song(const std::vector<Token>& tokens);
    void merge(const StatsAccumulator& other);
    // Sorts top tokens (count desc, spelling asc) and returns the report.
    StatsReport finalize(int top_n = 20) const;

  private:
    StatsReport report_;
};

// Reads every file (sorted by filename), accumulates, reports. Unreadable
// files are skipped and listed.
struct CorpusStats {
    StatsReport report;
    std::vector<std::string> skipped_files;
};
CorpusStats corpus_stats(const std::vector<std::filesystem::path>& files, int top_n = 20);

// Duration label used when printing the wait histogram ("quarter", ...).
std::string wait_bucket_label(int ticks);

struct Vocab {
    std::vector<std::string> entries;  // first-occurrence order
};

// Distinct token spellings across files processed in filename order.
// Feeding the same file list twice yields the identical vocabulary.
struct VocabResult {
    Vocab vocab;
    std::vector<std::string> skipped_files;
};
VocabResult build_vocab(const std::vector<std::filesystem::path>& files);

std::string stats_to_json(const StatsReport& report);
std::string vocab_to_text(const Vocab& vocab);

}  // namespace tabtok
