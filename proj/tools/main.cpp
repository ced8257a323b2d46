// Command-line front end: batch conversion between GuitarPro files and
// token streams, plus stream validation, corpus reporting and genre lookup.
// Exit codes: 0 success, 1 any per-file failure, 2 usage error.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "tabtok/errors.hpp"
#include "tabtok/gp5.hpp"
#include "tabtok/metadata.hpp"
#include "tabtok/normalize.hpp"
#include "tabtok/stats.hpp"
#include "tabtok/tokenizer.hpp"
#include "tabtok/validator.hpp"

namespace fs = std::filesystem;
using namespace tabtok;

namespace {

struct FileResult {
    bool ok = true;
    std::string info;   // stdout, hidden by --quiet
    std::string error;  // stderr, always shown
};

// Runs one job per input on a bounded pool; logs print in input order so
// scheduling never changes what the user sees.
int run_batch(const std::vector<fs::path>& inputs, int jobs, bool quiet,
              const std::function<FileResult(const fs::path&)>& per_file) {
    std::vector<FileResult> results(inputs.size());
    std::atomic<size_t> next{0};
    size_t pool = static_cast<size_t>(std::max(1, jobs));
    pool = std::min(pool, inputs.size());
    std::vector<std::thread> workers;
    for (size_t t = 0; t < pool; ++t) {
        workers.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= inputs.size()) break;
                try {
                    results[i] = per_file(inputs[i]);
                } catch (const std::exception& e) {
                    results[i] = {false, "", inputs[i].string() + ": " + e.what()};
                }
            }
        });
    }
    for (std::thread& worker : workers) worker.join();

    int failures = 0;
    for (const FileResult& result : results) {
        if (!result.ok) ++failures;
        if (!result.info.empty() && !quiet) std::cout << result.info << "\n";
        if (!result.error.empty()) std::cerr << "error " << result.error << "\n";
    }
    return failures;
}

int default_jobs() {
    unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::min(8u, std::max(1u, hw)));
}

// song.tokens.txt -> song, song.gp5 -> song
std::string base_name(const fs::path& input) {
    std::string name = input.filename().string();
    const std::string token_suffix = ".tokens.txt";
    if (name.size() > token_suffix.size() &&
        name.compare(name.size() - token_suffix.size(), token_suffix.size(),
                     token_suffix) == 0) {
        return name.substr(0, name.size() - token_suffix.size());
    }
    return input.stem().string();
}

std::optional<std::string> guard_overwrite(const fs::path& target, bool force) {
    if (!force && fs::exists(target)) {
        return target.string() + " exists (use --force)";
    }
    return std::nullopt;
}

struct CommonOpts {
    std::vector<fs::path> inputs;
    fs::path out_dir = ".";
    bool force = false;
    bool quiet = false;
    int jobs = default_jobs();
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_outputs) {
    cmd->add_option("inputs", opts.inputs, "input files")
        ->required()
        ->expected(-1);
    if (with_outputs) {
        cmd->add_option("-o,--out-dir", opts.out_dir, "output directory");
        cmd->add_flag("-f,--force", opts.force, "overwrite existing outputs");
    }
    cmd->add_flag("-q,--quiet", opts.quiet, "suppress per-file lines");
    cmd->add_option("-j,--jobs", opts.jobs, "worker threads")
        ->check(CLI::PositiveNumber);
}

int cmd_encode(const CommonOpts& opts, bool lax, bool no_measure_repeat) {
    fs::create_directories(opts.out_dir);
    EncodeConfig config;
    config.emit_measure_repeat = !no_measure_repeat;
    return run_batch(opts.inputs, opts.jobs, opts.quiet, [&](const fs::path& input) {
        FileResult result;
        fs::path target = opts.out_dir / (base_name(input) + ".tokens.txt");
        if (auto taken = guard_overwrite(target, opts.force)) {
            return FileResult{false, "", *taken};
        }
        Gp5ReadResult read;
        try {
            read = read_gp5_file(input);
        } catch (const std::exception& e) {
            return FileResult{false, "", input.string() + ": " + e.what()};
        }
        auto tuning = validate_tuning(read.song);
        if (auto* rejection = std::get_if<TuningRejection>(&tuning)) {
            if (!lax) {
                return FileResult{false, "",
                                  input.string() + ": rejected: " + rejection->reason};
            }
            result.info = "lax " + input.string() + ": " + rejection->reason;
        }
        std::vector<Token> tokens = encode(read.song, config);
        write_token_file(target, tokens);
        std::string line = "ok " + input.string() + " -> " + target.string() + " (" +
                           std::to_string(tokens.size()) + " tokens)";
        result.info = result.info.empty() ? line : result.info + "\n" + line;
        return result;
    });
}

int cmd_decode(const CommonOpts& opts) {
    fs::create_directories(opts.out_dir);
    return run_batch(opts.inputs, opts.jobs, opts.quiet, [&](const fs::path& input) {
        fs::path target = opts.out_dir / (base_name(input) + ".gp5");
        if (auto taken = guard_overwrite(target, opts.force)) {
            return FileResult{false, "", *taken};
        }
        std::vector<Token> tokens;
        try {
            tokens = read_token_file(input);
        } catch (const std::exception& e) {
            return FileResult{false, "", input.string() + ": " + e.what()};
        }
        DecodeResult decoded = decode(tokens);  // total: any stream yields a song
        write_gp5_file(target, decoded.song);
        std::string line = "ok " + input.string() + " -> " + target.string();
        if (tokens.empty()) {
            line += " (warning: empty input, wrote the default song)";
        } else if (!decoded.skipped.empty()) {
            int dropped = 0;
            for (const auto& [reason, count] : decoded.skipped) dropped += count;
            line += " (" + std::to_string(dropped) + " tokens skipped)";
        }
        return FileResult{true, line, ""};
    });
}

int cmd_roundtrip(const CommonOpts& opts) {
    return run_batch(opts.inputs, opts.jobs, opts.quiet, [&](const fs::path& input) {
        Gp5ReadResult read;
        try {
            read = read_gp5_file(input);
        } catch (const std::exception& e) {
            return FileResult{false, "", input.string() + ": " + e.what()};
        }
        DecodeResult decoded = decode(encode(read.song));
        EquivalenceReport report = musically_equivalent(read.song, decoded.song);
        if (report.equivalent) {
            return FileResult{true, "ok " + input.string(), ""};
        }
        std::string detail = input.string() + ": differs:";
        for (const std::string& diff : report.differences) detail += " [" + diff + "]";
        return FileResult{false, "", detail};
    });
}

int cmd_validate(const CommonOpts& opts) {
    fs::create_directories(opts.out_dir);
    nlohmann::json files = nlohmann::json::object();
    long long grand_total = 0;
    int failures = 0;
    for (const fs::path& input : opts.inputs) {
        std::vector<Token> tokens;
        try {
            tokens = read_token_file(input);
        } catch (const std::exception& e) {
            std::cerr << "error " << input.string() << ": " << e.what() << "\n";
            ++failures;
            continue;
        }
        ErrorReport report = count_errors(tokens);
        grand_total += report.total;
        files[input.string()] = nlohmann::json::parse(error_report_to_json(report));
        if (!opts.quiet) {
            std::cout << input.string() << ": " << report.total << " errors\n";
        }
    }
    nlohmann::json doc;
    doc["files"] = files;
    doc["total_errors"] = grand_total;
    fs::path target = opts.out_dir / "validation.json";
    std::ofstream out(target);
    out << doc.dump(2) << "\n";
    if (!opts.quiet) std::cout << "wrote " << target.string() << "\n";
    return failures;
}

void write_csv(const fs::path& path, const std::string& header,
               const std::vector<std::pair<std::string, long long>>& rows) {
    std::ofstream out(path);
    out << header << "\n";
    for (const auto& [key, value] : rows) out << key << "," << value << "\n";
}

int cmd_stats(const CommonOpts& opts, int top_n, bool csv) {
    fs::create_directories(opts.out_dir);
    CorpusStats corpus = corpus_stats(opts.inputs, top_n);
    for (const std::string& skipped : corpus.skipped_files) {
        std::cerr << "error " << skipped << ": unreadable, skipped\n";
    }
    fs::path target = opts.out_dir / "stats.json";
    {
        std::ofstream out(target);
        out << stats_to_json(corpus.report) << "\n";
    }
    if (csv) {
        auto rows_of = [](const auto& map) {
            std::vector<std::pair<std::string, long long>> rows;
            for (const auto& [key, value] : map) {
                if constexpr (std::is_same_v<std::decay_t<decltype(key)>, int>) {
                    rows.push_back({std::to_string(key), value});
                } else {
                    rows.push_back({key, value});
                }
            }
            return rows;
        };
        const StatsReport& r = corpus.report;
        write_csv(opts.out_dir / "tracks_per_song.csv", "tracks,songs",
                  rows_of(r.tracks_per_song));
        write_csv(opts.out_dir / "initial_tempo.csv", "bpm_bin,songs",
                  rows_of(r.initial_tempo));
        write_csv(opts.out_dir / "time_signature.csv", "signature,measures",
                  rows_of(r.time_signature));
        write_csv(opts.out_dir / "note_effects.csv", "effect,count",
                  rows_of(r.note_effects));
        write_csv(opts.out_dir / "tempo_changes_per_song.csv", "changes,songs",
                  rows_of(r.tempo_changes_per_song));
        write_csv(opts.out_dir / "slot_notes.csv", "slot,notes",
                  rows_of(r.slot_notes));
        write_csv(opts.out_dir / "top_tokens.csv", "token,count", r.top_tokens);
        std::vector<std::pair<std::string, long long>> waits;
        for (const auto& [ticks, count] : r.wait_ticks) {
            waits.push_back(
                {std::to_string(ticks) + "," + wait_bucket_label(ticks), count});
        }
        write_csv(opts.out_dir / "wait_ticks.csv", "ticks,label,count", waits);
    }
    if (!opts.quiet) {
        std::cout << corpus.report.songs << " songs, " << corpus.report.tokens
                  << " tokens, " << corpus.report.total_seconds << " s\n";
        std::cout << "wrote " << target.string() << "\n";
    }
    return static_cast<int>(corpus.skipped_files.size());
}

int cmd_vocab(const CommonOpts& opts) {
    fs::create_directories(opts.out_dir);
    VocabResult result = build_vocab(opts.inputs);
    for (const std::string& skipped : result.skipped_files) {
        std::cerr << "error " << skipped << ": unreadable, skipped\n";
    }
    fs::path target = opts.out_dir / "vocab.txt";
    std::ofstream out(target);
    out << vocab_to_text(result.vocab);
    if (!opts.quiet) {
        std::cout << "vocabulary: " << result.vocab.entries.size() << " entries\n";
        std::cout << "wrote " << target.string() << "\n";
    }
    return static_cast<int>(result.skipped_files.size());
}

nlohmann::json record_json(const GenreRecord& record) {
    nlohmann::json j;
    j["artist"] = record.artist;
    j["title"] = record.title;
    j["resolved"] = record.resolved;
    j["genres"] = record.genres;
    j["source"] = record.source;
    j["fetched_at"] = record.fetched_at;
    return j;
}

constexpr int kUsage = -1;  // mapped to exit code 2 in main

int cmd_genres(const std::vector<fs::path>& inputs, const std::string& artist,
               const std::string& title, const fs::path& cache_path,
               const fs::path& stub_path, int min_interval_ms, bool quiet) {
    std::unique_ptr<GenreProvider> provider;
    if (!stub_path.empty()) {
        std::ifstream in(stub_path);
        if (!in) {
            std::cerr << "error cannot read stub catalog: " << stub_path.string() << "\n";
            return 1;
        }
        nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
        if (doc.is_discarded() || !doc.is_array()) {
            std::cerr << "error stub catalog must be a json array\n";
            return 1;
        }
        auto stub = std::make_unique<StubProvider>();
        for (const auto& entry : doc) {
            std::vector<std::string> genres;
            for (const auto& g : entry.value("genres", nlohmann::json::array())) {
                if (g.is_string()) genres.push_back(g.get<std::string>());
            }
            stub->put(normalize_metadata_key(entry.value("artist", "")),
                      normalize_metadata_key(entry.value("title", "")),
                      std::move(genres));
        }
        provider = std::move(stub);
    } else if (const char* url = std::getenv("TABTOK_CATALOG_URL")) {
        const char* token = std::getenv("TABTOK_CATALOG_TOKEN");
        provider = std::make_unique<HttpCatalogProvider>(url, token ? token : "");
    } else {
        std::cerr << "error no catalog: set TABTOK_CATALOG_URL or pass --stub\n";
        return kUsage;
    }

    std::vector<std::pair<std::string, std::string>> queries;
    if (!artist.empty()) queries.push_back({artist, title});
    int failures = 0;
    for (const fs::path& input : inputs) {
        try {
            Gp5ReadResult read = read_gp5_file(input);
            queries.push_back({read.song.artist, read.song.title});
        } catch (const std::exception& e) {
            std::cerr << "error " << input.string() << ": " << e.what() << "\n";
            ++failures;
        }
    }
    if (queries.empty() && failures == 0) {
        std::cerr << "error nothing to look up: pass --artist or input files\n";
        return kUsage;
    }

    GenreCache cache(cache_path);
    bool first = true;
    for (const auto& [query_artist, query_title] : queries) {
        if (!first && min_interval_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(min_interval_ms));
        }
        first = false;
        try {
            GenreRecord record = lookup_genres(query_artist, query_title, cache, *provider);
            if (!quiet) std::cout << record_json(record).dump() << "\n";
        } catch (const ContractError& e) {
            std::cerr << "error " << query_artist << ": " << e.what() << "\n";
            ++failures;
        }
    }
    return failures;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GuitarPro 5 <-> event-token converter and corpus tools"};
    app.require_subcommand(1);

    CommonOpts encode_opts;
    bool lax = false;
    bool no_measure_repeat = false;
    CLI::App* encode_cmd =
        app.add_subcommand("encode", "GuitarPro files to token files");
    add_common(encode_cmd, encode_opts, true);
    encode_cmd->add_flag("--lax", lax, "keep going on unsupported tunings");
    encode_cmd->add_flag("--no-measure-repeat", no_measure_repeat,
                         "spell repeated measures out in full");

    CommonOpts decode_opts;
    CLI::App* decode_cmd =
        app.add_subcommand("decode", "token files to GuitarPro files");
    add_common(decode_cmd, decode_opts, true);

    CommonOpts roundtrip_opts;
    CLI::App* roundtrip_cmd = app.add_subcommand(
        "roundtrip", "check GuitarPro files survive encode-decode");
    add_common(roundtrip_cmd, roundtrip_opts, false);

    CommonOpts validate_opts;
    CLI::App* validate_cmd =
        app.add_subcommand("validate", "count grammar errors in token files");
    add_common(validate_cmd, validate_opts, true);

    CommonOpts stats_opts;
    int top_n = 20;
    bool csv = false;
    CLI::App* stats_cmd = app.add_subcommand("stats", "corpus report over token files");
    add_common(stats_cmd, stats_opts, true);
    stats_cmd->add_option("--top-n", top_n, "token ranking size")
        ->check(CLI::NonNegativeNumber);
    stats_cmd->add_flag("--csv", csv, "also write per-histogram csv files");

    CommonOpts vocab_opts;
    CLI::App* vocab_cmd =
        app.add_subcommand("vocab", "unique token spellings over token files");
    add_common(vocab_cmd, vocab_opts, true);

    std::vector<fs::path> genre_inputs;
    std::string artist;
    std::string title;
    fs::path cache_path = "genre_cache.jsonl";
    fs::path stub_path;
    int min_interval_ms = 0;
    bool genres_quiet = false;
    CLI::App* genres_cmd =
        app.add_subcommand("genres", "look up genre tags by artist and title");
    genres_cmd->add_option("inputs", genre_inputs, "GuitarPro files to read names from");
    genres_cmd->add_option("--artist", artist, "look up one artist directly");
    genres_cmd->add_option("--title", title, "title for --artist");
    genres_cmd->add_option("--cache", cache_path, "lookup cache file");
    genres_cmd->add_option("--stub", stub_path, "offline catalog json file");
    genres_cmd->add_option("--min-interval-ms", min_interval_ms,
                           "minimum delay between lookups")
        ->check(CLI::NonNegativeNumber);
    genres_cmd->add_flag("-q,--quiet", genres_quiet, "suppress record lines");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // help is success, any parse problem is usage
    }

    int failures = 0;
    if (encode_cmd->parsed()) {
        failures = cmd_encode(encode_opts, lax, no_measure_repeat);
    } else if (decode_cmd->parsed()) {
        failures = cmd_decode(decode_opts);
    } else if (roundtrip_cmd->parsed()) {
        failures = cmd_roundtrip(roundtrip_opts);
    } else if (validate_cmd->parsed()) {
        failures = cmd_validate(validate_opts);
    } else if (stats_cmd->parsed()) {
        failures = cmd_stats(stats_opts, top_n, csv);
    } else if (vocab_cmd->parsed()) {
        failures = cmd_vocab(vocab_opts);
    } else if (genres_cmd->parsed()) {
        failures = cmd_genres(genre_inputs, artist, title, cache_path, stub_path,
                              min_interval_ms, genres_quiet);
    }
    if (failures == kUsage) return 2;
    return failures == 0 ? 0 : 1;
}
