#pragma once

// Genre lookup for (artist, title) pairs: pluggable provider behind a
// line-oriented on-disk cache. Network use is optional and bounded.

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tabtok {

struct GenreRecord {
    std::string artist;  // normalized
    std::string title;   // normalized
    bool resolved = false;            // provider matched and returned tags
    std::vector<std::string> genres;  // lowercase, deduped, answer order
    std::string source;               // provider id the record came from
    std::string fetched_at;           // ISO 8601 UTC
    bool operator==(const GenreRecord&) const = default;
};

struct ProviderError {
    enum class Kind { rate_limited, unavailable, malformed } kind = Kind::unavailable;
    std::string message;
};

class GenreProvider {
  public:
    virtual ~GenreProvider() = default;
    virtual std::string id() const = 0;
    // An empty list means the catalog had no match.
    virtual std::variant<std::vector<std::string>, ProviderError> search(
        const std::string& artist, const std::string& title) = 0;
};

// Deterministic in-memory provider for tests and offline use.
class StubProvider : public GenreProvider {
  public:
    std::string id() const override { return "stub"; }
    std::variant<std::vector<std::string>, ProviderError> search(
        const std::string& artist, const std::string& title) override;

    void put(const std::string& artist, const std::string& title,
             std::vector<std::string> genres);
    void fail_next(ProviderError error, int times = 1);
    int calls() const { return calls_; }

  private:
    std::map<std::pair<std::string, std::string>, std::vector<std::string>> entries_;
    std::optional<ProviderError> pending_error_;
    int pending_error_times_ = 0;
    int calls_ = 0;
};

// GET {base_url}/search?artist=..&title=.. expecting {"genres": [...]}.
// Retries rate limiting with linear backoff, at most `max_retries` times.
class HttpCatalogProvider : public GenreProvider {
  public:
    HttpCatalogProvider(std::string base_url, std::string bearer_token = "",
                        int max_retries = 2, int backoff_ms = 100);
    std::string id() const override { return "catalog"; }
    std::variant<std::vector<std::string>, ProviderError> search(
        const std::string& artist, const std::string& title) override;

  private:
    std::string base_url_;
    std::string token_;
    int max_retries_;
    int backoff_ms_;
};

// Append-only JSONL file, one record per line, keyed by normalized
// (artist, title). Later lines win so repairs are plain appends.
class GenreCache {
  public:
    explicit GenreCache(std::filesystem::path path);
    std::optional<GenreRecord> find(const std::string& artist, const std::string& title) const;
    void put(const GenreRecord& record);  // writes through to disk
    size_t size() const;

  private:
    std::filesystem::path path_;
    std::map<std::pair<std::string, std::string>, GenreRecord> entries_;
    mutable std::mutex mutex_;  // concurrent lookups share one cache
};

// Lowercase ASCII, collapse whitespace to single spaces, trim.
std::string normalize_metadata_key(std::string_view raw);
// Lowercased and deduped, first occurrence wins.
std::vector<std::string> normalize_genres(const std::vector<std::string>& genres);

// Cache first; on miss asks the provider once. Non-empty answers are
// normalized, cached and returned as resolved. No-match and provider
// failures yield an unresolved record that is NOT cached, so later runs
// retry. The artist must be non-empty.
GenreRecord lookup_genres(const std::string& artist, const std::string& title,
                          GenreCache& cache, GenreProvider& provider);

}  // namespace tabtok
