#include "tabtok/metadata.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <fstream>
#include <thread>

#include "tabtok/errors.hpp"

namespace tabtok {

namespace {

using nlohmann::json;

std::string now_utc_iso8601() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::pair<std::string, std::string> cache_key(const std::string& artist,
                                              const std::string& title) {
    return {normalize_metadata_key(artist), normalize_metadata_key(title)};
}

json record_to_json(const GenreRecord& record) {
    return json{{"artist", record.artist},   {"title", record.title},
                {"resolved", record.resolved}, {"genres", record.genres},
                {"source", record.source},   {"fetched_at", record.fetched_at}};
}

std::optional<GenreRecord> record_from_json(const json& value) {
    if (!value.is_object() || !value.value("artist", json()).is_string() ||
        !value.value("title", json()).is_string()) {
        return std::nullopt;
    }
    GenreRecord record;
    record.artist = value["artist"].get<std::string>();
    record.title = value["title"].get<std::string>();
    record.resolved = value.value("resolved", false);
    if (value.contains("genres") && value["genres"].is_array()) {
        for (const auto& genre : value["genres"]) {
            if (genre.is_string()) record.genres.push_back(genre.get<std::string>());
        }
    }
    record.source = value.value("source", std::string());
    record.fetched_at = value.value("fetched_at", std::string());
    return record;
}

}  // namespace

std::string normalize_metadata_key(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (unsigned char c : raw) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

std::vector<std::string> normalize_genres(const std::vector<std::string>& genres) {
    std::vector<std::string> out;
    for (const auto& genre : genres) {
        std::string key = normalize_metadata_key(genre);
        if (key.empty()) continue;
        if (std::find(out.begin(), out.end(), key) == out.end()) out.push_back(key);
    }
    return out;
}

std::variant<std::vector<std::string>, ProviderError> StubProvider::search(
    const std::string& artist, const std::string& title) {
    ++calls_;
    if (pending_error_times_ > 0) {
        --pending_error_times_;
        ProviderError error = *pending_error_;
        if (pending_error_times_ == 0) pending_error_.reset();
        return error;
    }
    auto it = entries_.find(cache_key(artist, title));
    if (it == entries_.end()) return std::vector<std::string>{};  // no match
    return it->second;
}

void StubProvider::put(const std::string& artist, const std::string& title,
                       std::vector<std::string> genres) {
    entries_[cache_key(artist, title)] = std::move(genres);
}

void StubProvider::fail_next(ProviderError error, int times) {
    pending_error_ = std::move(error);
    pending_error_times_ = times;
}

HttpCatalogProvider::HttpCatalogProvider(std::string base_url, std::string bearer_token,
                                         int max_retries, int backoff_ms)
    : base_url_(std::move(base_url)),
      token_(std::move(bearer_token)),
      max_retries_(max_retries),
      backoff_ms_(backoff_ms) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

std::variant<std::vector<std::string>, ProviderError> HttpCatalogProvider::search(
    const std::string& artist, const std::string& title) {
    // The base URL may carry a path prefix; httplib wants the origin alone.
    std::string origin = base_url_;
    std::string path = "/search";
    size_t scheme = base_url_.find("://");
    size_t slash = base_url_.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (slash != std::string::npos) {
        origin = base_url_.substr(0, slash);
        path = base_url_.substr(slash) + path;
    }

    httplib::Client client(origin);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(5, 0);
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
    httplib::Params params{{"artist", artist}, {"title", title}};

    for (int attempt = 0;; ++attempt) {
        auto res = client.Get(path, params, headers);
        if (!res) {
            return ProviderError{ProviderError::Kind::unavailable, httplib::to_string(res.error())};
        }
        if (res->status == 429) {
            if (attempt >= max_retries_) {
                return ProviderError{ProviderError::Kind::rate_limited,
                                     "rate limited after " + std::to_string(attempt + 1) +
                                         " attempts"};
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms_ * (attempt + 1)));
            continue;
        }
        if (res->status == 404) return std::vector<std::string>{};  // no match
        if (res->status != 200) {
            return ProviderError{ProviderError::Kind::unavailable,
                                 "status " + std::to_string(res->status)};
        }
        json body = json::parse(res->body, nullptr, false);
        if (body.is_discarded() || !body.is_object() || !body.contains("genres") ||
            !body["genres"].is_array()) {
            return ProviderError{ProviderError::Kind::malformed, "expected {\"genres\": [...]}"};
        }
        std::vector<std::string> genres;
        for (const auto& genre : body["genres"]) {
            if (!genre.is_string()) {
                return ProviderError{ProviderError::Kind::malformed, "non-string genre entry"};
            }
            genres.push_back(genre.get<std::string>());
        }
        return genres;
    }
}

GenreCache::GenreCache(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json value = json::parse(line, nullptr, false);
        if (value.is_discarded()) continue;  // damaged lines are repaired by appending
        if (auto record = record_from_json(value)) {
            entries_[cache_key(record->artist, record->title)] = std::move(*record);
        }
    }
}

std::optional<GenreRecord> GenreCache::find(const std::string& artist,
                                            const std::string& title) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(cache_key(artist, title));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void GenreCache::put(const GenreRecord& record) {
    std::lock_guard<std::mutex> lock(mutex_);
    entries_[cache_key(record.artist, record.title)] = record;
    if (path_.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path_.parent_path(), ec);
    }
    std::ofstream out(path_, std::ios::app);
    out << record_to_json(record).dump() << '\n';
}

size_t GenreCache::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
}

GenreRecord lookup_genres(const std::string& artist, const std::string& title,
                          GenreCache& cache, GenreProvider& provider) {
    std::string artist_key = normalize_metadata_key(artist);
    std::string title_key = normalize_metadata_key(title);
    if (artist_key.empty()) throw ContractError("genre lookup requires an artist");
    if (auto hit = cache.find(artist_key, title_key)) return *hit;

    auto answer = provider.search(artist_key, title_key);
    GenreRecord record;
    record.artist = artist_key;
    record.title = title_key;
    record.source = provider.id();
    record.fetched_at = now_utc_iso8601();
    if (auto* genres = std::get_if<std::vector<std::string>>(&answer)) {
        record.genres = normalize_genres(*genres);
        record.resolved = !record.genres.empty();
    }
    if (record.resolved) cache.put(record);
    return record;
}

}  // namespace tabtok
