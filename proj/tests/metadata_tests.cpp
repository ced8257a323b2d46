#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "tabtok/errors.hpp"
#include "tabtok/metadata.hpp"

using namespace tabtok;

namespace {

struct TempCache {
    std::filesystem::path path;
    explicit TempCache(const std::string& name) {
        path = std::filesystem::temp_directory_path() / name;
        std::filesystem::remove(path);
    }
    ~TempCache() { std::filesystem::remove(path); }
};

bool looks_like_utc_timestamp(const std::string& s) {
    // e.g. 2026-08-14T12:34:56Z
    return s.size() == 20 && s[4] == '-' && s[7] == '-' && s[10] == 'T' &&
           s[13] == ':' && s[16] == ':' && s.back() == 'Z';
}

// One handler function serving /search on a loopback port for the duration
// of a test.
class LocalCatalog {
  public:
    explicit LocalCatalog(httplib::Server::Handler handler) {
        server_.Get("/search", std::move(handler));
        port_ = server_.bind_to_any_port("127.0.0.1");
        REQUIRE(port_ > 0);
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LocalCatalog() {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace

TEST_CASE("metadata keys fold case and whitespace") {
    CHECK(normalize_metadata_key("  Iron   Maiden ") == "iron maiden");
    CHECK(normalize_metadata_key("OPETH") == "opeth");
    CHECK(normalize_metadata_key("a\tb\nc") == "a b c");
    CHECK(normalize_metadata_key("") == "");
    CHECK(normalize_metadata_key("   ") == "");
}

TEST_CASE("genre lists lowercase and dedupe keeping answer order") {
    CHECK(normalize_genres({"Rock", "rock", "Metal"}) ==
          std::vector<std::string>{"rock", "metal"});
    CHECK(normalize_genres({"  Doom Metal ", "doom   metal"}) ==
          std::vector<std::string>{"doom metal"});
    CHECK(normalize_genres({"", "  ", "Jazz"}) == std::vector<std::string>{"jazz"});
    CHECK(normalize_genres({}) == std::vector<std::string>{});
}

TEST_CASE("the stub provider answers, misses and fails on demand") {
    StubProvider stub;
    stub.put("opeth", "bleak", {"Progressive Metal"});

    auto hit = stub.search("opeth", "bleak");
    REQUIRE(std::holds_alternative<std::vector<std::string>>(hit));
    CHECK(std::get<std::vector<std::string>>(hit) ==
          std::vector<std::string>{"Progressive Metal"});

    auto miss = stub.search("opeth", "unknown song");
    REQUIRE(std::holds_alternative<std::vector<std::string>>(miss));
    CHECK(std::get<std::vector<std::string>>(miss).empty());

    stub.fail_next({ProviderError::Kind::unavailable, "down"}, 2);
    CHECK(std::holds_alternative<ProviderError>(stub.search("opeth", "bleak")));
    CHECK(std::holds_alternative<ProviderError>(stub.search("opeth", "bleak")));
    CHECK(std::holds_alternative<std::vector<std::string>>(stub.search("opeth", "bleak")));
    CHECK(stub.calls() == 5);
}

TEST_CASE("lookups resolve, normalize and cache through the provider") {
    TempCache temp("tabtok_meta_lookup.jsonl");
    GenreCache cache(temp.path);
    StubProvider stub;
    stub.put("iron maiden", "invaders", {"Rock", "rock", "Metal"});

    GenreRecord record = lookup_genres("  Iron   Maiden ", "Invaders", cache, stub);
    CHECK(record.resolved);
    CHECK(record.artist == "iron maiden");
    CHECK(record.title == "invaders");
    CHECK(record.genres == std::vector<std::string>{"rock", "metal"});
    CHECK(record.source == "stub");
    CHECK(looks_like_utc_timestamp(record.fetched_at));
    CHECK(cache.size() == 1);
    CHECK(stub.calls() == 1);

    SUBCASE("the second lookup is served from the cache") {
        GenreRecord again = lookup_genres("iron maiden", "invaders", cache, stub);
        CHECK(again == record);
        CHECK(stub.calls() == 1);
    }
    SUBCASE("a fresh cache on the same file still has the record") {
        GenreCache reloaded(temp.path);
        CHECK(reloaded.size() == 1);
        GenreRecord again = lookup_genres("iron maiden", "invaders", reloaded, stub);
        CHECK(again == record);
        CHECK(stub.calls() == 1);
    }
}

TEST_CASE("no-match and failures stay uncached so they retry") {
    TempCache temp("tabtok_meta_miss.jsonl");
    GenreCache cache(temp.path);
    StubProvider stub;

    SUBCASE("no match") {
        GenreRecord record = lookup_genres("nobody", "nothing", cache, stub);
        CHECK_FALSE(record.resolved);
        CHECK(record.genres.empty());
        CHECK(cache.size() == 0);
        lookup_genres("nobody", "nothing", cache, stub);
        CHECK(stub.calls() == 2);  // retried, not cached
    }
    SUBCASE("provider failure") {
        stub.fail_next({ProviderError::Kind::unavailable, "down"});
        GenreRecord record = lookup_genres("nobody", "nothing", cache, stub);
        CHECK_FALSE(record.resolved);
        CHECK(cache.size() == 0);
    }
    SUBCASE("empty answer after normalization is a miss") {
        stub.put("nobody", "nothing", {"  ", ""});
        GenreRecord record = lookup_genres("nobody", "nothing", cache, stub);
        CHECK_FALSE(record.resolved);
        CHECK(cache.size() == 0);
    }
}

TEST_CASE("lookups require an artist") {
    TempCache temp("tabtok_meta_noartist.jsonl");
    GenreCache cache(temp.path);
    StubProvider stub;
    CHECK_THROWS_AS(lookup_genres("", "song", cache, stub), ContractError);
    CHECK_THROWS_AS(lookup_genres("   ", "song", cache, stub), ContractError);
    CHECK(stub.calls() == 0);
    // A missing title is fine; some catalogs answer per artist.
    CHECK_NOTHROW(lookup_genres("opeth", "", cache, stub));
}

TEST_CASE("the cache file is append-only jsonl where later lines win") {
    TempCache temp("tabtok_meta_cache.jsonl");
    GenreRecord first;
    first.artist = "kyuss";
    first.title = "gardenia";
    first.resolved = true;
    first.genres = {"stoner rock"};
    first.source = "stub";
    first.fetched_at = "2026-08-14T00:00:00Z";
    GenreRecord second = first;
    second.genres = {"stoner rock", "desert rock"};
    second.fetched_at = "2026-08-14T01:00:00Z";

    {
        GenreCache cache(temp.path);
        cache.put(first);
        cache.put(second);
        CHECK(cache.size() == 1);
        auto found = cache.find("kyuss", "gardenia");
        REQUIRE(found.has_value());
        CHECK(*found == second);
    }
    // Two lines on disk, reload keeps the later one.
    std::ifstream in(temp.path);
    std::string line;
    int lines = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 2);

    GenreCache reloaded(temp.path);
    CHECK(reloaded.size() == 1);
    CHECK(*reloaded.find("kyuss", "gardenia") == second);
    CHECK_FALSE(reloaded.find("kyuss", "other").has_value());
}

TEST_CASE("damaged cache lines are skipped, later appends repair them") {
    TempCache temp("tabtok_meta_damaged.jsonl");
    {
        std::ofstream out(temp.path);
        out << "{not json\n";
        out << R"({"artist":"opeth","title":"bleak","resolved":true,)"
            << R"("genres":["progressive metal"],"source":"stub",)"
            << R"("fetched_at":"2026-08-14T00:00:00Z"})" << "\n";
        out << "\n";
    }
    GenreCache cache(temp.path);
    CHECK(cache.size() == 1);
    auto found = cache.find("opeth", "bleak");
    REQUIRE(found.has_value());
    CHECK(found->genres == std::vector<std::string>{"progressive metal"});
}

TEST_CASE("the http provider speaks the catalog protocol") {
    SUBCASE("success returns the raw genre list") {
        std::string seen_artist, seen_title, seen_auth;
        LocalCatalog catalog([&](const httplib::Request& req, httplib::Response& res) {
            seen_artist = req.get_param_value("artist");
            seen_title = req.get_param_value("title");
            seen_auth = req.get_header_value("Authorization");
            res.set_content(R"({"genres":["Doom","Sludge"]})", "application/json");
        });
        HttpCatalogProvider provider(catalog.url(), "secret-token");
        auto result = provider.search("yob", "grasping air");
        REQUIRE(std::holds_alternative<std::vector<std::string>>(result));
        CHECK(std::get<std::vector<std::string>>(result) ==
              std::vector<std::string>{"Doom", "Sludge"});
        CHECK(seen_artist == "yob");
        CHECK(seen_title == "grasping air");
        CHECK(seen_auth == "Bearer secret-token");
    }
    SUBCASE("404 is a miss, not an error") {
        LocalCatalog catalog([](const httplib::Request&, httplib::Response& res) {
            res.status = 404;
        });
        HttpCatalogProvider provider(catalog.url());
        auto result = provider.search("nobody", "nothing");
        REQUIRE(std::holds_alternative<std::vector<std::string>>(result));
        CHECK(std::get<std::vector<std::string>>(result).empty());
    }
    SUBCASE("rate limiting retries with backoff until it clears") {
        std::atomic<int> hits{0};
        LocalCatalog catalog([&](const httplib::Request&, httplib::Response& res) {
            if (++hits <= 2) {
                res.status = 429;
            } else {
                res.set_content(R"({"genres":["Grindcore"]})", "application/json");
            }
        });
        HttpCatalogProvider provider(catalog.url(), "", 2, 1);
        auto result = provider.search("a", "b");
        REQUIRE(std::holds_alternative<std::vector<std::string>>(result));
        CHECK(hits == 3);
    }
    SUBCASE("persistent rate limiting gives up with the right kind") {
        std::atomic<int> hits{0};
        LocalCatalog catalog([&](const httplib::Request&, httplib::Response& res) {
            ++hits;
            res.status = 429;
        });
        HttpCatalogProvider provider(catalog.url(), "", 2, 1);
        auto result = provider.search("a", "b");
        REQUIRE(std::holds_alternative<ProviderError>(result));
        CHECK(std::get<ProviderError>(result).kind == ProviderError::Kind::rate_limited);
        CHECK(hits == 3);  // initial try plus two retries
    }
    SUBCASE("server errors are unavailable") {
        LocalCatalog catalog([](const httplib::Request&, httplib::Response& res) {
            res.status = 500;
        });
        HttpCatalogProvider provider(catalog.url());
        auto result = provider.search("a", "b");
        REQUIRE(std::holds_alternative<ProviderError>(result));
        CHECK(std::get<ProviderError>(result).kind == ProviderError::Kind::unavailable);
    }
    SUBCASE("unparseable and shapeless bodies are malformed") {
        LocalCatalog catalog([](const httplib::Request& req, httplib::Response& res) {
            if (req.get_param_value("title") == "broken") {
                res.set_content("{oops", "application/json");
            } else {
                res.set_content(R"({"tags":["x"]})", "application/json");
            }
        });
        HttpCatalogProvider provider(catalog.url());
        auto broken = provider.search("a", "broken");
        REQUIRE(std::holds_alternative<ProviderError>(broken));
        CHECK(std::get<ProviderError>(broken).kind == ProviderError::Kind::malformed);
        auto shapeless = provider.search("a", "shapeless");
        REQUIRE(std::holds_alternative<ProviderError>(shapeless));
        CHECK(std::get<ProviderError>(shapeless).kind == ProviderError::Kind::malformed);
    }
    SUBCASE("an unreachable catalog is unavailable") {
        HttpCatalogProvider provider("http://127.0.0.1:1");
        auto result = provider.search("a", "b");
        REQUIRE(std::holds_alternative<ProviderError>(result));
        CHECK(std::get<ProviderError>(result).kind == ProviderError::Kind::unavailable);
    }
}

TEST_CASE("the full lookup works against a live local catalog") {
    TempCache temp("tabtok_meta_http.jsonl");
    GenreCache cache(temp.path);
    std::atomic<int> hits{0};
    LocalCatalog catalog([&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.set_content(R"({"genres":["Rock","rock","Metal"]})", "application/json");
    });
    HttpCatalogProvider provider(catalog.url());

    GenreRecord record = lookup_genres("Some Band", "Some Song", cache, provider);
    CHECK(record.resolved);
    CHECK(record.genres == std::vector<std::string>{"rock", "metal"});
    CHECK(record.source == "catalog");
    CHECK(hits == 1);

    GenreRecord cached = lookup_genres("some band", "some song", cache, provider);
    CHECK(cached == record);
    CHECK(hits == 1);  // no second network call
}
