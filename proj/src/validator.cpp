#include <algorithm>

#include <json.hpp>

#include "tabtok/validator.hpp"

namespace tabtok {

namespace {

bool is_singleton(TokenKind kind) {
    switch (kind) {
        case TokenKind::artist:
        case TokenKind::downtune:
        case TokenKind::tempo:
        case TokenKind::start:
        case TokenKind::end:
            return true;
        default:
            return false;
    }
}

const char* singleton_name(TokenKind kind) {
    switch (kind) {
        case TokenKind::artist:
            return "artist";
        case TokenKind::downtune:
            return "downtune";
        case TokenKind::tempo:
            return "tempo";
        case TokenKind::start:
            return "start";
        default:
            return "end";
    }
}

std::string spelling(const Token& token) {
    return token.kind == TokenKind::unknown ? token.text : render_token(token);
}

}  // namespace

ErrorReport count_errors(const std::vector<Token>& tokens) {
    ErrorReport report;
    std::map<TokenKind, bool> seen;
    for (size_t i = 0; i < tokens.size(); ++i) {
        const Token& token = tokens[i];
        if (is_singleton(token.kind)) {
            if (seen[token.kind]) {
                ++report.duplicate_singletons[singleton_name(token.kind)];
                report.errors.push_back(
                    {i, StreamErrorKind::duplicate_singleton, spelling(token)});
                continue;  // takes precedence over the repeat check
            }
            seen[token.kind] = true;
        }
        if (i > 0 && token == tokens[i - 1]) {
            ++report.adjacent_repeats;
            report.errors.push_back(
                {i, StreamErrorKind::adjacent_repeat, spelling(token)});
        }
    }
    for (const auto& [kind, extra] : report.duplicate_singletons) {
        report.total += extra;
    }
    report.total += report.adjacent_repeats;
    return report;
}

std::vector<Token> sanitize(std::vector<Token> tokens) {
    std::vector<Token> out;
    out.reserve(tokens.size() + 5);
    std::map<TokenKind, bool> seen;
    for (Token& token : tokens) {
        if (token.kind == TokenKind::end) {
            seen[TokenKind::end] = true;  // emitted once, at the very end
            continue;
        }
        if (is_singleton(token.kind)) {
            if (seen[token.kind]) continue;
            seen[token.kind] = true;
            out.push_back(std::move(token));
            continue;
        }
        if (token.kind == TokenKind::wait && !out.empty() &&
            out.back().kind == TokenKind::wait) {
            long long sum =
                static_cast<long long>(out.back().value) + token.value;
            out.back().value = static_cast<int>(
                std::min<long long>(sum, kMaxWaitTicks));
            continue;
        }
        if (!out.empty() && out.back() == token) continue;
        out.push_back(std::move(token));
    }
    std::vector<Token> head;
    if (!seen[TokenKind::artist]) head.push_back(make_artist("unknown"));
    if (!seen[TokenKind::downtune]) head.push_back(make_downtune(0));
    if (!seen[TokenKind::tempo]) head.push_back(make_tempo(120));
    if (!seen[TokenKind::start]) head.push_back(make_start());
    out.insert(out.begin(), head.begin(), head.end());
    out.push_back(make_end());
    return out;
}

std::string error_report_to_json(const ErrorReport& report) {
    nlohmann::json j;
    j["total"] = report.total;
    j["adjacent_repeats"] = report.adjacent_repeats;
    j["duplicate_singletons"] = nlohmann::json::object();
    for (const auto& [name, extra] : report.duplicate_singletons) {
        j["duplicate_singletons"][name] = extra;
    }
    j["errors"] = nlohmann::json::array();
    for (const StreamError& error : report.errors) {
        nlohmann::json entry;
        entry["position"] = error.position;
        entry["kind"] = error.kind == StreamErrorKind::duplicate_singleton
                            ? "duplicate_singleton"
                            : "adjacent_repeat";
        entry["token"] = error.token;
        j["errors"].push_back(entry);
    }
    return j.dump(2);
}

}  // namespace tabtok
