// Python face of the library: GP5 bytes <-> Song <-> token strings, the
// stream sanitizer and grammar counts, corpus reports, tick arithmetic.
// Tokens cross the boundary as their text spellings.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tabtok/errors.hpp"
#include "tabtok/gp5.hpp"
#include "tabtok/meter.hpp"
#include "tabtok/stats.hpp"
#include "tabtok/tokenizer.hpp"
#include "tabtok/validator.hpp"

namespace py = pybind11;
using namespace tabtok;

namespace {

std::vector<Token> tokens_from(const std::vector<std::string>& lines) {
    std::vector<Token> tokens;
    tokens.reserve(lines.size());
    for (const std::string& line : lines) tokens.push_back(parse_token(line));
    return tokens;
}

std::vector<std::string> lines_from(const std::vector<Token>& tokens) {
    std::vector<std::string> lines;
    lines.reserve(tokens.size());
    for (const Token& token : tokens) {
        lines.push_back(token.kind == TokenKind::unknown ? token.text
                                                         : render_token(token));
    }
    return lines;
}

py::bytes bytes_from(const std::vector<uint8_t>& data) {
    return py::bytes(reinterpret_cast<const char*>(data.data()), data.size());
}

std::vector<uint8_t> buffer_from(const py::bytes& data) {
    std::string_view view = data;
    return std::vector<uint8_t>(view.begin(), view.end());
}

py::dict report_dict(const ErrorReport& report) {
    py::dict out;
    out["total"] = report.total;
    out["adjacent_repeats"] = report.adjacent_repeats;
    out["duplicate_singletons"] = report.duplicate_singletons;
    py::list errors;
    for (const StreamError& error : report.errors) {
        py::dict entry;
        entry["position"] = error.position;
        entry["kind"] = error.kind == StreamErrorKind::duplicate_singleton
                            ? "duplicate_singleton"
                            : "adjacent_repeat";
        entry["token"] = error.token;
        errors.append(entry);
    }
    out["errors"] = errors;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "GuitarPro 5 <-> event-token codec core";

    py::register_exception<Gp5Error>(m, "Gp5Error");
    py::register_exception<ContractError>(m, "ContractError");

    py::class_<Song>(m, "Song")
        .def(py::init<>())
        .def_readwrite("artist", &Song::artist)
        .def_readwrite("title", &Song::title)
        .def_readwrite("initial_tempo", &Song::initial_tempo)
        .def_readwrite("downtune", &Song::downtune)
        .def_property_readonly(
            "measure_count", [](const Song& s) { return s.headers.size(); })
        .def_property_readonly("track_count",
                               [](const Song& s) { return s.tracks.size(); })
        .def("__eq__", [](const Song& a, const Song& b) { return a == b; })
        .def("__repr__", [](const Song& s) {
            return "<Song artist='" + s.artist + "' measures=" +
                   std::to_string(s.headers.size()) + " tracks=" +
                   std::to_string(s.tracks.size()) + ">";
        });

    m.def("ticks_to_seconds", &ticks_to_seconds, py::arg("ticks"), py::arg("bpm"));
    m.def(
        "infer_time_signature",
        [](long long span) {
            InferredSignature inferred = infer_time_signature(span);
            return py::make_tuple(inferred.signature.numerator,
                                  inferred.signature.denominator);
        },
        py::arg("span_ticks"));
    m.def(
        "duration_name",
        [](int ticks) -> std::optional<std::string> { return duration_name(ticks); },
        py::arg("ticks"));

    m.def(
        "read_gp5",
        [](const py::bytes& data) {
            Gp5ReadResult result = read_gp5(buffer_from(data));
            return py::make_tuple(result.song, result.skipped);
        },
        py::arg("data"), "Parse a GP5 file image into (Song, skipped counts).");
    m.def(
        "write_gp5", [](const Song& song) { return bytes_from(write_gp5(song)); },
        py::arg("song"), "Serialize a Song as deterministic v5.00 bytes.");

    m.def(
        "encode",
        [](const Song& song, bool emit_measure_repeat) {
            EncodeConfig config;
            config.emit_measure_repeat = emit_measure_repeat;
            return lines_from(encode(song, config));
        },
        py::arg("song"), py::arg("emit_measure_repeat") = true,
        "Song to its canonical token spellings.");
    m.def(
        "decode",
        [](const std::vector<std::string>& lines) {
            DecodeResult result = decode(tokens_from(lines));
            return py::make_tuple(result.song, result.skipped);
        },
        py::arg("tokens"),
        "Token spellings to (Song, skipped counts). Total: never raises on "
        "token content.");

    m.def(
        "sanitize",
        [](const std::vector<std::string>& lines) {
            return lines_from(sanitize(tokens_from(lines)));
        },
        py::arg("tokens"));
    m.def(
        "count_errors",
        [](const std::vector<std::string>& lines) {
            return report_dict(count_errors(tokens_from(lines)));
        },
        py::arg("tokens"));

    m.def(
        "musically_equivalent",
        [](const Song& a, const Song& b) {
            EquivalenceReport report = musically_equivalent(a, b);
            return py::make_tuple(report.equivalent, report.differences);
        },
        py::arg("a"), py::arg("b"));

    m.def(
        "stats_json",
        [](const std::vector<std::filesystem::path>& files, int top_n) {
            return stats_to_json(corpus_stats(files, top_n).report);
        },
        py::arg("files"), py::arg("top_n") = 20,
        "Corpus report over token files, as a json string.");
    m.def(
        "vocab",
        [](const std::vector<std::filesystem::path>& files) {
            return build_vocab(files).vocab.entries;
        },
        py::arg("files"),
        "Unique token spellings across token files, first-occurrence order.");
}
