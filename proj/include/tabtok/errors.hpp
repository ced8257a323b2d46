#pragma once

#include <stdexcept>
#include <string>

namespace tabtok {

// API misuse: caller handed us data that violates a documented precondition
// (e.g. rendering an unknown token, writing a song with overlapping beats).
struct ContractError : std::logic_error {
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace tabtok
