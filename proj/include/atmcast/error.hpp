#pragma once

#include <stdexcept>
#include <string>

namespace atmcast {

enum class ErrorKind {
    usage,
    config,
    io,
    parse,
    duplicate_key,
    domain,
    unimputable,
    split,
    coverage,
    empty_panel,
    dependency,
    evaluation,
    length,
    shape,
    mode,
    singular,
    zero_variance,
    instability,
    neighbor_search,
    degenerate,
    division_guard,
    numeric,
    unsupported,
    rank,
    pairing,
    divergence,
    fit,
    search_exhausted,
};

const char* to_string(ErrorKind kind);

/// Process exit code for an error category: 1 usage, 2 data, 3 numeric/model.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace atmcast
