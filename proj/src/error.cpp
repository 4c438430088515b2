#include "atmcast/error.hpp"

namespace atmcast {

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    case ErrorKind::parse: return "parse";
    case ErrorKind::duplicate_key: return "duplicate_key";
    case ErrorKind::domain: return "domain";
    case ErrorKind::unimputable: return "unimputable";
    case ErrorKind::split: return "split";
    case ErrorKind::coverage: return "coverage";
    case ErrorKind::empty_panel: return "empty_panel";
    case ErrorKind::dependency: return "dependency";
    case ErrorKind::evaluation: return "evaluation";
    case ErrorKind::length: return "length";
    case ErrorKind::shape: return "shape";
    case ErrorKind::mode: return "mode";
    case ErrorKind::singular: return "singular";
    case ErrorKind::zero_variance: return "zero_variance";
    case ErrorKind::instability: return "instability";
    case ErrorKind::neighbor_search: return "neighbor_search";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::division_guard: return "division_guard";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::rank: return "rank";
    case ErrorKind::pairing: return "pairing";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::fit: return "fit";
    case ErrorKind::search_exhausted: return "search_exhausted";
    }
    return "unknown";
}

int exit_code(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::usage:
    case ErrorKind::config:
        return 1;
    case ErrorKind::io:
    case ErrorKind::parse:
    case ErrorKind::duplicate_key:
    case ErrorKind::domain:
    case ErrorKind::unimputable:
    case ErrorKind::split:
    case ErrorKind::coverage:
    case ErrorKind::empty_panel:
    case ErrorKind::dependency:
    case ErrorKind::evaluation:
        return 2;
    default:
        return 3;
    }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind)
{
}

} // namespace atmcast
