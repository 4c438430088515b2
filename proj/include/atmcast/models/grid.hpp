#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "atmcast/models/model.hpp"

namespace atmcast {

/// Candidate values per hyperparameter; keys enumerate in sorted order with the
/// last key varying fastest.
using HyperGrid = std::map<std::string, std::vector<json>>;

/// The search ranges of the published hyperparameter table.
HyperGrid default_grid(Family family);
/// Per-key overrides on top of the default grid. Each value is a list or a
/// single value; unknown keys raise a config error.
HyperGrid grid_from_json(Family family, const json& overrides);
std::vector<json> enumerate_grid(const HyperGrid& grid);

struct CandidateScore {
    double val_smape = 0.0;
    std::size_t n_params = 0;
    json info = json::object();
};

struct Candidate {
    std::size_t index = 0;
    ModelSpec spec;
    std::optional<CandidateScore> score;
    std::string error;
};

struct SearchResult {
    Family family = Family::grnn;
    /// Ranked: successful candidates by (SMAPE, parameter count, grid index), failures last.
    std::vector<Candidate> leaderboard;

    const Candidate& winner() const { return leaderboard.front(); }
};

using CandidateEval = std::function<CandidateScore(const ModelSpec&)>;

/// Evaluates every grid point (concurrently) with seeds derived from
/// (seed, grid index). Raises search_exhausted when every candidate fails.
SearchResult search(Family family, const HyperGrid& grid, std::uint64_t seed, const CandidateEval& eval);

/// Fits each candidate on `train` and scores it on `validation`.
SearchResult grid_search(Family family, const HyperGrid& grid, const SupervisedDataset& train,
                         const Validation& validation, std::uint64_t seed);

/// Spec used to refit the winner on the full training span. Early-stopped
/// networks keep the epoch count that won validation.
ModelSpec refit_spec(const Candidate& winner);

void write_leaderboard_csv(std::ostream& out, const SearchResult& result);

} // namespace atmcast
