#include "atmcast/models/grid.hpp"

#include <algorithm>
#include <ostream>

#include "atmcast/error.hpp"
#include "atmcast/io_format.hpp"

namespace atmcast {

namespace {

std::vector<json> int_range(long lo, long hi, long step = 1)
{
    std::vector<json> v;
    for (long x = lo; x < hi; x += step) v.push_back(x);
    return v;
}

} // namespace

HyperGrid default_grid(Family family)
{
    switch (family) {
    case Family::arima: return {{"p", {7}}, {"d", {0}}, {"q", {0}}};
    case Family::mlp:
        return {{"nodes1", int_range(1, 64, 4)}, {"nodes2", int_range(1, 8)}, {"lr", {0.1}}, {"momentum", {0.9}}};
    case Family::rf: return {{"n_estimators", int_range(5, 50)}, {"max_depth", int_range(4, 15)}};
    case Family::grnn: return {{"sigma", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7}}};
    case Family::gmdh:
        return {{"max_layers", {50}},
                {"ref_functions", {json{"linear", "linear_cov", "quadratic", "cubic"}}},
                {"alpha", {0.5}},
                {"admix_features", {true}}};
    case Family::lstm:
        return {{"hidden", int_range(2, 11)}, {"epochs", int_range(300, 1000, 100)}, {"lr", {0.01}}};
    case Family::cnn1d:
        return {{"n_filters", int_range(5, 70, 5)}, {"epochs", int_range(300, 2000, 200)},
                {"dense_nodes", int_range(2, 8)}};
    }
    return {};
}

HyperGrid grid_from_json(Family family, const json& overrides)
{
    HyperGrid grid = default_grid(family);
    if (overrides.is_null()) {
        return grid;
    }
    if (!overrides.is_object()) {
        throw Error(ErrorKind::config, std::string(to_string(family)) + " grid override must be an object");
    }
    for (const auto& [key, value] : overrides.items()) {
        // A list of names is one ref_functions value, not a list of candidates.
        const bool is_list = value.is_array() && !(key == "ref_functions" && !value.empty() && value[0].is_string());
        std::vector<json> values;
        if (is_list) {
            values.assign(value.begin(), value.end());
        } else {
            values.push_back(value);
        }
        if (values.empty()) {
            throw Error(ErrorKind::config, "grid for '" + key + "' is empty");
        }
        // Validating a one-key spec rejects unknown names and bad values early.
        for (const auto& v : values) validated(ModelSpec{family, {{key, v}}, 0});
        grid[key] = std::move(values);
    }
    return grid;
}

std::vector<json> enumerate_grid(const HyperGrid& grid)
{
    std::vector<json> out{json::object()};
    for (const auto& [key, values] : grid) {
        std::vector<json> next;
        next.reserve(out.size() * values.size());
        for (const auto& partial : out) {
            for (const auto& v : values) {
                json j = partial;
                j[key] = v;
                next.push_back(std::move(j));
            }
        }
        out = std::move(next);
    }
    return out;
}

SearchResult search(Family family, const HyperGrid& grid, std::uint64_t seed, const CandidateEval& eval)
{
    const auto points = enumerate_grid(grid);
    if (grid.empty() || points.empty()) {
        throw Error(ErrorKind::config, "empty hyperparameter grid");
    }
    std::vector<Candidate> cands(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        cands[i].index = i;
        cands[i].spec = validated(ModelSpec{family, points[i], derive_seed(seed, {i})});
    }
    const auto n = std::ptrdiff_t(cands.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        auto& c = cands[std::size_t(i)];
        try {
            c.score = eval(c.spec);
        } catch (const std::exception& e) {
            c.error = e.what();
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score.has_value() != b.score.has_value()) return a.score.has_value();
        if (!a.score) return a.index < b.index;
        if (a.score->val_smape != b.score->val_smape) return a.score->val_smape < b.score->val_smape;
        if (a.score->n_params != b.score->n_params) return a.score->n_params < b.score->n_params;
        return a.index < b.index;
    });
    if (!cands.front().score) {
        std::string causes;
        for (const auto& c : cands) {
            causes += "\n  [" + std::to_string(c.index) + "] " + c.spec.hyper.dump() + ": " + c.error;
        }
        throw Error(ErrorKind::search_exhausted,
                    std::string(to_string(family)) + ": every grid candidate failed" + causes);
    }
    return SearchResult{family, std::move(cands)};
}

SearchResult grid_search(Family family, const HyperGrid& grid, const SupervisedDataset& train,
                         const Validation& validation, std::uint64_t seed)
{
    if (validation.data == nullptr || validation.data->rows() == 0) {
        throw Error(ErrorKind::length, "grid search needs a non-empty validation set");
    }
    return search(family, grid, seed, [&](const ModelSpec& spec) {
        const FittedModel model = fit_model(spec, train, validation);
        return CandidateScore{validation.smape_of(model.predict(*validation.data)), model.n_params(), model.info()};
    });
}

ModelSpec refit_spec(const Candidate& winner)
{
    ModelSpec spec = winner.spec;
    if (spec.family == Family::mlp && winner.score && winner.score->info.contains("epochs_used") &&
        spec.hyper.at("patience").get<std::size_t>() > 0) {
        spec.hyper["epochs"] = winner.score->info.at("epochs_used");
        spec.hyper["patience"] = 0;
    }
    return spec;
}

void write_leaderboard_csv(std::ostream& out, const SearchResult& result)
{
    out << "rank,spec_json,val_smape,n_params,error\n";
    std::size_t rank = 1;
    for (const auto& c : result.leaderboard) {
        std::string spec = c.spec.to_json().dump();
        std::string quoted = "\"";
        for (char ch : spec) {
            if (ch == '"') quoted += '"';
            quoted += ch;
        }
        quoted += '"';
        out << rank++ << ',' << quoted << ',';
        if (c.score) {
            out << format_double(c.score->val_smape) << ',' << c.score->n_params << ',';
        } else {
            std::string err;
            for (char ch : c.error) err += (ch == '"' ? '\'' : (ch == '\n' ? ' ' : ch));
            out << ",," << '"' << err << '"';
        }
        out << '\n';
    }
}

} // namespace atmcast
