// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "atmcast/chaos.hpp"
#include "atmcast/evaluation.hpp"
#include "atmcast/features.hpp"
#include "atmcast/models/arima.hpp"
#include "atmcast/models/gmdh.hpp"
#include "atmcast/models/grnn.hpp"
#include "atmcast/models/lstm.hpp"
#include "atmcast/preprocess.hpp"
#include "atmcast/series.hpp"
#include "atmcast/synthgen.hpp"
#include "network_oracles.hpp"
#include "oracles.hpp"

using namespace atmcast;
using json = nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using V = std::vector<double>;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a)
{
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [failed]");
        pass = pass && ok;
    }
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int cli(const std::string& args)
{
    const std::string cmd = std::string("\"") + ATMCAST_CLI + "\" " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path work_dir(const std::string& name)
{
    const fs::path p = fs::current_path() / "acceptance_work" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Outcome logistic_lyapunov()
{
    Outcome o;
    const auto t0 = Clock::now();
    const auto x = logistic_map(4.0, 0.3, 5000, 100);
    LyapunovOptions opt;
    opt.m = 2;
    const double lambda = lyapunov_rosenstein(x, opt).lambda;
    const double secs = seconds_since(t0);
    o.require(lambda >= 0.55 && lambda <= 0.80, fmt("lambda=%.4f in [0.55, 0.80]", lambda));
    o.require(secs < 5.0, fmt("%.2fs < 5s", secs));
    return o;
}

Outcome henon_lyapunov()
{
    Outcome o;
    const double reference = oracle::henon_jacobian_lyapunov(1.4, 0.3, 1'000'000);
    const auto t0 = Clock::now();
    const auto x = henon_map(1.4, 0.3, 0.1, 0.1, 5000, 100);
    const double lambda = lyapunov_rosenstein(x, {}).lambda;
    const double secs = seconds_since(t0);
    o.require(std::abs(reference - 0.42) <= 0.01, fmt("Jacobian oracle=%.4f", reference));
    o.require(std::abs(lambda - reference) <= 0.08, fmt("lambda=%.4f within 0.08", lambda));
    o.require(secs < 5.0, fmt("%.2fs < 5s", secs));
    return o;
}

Outcome cao_checks()
{
    Outcome o;
    const auto lz = lorenz_x(LorenzParams{}, {1.0, 1.0, 1.0}, 5000);
    const auto tau = select_lag(lz, LagMethod::acf_1_over_e);
    const auto c = cao_min_embedding(lz, tau);
    o.require(c.saturated && c.m_min >= 2 && c.m_min <= 4,
              "Lorenz tau=" + std::to_string(tau) + " m_min=" + std::to_string(c.m_min) + " in {2,3,4}" +
                  (c.saturated ? "" : " (unsaturated)"));
    bool noise_ok = true;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        noise_ok = noise_ok && !cao_min_embedding(oracle::gaussian_noise(2000, 11 + seed), 1).saturated;
    }
    o.require(noise_ok, "white noise unsaturated over 5 seeds");
    return o;
}

Outcome metric_exactness()
{
    Outcome o;
    bool hand = std::abs(smape(V{1}, V{3}) - 100.0) < 1e-9 && smape(V{5, 7}, V{5, 7}) == 0.0 &&
                std::abs(theils_u(V{1, 2}, V{1, 4}) - 2.0) < 1e-9 && theils_u(V{1, 2, 4}, V{1, 2, 4}) == 0.0 &&
                std::abs(dstat(V{1, 2, 1}, V{1, 3, 5}) - 50.0) < 1e-9 && dstat(V{1, 2, 3}, V{1, 2, 3}) == 100.0 &&
                dstat(V{1, 2, 3}, V{9, 8, 7}) == 0.0;
    o.require(hand, "hand examples to 1e-9");
    int exact = 0;
    double worst_scale = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto a = oracle::gaussian_noise(50, 900 + seed, 40.0);
        auto p = oracle::gaussian_noise(50, 1900 + seed, 40.0);
        for (auto& v : a) v = 300.0 + std::abs(v);
        for (auto& v : p) v = 300.0 + std::abs(v);
        V naive(a.size());
        naive[0] = a[0];
        for (std::size_t t = 1; t < a.size(); ++t) naive[t] = a[t - 1];
        exact += theils_u(a, naive) == 1.0;
        for (double k : {1e-3, 0.37, 12.0, 5e4}) {
            V ka(a), kp(p);
            for (auto& v : ka) v *= k;
            for (auto& v : kp) v *= k;
            worst_scale = std::max(worst_scale, std::abs(smape(ka, kp) - smape(a, p)));
        }
    }
    o.require(exact == 100, "naive U == 1 on " + std::to_string(exact) + "/100");
    o.require(worst_scale <= 1e-10, fmt("SMAPE scale drift %.2e <= 1e-10", worst_scale));
    return o;
}

Outcome gradient_suites()
{
    Outcome o;
    constexpr int seeds = 25;
    double mlp = 0, lstm = 0, cnn = 0;
    for (int seed = 0; seed < seeds; ++seed) {
        std::mt19937_64 rng(7000 + seed);
        const MlpShape s{3 + std::size_t(seed % 3), 2 + std::size_t(seed % 5), 1 + std::size_t(seed % 4)};
        const auto X = oracle::uniform_matrix(5, Eigen::Index(s.inputs), rng);
        const Eigen::VectorXd y = oracle::uniform_matrix(5, 1, rng).col(0);
        const auto theta = oracle::random_theta(s.n_params(), rng, 1.0);
        mlp = std::max(mlp, oracle::check_gradient([&](std::span<const double> t, std::vector<double>* g) {
            return MlpModel::loss_and_gradient(s, t, X, y, g);
        }, theta));
    }
    for (int seed = 0; seed < seeds; ++seed) {
        std::mt19937_64 rng(8000 + seed);
        const std::size_t exo = seed % 2 ? 9 : 0;
        const LstmShape s{2 + std::size_t(seed % 4), 3, exo};
        const auto X = oracle::uniform_matrix(4, Eigen::Index(s.steps + exo), rng);
        const Eigen::VectorXd y = oracle::uniform_matrix(4, 1, rng).col(0);
        const auto theta = oracle::random_theta(s.n_params(), rng, 0.8);
        lstm = std::max(lstm, oracle::check_gradient([&](std::span<const double> t, std::vector<double>* g) {
            return LstmModel::loss_and_gradient(s, t, X, y, g);
        }, theta));
    }
    for (int seed = 0; seed < seeds; ++seed) {
        std::mt19937_64 rng(9000 + seed);
        const std::size_t exo = seed % 2 ? 9 : 0;
        const CnnShape s{3 + std::size_t(seed % 5), 2 + std::size_t(seed % 4), 2 + std::size_t(seed % 3), exo};
        Eigen::MatrixXd X;
        Eigen::VectorXd y;
        std::vector<double> theta;
        do {
            X = oracle::uniform_matrix(5, Eigen::Index(s.steps + exo), rng);
            y = oracle::uniform_matrix(5, 1, rng).col(0);
            theta = oracle::random_theta(s.n_params(), rng, 1.0);
        } while (oracle::cnn_forward(s, theta, X).min_abs_pre <= 1e-3);
        cnn = std::max(cnn, oracle::check_gradient([&](std::span<const double> t, std::vector<double>* g) {
            return Cnn1dModel::loss_and_gradient(s, t, X, y, g);
        }, theta));
    }
    o.require(mlp < 1e-4, fmt("MLP worst %.2e", mlp));
    o.require(lstm < 1e-4, fmt("LSTM worst %.2e", lstm));
    o.require(cnn < 1e-4, fmt("CNN worst %.2e", cnn) + " over " + std::to_string(seeds) + " seeds each");
    return o;
}

Outcome estimator_consistency()
{
    Outcome o;
    const auto y = oracle::ar1(2000, 0.8, 1e-2, 50);
    const double phi = ArimaModel::fit(y, 1, 0, 0).params().phi.at(0);
    o.require(std::abs(phi - 0.8) <= 0.02, fmt("AR(1) phi=%.4f", phi));

    std::mt19937_64 rng(4);
    const auto X = oracle::uniform_matrix(80, 2, rng), Xv = oracle::uniform_matrix(30, 2, rng);
    const Eigen::VectorXd t = X.col(0).cwiseProduct(X.col(1)), tv = Xv.col(0).cwiseProduct(Xv.col(1));
    const auto g = GmdhModel::train(X, t, Xv, tv, GmdhOptions{});
    const Eigen::VectorXd err = g->predict(Xv) - tv;
    const double rmse = std::sqrt(err.squaredNorm() / double(err.size()));
    o.require(rmse < 1e-6, fmt("GMDH x1*x2 validation RMSE %.2e", rmse));

    const auto P = oracle::uniform_matrix(30, 3, rng);
    const Eigen::VectorXd ty = oracle::uniform_matrix(30, 1, rng).col(0) * 10.0;
    const auto Q = oracle::uniform_matrix(12, 3, rng);
    bool single = true, nearest = true;
    for (double sigma : {1e-3, 0.5, 40.0}) {
        const auto p = GrnnModel(P.topRows(1), ty.head(1), sigma).predict(Q);
        for (Eigen::Index i = 0; i < p.size(); ++i) single = single && p(i) == ty(0);
    }
    const auto pn = GrnnModel(P, ty, 1e-8).predict(Q);
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
        Eigen::Index best = 0;
        (P.rowwise() - Q.row(i)).rowwise().squaredNorm().minCoeff(&best);
        nearest = nearest && pn(i) == ty(best);
    }
    o.require(single, "GRNN single pattern exact");
    o.require(nearest, "GRNN nearest-neighbour limit exact");
    return o;
}

Outcome statistical_oracles()
{
    Outcome o;
    struct Row {
        double df, t10, t05, t01;
    };
    double worst = 0.0;
    for (const auto& r : {Row{2, 2.920, 4.303, 9.925}, Row{10, 1.812, 2.228, 3.169}, Row{78, 1.665, 1.991, 2.640}}) {
        worst = std::max({worst, std::abs(student_t_two_sided_p(r.t10, r.df) - 0.10),
                          std::abs(student_t_two_sided_p(r.t05, r.df) - 0.05),
                          std::abs(student_t_two_sided_p(r.t01, r.df) - 0.01)});
    }
    o.require(worst <= 1e-3, fmt("t table worst deviation %.1e", worst));
    int ar_ok = 0, walk_ok = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        ar_ok += adf_test(oracle::ar1(500, 0.5, 1.0, 300 + seed)).is_stationary;
        walk_ok += !adf_test(oracle::walk(500, 600 + seed)).is_stationary;
    }
    o.require(ar_ok >= 90, "ADF stationary AR " + std::to_string(ar_ok) + "/100");
    o.require(walk_ok >= 90, "ADF random walk " + std::to_string(walk_ok) + "/100");
    return o;
}

Outcome directional()
{
    Outcome o;
    const fs::path dir = work_dir("directional");
    json cfg = json::parse(slurp(fs::path(ATMCAST_SOURCE_DIR) / "configs" / "directional.json"));
    cfg["input_path"] = "panel.csv";
    cfg["output_dir"] = "out";
    std::ofstream(dir / "config.json") << cfg.dump(2);
    const std::string arg = "--config \"" + (dir / "config.json").string() + "\"";
    const auto t0 = Clock::now();
    const int synth = cli("synth " + arg);
    const int run = synth == 0 ? cli("run " + arg) : synth;
    const double secs = seconds_since(t0);
    if (run != 0) {
        o.require(false, "CLI exit " + std::to_string(run));
        return o;
    }
    const json rep = json::parse(slurp(dir / "out" / "report" / "report.json"));
    std::map<std::pair<std::string, bool>, double> mean;
    std::size_t series = 0;
    for (const auto& g : rep.at("evaluation").at("aggregates")) {
        mean[{g.at("model").get<std::string>(), g.at("exogenous").get<bool>()}] = g.at("smape").at("mean").get<double>();
        series = std::max(series, g.at("smape").at("count").get<std::size_t>());
    }
    o.require(series == 10, std::to_string(series) + " series");
    for (const char* m : {"grnn", "rf", "mlp"}) {
        const auto with = mean.find({m, true}), without = mean.find({m, false});
        if (with == mean.end() || without == mean.end()) {
            o.require(false, std::string(m) + " missing");
            continue;
        }
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s %.3f -> %.3f", m, without->second, with->second);
        o.require(with->second < without->second, buf);
    }
    o.require(secs < 600.0, fmt("%.0fs < 600s", secs));
    return o;
}

Outcome determinism()
{
    Outcome o;
    const fs::path dir = work_dir("determinism");
    const std::string cfg = "--config \"" + (fs::path(ATMCAST_SOURCE_DIR) / "configs" / "corpus.json").string() + "\"";
    const int a = cli("run " + cfg + " --out \"" + (dir / "a").string() + "\"");
    const int b = cli("run " + cfg + " --out \"" + (dir / "b").string() + "\"");
    if (a != 0 || b != 0) {
        o.require(false, "CLI exits " + std::to_string(a) + "," + std::to_string(b));
        return o;
    }
    const std::string ra = slurp(dir / "a" / "report" / "report.json");
    const std::string rb = slurp(dir / "b" / "report" / "report.json");
    o.require(!ra.empty() && ra == rb, "report.json byte-identical (" + std::to_string(ra.size()) + " bytes)");
    return o;
}

Outcome structural()
{
    Outcome o;
    GeneratorSpec g;
    g.kind = GeneratorKind::atm_like;
    g.length = 3653;
    g.seed = 10;
    g.start = Date::from_ymd(2010, 1, 1);
    const auto series = generate(g);
    const auto ds = assemble_supervised(series, 1, 7, true);
    o.require(ds.X.cols() == 16 && ds.feature_names.size() == 16, "tau=1, m=7 gives " + std::to_string(ds.X.cols()) + " columns");
    std::size_t bad = 0;
    for (Eigen::Index r = 0; r < ds.X.rows(); ++r) {
        const auto d = ds.target_dates[std::size_t(r)];
        double week = 0.0;
        for (Eigen::Index k = 0; k < 7; ++k) week += ds.X(r, 7 + k);
        const bool weekend = d.iso_weekday() >= 6;
        const bool ok = week == 1.0 && ds.X(r, 7 + Eigen::Index(d.iso_weekday()) - 1) == 1.0 &&
                        ds.X(r, 14) == (weekend ? 1.0 : 0.0) && ds.X(r, 15) == (weekend ? 0.0 : 1.0);
        bad += !ok;
    }
    o.require(bad == 0, std::to_string(ds.X.rows()) + " rows over ten years, " + std::to_string(bad) + " one-hot violations");
    return o;
}

} // namespace

int main()
{
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"logistic Lyapunov exponent", logistic_lyapunov},
        {"Henon Lyapunov exponent", henon_lyapunov},
        {"Cao embedding on Lorenz and noise", cao_checks},
        {"metric exactness", metric_exactness},
        {"gradient suites", gradient_suites},
        {"estimator consistency", estimator_consistency},
        {"statistical oracles", statistical_oracles},
        {"exogenous features improve GRNN, RF and MLP", directional},
        {"end-to-end determinism", determinism},
        {"structural checks", structural},
    };
    int failures = 0, n = 0;
    for (const auto& [name, check] : criteria) {
        ++n;
        const auto t0 = Clock::now();
        Outcome out;
        try {
            out = check();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("threw: ") + e.what();
        }
        failures += !out.pass;
        std::printf("criterion %2d %s: %s (%s, %.1fs)\n", n, out.pass ? "PASS" : "FAIL", name, out.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria passed\n", n - failures, n);
    return failures == 0 ? 0 : 1;
}
