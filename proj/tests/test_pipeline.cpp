#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "atmcast/error.hpp"
#include "atmcast/pipeline.hpp"

using namespace atmcast;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("atmcast_pipeline_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::binary);
    out << text;
}

json read_json_file(const fs::path& p) { return json::parse(slurp(p)); }

int cli(const std::string& args)
{
    const std::string cmd = std::string("\"") + ATMCAST_CLI + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json small_config()
{
    return {{"schema_version", 1},
            {"input_path", "panel.csv"},
            {"output_dir", "out"},
            {"families", {"grnn", "rf"}},
            {"grids", {{"grnn", {{"sigma", {0.3, 0.5}}}}, {"rf", {{"n_estimators", {5}}, {"max_depth", {4}}}}}},
            {"base_seed", 3},
            {"synth",
             {{{"kind", "atm_like"}, {"id", "atm"}, {"length", 400}, {"seed", 1}, {"copies", 3}},
              {{"kind", "atm_like"}, {"id", "holey"}, {"length", 400}, {"seed", 2}, {"parameters", {{"missing", 200}}}},
              {{"kind", "ar"},
               {"id", "noise"},
               {"length", 400},
               {"seed", 3},
               {"parameters", {{"coefficients", json::array()}, {"intercept", 100.0}, {"noise_std", 5.0}}}}}}};
}

RunConfig write_config(const fs::path& dir, const json& j)
{
    spit(dir / "config.json", j.dump(2));
    return load_config(dir / "config.json");
}

ErrorKind kind_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an atmcast::Error");
    return ErrorKind::usage;
}

} // namespace

TEST_CASE("config parsing")
{
    const auto dir = scratch("config");
    const auto cfg = write_config(dir, small_config());
    CHECK(cfg.input_path == dir / "panel.csv");
    CHECK(cfg.output_dir == dir / "out");
    CHECK(cfg.horizon == 30);
    CHECK(cfg.missing_threshold == 110);
    CHECK(cfg.families == std::vector<Family>{Family::grnn, Family::rf});
    CHECK(cfg.use_exogenous == ExogenousArms::both);
    CHECK(cfg.synth.size() == 3);
    CHECK(cfg.synth[0].copies == 3);
    CHECK_FALSE(cfg.to_json().contains("output_dir"));
}

TEST_CASE("config errors")
{
    const auto dir = scratch("config_errors");
    auto bad = [&](json j) { return kind_of([&] { RunConfig::from_json(j, dir); }); };
    auto base = small_config();
    CHECK(bad([&] { auto j = base; j["schema_version"] = 2; return j; }()) == ErrorKind::config);
    CHECK(bad([&] { auto j = base; j.erase("schema_version"); return j; }()) == ErrorKind::config);
    CHECK(bad([&] { auto j = base; j.erase("input_path"); return j; }()) == ErrorKind::config);
    CHECK(bad([&] { auto j = base; j["colour"] = "red"; return j; }()) == ErrorKind::config);
    CHECK(bad([&] { auto j = base; j["use_exogenous"] = "sometimes"; return j; }()) == ErrorKind::config);
    CHECK(bad([&] { auto j = base; j["families"] = {"svm"}; return j; }()) == ErrorKind::config);
    CHECK(bad([&] { auto j = base; j["grids"]["rf"] = {{"trees", {5}}}; return j; }()) == ErrorKind::config);
    CHECK(bad([&] { auto j = base; j["fixed_embedding"] = {{"tau", 1}}; return j; }()) == ErrorKind::config);
    CHECK(bad([&] { auto j = base; j["horizon"] = -3; return j; }()) == ErrorKind::config);
    const auto fixed = [&] { auto j = base; j["fixed_embedding"] = {{"tau", 1}, {"m", 7}}; return j; }();
    CHECK(RunConfig::from_json(fixed, dir).fixed_embedding == std::make_pair(std::size_t{1}, std::size_t{7}));
    CHECK_THROWS_AS(load_config(dir / "absent.json"), Error);
}

TEST_CASE("preparation inverts exactly")
{
    GeneratorSpec g;
    g.kind = GeneratorKind::atm_like;
    g.length = 200;
    g.seed = 12;
    const auto s = generate(g);
    const auto prep = prepare_series(s, 30);
    CHECK(prep.train_length == 170);
    CHECK(prep.test_actual().size() == 30);
    const auto& inv = prep.inverses;
    DatedSeries back = prep.scaled;
    for (auto& v : back.values) v = scaler_inverse(*v, inv.scaler);
    back = reseasonalize(back, inv.season);
    for (std::size_t t = 0; t < s.size(); ++t) CHECK(std::abs(*back.values[t] - *s.values[t]) <= 1e-10 * std::max(1.0, std::abs(*s.values[t])));
}

TEST_CASE("end-to-end run on a small synthetic panel")
{
    const auto dir = scratch("e2e");
    const auto cfg = write_config(dir, small_config());
    cmd_synth(cfg);
    REQUIRE(fs::exists(cfg.input_path));
    cmd_run(cfg);

    const auto summary = read_json_file(cfg.output_dir / "analysis" / "summary.json");
    CHECK(summary.at("retained").size() == 4);
    REQUIRE(summary.at("filtered").size() == 1);
    CHECK(summary.at("filtered")[0].at("id") == "holey");
    CHECK(summary.at("filtered")[0].at("missing") == 200);
    for (const char* id : {"atm_01", "atm_02", "atm_03"}) {
        const auto doc = read_json_file(cfg.output_dir / "analysis" / (std::string(id) + ".json"));
        CHECK(doc.at("profile").at("is_chaotic").is_boolean());
        CHECK(doc.at("seasonal_index").at("factors").size() == 7);
        CHECK(fs::exists(cfg.output_dir / "analysis" / (std::string(id) + "_cao.csv")));
    }
    const auto noise = read_json_file(cfg.output_dir / "analysis" / "noise.json");
    CHECK(noise.at("cao").at("saturated") == false);

    const auto index = read_json_file(cfg.output_dir / "forecasts" / "index.json");
    CHECK(index.at("entries").size() == 4 * 2 * 2);
    std::size_t grnn_traces = 0;
    for (const auto& e : index.at("entries")) {
        REQUIRE(e.at("status") == "ok");
        if (e.at("series_id") != "atm_01" || e.at("family") != "grnn") continue;
        ++grnn_traces;
        const std::string text = slurp(cfg.output_dir / e.at("trace").get<std::string>());
        CHECK(std::count(text.begin(), text.end(), '\n') == 31);
        CHECK(text.rfind("date,predicted,actual\n", 0) == 0);
        CHECK(fs::exists(cfg.output_dir / e.at("model").get<std::string>()));
    }
    CHECK(grnn_traces == 2);

    const auto report_path = cfg.output_dir / "report" / "report.json";
    const std::string first = slurp(report_path);
    const auto report = json::parse(first);
    CHECK(report.at("analysis").at("series").size() == 4);
    CHECK(report.at("evaluation").at("aggregates").size() == 4);
    CHECK(report.at("config").at("base_seed") == 3);

    SUBCASE("report regeneration is byte-identical")
    {
        cmd_report(cfg);
        CHECK(slurp(report_path) == first);
    }
    SUBCASE("a second run reproduces every artifact")
    {
        const auto again = write_config(dir, [] { auto j = small_config(); j["output_dir"] = "out2"; return j; }());
        cmd_run(again);
        CHECK(slurp(again.output_dir / "report" / "report.json") == first);
        CHECK(slurp(again.output_dir / "evaluation" / "records.csv") == slurp(cfg.output_dir / "evaluation" / "records.csv"));
    }
    SUBCASE("planted traces flow through evaluation")
    {
        // Perfect forecasts for one trace, and rf traces copied from grnn for the t-test.
        for (const auto& e : index.at("entries")) {
            const fs::path trace = cfg.output_dir / e.at("trace").get<std::string>();
            if (e.at("family") == "rf") {
                const std::string grnn = e.at("trace").get<std::string>();
                const auto pos = grnn.rfind("rf_");
                fs::copy_file(cfg.output_dir / (grnn.substr(0, pos) + "grnn_" + grnn.substr(pos + 3)), trace,
                              fs::copy_options::overwrite_existing);
            }
        }
        cmd_evaluate(cfg);
        const auto ev = read_json_file(cfg.output_dir / "evaluation" / "evaluation.json");
        REQUIRE(!ev.at("ttests").empty());
        for (const auto& t : ev.at("ttests")) {
            CHECK(t.at("t") == 0.0);
            CHECK(t.at("p") == 1.0);
        }

        const auto& e0 = index.at("entries")[0];
        const fs::path trace0 = cfg.output_dir / e0.at("trace").get<std::string>();
        std::istringstream in(slurp(trace0));
        auto tr = read_trace_csv(in);
        tr.predicted = *tr.actual;
        std::ostringstream out;
        write_trace_csv(out, tr);
        spit(trace0, out.str());
        cmd_evaluate(cfg);
        const auto ev2 = read_json_file(cfg.output_dir / "evaluation" / "evaluation.json");
        bool found = false;
        for (const auto& r : ev2.at("report").at("records")) {
            if (r.at("series_id") == e0.at("series_id") && r.at("model") == e0.at("family") &&
                r.at("exogenous") == e0.at("exogenous")) {
                CHECK(r.at("smape") == 0.0);
                CHECK(r.at("dstat") == 100.0);
                found = true;
            }
        }
        CHECK(found);
    }
}

TEST_CASE("verbs check their inputs")
{
    const auto dir = scratch("deps");
    const auto cfg = write_config(dir, small_config());
    CHECK(kind_of([&] { cmd_analyze(cfg); }) == ErrorKind::io);
    CHECK(kind_of([&] { cmd_forecast(cfg); }) == ErrorKind::io);
    CHECK(kind_of([&] { cmd_evaluate(cfg); }) == ErrorKind::dependency);
    CHECK(kind_of([&] { cmd_report(cfg); }) == ErrorKind::dependency);
}

TEST_CASE("command-line exit codes")
{
    const auto dir = scratch("cli");
    auto j = small_config();
    j["families"] = {"grnn"};
    j["use_exogenous"] = false;
    j["synth"] = {{{"kind", "atm_like"}, {"id", "atm"}, {"length", 300}, {"seed", 1}, {"copies", 2}}};
    spit(dir / "config.json", j.dump());
    const std::string cfg = "--config \"" + (dir / "config.json").string() + "\"";
    CHECK(cli("--version") == 0);
    CHECK(cli("") == 1);
    CHECK(cli("frobnicate " + cfg) == 1);
    CHECK(cli("analyze") == 1);
    CHECK(cli("analyze --config \"" + (dir / "missing.json").string() + "\"") == 1);
    spit(dir / "bad.json", R"({"schema_version": 1, "input_path": "panel.csv", "horizon": "soon"})");
    CHECK(cli("analyze --config \"" + (dir / "bad.json").string() + "\"") == 1);
    CHECK(cli("analyze " + cfg) == 2);
    CHECK(cli("synth " + cfg) == 0);
    CHECK(cli("report " + cfg) == 2);
    CHECK(cli("run " + cfg + " --seed 9 --out \"" + (dir / "alt").string() + "\"") == 0);
    CHECK(fs::exists(dir / "alt" / "report" / "report.json"));
    CHECK(read_json_file(dir / "alt" / "report" / "report.json").at("config").at("base_seed") == 9);

    spit(dir / "garbage.csv", "id,date,amount\na,2020-13-45,3\n");
    auto g = j;
    g["input_path"] = "garbage.csv";
    spit(dir / "garbage.json", g.dump());
    CHECK(cli("analyze --config \"" + (dir / "garbage.json").string() + "\"") == 2);
}
