#include "netsbm/runner.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace netsbm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("netsbm_test_" + std::to_string(reinterpret_cast<uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    os << text;
}

std::string read_file(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

const char* kPanelCsv =
    "bank,staff,deposits,income,npa\n"
    "P,120,310,290,12\n"
    "Q,95,260,240,9\n"
    "R,210,505,470,30\n";

std::string config_json(const fs::path& dir, const std::string& families,
                        const std::string& extra = "") {
    std::ostringstream os;
    os << "{\n"
       << "  \"panel\": {\"path\": \"" << (dir / "panel.csv").string()
       << "\", \"name_column\": \"bank\", \"roles\": {\"staff\": \"input\", "
          "\"deposits\": \"intermediate\", \"income\": \"desirable\", \"npa\": "
          "\"undesirable\"}},\n"
       << "  \"families\": [" << families << "],\n"
       << "  \"uncertainty\": {\"layers\": {\"percent_of_nominal\": [0.1, 0.2]},\n"
       << "    \"ellipsoidal\": {\"omega\": 1.0}, \"budget\": {\"gamma\": 0.0},\n"
       << "    \"polyhedral\": {\n"
       << "      \"inputs\": {\"H\": [[1,0],[0,1],[-1,0],[0,-1]], \"q\": [1,1,1,1]},\n"
       << "      \"intermediates\": {\"H\": [[1,0],[0,1],[-1,0],[0,-1]], \"q\": [1,1,1,1]},\n"
       << "      \"desirable\": {\"H\": [[1,0],[0,1],[-1,0],[0,-1]], \"q\": [1,1,1,1]},\n"
       << "      \"undesirable\": {\"H\": [[1,0],[0,1],[-1,0],[0,-1]], \"q\": [1,1,1,1]}}},\n"
       << "  \"output\": {\"dir\": \"" << dir.string() << "\"},\n"
       << "  \"parallelism\": 1\n"
       << (extra.empty() ? "" : ",\n" + extra) << "}\n";
    return os.str();
}

} // namespace

TEST_CASE("config loading validates fields and reports precise errors") {
    TempDir tmp;
    write_file(tmp.path / "panel.csv", kPanelCsv);
    write_file(tmp.path / "ok.json", config_json(tmp.path, "\"crisp\""));
    auto cfg = load_run_config((tmp.path / "ok.json").string());
    CHECK(cfg.families == std::vector<ModelFamily>{ModelFamily::Crisp});
    CHECK(cfg.uncertainty.layer_fractions == std::vector<double>{0.1, 0.2});

    write_file(tmp.path / "bad1.json", "{ not json");
    CHECK_THROWS_AS(load_run_config((tmp.path / "bad1.json").string()), ConfigError);

    write_file(tmp.path / "bad2.json", config_json(tmp.path, ""));
    CHECK_THROWS_AS(load_run_config((tmp.path / "bad2.json").string()), ConfigError);

    write_file(tmp.path / "bad3.json", config_json(tmp.path, "\"crisp\", \"crisp\""));
    CHECK_THROWS_AS(load_run_config((tmp.path / "bad3.json").string()), ConfigError);

    CHECK_THROWS_AS(load_run_config((tmp.path / "absent.json").string()), ConfigError);
}

TEST_CASE("check_config summarises the panel without solving") {
    TempDir tmp;
    write_file(tmp.path / "panel.csv", kPanelCsv);
    write_file(tmp.path / "cfg.json", config_json(tmp.path, "\"crisp\""));
    auto cfg = load_run_config((tmp.path / "cfg.json").string());
    auto summary = check_config(cfg);
    CHECK(summary.find("3 DMUs") != std::string::npos);
    CHECK(summary.find("1 inputs") != std::string::npos);

    cfg.panel_path = (tmp.path / "absent.csv").string();
    CHECK_THROWS_AS(check_config(cfg), ConfigError);
}

TEST_CASE("crisp-only batch populates every row with the exact stage product") {
    TempDir tmp;
    write_file(tmp.path / "panel.csv", kPanelCsv);
    write_file(tmp.path / "cfg.json", config_json(tmp.path, "\"crisp\""));
    auto report = run_batch(load_run_config((tmp.path / "cfg.json").string()));
    CHECK(report.dmu_names.size() == 3);
    REQUIRE(report.families.size() == 1);
    const auto& fam = report.families[0];
    for (size_t i = 0; i < 3; ++i) {
        REQUIRE(fam.stage1[i].ok());
        REQUIRE(fam.stage2[i].ok());
        CHECK(fam.overall[i] == fam.stage1[i].eff * fam.stage2[i].eff); // exact product
        CHECK(fam.overall_efficient[i] == (fam.stage1[i].efficient && fam.stage2[i].efficient));
    }
    REQUIRE(fam.lowest_stage1.has_value());
    REQUIRE(fam.lowest_overall.has_value());
    // Lowest entries are the argmin over non-failed DMUs.
    size_t arg = 0;
    for (size_t i = 1; i < 3; ++i)
        if (fam.overall[i] < fam.overall[arg]) arg = i;
    CHECK(fam.lowest_overall->dmu == report.dmu_names[arg]);
    CHECK(fam.lowest_overall->eff == fam.overall[arg]);
    double min1 = fam.stage1[0].eff;
    for (size_t i = 1; i < 3; ++i) min1 = std::min(min1, fam.stage1[i].eff);
    CHECK(fam.lowest_stage1->eff == min1);
    CHECK(!report.friedman.has_value()); // single family, nothing to compare
}

TEST_CASE("budget at zero matches the crisp family column for column") {
    TempDir tmp;
    write_file(tmp.path / "panel.csv", kPanelCsv);
    write_file(tmp.path / "cfg.json", config_json(tmp.path, "\"crisp\", \"budget\""));
    auto report = run_batch(load_run_config((tmp.path / "cfg.json").string()));
    const auto* crisp = report.find(ModelFamily::Crisp);
    const auto* budget = report.find(ModelFamily::Budget);
    REQUIRE(crisp);
    REQUIRE(budget);
    for (size_t i = 0; i < report.dmu_names.size(); ++i) {
        CHECK(std::abs(crisp->stage1[i].eff - budget->stage1[i].eff) <= 1e-5);
        CHECK(std::abs(crisp->stage2[i].eff - budget->stage2[i].eff) <= 1e-5);
        CHECK(std::abs(crisp->overall[i] - budget->overall[i]) <= 1e-5);
    }
}

TEST_CASE("ellipsoidal efficiencies dominate crisp ones DMU by DMU") {
    TempDir tmp;
    write_file(tmp.path / "panel.csv", kPanelCsv);
    write_file(tmp.path / "cfg.json", config_json(tmp.path, "\"crisp\", \"ellipsoidal\""));
    auto report = run_batch(load_run_config((tmp.path / "cfg.json").string()));
    const auto* crisp = report.find(ModelFamily::Crisp);
    const auto* ell = report.find(ModelFamily::Ellipsoidal);
    for (size_t i = 0; i < report.dmu_names.size(); ++i) {
        CHECK(ell->stage1[i].eff >= crisp->stage1[i].eff - 1e-7);
        CHECK(ell->stage2[i].eff >= crisp->stage2[i].eff - 1e-7);
    }
    CHECK(report.friedman.has_value());
}

TEST_CASE("parallel degree does not change the report") {
    TempDir tmp;
    write_file(tmp.path / "panel.csv", kPanelCsv);
    write_file(tmp.path / "cfg.json",
               config_json(tmp.path, "\"crisp\", \"ellipsoidal\", \"polyhedral\", \"budget\""));
    auto cfg = load_run_config((tmp.path / "cfg.json").string());
    cfg.parallelism = 1;
    auto serial = run_batch(cfg);
    cfg.parallelism = 4;
    auto parallel = run_batch(cfg);
    CHECK(report_equal(serial, parallel));

    // Determinism: identical configs produce byte-identical artifacts.
    std::ostringstream csv_a, csv_b, json_a, json_b;
    write_report_csv(serial, csv_a);
    write_report_csv(parallel, csv_b);
    write_report_json(serial, json_a);
    write_report_json(parallel, json_b);
    CHECK(csv_a.str() == csv_b.str());
    CHECK(json_a.str() == json_b.str());
}

TEST_CASE("CSV layout: header plus one row per DMU, 13 columns") {
    TempDir tmp;
    const char* two =
        "bank,staff,deposits,income,npa\nP,120,310,290,12\nQ,95,260,240,9\n";
    write_file(tmp.path / "panel.csv", two);
    write_file(tmp.path / "cfg.json", config_json(tmp.path, "\"crisp\""));
    auto report = run_batch(load_run_config((tmp.path / "cfg.json").string()));
    std::ostringstream os;
    write_report_csv(report, os);
    std::istringstream is(os.str());
    std::string line;
    int lines = 0;
    while (std::getline(is, line)) {
        ++lines;
        CHECK(std::count(line.begin(), line.end(), ',') == 12); // 13 columns
    }
    CHECK(lines == 3); // header + 2 DMUs
}

TEST_CASE("JSON report round-trips to a structurally equal report") {
    TempDir tmp;
    write_file(tmp.path / "panel.csv", kPanelCsv);
    write_file(tmp.path / "cfg.json", config_json(tmp.path, "\"crisp\", \"budget\""));
    auto report = run_batch(load_run_config((tmp.path / "cfg.json").string()));
    std::ostringstream os;
    write_report_json(report, os);
    std::istringstream is(os.str());
    auto back = read_report_json(is);
    CHECK(report_equal(report, back));
    // Re-serialisation is byte-stable.
    std::ostringstream os2;
    write_report_json(back, os2);
    CHECK(os.str() == os2.str());
}

TEST_CASE("a family failing on every DMU aborts with a family diagnostic") {
    TempDir tmp;
    write_file(tmp.path / "panel.csv", kPanelCsv);
    // Polyhedral family selected but the inputs set is omitted while input
    // deviations are nonzero: every DMU fails to build.
    std::string cfg_text = config_json(tmp.path, "\"polyhedral\"");
    auto pos = cfg_text.find("\"inputs\": {\"H\"");
    REQUIRE(pos != std::string::npos);
    cfg_text.erase(pos, cfg_text.find("},", pos) - pos + 2);
    write_file(tmp.path / "cfg.json", cfg_text);
    CHECK_THROWS_AS(run_batch(load_run_config((tmp.path / "cfg.json").string())), FamilyAbort);
}

TEST_CASE("friedman over a report drops DMUs with failed cells") {
    EfficiencyReport r;
    r.dmu_names = {"A", "B", "C"};
    for (ModelFamily f : {ModelFamily::Crisp, ModelFamily::Budget}) {
        FamilyResult fam;
        fam.family = f;
        for (int i = 0; i < 3; ++i) {
            StageCell c;
            c.status = "optimal";
            c.eff = 0.5 + 0.1 * i + (f == ModelFamily::Budget ? 0.2 : 0.0);
            fam.stage1.push_back(c);
            fam.stage2.push_back(c);
            fam.overall.push_back(c.eff * c.eff);
            fam.overall_efficient.push_back(false);
        }
        r.families.push_back(fam);
    }
    r.families[1].stage2[2].status = "numerical_failure"; // C incomplete
    auto fr = friedman_over_report(r, {ModelFamily::Crisp, ModelFamily::Budget}, "overall");
    CHECK(fr.df == 1); // ran on the two complete DMUs
    CHECK_THROWS_AS(friedman_over_report(r, {ModelFamily::Crisp}, "overall"), StatsError);
    CHECK_THROWS_AS(friedman_over_report(r, {ModelFamily::Crisp, ModelFamily::Ellipsoidal},
                                         "overall"),
                    StatsError);
    CHECK_THROWS_AS(friedman_over_report(r, {ModelFamily::Crisp, ModelFamily::Budget}, "stage3"),
                    StatsError);
}

TEST_CASE("p-value formatting floors tiny values") {
    CHECK(format_p_value(0.5) == "0.500000");
    CHECK(format_p_value(5e-7) == "<1e-06");
    CHECK(format_p_value(0.0) == "<1e-06");
}
