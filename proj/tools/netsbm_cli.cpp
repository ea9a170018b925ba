// Command-line front end; talks to the core only through the C API.

#include "netsbm.h"

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolveAbort = 3;

int exit_code_for(netsbm_status s) {
    switch (s) {
        case NETSBM_OK: return kExitOk;
        case NETSBM_ERR_SOLVE: return kExitSolveAbort;
        default: return kExitConfig;
    }
}

int complain(netsbm_status s) {
    std::fprintf(stderr, "error: %s\n", netsbm_last_error());
    return exit_code_for(s);
}

std::string join_path(const std::string& dir, const std::string& file) {
    if (dir.empty() || dir == ".") return file;
    if (dir.back() == '/') return dir + file;
    return dir + "/" + file;
}

int run_check(const std::string& config_path) {
    netsbm_config* cfg = nullptr;
    netsbm_status s = netsbm_config_load(config_path.c_str(), &cfg);
    if (s != NETSBM_OK) return complain(s);
    char summary[4096];
    s = netsbm_config_check(cfg, summary, sizeof(summary));
    netsbm_config_free(cfg);
    if (s != NETSBM_OK) return complain(s);
    std::fputs(summary, stdout);
    std::puts("config ok");
    return kExitOk;
}

int run_solve(const std::string& config_path) {
    netsbm_config* cfg = nullptr;
    netsbm_status s = netsbm_config_load(config_path.c_str(), &cfg);
    if (s != NETSBM_OK) return complain(s);

    char outdir[2048];
    netsbm_config_output_dir(cfg, outdir, sizeof(outdir));

    netsbm_report* report = nullptr;
    s = netsbm_solve(cfg, &report);
    netsbm_config_free(cfg);
    if (s != NETSBM_OK) return complain(s);

    const std::string csv_path = join_path(outdir, "report.csv");
    const std::string json_path = join_path(outdir, "report.json");
    s = netsbm_report_write_csv(report, csv_path.c_str());
    if (s == NETSBM_OK) s = netsbm_report_write_json(report, json_path.c_str());
    if (s != NETSBM_OK) {
        netsbm_report_free(report);
        return complain(s);
    }

    std::printf("solved %zu DMUs\n", netsbm_report_dmu_count(report));
    std::printf("wrote %s and %s\n", csv_path.c_str(), json_path.c_str());

    double stat = 0.0, p = 0.0;
    int df = 0;
    char scope[64];
    if (netsbm_report_friedman(report, &stat, &df, &p, scope, sizeof(scope)) == NETSBM_OK) {
        if (p < 1e-6)
            std::printf("friedman: statistic=%.6f df=%d p=<1e-06 scope=%s\n", stat, df, scope);
        else
            std::printf("friedman: statistic=%.6f df=%d p=%.6f scope=%s\n", stat, df, p, scope);
    }
    netsbm_report_free(report);
    return kExitOk;
}

int run_compare(const std::string& report_path, const std::string& families,
                const std::string& scope) {
    netsbm_report* report = nullptr;
    netsbm_status s = netsbm_report_load_json(report_path.c_str(), &report);
    if (s != NETSBM_OK) return complain(s);
    double stat = 0.0, p = 0.0;
    int df = 0;
    s = netsbm_friedman(report, families.c_str(), scope.c_str(), &stat, &df, &p);
    netsbm_report_free(report);
    if (s != NETSBM_OK) return complain(s);
    if (p < 1e-6)
        std::printf("friedman: statistic=%.6f df=%d p=<1e-06 scope=%s\n", stat, df, scope.c_str());
    else
        std::printf("friedman: statistic=%.6f df=%d p=%.6f scope=%s\n", stat, df, p, scope.c_str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stage SBM efficiencies with robust counterparts"};
    app.require_subcommand(1);

    std::string config_path;
    std::string report_path;
    std::string families = "crisp,ellipsoidal,polyhedral,budget";
    std::string scope = "overall";

    CLI::App* solve = app.add_subcommand("solve", "run the configured batch and write reports");
    solve->add_option("--config", config_path, "run config (JSON)")->required();

    CLI::App* check = app.add_subcommand("check", "validate config and panel without solving");
    check->add_option("--config", config_path, "run config (JSON)")->required();

    CLI::App* compare = app.add_subcommand("compare", "Friedman test over an existing JSON report");
    compare->add_option("--report", report_path, "report.json produced by solve")->required();
    compare->add_option("--families", families, "comma-separated families to compare");
    compare->add_option("--on", scope, "efficiency column: overall|stage1|stage2");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    if (solve->parsed()) return run_solve(config_path);
    if (check->parsed()) return run_check(config_path);
    return run_compare(report_path, families, scope);
}
