#include "netsbm.h"

#include "netsbm/report.hpp"
#include "netsbm/runner.hpp"

#include <cstring>
#include <string>

struct netsbm_config {
    netsbm::RunConfig cfg;
};

struct netsbm_report {
    netsbm::EfficiencyReport report;
};

namespace {

thread_local std::string g_last_error;

netsbm_status fail(netsbm_status code, const std::string& message) {
    g_last_error = message;
    return code;
}

netsbm_status classify(const std::exception& e) {
    if (dynamic_cast<const netsbm::FamilyAbort*>(&e)) return NETSBM_ERR_SOLVE;
    if (dynamic_cast<const netsbm::ConfigError*>(&e)) return NETSBM_ERR_CONFIG;
    if (dynamic_cast<const netsbm::PanelError*>(&e)) return NETSBM_ERR_CONFIG;
    return NETSBM_ERR_CONFIG;
}

void copy_out(const std::string& s, char* buf, size_t cap) {
    if (!buf || cap == 0) return;
    size_t n = std::min(cap - 1, s.size());
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
}

} // namespace

extern "C" {

const char* netsbm_version(void) { return "0.1.0"; }

const char* netsbm_last_error(void) { return g_last_error.c_str(); }

netsbm_status netsbm_config_load(const char* path, netsbm_config** out) {
    if (!path || !out) return fail(NETSBM_ERR_INVALID, "null argument");
    *out = nullptr;
    try {
        auto* handle = new netsbm_config{netsbm::load_run_config(path)};
        *out = handle;
        return NETSBM_OK;
    } catch (const std::exception& e) {
        return fail(classify(e), e.what());
    }
}

void netsbm_config_free(netsbm_config* config) { delete config; }

netsbm_status netsbm_config_check(const netsbm_config* config, char* summary, size_t capacity) {
    if (!config) return fail(NETSBM_ERR_INVALID, "null config");
    try {
        copy_out(netsbm::check_config(config->cfg), summary, capacity);
        return NETSBM_OK;
    } catch (const std::exception& e) {
        return fail(classify(e), e.what());
    }
}

netsbm_status netsbm_config_output_dir(const netsbm_config* config, char* buffer, size_t capacity) {
    if (!config) return fail(NETSBM_ERR_INVALID, "null config");
    copy_out(config->cfg.output_dir, buffer, capacity);
    return NETSBM_OK;
}

netsbm_status netsbm_solve(const netsbm_config* config, netsbm_report** out) {
    if (!config || !out) return fail(NETSBM_ERR_INVALID, "null argument");
    *out = nullptr;
    try {
        auto* handle = new netsbm_report{netsbm::run_batch(config->cfg)};
        *out = handle;
        return NETSBM_OK;
    } catch (const netsbm::FamilyAbort& e) {
        return fail(NETSBM_ERR_SOLVE, e.what());
    } catch (const std::exception& e) {
        return fail(classify(e), e.what());
    }
}

netsbm_status netsbm_report_load_json(const char* path, netsbm_report** out) {
    if (!path || !out) return fail(NETSBM_ERR_INVALID, "null argument");
    *out = nullptr;
    try {
        auto* handle = new netsbm_report{netsbm::read_report_json_file(path)};
        *out = handle;
        return NETSBM_OK;
    } catch (const std::exception& e) {
        return fail(NETSBM_ERR_IO, e.what());
    }
}

netsbm_status netsbm_report_write_csv(const netsbm_report* report, const char* path) {
    if (!report || !path) return fail(NETSBM_ERR_INVALID, "null argument");
    try {
        netsbm::write_report_csv(report->report, std::string(path));
        return NETSBM_OK;
    } catch (const std::exception& e) {
        return fail(NETSBM_ERR_IO, e.what());
    }
}

netsbm_status netsbm_report_write_json(const netsbm_report* report, const char* path) {
    if (!report || !path) return fail(NETSBM_ERR_INVALID, "null argument");
    try {
        netsbm::write_report_json(report->report, std::string(path));
        return NETSBM_OK;
    } catch (const std::exception& e) {
        return fail(NETSBM_ERR_IO, e.what());
    }
}

void netsbm_report_free(netsbm_report* report) { delete report; }

size_t netsbm_report_dmu_count(const netsbm_report* report) {
    return report ? report->report.dmu_names.size() : 0;
}

const char* netsbm_report_dmu_name(const netsbm_report* report, size_t index) {
    if (!report || index >= report->report.dmu_names.size()) return nullptr;
    return report->report.dmu_names[index].c_str();
}

netsbm_status netsbm_report_efficiency(const netsbm_report* report, const char* family,
                                       const char* scope, size_t dmu, double* out) {
    if (!report || !family || !scope || !out) return fail(NETSBM_ERR_INVALID, "null argument");
    auto fam = netsbm::family_from_name(family);
    if (!fam) return fail(NETSBM_ERR_INVALID, std::string("unknown family '") + family + "'");
    const netsbm::FamilyResult* fr = report->report.find(*fam);
    if (!fr) return fail(NETSBM_ERR_INVALID, std::string("family '") + family + "' not in report");
    if (dmu >= report->report.dmu_names.size())
        return fail(NETSBM_ERR_INVALID, "DMU index out of range");

    std::string sc(scope);
    if (sc == "stage1") {
        if (!fr->stage1[dmu].ok()) return fail(NETSBM_ERR_INVALID, "stage-1 cell not solved");
        *out = fr->stage1[dmu].eff;
    } else if (sc == "stage2") {
        if (!fr->stage2[dmu].ok()) return fail(NETSBM_ERR_INVALID, "stage-2 cell not solved");
        *out = fr->stage2[dmu].eff;
    } else if (sc == "overall") {
        if (!fr->stage1[dmu].ok() || !fr->stage2[dmu].ok())
            return fail(NETSBM_ERR_INVALID, "overall cell not solved");
        *out = fr->overall[dmu];
    } else {
        return fail(NETSBM_ERR_INVALID, std::string("unknown scope '") + sc + "'");
    }
    return NETSBM_OK;
}

netsbm_status netsbm_report_friedman(const netsbm_report* report, double* statistic, int* df,
                                     double* p_value, char* scope, size_t scope_capacity) {
    if (!report || !statistic || !df || !p_value) return fail(NETSBM_ERR_INVALID, "null argument");
    if (!report->report.friedman)
        return fail(NETSBM_ERR_INVALID, "report carries no Friedman result");
    *statistic = report->report.friedman->statistic;
    *df = report->report.friedman->df;
    *p_value = report->report.friedman->p_value;
    copy_out(report->report.friedman_scope, scope, scope_capacity);
    return NETSBM_OK;
}

netsbm_status netsbm_friedman(const netsbm_report* report, const char* families_csv,
                              const char* scope, double* statistic, int* df, double* p_value) {
    if (!report || !families_csv || !scope || !statistic || !df || !p_value)
        return fail(NETSBM_ERR_INVALID, "null argument");
    try {
        std::vector<netsbm::ModelFamily> fams;
        std::string token;
        for (const char* c = families_csv;; ++c) {
            if (*c == ',' || *c == '\0') {
                if (!token.empty()) {
                    auto f = netsbm::family_from_name(token);
                    if (!f)
                        return fail(NETSBM_ERR_INVALID, "unknown family '" + token + "'");
                    fams.push_back(*f);
                    token.clear();
                }
                if (*c == '\0') break;
            } else if (*c != ' ') {
                token.push_back(*c);
            }
        }
        netsbm::FriedmanResult r =
            netsbm::friedman_over_report(report->report, fams, std::string(scope));
        *statistic = r.statistic;
        *df = r.df;
        *p_value = r.p_value;
        return NETSBM_OK;
    } catch (const std::exception& e) {
        return fail(NETSBM_ERR_CONFIG, e.what());
    }
}

} // extern "C"
