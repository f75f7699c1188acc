#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "covest/avar.hpp"
#include "covest/core.hpp"
#include "covest/estimators.hpp"
#include "covest/sim.hpp"
#include "covest/sync.hpp"
#include "covest/tuning.hpp"

namespace {

using nlohmann::json;

void write_sync_csv(std::ostream& out, const covest::SyncResult& sync,
                    const covest::CaseLabels& labels) {
    out.precision(17);
    out << "k,l,g,lambda,gamma,T,case_x,case_y\n";
    for (std::size_t k = 0; k <= sync.n_sync; ++k) {
        out << k << "," << sync.l[k] << "," << sync.g[k] << ","
            << sync.lambda[k] << "," << sync.gamma[k] << "," << sync.refresh[k]
            << "," << static_cast<int>(labels.for_x[k]) << ","
            << static_cast<int>(labels.for_y[k]) << "\n";
    }
}

json avar_json(const covest::AvarReport& a) {
    return json{{"noise", a.avar_noise}, {"dis", a.avar_dis},
                {"cross", a.avar_cross}, {"end", a.avar_end},
                {"total", a.total},      {"i1", a.i1},
                {"i2", a.i2},            {"i3", a.i3},
                {"i4", a.i4}};
}

json report_json(const covest::EstimateReport& r) {
    json j;
    j["point"] = r.point;
    j["m_used"] = r.m_used;
    j["c_multi"] = r.c_multi;
    j["ci_low"] = r.ci_low;
    j["ci_high"] = r.ci_high;
    j["rate_scale"] = r.rate_scale;
    j["confidence_level"] = r.confidence_level;
    j["avar"] = avar_json(r.avar);
    j["sub"] = json{{"point", r.sub_point},
                    {"frequency", r.sub_frequency},
                    {"c_sub", r.c_sub},
                    {"ci_low", r.sub_ci_low},
                    {"ci_high", r.sub_ci_high},
                    {"rate_scale", r.sub_rate_scale},
                    {"avar", avar_json(r.avar_sub)}};
    j["n_sync"] = r.n_sync;
    j["bins"] = r.bins;
    j["m_bin"] = r.m_bin;
    j["noise"] = json{{"eta2_x", r.noise.eta2_x}, {"eta2_y", r.noise.eta2_y}};
    j["pilot"] = json{{"eta2_x", r.pilot.noise.eta2_x},
                      {"eta2_y", r.pilot.noise.eta2_y},
                      {"qv_x", r.pilot.qv_x},
                      {"qv_y", r.pilot.qv_y},
                      {"avar_dis", r.pilot.avar_dis},
                      {"a", r.pilot.a_coeff},
                      {"b", r.pilot.b_coeff},
                      {"d", r.pilot.d_coeff},
                      {"c_multi", r.pilot.c_multi},
                      {"c_sub", r.pilot.c_sub}};
    j["hist"] = json{{"i1", r.hist.i1},
                     {"i2", r.hist.i2},
                     {"i3", r.hist.i3},
                     {"i4", r.hist.i4},
                     {"i3_degenerate", r.hist.i3_degenerate},
                     {"i4_degenerate", r.hist.i4_degenerate},
                     {"merged_g", r.hist.merged_g},
                     {"merged_ix", r.hist.merged_ix},
                     {"merged_iy", r.hist.merged_iy}};
    j["mesh"] = json{{"delta_x", r.mesh.delta_x},
                     {"delta_y", r.mesh.delta_y},
                     {"n", r.mesh.n},
                     {"m", r.mesh.m},
                     {"count_ratio_warning", r.mesh.count_ratio_warning}};
    return j;
}

covest::ObservationPair load_pair(const std::string& x_path,
                                  const std::string& y_path,
                                  bool collapse_duplicates, bool normalize) {
    covest::CsvOptions opts;
    opts.collapse_duplicates = collapse_duplicates;
    covest::ObservationPair pair;
    pair.x = covest::read_ticks_csv(x_path, "x", opts);
    pair.y = covest::read_ticks_csv(y_path, "y", opts);
    pair.horizon = std::max(pair.x.times.back(), pair.y.times.back());
    if (normalize) covest::normalize_times(pair);
    return pair;
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw std::invalid_argument("cannot open '" + out_path + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + out_path + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quadratic covariation from noisy non-synchronous ticks"};
    app.require_subcommand(1);

    // estimate
    auto* est = app.add_subcommand(
        "estimate", "estimate the covariation of two tick series");
    std::string est_x, est_y, est_out, est_dump;
    int est_pilot = 30;
    double est_level = 0.95;
    std::optional<int> est_m;
    std::optional<std::size_t> est_isub;
    bool est_no_normalize = false, est_collapse = false, est_nonzero = false;
    est->add_option("--x", est_x, "CSV of time,value ticks for the first series")
        ->required();
    est->add_option("--y", est_y, "CSV of time,value ticks for the second series")
        ->required();
    est->add_option("--pilot-L", est_pilot, "pilot sparse frequency");
    est->add_option("--level", est_level, "confidence level");
    est->add_option("--M", est_m, "override the number of scales");
    est->add_option("--i-sub", est_isub, "override the one-scale frequency");
    est->add_option("--out", est_out, "write the JSON report here (default stdout)");
    est->add_option("--dump-sync", est_dump, "also write the synchronized grid CSV here");
    est->add_flag("--no-normalize", est_no_normalize,
                  "keep raw times instead of mapping to [0, 1]");
    est->add_flag("--collapse-duplicates", est_collapse,
                  "keep the last row of equal-time ticks");
    est->add_flag("--nonzero-noise", est_nonzero,
                  "average noise over nonzero increments only");

    // simulate
    auto* sim = app.add_subcommand("simulate", "draw one synthetic tick pair");
    std::string sim_config, sim_out_x, sim_out_y;
    std::uint64_t sim_seed = 0;
    sim->add_option("--config", sim_config, "key=value model file")->required();
    sim->add_option("--out-x", sim_out_x, "CSV path for the first series")
        ->required();
    sim->add_option("--out-y", sim_out_y, "CSV path for the second series")
        ->required();
    sim->add_option("--seed", sim_seed, "RNG seed")->required();

    // mc
    auto* mc = app.add_subcommand("mc", "Monte Carlo study of the estimators");
    std::string mc_config, mc_out;
    std::size_t mc_reps = 0;
    std::uint64_t mc_seed = 0;
    unsigned mc_threads = 0;
    mc->add_option("--config", mc_config, "key=value model file")->required();
    mc->add_option("--reps", mc_reps, "number of replications")->required();
    mc->add_option("--seed", mc_seed, "RNG seed")->required();
    mc->add_option("--threads", mc_threads, "worker threads (0 = hardware)");
    mc->add_option("--out", mc_out, "summary CSV path")->required();

    // weights
    auto* wts = app.add_subcommand("weights", "print the scale weights");
    int wts_m = 0;
    wts->add_option("--M", wts_m, "number of scales")->required();

    // sync-dump
    auto* snc = app.add_subcommand("sync-dump",
                                   "print the synchronized sampling table");
    std::string snc_x, snc_y, snc_out;
    bool snc_no_normalize = false, snc_collapse = false;
    snc->add_option("--x", snc_x, "CSV of time,value ticks for the first series")
        ->required();
    snc->add_option("--y", snc_y, "CSV of time,value ticks for the second series")
        ->required();
    snc->add_option("--out", snc_out, "CSV output path (default stdout)");
    snc->add_flag("--no-normalize", snc_no_normalize,
                  "keep raw times instead of mapping to [0, 1]");
    snc->add_flag("--collapse-duplicates", snc_collapse,
                  "keep the last row of equal-time ticks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: cli: " << e.what() << std::endl;
        return 2;
    }

    std::string stage = "cli";
    try {
        if (app.got_subcommand(est)) {
            stage = "ingest";
            covest::ObservationPair pair =
                load_pair(est_x, est_y, est_collapse, !est_no_normalize);
            stage = "estimate";
            covest::TuningConfig cfg;
            cfg.pilot_frequency = est_pilot;
            cfg.confidence_level = est_level;
            cfg.m_override = est_m;
            cfg.sub_frequency_override = est_isub;
            cfg.nonzero_noise_only = est_nonzero;
            covest::EstimateReport report = covest::estimate_full(pair, cfg);
            stage = "output";
            emit(est_out, report_json(report).dump(2) + "\n");
            if (!est_dump.empty()) {
                covest::SyncResult sync = covest::synchronize(pair);
                covest::CaseLabels labels = covest::classify(sync, pair);
                std::ofstream dump(est_dump);
                if (!dump)
                    throw std::invalid_argument("cannot open '" + est_dump + "'");
                write_sync_csv(dump, sync, labels);
            }
        } else if (app.got_subcommand(sim)) {
            stage = "config";
            covest::SimConfig cfg = covest::parse_sim_config(sim_config);
            cfg.seed = sim_seed;
            stage = "simulate";
            covest::ObservationPair pair = covest::simulate_pair(cfg, 0);
            stage = "output";
            covest::write_ticks_csv(sim_out_x, pair.x);
            covest::write_ticks_csv(sim_out_y, pair.y);
        } else if (app.got_subcommand(mc)) {
            stage = "config";
            covest::SimConfig cfg = covest::parse_sim_config(mc_config);
            cfg.seed = mc_seed;
            stage = "mc";
            covest::McSummary summary =
                covest::run_monte_carlo(cfg, mc_reps, {}, mc_threads);
            stage = "output";
            covest::write_mc_summary_csv(mc_out, summary);
            std::cout << "reps=" << summary.reps
                      << " failures=" << summary.failures
                      << " mean_multi=" << summary.mean_multi
                      << " std_multi=" << summary.std_multi
                      << " coverage=" << summary.coverage << "\n";
        } else if (app.got_subcommand(wts)) {
            stage = "weights";
            covest::WeightVector w = covest::optimal_weights(wts_m);
            std::ostringstream os;
            os.precision(17);
            for (int i = 1; i <= w.m_scale; ++i)
                os << i << "," << w.alpha[static_cast<std::size_t>(i - 1)]
                   << "\n";
            std::cout << os.str();
        } else if (app.got_subcommand(snc)) {
            stage = "ingest";
            covest::ObservationPair pair =
                load_pair(snc_x, snc_y, snc_collapse, !snc_no_normalize);
            stage = "sync";
            covest::validate(pair);
            covest::SyncResult sync = covest::synchronize(pair);
            covest::CaseLabels labels = covest::classify(sync, pair);
            stage = "output";
            std::ostringstream os;
            write_sync_csv(os, sync, labels);
            emit(snc_out, os.str());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << stage << ": " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
