#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "firming/cli.hpp"
#include "firming/serialize.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Wind-battery firming dispatch: calibration, GP policy training, "
                 "closed-form baseline and Monte Carlo evaluation"};
    app.require_subcommand(1);

    // calibrate
    std::string cal_data, cal_out = "model.json";
    int cal_bins = 10;
    auto* calibrate = app.add_subcommand("calibrate", "Fit the binned hourly model from "
                                                      "actual/forecast CSV data");
    calibrate->add_option("--data", cal_data, "CSV with date,hour,actual,forecast")
        ->required()
        ->check(CLI::ExistingFile);
    calibrate->add_option("--out", cal_out, "output model file");
    calibrate->add_option("--bins", cal_bins, "forecast bins")->default_val(10);

    // solve
    std::string solve_cfg, solve_out;
    auto* solve = app.add_subcommand("solve", "Train the dispatch policy by backward "
                                              "dynamic programming");
    solve->add_option("--config", solve_cfg, "run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    solve->add_option("--out", solve_out, "output policy file (default <out_dir>/policy.json)");

    // rollout
    std::string roll_cfg, roll_policy, roll_out;
    std::string roll_replay;
    int roll_paths = 0;
    auto* roll = app.add_subcommand("rollout", "Monte Carlo evaluation of a trained policy");
    roll->add_option("--config", roll_cfg, "run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    roll->add_option("--policy", roll_policy, "trained policy file")
        ->required()
        ->check(CLI::ExistingFile);
    roll->add_option("--paths", roll_paths, "Monte Carlo paths (default run.n_paths)");
    roll->add_option("--replay", roll_replay, "replay recorded daily profiles (CSV)")
        ->check(CLI::ExistingFile);
    roll->add_option("--out-dir", roll_out, "output directory (default <out_dir>)");

    // lq-baseline
    std::string lq_cfg, lq_out;
    bool lq_sweep = false, lq_fine = false;
    auto* lq = app.add_subcommand("lq-baseline", "Closed-form soft-constrained baseline");
    lq->add_option("--config", lq_cfg, "run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    lq->add_flag("--sweep-c", lq_sweep, "grid-search the (c1, c2) penalty pair");
    lq->add_flag("--fine", lq_fine, "0.01 sweep grid instead of 0.5");
    lq->add_option("--out-dir", lq_out, "output directory (default <out_dir>)");

    // sweep
    std::string sw_cfg, sw_param, sw_grid, sw_out;
    auto* sweep = app.add_subcommand("sweep", "Re-solve and evaluate along a parameter grid");
    sweep->add_option("--config", sw_cfg, "run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    sweep->add_option("--param", sw_param, "duration | lambda_bl | lambda_cm")->required();
    sweep->add_option("--grid", sw_grid, "comma-separated grid values")->required();
    sweep->add_option("--out-dir", sw_out, "output directory (default <out_dir>)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (calibrate->parsed()) {
            const auto path = firming::run_calibrate(cal_data, cal_out, cal_bins);
            std::printf("calibrated model written to %s\n", path.c_str());
        } else if (solve->parsed()) {
            const auto cfg = firming::RunConfig::load(solve_cfg);
            std::filesystem::create_directories(cfg.out_dir);
            const std::string out =
                solve_out.empty() ? cfg.out_dir + "/policy.json" : solve_out;
            const auto path = firming::run_solve(cfg, out);
            std::printf("policy written to %s\n", path.c_str());
        } else if (roll->parsed()) {
            const auto cfg = firming::RunConfig::load(roll_cfg);
            const int n = roll_paths > 0 ? roll_paths : cfg.n_paths;
            const std::string out = roll_out.empty() ? cfg.out_dir : roll_out;
            const std::optional<std::string> replay =
                roll_replay.empty() ? std::nullopt : std::optional(roll_replay);
            const auto report = firming::run_rollout(cfg, roll_policy, n, replay, out);
            std::printf("paths:  %d\n", report.n_paths);
            std::printf("value:  %.6f (se %.6f)\n", report.value.mean, report.value.se);
            if (report.dr) std::printf("dr:     %.2f%%\n", *report.dr);
            if (!replay) {
                std::printf("edr:    %.2f%%\n", report.edr.mean);
                std::printf("ecv:    %.6f\n", report.ecv.mean);
            }
            std::printf("ebl:    %.2f years\n", report.ebl.mean);
            std::printf("metrics written to %s/metrics.json\n", out.c_str());
        } else if (lq->parsed()) {
            const auto cfg = firming::RunConfig::load(lq_cfg);
            const std::string out = lq_out.empty() ? cfg.out_dir : lq_out;
            const auto path = firming::run_lq(cfg, lq_sweep, lq_fine, out);
            std::printf("baseline metrics written to %s\n", path.c_str());
        } else if (sweep->parsed()) {
            const auto cfg = firming::RunConfig::load(sw_cfg);
            std::vector<double> grid;
            std::stringstream ss(sw_grid);
            std::string item;
            while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
            const std::string out = sw_out.empty() ? cfg.out_dir : sw_out;
            const auto rows = firming::run_sweep(cfg, sw_param, grid, out);
            std::printf("%-10s %-14s %-10s %-10s %-12s\n", "value", "cost", "edr%", "ebl_yr",
                        "ecv");
            for (const auto& r : rows)
                std::printf("%-10.4g %-14.6f %-10.3f %-10.3f %-12.6f\n", r.grid_value,
                            r.metrics.value.mean, r.metrics.edr.mean, r.metrics.ebl.mean,
                            r.metrics.ecv.mean);
            std::printf("sweep written to %s/sweep.json\n", out.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
