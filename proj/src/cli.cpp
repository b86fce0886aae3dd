#include "firming/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "firming/calibration.hpp"
#include "firming/lq.hpp"
#include "firming/serialize.hpp"

namespace firming {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

void check_keys(const json& j, const std::string& section,
                const std::set<std::string>& allowed) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!allowed.count(key))
            fail("config: unknown key '" + key + "' in section '" + section + "'");
    }
}

double get_num(const json& j, const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}

std::string fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ObjectiveKind kind_from_name(const std::string& name) {
    if (name == "quadratic") return ObjectiveKind::Quadratic;
    if (name == "l1") return ObjectiveKind::L1;
    if (name == "degradation") return ObjectiveKind::Degradation;
    if (name == "curtailment") return ObjectiveKind::Curtailment;
    if (name == "lq_penalized") return ObjectiveKind::LQPenalized;
    fail("config: unknown objective kind '" + name + "'");
}

}  // namespace

RunConfig RunConfig::load(const std::string& path) {
    return from_json(read_json_file(path));
}

RunConfig RunConfig::from_json(const json& j) {
    check_keys(j, "<root>", {"model", "battery", "objective", "design", "run"});
    RunConfig cfg;

    const json model = j.value("model", json::object());
    check_keys(model, "model",
               {"type", "alpha", "m", "sigma", "x_max", "x0", "model_file", "forecast"});
    const std::string type = model.value("type", std::string("jacobi"));
    if (type == "jacobi") {
        cfg.use_jacobi = true;
        cfg.jacobi_alpha = get_num(model, "alpha", 0.5);
        cfg.jacobi_m = get_num(model, "m", 5.0);
        cfg.jacobi_sigma = get_num(model, "sigma", 0.2);
        cfg.x_max = get_num(model, "x_max", 10.0);
        cfg.x0 = get_num(model, "x0", cfg.jacobi_m);
    } else if (type == "calibrated") {
        cfg.use_jacobi = false;
        if (!model.contains("model_file")) fail("config: calibrated model needs model_file");
        cfg.calibrated_file = model.at("model_file").get<std::string>();
        if (!std::filesystem::exists(cfg.calibrated_file))
            fail("config: model_file does not exist: " + cfg.calibrated_file);
        if (!model.contains("forecast")) fail("config: calibrated model needs forecast");
        cfg.forecast = model.at("forecast").get<std::vector<double>>();
        cfg.x_max = 1.0;
        cfg.x0 = get_num(model, "x0", cfg.forecast.empty() ? 0.5 : cfg.forecast.front());
    } else {
        fail("config: model.type must be jacobi or calibrated");
    }

    const json battery = j.value("battery", json::object());
    check_keys(battery, "battery",
               {"i_cap", "soc_min", "soc_max", "b_min", "b_max", "eta", "duration",
                "i_target", "terminal_penalty", "i0"});
    const double b_max = get_num(battery, "b_max", 1.0);
    const double b_min = get_num(battery, "b_min", -b_max);
    double i_cap = get_num(battery, "i_cap", 0.0);
    if (battery.contains("duration")) {
        const double duration = battery.at("duration").get<double>();
        const double implied = duration * b_max;
        if (i_cap == 0.0) {
            i_cap = implied;
        } else if (std::abs(i_cap - implied) > 1e-9 * std::max(1.0, i_cap)) {
            fail("config: battery duration and i_cap are inconsistent");
        }
    }
    if (i_cap <= 0.0) fail("config: battery needs i_cap or duration");
    const double soc_min = get_num(battery, "soc_min", 0.0);
    const double soc_max = get_num(battery, "soc_max", 1.0);
    const double eta = get_num(battery, "eta", 1.0);
    const double i_target = get_num(battery, "i_target", 0.5 * i_cap);
    const double penalty = get_num(battery, "terminal_penalty", 1.0);
    cfg.battery =
        BatterySpec::from_capacity(i_cap, soc_min, soc_max, b_min, b_max, eta, i_target,
                                   penalty);
    cfg.i_cap = i_cap;
    cfg.soc_min = soc_min;
    cfg.soc_max = soc_max;
    cfg.i0 = get_num(battery, "i0", i_target);

    const json objective = j.value("objective", json::object());
    check_keys(objective, "objective",
               {"kind", "lambda_bl", "lambda_cm", "threshold_factor", "c1", "c2", "target"});
    cfg.objective_kind = kind_from_name(objective.value("kind", std::string("quadratic")));
    cfg.lambda_bl = get_num(objective, "lambda_bl", 0.0);
    cfg.lambda_cm = get_num(objective, "lambda_cm", 0.0);
    cfg.threshold_factor = get_num(objective, "threshold_factor", 1.05);
    cfg.lq_c1 = get_num(objective, "c1", 0.08);
    cfg.lq_c2 = get_num(objective, "c2", 0.06);
    if (objective.contains("target"))
        cfg.target = objective.at("target").get<std::vector<double>>();

    const json design = j.value("design", json::object());
    check_keys(design, "design",
               {"n_loc", "n_rep", "n_fence", "n_b", "domain_width_sd", "pilot_paths",
                "scale"});
    const std::string scale = design.value("scale", std::string("desk"));
    if (scale == "full") {
        cfg.design.n_loc = 640;
        cfg.design.n_rep = 50;
    } else if (scale != "desk") {
        fail("config: design.scale must be desk or full");
    }
    cfg.design.n_loc = static_cast<int>(get_num(design, "n_loc", cfg.design.n_loc));
    cfg.design.n_rep = static_cast<int>(get_num(design, "n_rep", cfg.design.n_rep));
    cfg.design.n_fence = static_cast<int>(get_num(design, "n_fence", cfg.design.n_fence));
    cfg.design.n_b = static_cast<int>(get_num(design, "n_b", 0.0));
    cfg.design.domain_width_sd = get_num(design, "domain_width_sd", 3.0);
    cfg.design.pilot_paths = static_cast<int>(get_num(design, "pilot_paths", 10000.0));

    const json run = j.value("run", json::object());
    check_keys(run, "run", {"K", "dt", "n_paths", "seed", "out_dir"});
    cfg.K = static_cast<int>(get_num(run, "K", cfg.use_jacobi ? 24.0 : 24.0));
    cfg.dt = get_num(run, "dt", cfg.use_jacobi ? 1.0 : 1.0);
    if (!cfg.use_jacobi && cfg.dt != 1.0)
        fail("config: the calibrated model is hourly; run.dt must be 1");
    cfg.n_paths = static_cast<int>(get_num(run, "n_paths", 2000.0));
    cfg.seed = run.contains("seed") ? run.at("seed").get<std::uint64_t>() : 1;
    cfg.out_dir = run.value("out_dir", std::string("out"));
    cfg.design.seed = cfg.seed;

    if (!cfg.use_jacobi && static_cast<int>(cfg.forecast.size()) < cfg.K)
        fail("config: forecast shorter than the horizon K");
    if (!cfg.target.empty() && static_cast<int>(cfg.target.size()) < cfg.K)
        fail("config: target shorter than the horizon K");
    if (cfg.K < 2) fail("config: run.K must be >= 2");
    if (cfg.n_paths < 1) fail("config: run.n_paths must be >= 1");
    cfg.design.validate();

    // canonical form for hashing: the fields that fully determine a run
    json canon;
    canon["model"] = cfg.use_jacobi
                         ? json{{"type", "jacobi"},
                                {"alpha", cfg.jacobi_alpha},
                                {"m", cfg.jacobi_m},
                                {"sigma", cfg.jacobi_sigma},
                                {"x_max", cfg.x_max},
                                {"x0", cfg.x0}}
                         : json{{"type", "calibrated"},
                                {"model_file", cfg.calibrated_file},
                                {"forecast", cfg.forecast},
                                {"x0", cfg.x0}};
    canon["battery"] = to_json(cfg.battery);
    canon["battery"]["i0"] = cfg.i0;
    canon["objective"] = {{"kind", static_cast<int>(cfg.objective_kind)},
                          {"lambda_bl", cfg.lambda_bl},
                          {"lambda_cm", cfg.lambda_cm},
                          {"threshold_factor", cfg.threshold_factor},
                          {"c1", cfg.lq_c1},
                          {"c2", cfg.lq_c2},
                          {"target", cfg.target_or_default()}};
    canon["design"] = {{"n_loc", cfg.design.n_loc},
                       {"n_rep", cfg.design.n_rep},
                       {"n_fence", cfg.design.n_fence},
                       {"n_b", cfg.design.n_b},
                       {"domain_width_sd", cfg.design.domain_width_sd},
                       {"pilot_paths", cfg.design.pilot_paths}};
    canon["run"] = {{"K", cfg.K},
                    {"dt", cfg.dt},
                    {"n_paths", cfg.n_paths},
                    {"seed", cfg.seed}};
    cfg.canonical = std::move(canon);
    return cfg;
}

std::string RunConfig::config_hash() const { return fnv1a(canonical.dump()); }

WindModel RunConfig::wind_model() const {
    if (use_jacobi)
        return WindModel::jacobi(
            JacobiParams::constant(jacobi_alpha, jacobi_m, jacobi_sigma, x_max, dt, K));
    auto model = calibrated_from_json(read_json_file(calibrated_file));
    return WindModel::calibrated(std::move(model), forecast);
}

std::vector<double> RunConfig::target_or_default() const {
    if (!target.empty()) return target;
    if (!use_jacobi) return forecast;
    return std::vector<double>(static_cast<std::size_t>(K), jacobi_m);
}

Objective RunConfig::objective() const {
    auto tgt = target_or_default();
    switch (objective_kind) {
        case ObjectiveKind::Quadratic:
            return Objective::quadratic(std::move(tgt));
        case ObjectiveKind::L1:
            return Objective::l1(std::move(tgt));
        case ObjectiveKind::Degradation:
            return Objective::degradation(std::move(tgt), lambda_bl, battery.i_max);
        case ObjectiveKind::Curtailment:
            return Objective::curtailment(std::move(tgt), lambda_cm, threshold_factor);
        case ObjectiveKind::LQPenalized:
            return Objective::lq_penalized(std::move(tgt), lq_c1, lq_c2, battery.i_mid());
    }
    fail("config: unreachable objective kind");
}

namespace {

json artifact_header(const RunConfig& cfg) {
    return json{{"config_hash", cfg.config_hash()}, {"seed", cfg.seed}};
}

void write_bands_csv(const std::string& path, const BandReport& bands,
                     const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) fail("cannot open for writing: " + path);
    out << "# " << header_comment << "\n";
    out << "k,x_lo,x_hi,o_lo,o_hi\n";
    out.precision(17);
    for (std::size_t k = 0; k < bands.x_lo.size(); ++k)
        out << k << ',' << bands.x_lo[k] << ',' << bands.x_hi[k] << ',' << bands.o_lo[k]
            << ',' << bands.o_hi[k] << '\n';
}

void write_trajectories_csv(const std::string& path, const std::vector<Trajectory>& trajs,
                            int max_paths, const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) fail("cannot open for writing: " + path);
    out << "# " << header_comment << "\n";
    out << "path,k,x,b,i,o,step_cost\n";
    out.precision(17);
    const int n = std::min<int>(max_paths, static_cast<int>(trajs.size()));
    for (int p = 0; p < n; ++p) {
        const auto& t = trajs[static_cast<std::size_t>(p)];
        for (std::size_t k = 0; k < t.x.size(); ++k)
            out << p << ',' << k << ',' << t.x[k] << ',' << t.b[k] << ',' << t.i[k] << ','
                << t.o[k] << ',' << t.costs[k] << '\n';
    }
}

ControlMap policy_map(const Policy& policy) {
    return [&policy](int k, double x, double i) { return policy.raw_control_at(k, x, i); };
}

}  // namespace

std::string run_calibrate(const std::string& data_csv, const std::string& out_path,
                          int bins) {
    const ProfileSeries series = load_profiles(data_csv);
    const CalibrationResult result = calibrate(series, bins);

    std::ifstream raw(data_csv, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(raw)),
                        std::istreambuf_iterator<char>());
    json j = to_json(result.model);
    j["source"] = {{"path", data_csv},
                   {"data_hash", fnv1a(content)},
                   {"records", series.size()},
                   {"bins", bins}};
    j["degenerate_bins"] = result.degenerate_bins;
    j["inestimable_bins"] = result.inestimable_bins;
    write_json_file(out_path, j);
    return out_path;
}

std::string run_solve(const RunConfig& cfg, const std::string& out_path) {
    const WindModel model = cfg.wind_model();
    const Policy policy =
        backward_solve(model, cfg.x0, cfg.battery, cfg.objective(), cfg.design, cfg.K);
    json j = to_json(policy);
    j["artifact"] = artifact_header(cfg);
    write_json_file(out_path, j);
    return out_path;
}

MetricsReport run_rollout(const RunConfig& cfg, const std::string& policy_path,
                          int n_paths, const std::optional<std::string>& replay_csv,
                          const std::string& out_dir) {
    const json pj = read_json_file(policy_path);
    const Policy policy = policy_from_json(pj);
    std::filesystem::create_directories(out_dir);
    const std::string note = "config_hash=" + cfg.config_hash() +
                             " seed=" + std::to_string(cfg.seed);
    const auto thresholds = [&] {
        std::vector<double> t;
        for (double m : cfg.target_or_default()) t.push_back(cfg.threshold_factor * m);
        return t;
    }();

    MetricsReport report;
    if (replay_csv) {
        // out-of-sample evaluation along recorded daily profiles
        const ProfileSeries series = load_profiles(*replay_csv);
        std::map<int, std::vector<ProfileRecord>> by_day;
        for (const auto& r : series.records) by_day[r.day].push_back(r);
        std::vector<Trajectory> trajs;
        std::vector<double> drs;
        json days = json::array();
        for (auto& [day, recs] : by_day) {
            std::sort(recs.begin(), recs.end(),
                      [](const ProfileRecord& a, const ProfileRecord& b) {
                          return a.hour < b.hour;
                      });
            std::vector<double> actual, fc;
            for (const auto& r : recs) {
                actual.push_back(r.actual);
                fc.push_back(r.forecast);
            }
            const int K = std::min<int>(policy.K, static_cast<int>(actual.size()));
            actual.resize(static_cast<std::size_t>(K));
            fc.resize(static_cast<std::size_t>(K));
            Objective day_obj = policy.objective;
            day_obj.target = fc;
            if (!day_obj.threshold.empty()) {
                day_obj.threshold.clear();
                for (double m : fc) day_obj.threshold.push_back(cfg.threshold_factor * m);
            }
            const Trajectory t =
                replay(policy_map(policy), actual, policy.battery, day_obj, cfg.i0,
                       policy.dt);
            const auto dr = deviation_reduction(t.x, t.o, fc);
            if (dr) drs.push_back(*dr);
            days.push_back({{"day", day},
                            {"dr_pct", dr ? json(*dr) : json()},
                            {"cost", t.total}});
            trajs.push_back(t);
        }
        report.n_paths = static_cast<int>(trajs.size());
        if (trajs.size() >= 2) report.value = value_estimate(trajs);
        report.ebl = expected_battery_life(trajs, policy.battery.i_max);
        if (!drs.empty()) {
            double mean = 0.0;
            for (double d : drs) mean += d;
            report.dr = mean / static_cast<double>(drs.size());
        }
        json out = to_json(report);
        out["artifact"] = artifact_header(cfg);
        out["replay_days"] = std::move(days);
        write_json_file(out_dir + "/metrics.json", out);
        write_trajectories_csv(out_dir + "/trajectories.csv", trajs, 200, note);
        return report;
    }

    const WindModel model = cfg.wind_model();
    const auto trajs = rollout(policy_map(policy), model, policy.battery, policy.objective,
                               cfg.x0, cfg.i0, n_paths, policy.K, cfg.seed);
    report = compute_metrics(trajs, cfg.target_or_default(), policy.battery.i_max,
                             thresholds);
    json out = to_json(report);
    out["artifact"] = artifact_header(cfg);
    write_json_file(out_dir + "/metrics.json", out);
    write_trajectories_csv(out_dir + "/trajectories.csv", trajs, 200, note);
    if (!report.bands.x_lo.empty())
        write_bands_csv(out_dir + "/bands.csv", report.bands, note);
    return report;
}

std::string run_lq(const RunConfig& cfg, bool sweep_c, bool fine_grid,
                   const std::string& out_dir) {
    if (!cfg.use_jacobi)
        fail("lq-baseline: requires the jacobi model (constant mean level)");
    std::filesystem::create_directories(out_dir);
    const std::string note = "config_hash=" + cfg.config_hash() +
                             " seed=" + std::to_string(cfg.seed);
    const auto wind = JacobiParams::constant(cfg.jacobi_alpha, cfg.jacobi_m,
                                             cfg.jacobi_sigma, cfg.x_max, cfg.dt, cfg.K);
    const WindModel model = WindModel::jacobi(wind);
    const auto target = cfg.target_or_default();
    const auto quad = Objective::quadratic(target);

    // evaluation always under the quadratic firming criterion, with the soft
    // penalties only inside the control law
    auto evaluate_pair = [&](double c1, double c2, int n_paths) {
        const auto params = LQParams::from(wind, cfg.battery, c1, c2, target);
        const auto sol = solve_riccati(params);
        const auto pol = lq_policy(params, sol, cfg.battery);
        const auto trajs =
            rollout([&pol](int k, double x, double i) { return pol.control(k, x, i); },
                    model, cfg.battery, quad, cfg.x0, cfg.i0, n_paths, cfg.K, cfg.seed);
        return value_estimate(trajs);
    };

    const auto params = LQParams::from(wind, cfg.battery, cfg.lq_c1, cfg.lq_c2, target);
    const auto sol = solve_riccati(params);
    {
        std::ofstream out(out_dir + "/riccati.csv");
        if (!out) fail("cannot open for writing: " + out_dir + "/riccati.csv");
        out << "# " << note << "\n";
        out << "t,p1,p2,p3,p4,p5,p6\n";
        out.precision(17);
        const int stride = std::max(1, sol.sub_per_step / 8);
        for (int jn = 0; jn < sol.nodes(); jn += stride) {
            out << sol.node_time(jn);
            for (int i = 0; i < 6; ++i)
                out << ',' << sol.p[static_cast<std::size_t>(i)][static_cast<std::size_t>(jn)];
            out << '\n';
        }
    }

    const Estimate value = evaluate_pair(cfg.lq_c1, cfg.lq_c2, cfg.n_paths);
    json j;
    j["artifact"] = artifact_header(cfg);
    j["c1"] = cfg.lq_c1;
    j["c2"] = cfg.lq_c2;
    j["value"] = {{"mean", value.mean}, {"se", value.se}};
    j["riccati_residual"] = riccati_residual(sol, params);

    if (sweep_c) {
        const double step = fine_grid ? 0.01 : 0.5;
        std::ofstream out(out_dir + "/lq_sweep.csv");
        if (!out) fail("cannot open for writing: " + out_dir + "/lq_sweep.csv");
        out << "# " << note << "\n";
        out << "c1,c2,cost\n";
        out.precision(12);
        double best_c1 = 0.0, best_c2 = 0.0, best = 1e300;
        const int sweep_paths = std::min(cfg.n_paths, 2000);
        for (double c1 = 0.0; c1 <= 10.0 + 1e-12; c1 += step)
            for (double c2 = 0.0; c2 <= 10.0 + 1e-12; c2 += step) {
                const double cost = evaluate_pair(c1, c2, sweep_paths).mean;
                out << c1 << ',' << c2 << ',' << cost << '\n';
                if (cost < best) {
                    best = cost;
                    best_c1 = c1;
                    best_c2 = c2;
                }
            }
        j["sweep"] = {{"step", step},
                      {"best_c1", best_c1},
                      {"best_c2", best_c2},
                      {"best_cost", best}};
    }
    write_json_file(out_dir + "/lq_metrics.json", j);
    return out_dir + "/lq_metrics.json";
}

std::vector<SweepRow> run_sweep(const RunConfig& cfg, const std::string& param,
                                const std::vector<double>& grid,
                                const std::string& out_dir) {
    if (grid.empty()) fail("sweep: empty grid");
    std::filesystem::create_directories(out_dir);
    std::vector<SweepRow> rows;
    for (double value : grid) {
        RunConfig run = cfg;
        if (param == "duration") {
            // new capacity at the same power rating; SoC window, target and
            // initial level keep their capacity fractions
            const double new_cap = value * cfg.battery.b_max;
            run.i_cap = new_cap;
            run.battery = BatterySpec::from_capacity(
                new_cap, cfg.soc_min, cfg.soc_max, cfg.battery.b_min, cfg.battery.b_max,
                cfg.battery.eta, cfg.battery.i_target / cfg.i_cap * new_cap,
                cfg.battery.terminal_penalty);
            run.i0 = cfg.i0 / cfg.i_cap * new_cap;
        } else if (param == "lambda_bl") {
            run.objective_kind = ObjectiveKind::Degradation;
            run.lambda_bl = value;
        } else if (param == "lambda_cm") {
            run.objective_kind = ObjectiveKind::Curtailment;
            run.lambda_cm = value;
        } else {
            fail("sweep: param must be duration, lambda_bl or lambda_cm");
        }
        const WindModel model = run.wind_model();
        const Policy policy =
            backward_solve(model, run.x0, run.battery, run.objective(), run.design, run.K);
        const auto trajs = rollout(policy_map(policy), model, run.battery, run.objective(),
                                   run.x0, run.i0, run.n_paths, run.K, run.seed);
        std::vector<double> thresholds;
        for (double m : run.target_or_default())
            thresholds.push_back(run.threshold_factor * m);
        rows.push_back(
            {value, compute_metrics(trajs, run.target_or_default(), run.battery.i_max,
                                    thresholds)});
    }

    json j;
    j["artifact"] = artifact_header(cfg);
    j["param"] = param;
    json table = json::array();
    for (const auto& row : rows) {
        json r = to_json(row.metrics);
        r["grid_value"] = row.grid_value;
        r.erase("bands");
        table.push_back(std::move(r));
    }
    j["rows"] = std::move(table);
    write_json_file(out_dir + "/sweep.json", j);

    std::ofstream out(out_dir + "/sweep.csv");
    out << "# param=" << param << " config_hash=" << cfg.config_hash() << " seed=" << cfg.seed
        << "\n";
    out << "value,cost,edr_pct,ebl_years,ecv\n";
    out.precision(12);
    for (const auto& row : rows)
        out << row.grid_value << ',' << row.metrics.value.mean << ',' << row.metrics.edr.mean
            << ',' << row.metrics.ebl.mean << ',' << row.metrics.ecv.mean << '\n';
    return rows;
}

}  // namespace firming
