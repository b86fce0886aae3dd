#include "firming/serialize.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace firming {

using nlohmann::json;

namespace {

constexpr int kGpVersion = 1;
constexpr int kPolicyVersion = 1;
constexpr int kCalibrationVersion = 1;

json vec_to_json(const std::vector<double>& v) { return json(v); }

std::vector<double> vec_from_json(const json& j) { return j.get<std::vector<double>>(); }

json eigen_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd eigen_from_json(const json& j, Eigen::Index cols) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(i, c) = j.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(c))
                          .get<double>();
    return m;
}

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

}  // namespace

json to_json(const gp::GPModel& model) {
    json j;
    j["version"] = kGpVersion;
    j["family"] = model.kernel.family == gp::KernelFamily::Matern52 ? "matern52" : "matern32";
    j["sigma2"] = model.kernel.sigma2;
    j["ell"] = {model.kernel.ell[0], model.kernel.ell[1]};
    j["noise2"] = model.noise2;
    j["jitter"] = model.jitter;
    j["train_rmse"] = model.train_rmse;
    j["x_shift"] = {model.x_shift[0], model.x_shift[1]};
    j["x_scale"] = {model.x_scale[0], model.x_scale[1]};
    j["y_shift"] = model.y_shift;
    j["y_scale"] = model.y_scale;
    j["train_x"] = eigen_to_json(model.train_x);
    json alpha = json::array();
    for (Eigen::Index i = 0; i < model.alpha.size(); ++i) alpha.push_back(model.alpha[i]);
    j["alpha"] = std::move(alpha);
    return j;
}

gp::GPModel gp_from_json(const json& j) {
    if (j.at("version").get<int>() != kGpVersion) fail("gp model: unsupported version");
    gp::GPModel m;
    const std::string fam = j.at("family").get<std::string>();
    if (fam == "matern52") m.kernel.family = gp::KernelFamily::Matern52;
    else if (fam == "matern32") m.kernel.family = gp::KernelFamily::Matern32;
    else fail("gp model: unknown kernel family " + fam);
    m.kernel.sigma2 = j.at("sigma2").get<double>();
    m.kernel.ell = {j.at("ell").at(0).get<double>(), j.at("ell").at(1).get<double>()};
    m.noise2 = j.at("noise2").get<double>();
    m.jitter = j.at("jitter").get<double>();
    m.train_rmse = j.at("train_rmse").get<double>();
    m.x_shift = {j.at("x_shift").at(0).get<double>(), j.at("x_shift").at(1).get<double>()};
    m.x_scale = {j.at("x_scale").at(0).get<double>(), j.at("x_scale").at(1).get<double>()};
    m.y_shift = j.at("y_shift").get<double>();
    m.y_scale = j.at("y_scale").get<double>();
    m.train_x = eigen_from_json(j.at("train_x"), 2);
    const auto& alpha = j.at("alpha");
    m.alpha.resize(static_cast<Eigen::Index>(alpha.size()));
    for (Eigen::Index i = 0; i < m.alpha.size(); ++i)
        m.alpha[i] = alpha.at(static_cast<std::size_t>(i)).get<double>();
    if (m.train_x.rows() != m.alpha.size()) fail("gp model: alpha/train size mismatch");
    return m;
}

json to_json(const CalibratedModel& model) {
    json j;
    j["version"] = kCalibrationVersion;
    j["bin_edges"] = vec_to_json(model.bin_edges);
    j["alpha_r"] = vec_to_json(model.alpha_r);
    j["sigma_r"] = vec_to_json(model.sigma_r);
    j["residual_banks"] = model.residual_banks;
    if (model.p_zero) j["p_zero"] = *model.p_zero;
    if (model.p_one) j["p_one"] = *model.p_one;
    return j;
}

CalibratedModel calibrated_from_json(const json& j) {
    if (j.at("version").get<int>() != kCalibrationVersion)
        fail("calibrated model: unsupported version");
    CalibratedModel m;
    m.bin_edges = vec_from_json(j.at("bin_edges"));
    m.alpha_r = vec_from_json(j.at("alpha_r"));
    m.sigma_r = vec_from_json(j.at("sigma_r"));
    m.residual_banks = j.at("residual_banks").get<std::vector<std::vector<double>>>();
    if (j.contains("p_zero")) m.p_zero = j.at("p_zero").get<double>();
    if (j.contains("p_one")) m.p_one = j.at("p_one").get<double>();
    m.validate();
    return m;
}

json to_json(const BatterySpec& battery) {
    return json{{"i_min", battery.i_min},
                {"i_max", battery.i_max},
                {"b_min", battery.b_min},
                {"b_max", battery.b_max},
                {"eta", battery.eta},
                {"i_target", battery.i_target},
                {"terminal_penalty", battery.terminal_penalty}};
}

BatterySpec battery_from_json(const json& j) {
    BatterySpec b;
    b.i_min = j.at("i_min").get<double>();
    b.i_max = j.at("i_max").get<double>();
    b.b_min = j.at("b_min").get<double>();
    b.b_max = j.at("b_max").get<double>();
    b.eta = j.at("eta").get<double>();
    b.i_target = j.at("i_target").get<double>();
    b.terminal_penalty = j.at("terminal_penalty").get<double>();
    b.validate();
    return b;
}

namespace {

const std::map<ObjectiveKind, std::string> kKindNames = {
    {ObjectiveKind::Quadratic, "quadratic"},
    {ObjectiveKind::L1, "l1"},
    {ObjectiveKind::Degradation, "degradation"},
    {ObjectiveKind::Curtailment, "curtailment"},
    {ObjectiveKind::LQPenalized, "lq_penalized"}};

}  // namespace

json to_json(const Objective& objective) {
    json j;
    j["kind"] = kKindNames.at(objective.kind);
    j["target"] = vec_to_json(objective.target);
    if (!objective.threshold.empty()) j["threshold"] = vec_to_json(objective.threshold);
    j["lambda_bl"] = objective.lambda_bl;
    j["lambda_cm"] = objective.lambda_cm;
    j["c1"] = objective.c1;
    j["c2"] = objective.c2;
    j["i_max"] = objective.i_max;
    j["i_mid"] = objective.i_mid;
    return j;
}

Objective objective_from_json(const json& j) {
    Objective o;
    const std::string kind = j.at("kind").get<std::string>();
    bool found = false;
    for (const auto& [k, name] : kKindNames)
        if (name == kind) {
            o.kind = k;
            found = true;
        }
    if (!found) fail("objective: unknown kind " + kind);
    o.target = vec_from_json(j.at("target"));
    if (j.contains("threshold")) o.threshold = vec_from_json(j.at("threshold"));
    o.lambda_bl = j.at("lambda_bl").get<double>();
    o.lambda_cm = j.at("lambda_cm").get<double>();
    o.c1 = j.at("c1").get<double>();
    o.c2 = j.at("c2").get<double>();
    o.i_max = j.at("i_max").get<double>();
    o.i_mid = j.at("i_mid").get<double>();
    o.validate();
    return o;
}

json to_json(const Policy& policy) {
    json j;
    j["version"] = kPolicyVersion;
    j["K"] = policy.K;
    j["dt"] = policy.dt;
    j["seed"] = policy.seed;
    j["battery"] = to_json(policy.battery);
    j["objective"] = to_json(policy.objective);
    json domains = json::array();
    for (const auto& d : policy.domains) domains.push_back({d.lo, d.hi});
    j["domains"] = std::move(domains);
    json controls = json::array();
    for (const auto& m : policy.control) controls.push_back(to_json(m));
    j["control"] = std::move(controls);
    json qs = json::array();
    for (const auto& m : policy.q_value) qs.push_back(to_json(m));
    j["q_value"] = std::move(qs);
    // wall-clock timings stay out: artifacts must be seed-deterministic
    json diag = json::array();
    for (const auto& d : policy.diagnostics)
        diag.push_back({{"control_lml", d.control_lml},
                        {"control_rmse", d.control_rmse},
                        {"q_lml", d.q_lml},
                        {"q_rmse", d.q_rmse},
                        {"mle_iterations", d.mle_iterations}});
    j["diagnostics"] = std::move(diag);
    return j;
}

Policy policy_from_json(const json& j) {
    if (j.at("version").get<int>() != kPolicyVersion) fail("policy: unsupported version");
    Policy p;
    p.K = j.at("K").get<int>();
    p.dt = j.at("dt").get<double>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.battery = battery_from_json(j.at("battery"));
    p.objective = objective_from_json(j.at("objective"));
    for (const auto& d : j.at("domains"))
        p.domains.push_back({d.at(0).get<double>(), d.at(1).get<double>()});
    for (const auto& m : j.at("control")) p.control.push_back(gp_from_json(m));
    for (const auto& m : j.at("q_value")) p.q_value.push_back(gp_from_json(m));
    if (j.contains("diagnostics"))
        for (const auto& d : j.at("diagnostics"))
            p.diagnostics.push_back({d.at("control_lml").get<double>(),
                                     d.at("control_rmse").get<double>(),
                                     d.at("q_lml").get<double>(),
                                     d.at("q_rmse").get<double>(),
                                     d.at("mle_iterations").get<int>()});
    if (static_cast<int>(p.control.size()) != p.K ||
        static_cast<int>(p.q_value.size()) != p.K - 1)
        fail("policy: emulator count does not match the horizon");
    return p;
}

json to_json(const MetricsReport& report) {
    json j;
    j["n_paths"] = report.n_paths;
    j["value"] = {{"mean", report.value.mean}, {"se", report.value.se}};
    j["edr_pct"] = {{"mean", report.edr.mean}, {"se", report.edr.se}};
    j["ebl_years"] = {{"mean", report.ebl.mean}, {"se", report.ebl.se}};
    j["ecv"] = {{"mean", report.ecv.mean}, {"se", report.ecv.se}};
    if (report.dr) j["dr_pct"] = *report.dr;
    if (report.ecr) j["ecr"] = *report.ecr;
    if (!report.bands.x_lo.empty()) {
        j["bands"] = {{"x_lo", report.bands.x_lo},
                      {"x_hi", report.bands.x_hi},
                      {"o_lo", report.bands.o_lo},
                      {"o_hi", report.bands.o_hi}};
    }
    return j;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) fail("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open: " + path);
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
}

ProfileSeries load_profiles(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) fail(path + ": empty file");

    ProfileSeries series;
    std::map<std::string, int> day_ids;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string date, hour_s, actual_s, forecast_s;
        if (!std::getline(ss, date, ',') || !std::getline(ss, hour_s, ',') ||
            !std::getline(ss, actual_s, ',') || !std::getline(ss, forecast_s, ','))
            fail(path + ": malformed row " + std::to_string(row));
        ProfileRecord rec;
        try {
            rec.hour = std::stoi(hour_s);
            rec.actual = std::stod(actual_s);
            rec.forecast = std::stod(forecast_s);
        } catch (const std::exception&) {
            fail(path + ": unparsable numbers on row " + std::to_string(row));
        }
        if (rec.hour < 0 || rec.hour > 23)
            fail(path + ": hour outside 0..23 on row " + std::to_string(row));
        if (rec.actual < 0.0 || rec.actual > 1.0)
            fail(path + ": actual outside [0,1] on row " + std::to_string(row));
        if (rec.forecast < 0.0 || rec.forecast > 1.0)
            fail(path + ": forecast outside [0,1] on row " + std::to_string(row));
        auto [it, inserted] = day_ids.try_emplace(date, static_cast<int>(day_ids.size()));
        rec.day = it->second;
        series.records.push_back(rec);
    }
    try {
        series.validate();
    } catch (const std::exception& e) {
        fail(path + ": " + e.what());
    }
    return series;
}

void write_profiles(const std::string& path, const ProfileSeries& series) {
    std::ofstream out(path);
    if (!out) fail("cannot open for writing: " + path);
    out << "date,hour,actual,forecast\n";
    out.precision(17);
    for (const auto& r : series.records)
        out << "day" << r.day << ',' << r.hour << ',' << r.actual << ',' << r.forecast << '\n';
}

}  // namespace firming
