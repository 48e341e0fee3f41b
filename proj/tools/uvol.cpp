// uvol: price intervals, surfaces, multiple-prior simulation and hedge
// verification for a single asset with volatility uncertainty.
//
// Exit codes: 0 success, 2 config error (including quotes inside the
// arbitrage-free interval), 3 solver non-convergence, 4 invariant violation
// detected by a verification command.

#include "uvol/bsb.hpp"
#include "uvol/closed_form.hpp"
#include "uvol/hedge.hpp"
#include "uvol/market.hpp"
#include "uvol/mc.hpp"
#include "uvol/payoff.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitInvariant = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_keys(const json& obj, const char* where,
                  std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok)
            throw ConfigError(std::string("unknown key '") + it.key() +
                              "' in " + where);
    }
}

double get_num(const json& obj, const char* key, const char* where) {
    if (!obj.contains(key) || !obj[key].is_number())
        throw ConfigError(std::string("missing numeric '") + key + "' in " +
                          where);
    return obj[key].get<double>();
}

struct RunConfig {
    uvol::MarketParams market{0.0, 0.1, 0.1, 1.0, 1.0};
    uvol::Payoff payoff = uvol::Payoff::call(1.0);
    uvol::GridSpec grid;
    uvol::SolverConfig solver;
    int mc_paths = 100000;
    int mc_steps = 256;
    std::uint64_t seed = 12345;
    std::vector<uvol::VolControl> controls;  // family for simulate/hedge
    std::string format = "json";
};

uvol::Payoff parse_payoff(const json& p) {
    if (!p.is_object() || !p.contains("kind"))
        throw ConfigError("payoff: object with 'kind' required");
    const std::string kind = p["kind"].get<std::string>();
    if (kind == "call") {
        require_keys(p, "payoff", {"kind", "strike"});
        return uvol::Payoff::call(get_num(p, "strike", "payoff"));
    }
    if (kind == "put") {
        require_keys(p, "payoff", {"kind", "strike"});
        return uvol::Payoff::put(get_num(p, "strike", "payoff"));
    }
    if (kind == "forward") {
        require_keys(p, "payoff", {"kind", "strike"});
        return uvol::Payoff::forward(get_num(p, "strike", "payoff"));
    }
    if (kind == "bull_spread") {
        require_keys(p, "payoff", {"kind", "k_low", "k_high"});
        return uvol::Payoff::bull_spread(get_num(p, "k_low", "payoff"),
                                         get_num(p, "k_high", "payoff"));
    }
    if (kind == "piecewise_linear") {
        require_keys(p, "payoff", {"kind", "knots", "left_slope", "right_slope"});
        if (!p.contains("knots") || !p["knots"].is_array())
            throw ConfigError("payoff: 'knots' array required");
        std::vector<uvol::Payoff::Knot> knots;
        for (const auto& kv : p["knots"]) {
            if (!kv.is_array() || kv.size() != 2)
                throw ConfigError("payoff: each knot must be [x, value]");
            knots.push_back({kv[0].get<double>(), kv[1].get<double>()});
        }
        return uvol::Payoff::piecewise_linear(std::move(knots),
                                              get_num(p, "left_slope", "payoff"),
                                              get_num(p, "right_slope", "payoff"));
    }
    throw ConfigError("payoff: unknown kind '" + kind + "'");
}

uvol::VolControl parse_control(const json& c, const RunConfig& cfg) {
    if (!c.is_object() || !c.contains("kind"))
        throw ConfigError("control: object with 'kind' required");
    const std::string kind = c["kind"].get<std::string>();
    if (kind == "constant") {
        require_keys(c, "control", {"kind", "sigma"});
        return uvol::ConstantControl{get_num(c, "sigma", "control")};
    }
    if (kind == "deterministic") {
        require_keys(c, "control", {"kind", "times", "sigmas"});
        uvol::DeterministicControl dc;
        for (const auto& t : c["times"]) dc.times.push_back(t.get<double>());
        for (const auto& s : c["sigmas"]) dc.sigmas.push_back(s.get<double>());
        return dc;
    }
    throw ConfigError("control: unknown kind '" + kind + "' (feedback is added automatically)");
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    require_keys(doc, "config",
                 {"schema_version", "market", "payoff", "grid", "mc", "solver",
                  "output"});
    if (!doc.contains("schema_version") || doc["schema_version"] != 1)
        throw ConfigError("config: schema_version 1 required");
    if (!doc.contains("market")) throw ConfigError("config: 'market' required");
    if (!doc.contains("payoff")) throw ConfigError("config: 'payoff' required");

    const json& m = doc["market"];
    require_keys(m, "market", {"rate", "sigma_low", "sigma_high", "spot", "horizon"});
    RunConfig cfg{
        uvol::MarketParams(get_num(m, "rate", "market"),
                           get_num(m, "sigma_low", "market"),
                           get_num(m, "sigma_high", "market"),
                           get_num(m, "spot", "market"),
                           get_num(m, "horizon", "market")),
        parse_payoff(doc["payoff"]),
    };

    if (doc.contains("grid")) {
        const json& g = doc["grid"];
        require_keys(g, "grid", {"n_space", "n_time", "log_width"});
        if (g.contains("n_space")) cfg.grid.n_space = g["n_space"].get<int>();
        if (g.contains("n_time")) cfg.grid.n_time = g["n_time"].get<int>();
        if (g.contains("log_width")) cfg.grid.log_width = g["log_width"].get<double>();
        cfg.grid.validate();
    }
    if (doc.contains("solver")) {
        const json& s = doc["solver"];
        require_keys(s, "solver",
                     {"policy_tol", "max_policy_iters", "tie_tol", "rannacher_steps"});
        if (s.contains("policy_tol")) cfg.solver.policy_tol = s["policy_tol"].get<double>();
        if (s.contains("max_policy_iters"))
            cfg.solver.max_policy_iters = s["max_policy_iters"].get<int>();
        if (s.contains("tie_tol")) cfg.solver.tie_tol = s["tie_tol"].get<double>();
        if (s.contains("rannacher_steps"))
            cfg.solver.rannacher_steps = s["rannacher_steps"].get<int>();
        cfg.solver.validate();
    }
    if (doc.contains("mc")) {
        const json& mc = doc["mc"];
        require_keys(mc, "mc", {"n_paths", "n_steps", "seed", "controls"});
        if (mc.contains("n_paths")) cfg.mc_paths = mc["n_paths"].get<int>();
        if (mc.contains("n_steps")) cfg.mc_steps = mc["n_steps"].get<int>();
        if (mc.contains("seed")) cfg.seed = mc["seed"].get<std::uint64_t>();
        if (mc.contains("controls"))
            for (const auto& c : mc["controls"])
                cfg.controls.push_back(parse_control(c, cfg));
    }
    if (doc.contains("output")) {
        const json& o = doc["output"];
        require_keys(o, "output", {"format"});
        if (o.contains("format")) cfg.format = o["format"].get<std::string>();
        if (cfg.format != "json" && cfg.format != "csv")
            throw ConfigError("output.format must be json or csv");
    }

    for (const auto& c : cfg.controls) uvol::validate_control(c, cfg.market);
    if (cfg.controls.empty()) {
        for (int i = 0; i < 5; ++i)
            cfg.controls.push_back(uvol::ConstantControl{
                cfg.market.sigma_low +
                (cfg.market.sigma_high - cfg.market.sigma_low) * i / 4.0});
    }
    return cfg;
}

std::ostream& open_output(const std::string& out_path, std::ofstream& file) {
    if (out_path.empty() || out_path == "-") return std::cout;
    file.open(out_path);
    if (!file) throw ConfigError("cannot open output file: " + out_path);
    return file;
}

std::string fmt17(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

int cmd_price(const RunConfig& cfg, std::ostream& os) {
    uvol::PriceInterval pi =
        uvol::price_interval(cfg.market, cfg.payoff, cfg.grid, cfg.solver);
    const double width_tol = 1e-4 * std::max(1.0, std::abs(pi.h_up));
    json out;
    out["h_low"] = pi.h_low;
    out["h_up"] = pi.h_up;
    out["width"] = pi.h_up - pi.h_low;
    out["collapsed"] = (pi.h_up - pi.h_low) <= width_tol;
    out["convexity"] = uvol::to_string(cfg.payoff.convexity());
    json sandwich = json::array();
    for (const auto& cp : pi.bs_mid)
        sandwich.push_back({{"sigma", cp.sigma}, {"bs_price", cp.bs_price}});
    out["bs_sandwich"] = sandwich;
    out["diagnostics"] = {
        {"total_policy_iters", pi.diagnostics.total_policy_iters},
        {"max_policy_iters_step", pi.diagnostics.max_policy_iters_step},
        {"final_residual", pi.diagnostics.final_residual},
        {"n_space", pi.grid.n_space},
        {"n_time", pi.grid.n_time},
    };
    os << out.dump(2) << "\n";
    return 0;
}

int cmd_surface(const RunConfig& cfg, std::ostream& os) {
    uvol::Surface s = uvol::solve_bsb(cfg.market, cfg.payoff, cfg.grid, cfg.solver);
    s.write_csv(os);
    return 0;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& os) {
    uvol::Surface surface =
        uvol::solve_bsb(cfg.market, cfg.payoff, cfg.grid, cfg.solver);
    const double h_up = surface.value_at(0.0, cfg.market.spot);

    std::vector<uvol::VolControl> family = cfg.controls;
    family.push_back(uvol::FeedbackControl{&surface});

    json priors = json::array();
    uvol::McEstimate best;
    int best_idx = -1;
    bool qv_ok = true;
    for (std::size_t i = 0; i < family.size(); ++i) {
        uvol::McEstimate e = uvol::estimate_claim(
            cfg.market, cfg.payoff, family[i], cfg.mc_paths, cfg.mc_steps, cfg.seed);
        const int qv_paths = std::min(cfg.mc_paths, 2000);
        uvol::PathBatch batch = uvol::simulate_paths(
            cfg.market, family[i], qv_paths, cfg.mc_steps, cfg.seed);
        uvol::QvReport qr = uvol::qv_bounds_check(batch, cfg.market);
        qv_ok = qv_ok && qr.within_bounds;
        priors.push_back({{"control", e.control},
                          {"value", e.value},
                          {"std_error", e.std_error},
                          {"qv_rate_min", qr.min_rate},
                          {"qv_rate_max", qr.max_rate},
                          {"qv_within_bounds", qr.within_bounds}});
        if (best_idx < 0 || e.value > best.value) {
            best = e;
            best_idx = static_cast<int>(i);
        }
    }

    json out;
    out["priors"] = priors;
    out["maximizer"] = best.control;
    out["maximizer_value"] = best.value;
    out["pde_h_up"] = h_up;
    out["pde_gap"] = h_up - best.value;
    out["qv_within_bounds"] = qv_ok;
    os << out.dump(2) << "\n";
    return qv_ok ? 0 : kExitInvariant;
}

int cmd_hedge(const RunConfig& cfg, std::ostream& os) {
    uvol::Surface surface =
        uvol::solve_bsb(cfg.market, cfg.payoff, cfg.grid, cfg.solver);
    json reports = json::array();
    bool consumption_ok = true;
    int prior_idx = 0;
    for (const auto& control : cfg.controls) {
        uvol::PathBatch batch =
            uvol::simulate_paths(cfg.market, control, cfg.mc_paths, cfg.mc_steps,
                                 cfg.seed + 1000 * prior_idx++);
        uvol::HedgeReport r =
            uvol::simulate_hedge(surface, cfg.market, cfg.payoff, batch, cfg.solver);
        consumption_ok = consumption_ok &&
                         r.consumption_min_increment >= -cfg.solver.consumption_tol;
        reports.push_back({{"control", uvol::describe(control)},
                           {"terminal_shortfall_max", r.terminal_shortfall_max},
                           {"shortfall_q50", r.shortfall_q50},
                           {"shortfall_q90", r.shortfall_q90},
                           {"shortfall_q99", r.shortfall_q99},
                           {"consumption_min_increment", r.consumption_min_increment},
                           {"consumption_total_mean", r.consumption_total_mean},
                           {"min_wealth", r.min_wealth}});
    }
    json out;
    out["initial_capital"] = surface.value_at(0.0, cfg.market.spot);
    out["priors"] = reports;
    out["consumption_ok"] = consumption_ok;
    os << out.dump(2) << "\n";
    return consumption_ok ? 0 : kExitInvariant;
}

int cmd_arbitrage(const RunConfig& cfg, double quote, std::ostream& os) {
    uvol::ArbitrageDemo demo = uvol::demo_arbitrage_outside_interval(
        cfg.market, cfg.payoff, cfg.grid, cfg.solver, quote, cfg.mc_paths,
        cfg.mc_steps, cfg.seed);
    json out;
    out["quote"] = demo.quote;
    out["h_low"] = demo.h_low;
    out["h_up"] = demo.h_up;
    out["side"] = demo.side == uvol::ArbitrageSide::AboveHup ? "above_hup"
                                                             : "below_hlow";
    out["banked_terminal"] = demo.banked_terminal;
    out["min_terminal_wealth"] = demo.min_terminal_wealth;
    out["mean_terminal_wealth"] = demo.mean_terminal_wealth;
    out["fraction_above_tol"] = demo.fraction_above_tol;
    out["n_paths"] = demo.n_paths;
    out["n_priors"] = demo.n_priors;
    os << out.dump(2) << "\n";
    return demo.min_terminal_wealth >= -demo.tol ? 0 : kExitInvariant;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pricing and hedging under volatility uncertainty"};
    app.require_subcommand(1);

    std::string config_path, out_path, format_flag;
    std::optional<std::uint64_t> seed_flag;
    int grid_refine = 0;
    double quote = 0.0;

    app.add_option("--config", config_path, "config file (JSON)")->required();
    app.add_option("--out", out_path, "output path (default stdout)");
    app.add_option("--format", format_flag, "json|csv");
    app.add_option("--seed", seed_flag, "override config seed");
    app.add_option("--grid-refine", grid_refine,
                   "halve grid spacings this many times");

    app.add_subcommand("price", "no-arbitrage price interval");
    app.add_subcommand("surface", "export the value surface as CSV");
    app.add_subcommand("simulate", "multiple-prior Monte Carlo estimate");
    app.add_subcommand("hedge", "pathwise super-hedge verification");
    auto* arb = app.add_subcommand("arbitrage",
                                   "construct an arbitrage for an outside quote");
    arb->add_option("--quote", quote, "quoted claim price")->required();
    // let the global flags appear after the subcommand name
    for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    if (const char* th = std::getenv("UVOL_THREADS"))
        uvol::set_thread_count(std::atoi(th));

    try {
        RunConfig cfg = load_config(config_path);
        if (seed_flag) cfg.seed = *seed_flag;
        if (!format_flag.empty()) cfg.format = format_flag;
        if (grid_refine > 0) cfg.grid = cfg.grid.refined(grid_refine);

        std::ofstream file;
        std::ostream& os = open_output(out_path, file);
        os << std::setprecision(17);

        if (app.got_subcommand("price")) return cmd_price(cfg, os);
        if (app.got_subcommand("surface")) return cmd_surface(cfg, os);
        if (app.got_subcommand("simulate")) return cmd_simulate(cfg, os);
        if (app.got_subcommand("hedge")) return cmd_hedge(cfg, os);
        if (app.got_subcommand("arbitrage")) return cmd_arbitrage(cfg, quote, os);
        return kExitConfig;
    } catch (const uvol::InsideIntervalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const uvol::SolverError& e) {
        std::cerr << "error: " << e.what() << " (residual " << e.residual
                  << ")\n";
        return kExitSolver;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
