#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "heightlab/config.hpp"
#include "heightlab/csbp.hpp"
#include "heightlab/height.hpp"
#include "heightlab/interact.hpp"
#include "heightlab/levypath.hpp"
#include "heightlab/loctime.hpp"
#include "heightlab/mechanism.hpp"
#include "heightlab/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hl;

namespace {

constexpr const char* kVersion = "heightlab 0.1.0";

std::uint64_t fnv1a64_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::uint64_t h = 1469598103934665603ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!in) break;
    }
    return h;
}

struct Runner {
    ExperimentConfig cfg;
    fs::path outdir = ".";
    std::string format = "csv";
    int workers = 0;
    std::string subcommand;
    std::vector<fs::path> outputs;
    std::chrono::steady_clock::time_point t0 =
        std::chrono::steady_clock::now();

    json manifest_base() const {
        json m;
        m["version"] = kVersion;
        m["subcommand"] = subcommand;
        json c = json::object();
        for (const auto& [k, v] : cfg.entries()) c[k] = v;
        m["config"] = c;
        int w = resolve_workers(workers);
        m["workers"] = w;
        std::uint64_t seed =
            static_cast<std::uint64_t>(cfg.get_num("run.seed", 1.0));
        json seeds = json::array();
        for (int i = 0; i < w; ++i) seeds.push_back(seed_split(seed, i, 0));
        m["worker_seeds"] = seeds;
        return m;
    }

    void write_manifest(bool final) {
        json m = manifest_base();
        if (final) {
            m["wall_clock_seconds"] =
                std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
            json digs = json::object();
            for (const auto& p : outputs)
                digs[p.filename().string()] =
                    std::to_string(fnv1a64_file(p));
            m["output_digests"] = digs;
        }
        std::ofstream out(outdir / "manifest.json");
        out << m.dump(2) << "\n";
    }

    std::ofstream open_output(const std::string& name) {
        fs::create_directories(outdir);
        fs::path p = outdir / name;
        outputs.push_back(p);
        return std::ofstream(p);
    }

    void write_report(const std::string& text) {
        auto out = open_output("report.json");
        out << text << "\n";
    }
};

void write_levy_csv(std::ofstream& out, const LevyPath& p,
                    const HeightPath* h) {
    out << "# dt=" << p.dt << " eps_sim=" << p.eps_sim << " beta=" << p.beta
        << " alpha=" << p.alpha << "\n";
    out << (h ? "index,value,jump_size_or_0,height\n"
              : "index,value,jump_size_or_0\n");
    std::size_t j = 0;
    char buf[128];
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        double z = 0.0;
        while (j < p.jumps.size() &&
               p.jumps[j].index == static_cast<std::int64_t>(i)) {
            z += p.jumps[j].z;
            ++j;
        }
        if (h)
            std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g\n", i,
                          p.values[i], z, h->values[i]);
        else
            std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g\n", i,
                          p.values[i], z);
        out << buf;
    }
}

PathBudget budget_from_config(const ExperimentConfig& cfg) {
    if (cfg.has("sim.x_target"))
        return PathBudget::first_passage(cfg.get_num("sim.x_target", 1.0),
                                         cfg.get_num("sim.cap", 1e3));
    return PathBudget::horizon(cfg.get_num("sim.horizon", 1.0));
}

int run_simulate_levy(Runner& r, bool with_height) {
    auto mech = mechanism_from_config(r.cfg);
    auto budget = budget_from_config(r.cfg);
    double dt = r.cfg.get_num("sim.dt", 1e-3);
    double eps = r.cfg.get_num("sim.eps_sim", 0.01);
    auto seed = static_cast<std::uint64_t>(r.cfg.get_num("run.seed", 1.0));
    r.cfg.require_all_consumed();
    r.write_manifest(false);
    auto p = simulate_levy(mech, budget, dt, eps, seed);
    HeightPath h;
    if (with_height) h = height_from_path(p, mech.beta);
    auto out = r.open_output(with_height ? "height.csv" : "levy.csv");
    write_levy_csv(out, p, with_height ? &h : nullptr);
    out.close();
    r.write_manifest(true);
    if (budget.is_first_passage && !first_passage_time(p, budget.x_target)) {
        std::cerr << "first passage not reached within the cap\n";
        return 3;
    }
    return 0;
}

int run_simulate_csbp(Runner& r) {
    auto mech_pi = levy_measure_from_config(r.cfg);
    double beta = r.cfg.get_num("mechanism.beta", 1.0);
    Mechanism mech(0.0, beta, mech_pi);
    auto f = interaction_from_config(r.cfg);
    auto x_list = r.cfg.get_list("sim.x_list", {1.0});
    double horizon = r.cfg.get_num("sim.horizon", 1.0);
    double dt_pop = r.cfg.get_num("sim.dt_pop", 1e-3);
    double eps = r.cfg.get_num("sim.eps_sim", 0.01);
    auto seed = static_cast<std::uint64_t>(r.cfg.get_num("run.seed", 1.0));
    r.cfg.require_all_consumed();
    r.write_manifest(false);
    auto p = simulate_csbp(f, mech, x_list, horizon, dt_pop, eps, seed);
    auto out = r.open_output("population.csv");
    out << "time,x_label,z\n";
    char buf[128];
    for (std::size_t k = 0; k < p.steps(); ++k) {
        double run = 0.0;
        for (std::size_t i = 0; i < p.x_list.size(); ++i) {
            run += p.increments[i][k];
            std::snprintf(buf, sizeof(buf), "%.10g,%g,%.12g\n", k * dt_pop,
                          p.x_list[i], run);
            out << buf;
        }
    }
    out.close();
    r.write_manifest(true);
    return 0;
}

InteractConfig interact_config_from(const ExperimentConfig& cfg) {
    InteractConfig ic;
    ic.f = interaction_from_config(cfg);
    ic.a = cfg.get_num("sim.a", kInf);
    ic.beta = cfg.get_num("mechanism.beta", 1.0);
    ic.pi = levy_measure_from_config(cfg);
    ic.x_target = cfg.get_num("sim.x_target", 1.0);
    ic.dt = cfg.get_num("sim.dt", 1e-3);
    ic.eps_sim = cfg.get_num("sim.eps_sim", 0.01);
    ic.delta_t = cfg.get_num("sim.delta_t", 0.02);
    ic.cap = cfg.get_num("sim.cap", 1e3);
    return ic;
}

int run_simulate_interacting(Runner& r) {
    auto ic = interact_config_from(r.cfg);
    auto seed = static_cast<std::uint64_t>(r.cfg.get_num("run.seed", 1.0));
    r.cfg.require_all_consumed();
    r.write_manifest(false);
    auto res = simulate_interacting_height(ic, seed);
    {
        auto out = r.open_output("interacting.csv");
        write_levy_csv(out, res.path, &res.height);
    }
    {
        auto out = r.open_output("field.csv");
        out << "level_bin_lower_edge,checkpoint_time,estimate\n";
        double stop = (res.path.values.size() - 1) * res.path.dt;
        char buf[128];
        for (std::size_t b = 0; b < res.field.size(); ++b) {
            std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.12g\n",
                          b * ic.delta_t, stop, res.field[b]);
            out << buf;
        }
    }
    r.write_manifest(true);
    if (!res.passage.reached) {
        std::cerr << "S_x not reached within the cap\n";
        return 3;
    }
    return 0;
}

Tolerances tolerances_from(const ExperimentConfig& cfg, double bias,
                           double ks) {
    Tolerances tol;
    tol.z_max = cfg.get_num("verify.tol.z_max", 3.0);
    tol.bias = cfg.get_num("verify.tol.bias", bias);
    tol.ks_max = cfg.get_num("verify.tol.ks_max", ks);
    return tol;
}

int run_rk_linear(Runner& r) {
    auto mech = mechanism_from_config(r.cfg);
    double x = r.cfg.get_num("sim.x_target", 1.0);
    auto levels = r.cfg.get_list("verify.levels", {0.25, 0.5, 1.0});
    auto N = r.cfg.get_int("run.n", 1000);
    double dt = r.cfg.get_num("sim.dt", 1e-3);
    double eps = r.cfg.get_num("sim.eps_sim", 0.01);
    double delta_t = r.cfg.get_num("sim.delta_t", 0.02);
    double cap = r.cfg.get_num("sim.cap", 200.0);
    double dt_pop = r.cfg.get_num("sim.dt_pop", 1e-3);
    auto seed = static_cast<std::uint64_t>(r.cfg.get_num("run.seed", 1.0));
    auto tol = tolerances_from(r.cfg, 0.05, 0.05);
    r.cfg.require_all_consumed();
    r.write_manifest(false);
    auto rep = ray_knight_linear(mech, x, levels, N, dt, eps, delta_t, seed,
                                 cap, dt_pop, tol, r.workers);
    std::cout << comparison_report_text(rep);
    r.write_report(comparison_report_json(rep));
    r.write_manifest(true);
    return rep.pass ? 0 : 1;
}

int run_rk_interacting(Runner& r) {
    auto ic = interact_config_from(r.cfg);
    auto x_list = r.cfg.get_list("verify.x_list", {1.0});
    auto levels = r.cfg.get_list("verify.levels", {0.25, 0.5});
    auto N = r.cfg.get_int("run.n", 1000);
    double dt_pop = r.cfg.get_num("sim.dt_pop", 1e-3);
    auto seed = static_cast<std::uint64_t>(r.cfg.get_num("run.seed", 1.0));
    auto tol = tolerances_from(r.cfg, 0.07, 0.07);
    r.cfg.require_all_consumed();
    r.write_manifest(false);
    auto rep = ray_knight_interacting(ic, x_list, levels, N, seed, dt_pop,
                                      tol, r.workers);
    std::cout << comparison_report_text(rep);
    r.write_report(comparison_report_json(rep));
    r.write_manifest(true);
    return rep.pass ? 0 : 1;
}

int run_bounds(Runner& r) {
    auto mech = mechanism_from_config(r.cfg);
    auto s_grid = r.cfg.get_list("verify.s_grid", {0.5, 1.0, 2.0, 4.0});
    auto x_grid = r.cfg.get_list("verify.x_grid", {0.25, 0.5, 1.0, 2.0});
    auto z_grid = r.cfg.get_list("verify.z_grid", {0.25, 0.5, 1.0, 2.0});
    auto N = r.cfg.get_int("run.n", 2000);
    double dt = r.cfg.get_num("sim.dt", 1e-3);
    double eps = r.cfg.get_num("sim.eps_sim", 0.01);
    auto seed = static_cast<std::uint64_t>(r.cfg.get_num("run.seed", 1.0));
    r.cfg.require_all_consumed();
    r.write_manifest(false);
    auto rep = bound_suite(mech, s_grid, x_grid, z_grid, N, dt, eps, seed,
                           r.workers);
    json j;
    j["pass"] = rep.pass;
    j["checks"] = json::array();
    for (const auto& c : rep.checks) {
        j["checks"].push_back({{"kind", c.kind},
                               {"s", c.s},
                               {"param", c.param},
                               {"param2", c.param2},
                               {"empirical", c.empirical},
                               {"stderr", c.stderr_},
                               {"bound", c.bound},
                               {"pass", c.pass}});
        std::printf("%-10s s=%-6g p=%-6g emp=%.5f bound=%.5f %s\n",
                    c.kind.c_str(), c.s, c.param, c.empirical, c.bound,
                    c.pass ? "ok" : "FAIL");
    }
    r.write_report(j.dump(2));
    r.write_manifest(true);
    return rep.pass ? 0 : 1;
}

int run_girsanov(Runner& r) {
    auto mech_pi = levy_measure_from_config(r.cfg);
    double beta = r.cfg.get_num("mechanism.beta", 1.0);
    Mechanism mech(0.0, beta, mech_pi);
    auto f = interaction_from_config(r.cfg);
    double a = r.cfg.get_num("sim.a", 1.0);
    double x = r.cfg.get_num("sim.x_target", 0.5);
    double dt = r.cfg.get_num("sim.dt", 1e-3);
    double eps = r.cfg.get_num("sim.eps_sim", 0.01);
    double delta_t = r.cfg.get_num("sim.delta_t", 0.02);
    double cap = r.cfg.get_num("sim.cap", 100.0);
    auto N = r.cfg.get_int("run.n", 2000);
    auto seed = static_cast<std::uint64_t>(r.cfg.get_num("run.seed", 1.0));
    r.cfg.require_all_consumed();
    r.write_manifest(false);
    std::vector<double> ws(N, 0.0);
    parallel_for(N, [&](std::int64_t i) {
        auto p = simulate_levy(mech, PathBudget::first_passage(x, cap), dt,
                               eps, seed_split(seed, 8, i));
        auto h = height_from_path(p, beta);
        ws[i] = girsanov_weight(p, h, f, a, x, delta_t).weight();
    }, r.workers);
    double m = 0.0, v = 0.0;
    for (double w : ws) m += w;
    m /= N;
    for (double w : ws) v += (w - m) * (w - m);
    double se = std::sqrt(v / (N - 1.0) / N);
    bool pass = std::abs(m - 1.0) <= 3.0 * se;
    json j = {{"mean_weight", m},
              {"stderr", se},
              {"n", N},
              {"pass", pass}};
    std::printf("mean weight %.5f +- %.5f (n=%lld) %s\n", m, se,
                static_cast<long long>(N), pass ? "ok" : "FAIL");
    r.write_report(j.dump(2));
    r.write_manifest(true);
    return pass ? 0 : 1;
}

int run_truncation(Runner& r) {
    auto mech = mechanism_from_config(r.cfg);
    auto schedule = r.cfg.get_list("verify.eps_schedule", {0.5, 0.25, 0.1});
    double s = r.cfg.get_num("sim.horizon", 1.0);
    auto N = r.cfg.get_int("run.n", 500);
    double dt = r.cfg.get_num("sim.dt", 1e-3);
    double eps_ref = r.cfg.get_num("verify.eps_ref", 0.0125);
    double x_probe = r.cfg.get_num("sim.x_target", 0.5);
    auto seed = static_cast<std::uint64_t>(r.cfg.get_num("run.seed", 1.0));
    r.cfg.require_all_consumed();
    r.write_manifest(false);
    auto rep = truncation_convergence(mech, schedule, s, N, dt, eps_ref,
                                      x_probe, seed, r.workers);
    json j;
    j["pass"] = rep.pass;
    j["steps"] = json::array();
    for (const auto& st : rep.steps) {
        j["steps"].push_back({{"eps", st.eps},
                              {"mean_sup_diff", st.mean_sup_diff},
                              {"stderr", st.stderr_},
                              {"envelope", st.envelope},
                              {"mean_sx_gap", st.mean_sx_gap},
                              {"pass", st.pass}});
        std::printf("eps=%-8g sup_diff=%.5f envelope=%.5f sx_gap=%.5f %s\n",
                    st.eps, st.mean_sup_diff, st.envelope, st.mean_sx_gap,
                    st.pass ? "ok" : "FAIL");
    }
    r.write_report(j.dump(2));
    r.write_manifest(true);
    return rep.pass ? 0 : 1;
}

int run_extinction(Runner& r) {
    auto f = interaction_from_config(r.cfg);
    double beta = r.cfg.get_num("mechanism.beta", 1.0);
    r.cfg.require_all_consumed();
    r.write_manifest(false);
    auto e = extinction_criterion(f, beta);
    std::cout << to_string(e) << "\n";
    auto out = r.open_output("report.json");
    json j = {{"extinction", to_string(e)}};
    out << j.dump(2) << "\n";
    out.close();
    r.write_manifest(true);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(kVersion) +
                 " - height-process and population-field simulator\n"
                 "Config keys (via --config file or --set key=value):\n"
                 "  mechanism.alpha (1/time) mechanism.beta (diffusion)\n"
                 "  mechanism.pi.kind {zero,atoms,stable,expdensity}\n"
                 "  mechanism.pi.atoms z:mass,...  pi.index/.scale/.cutoff\n"
                 "  mechanism.pi.rate/.scale/.power\n"
                 "  interaction.kind {linear,logistic,polynomial}\n"
                 "  interaction.alpha/.c1/.c2/.coeffs/.b\n"
                 "  sim.dt sim.dt_pop (time) sim.eps_sim (jump floor)\n"
                 "  sim.delta_t (level bin) sim.horizon sim.x_target sim.cap\n"
                 "  sim.a (reflection level) sim.x_list\n"
                 "  verify.levels verify.x_list verify.s_grid verify.x_grid\n"
                 "  verify.z_grid verify.eps_schedule verify.eps_ref\n"
                 "  verify.tol.z_max/.bias/.ks_max\n"
                 "  run.n run.seed run.workers\n"};
    app.require_subcommand(1);
    app.fallthrough(true);

    std::string config_path, outdir = ".", format = "csv";
    std::vector<std::string> sets;
    int workers = 0;
    app.add_option("--config", config_path, "config file path");
    app.add_option("--set", sets, "KEY=VALUE override (repeatable)");
    app.add_option("--workers", workers, "worker threads");
    app.add_option("--output", outdir, "output directory");
    app.add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    const std::vector<std::string> names = {
        "simulate-levy",         "simulate-height",
        "simulate-csbp",         "simulate-interacting",
        "verify-rayknight-linear", "verify-rayknight-interacting",
        "verify-bounds",         "verify-girsanov",
        "verify-truncation",     "extinction-check"};
    for (const auto& n : names) app.add_subcommand(n);

    CLI11_PARSE(app, argc, argv);

    try {
        Runner r;
        if (!config_path.empty())
            r.cfg = ExperimentConfig::from_file(config_path);
        for (const auto& s : sets) r.cfg.set_pair(s);
        if (workers > 0) r.cfg.set("run.workers", std::to_string(workers));
        r.workers = static_cast<int>(r.cfg.get_num("run.workers", 0.0));
        r.outdir = outdir;
        r.format = format;
        fs::create_directories(r.outdir);
        auto* sub = app.get_subcommands().front();
        r.subcommand = sub->get_name();
        const std::string& n = r.subcommand;
        if (n == "simulate-levy") return run_simulate_levy(r, false);
        if (n == "simulate-height") return run_simulate_levy(r, true);
        if (n == "simulate-csbp") return run_simulate_csbp(r);
        if (n == "simulate-interacting") return run_simulate_interacting(r);
        if (n == "verify-rayknight-linear") return run_rk_linear(r);
        if (n == "verify-rayknight-interacting") return run_rk_interacting(r);
        if (n == "verify-bounds") return run_bounds(r);
        if (n == "verify-girsanov") return run_girsanov(r);
        if (n == "verify-truncation") return run_truncation(r);
        if (n == "extinction-check") return run_extinction(r);
        std::cerr << "unknown subcommand\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "aborted: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
