#include "esd/sweep.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <stdexcept>
#include <thread>

namespace esd {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

const char* const kExperiments[] = {"jc-evolution",  "ww-evolution",
                                    "invariant",     "hierarchy",
                                    "age4-surface",  "discord",
                                    "partition-scan"};

bool known_experiment(const std::string& e) {
    for (const char* k : kExperiments)
        if (e == k) return true;
    return false;
}

std::vector<double> linspace(double lo, double hi, int steps) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i)
        out.push_back(lo + (hi - lo) * static_cast<double>(i) /
                               static_cast<double>(steps));
    return out;
}

// run jobs 0..n-1, each writing exactly its own row slot; the result is
// therefore independent of the worker count
void parallel_rows(int n, int workers,
                   const std::function<std::vector<double>(int)>& job,
                   std::vector<std::vector<double>>& rows) {
    rows.assign(static_cast<std::size_t>(n), {});
    const int nw = std::max(1, std::min(workers, n));
    if (nw == 1) {
        for (int i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = job(i);
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(nw));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(nw));
    for (int w = 0; w < nw; ++w)
        threads.emplace_back([&, w] {
            try {
                for (int i = w; i < n; i += nw)
                    rows[static_cast<std::size_t>(i)] = job(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct Grid {
    std::vector<double> theta;
    std::vector<double> times;  // scaled time (Jt or Gt)
    bool theta_column = false;
};

Grid make_grid(const SweepSpec& spec) {
    Grid g;
    g.theta = spec.theta;
    g.times = linspace(0.0, spec.t_max, spec.steps);
    g.theta_column = spec.theta.size() > 1;
    return g;
}

void start_columns(Table& t, const Grid& g, const char* time_name,
                   std::vector<std::string> rest) {
    if (g.theta_column) t.columns.push_back("theta");
    t.columns.push_back(time_name);
    for (auto& c : rest) t.columns.push_back(std::move(c));
}

void base_metadata(Table& t, const SweepSpec& spec) {
    t.metadata.emplace_back("spec", resolved_spec_json(spec));
    if (spec.theta.size() == 1)
        t.metadata.emplace_back("theta", fmt(spec.theta[0]));
}

std::vector<double> with_grid_prefix(const Grid& g, int theta_i, int time_i,
                                     std::initializer_list<double> vals) {
    std::vector<double> row;
    if (g.theta_column) row.push_back(g.theta[static_cast<std::size_t>(theta_i)]);
    row.push_back(g.times[static_cast<std::size_t>(time_i)]);
    row.insert(row.end(), vals);
    return row;
}

Partition pair_partition_aligned() {
    return Partition({{0, 1}, {2, 3}}, 4);  // A1P1 | A2P2
}

Partition pair_partition_crossed() {
    return Partition({{0, 2}, {1, 3}}, 4);  // A1A2 | P1P2
}

void run_jc(const SweepSpec& spec, Table& t) {
    const Grid g = make_grid(spec);
    base_metadata(t, spec);
    start_columns(t, g, "Jt", {"C_AA", "C_PP", "C4", "Sigma"});
    const int nt = static_cast<int>(g.times.size());
    const int n = static_cast<int>(g.theta.size()) * nt;
    parallel_rows(
        n, spec.workers,
        [&](int i) {
            const int ti = i % nt, hi = i / nt;
            const SigmaParts sp = invariant_sigma_jc(
                g.theta[static_cast<std::size_t>(hi)],
                g.times[static_cast<std::size_t>(ti)]);
            return with_grid_prefix(g, hi, ti,
                                    {std::max(0.0, sp.q_aa),
                                     std::max(0.0, sp.q_pp), sp.c4, sp.sigma});
        },
        t.rows);
}

void run_ww(const SweepSpec& spec, Table& t) {
    const Grid g = make_grid(spec);
    base_metadata(t, spec);
    start_columns(t, g, "Gt", {"C_AA", "C_PP", "C4", "Sigma"});
    const WWParams params = WWParams::flat_band(
        spec.modes, spec.gamma, spec.bandwidth * spec.gamma, 0.0);
    WWEngine engine(params);
    std::vector<double> abs_times;
    abs_times.reserve(g.times.size());
    for (double gt : g.times) abs_times.push_back(gt / spec.gamma);
    const WWSolution sol = ww_solve(engine, abs_times);
    for (double th : g.theta) {
        const std::string tag = "[theta=" + fmt(th) + "]";
        auto put = [&](const char* key, const std::optional<double>& v) {
            t.metadata.emplace_back(key + tag,
                                    v ? fmt(*v * spec.gamma) : "none");
        };
        const std::optional<double> none;
        put("t_death_formula",
            th > 1e-12 ? esd_death_time(th, spec.gamma) : none);
        put("t_birth_formula",
            th > 1e-12 ? esb_birth_time(th, spec.gamma) : none);
        put("t_death_numeric",
            th > 1e-12 ? death_time_numeric(th, engine) : none);
        put("t_birth_numeric",
            th > 1e-12 ? birth_time_numeric(th, engine) : none);
    }
    const int nt = static_cast<int>(g.times.size());
    const int n = static_cast<int>(g.theta.size()) * nt;
    parallel_rows(
        n, spec.workers,
        [&](int i) {
            const int ti = i % nt, hi = i / nt;
            const SigmaParts sp = invariant_sigma_ww(
                g.theta[static_cast<std::size_t>(hi)], sol, ti);
            return with_grid_prefix(g, hi, ti,
                                    {std::max(0.0, sp.q_aa),
                                     std::max(0.0, sp.q_pp), sp.c4, sp.sigma});
        },
        t.rows);
}

void run_invariant(const SweepSpec& spec, Table& t) {
    const Grid g = make_grid(spec);
    base_metadata(t, spec);
    t.metadata.emplace_back("model", spec.model);
    const bool ww = spec.model == "ww";
    start_columns(t, g, ww ? "Gt" : "Jt",
                  {"Q_AA", "Q_PP", "C4", "Sigma", "residual"});
    const int nt = static_cast<int>(g.times.size());
    const int n = static_cast<int>(g.theta.size()) * nt;
    if (ww) {
        const WWParams params = WWParams::flat_band(
            spec.modes, spec.gamma, spec.bandwidth * spec.gamma, 0.0);
        std::vector<double> abs_times;
        for (double gt : g.times) abs_times.push_back(gt / spec.gamma);
        const WWSolution sol = ww_solve(params, abs_times);
        parallel_rows(
            n, spec.workers,
            [&](int i) {
                const int ti = i % nt, hi = i / nt;
                const double th = g.theta[static_cast<std::size_t>(hi)];
                const SigmaParts sp = invariant_sigma_ww(th, sol, ti);
                return with_grid_prefix(
                    g, hi, ti,
                    {sp.q_aa, sp.q_pp, sp.c4, sp.sigma,
                     sp.sigma - std::sin(2.0 * th)});
            },
            t.rows);
        return;
    }
    parallel_rows(
        n, spec.workers,
        [&](int i) {
            const int ti = i % nt, hi = i / nt;
            const double th = g.theta[static_cast<std::size_t>(hi)];
            const SigmaParts sp =
                invariant_sigma_jc(th, g.times[static_cast<std::size_t>(ti)]);
            return with_grid_prefix(g, hi, ti,
                                    {sp.q_aa, sp.q_pp, sp.c4, sp.sigma,
                                     sp.sigma - std::sin(2.0 * th)});
        },
        t.rows);
}

GEOptions ge_options(const SweepSpec& spec) {
    GEOptions o;
    o.restarts = spec.ge_restarts;
    o.max_sweeps = spec.ge_max_sweeps;
    o.tolerance = spec.ge_tolerance;
    o.seed = spec.seed;
    return o;
}

double rge_energy_of(const HierarchyLevel& level, const Partition& p) {
    for (const auto& r : level.per_partition)
        if (r.partition == p) return r.energy;
    throw std::runtime_error("partition missing from hierarchy level");
}

void run_hierarchy(const SweepSpec& spec, Table& t) {
    const Grid g = make_grid(spec);
    base_metadata(t, spec);
    start_columns(t, g, "t",
                  {"E_AGE2", "E_AGE3", "E_AGE4", "E_RGE_A1P1_A2P2",
                   "E_RGE_A1A2_P1P2", "nonconverged"});
    const GEOptions opts = ge_options(spec);
    const Partition aligned = pair_partition_aligned();
    const Partition crossed = pair_partition_crossed();
    const int nt = static_cast<int>(g.times.size());
    const int n = static_cast<int>(g.theta.size()) * nt;
    parallel_rows(
        n, spec.workers,
        [&](int i) {
            const int ti = i % nt, hi = i / nt;
            const PureState psi =
                jc_state(g.theta[static_cast<std::size_t>(hi)],
                         g.times[static_cast<std::size_t>(ti)]);
            const HierarchyReport rep = hierarchy(psi, opts);
            if (!rep.monotone)
                throw std::runtime_error("hierarchy ladder not monotone");
            return with_grid_prefix(
                g, hi, ti,
                {rep.absolute_energies[0], rep.absolute_energies[1],
                 rep.absolute_energies[2],
                 rge_energy_of(rep.levels[0], aligned),
                 rge_energy_of(rep.levels[0], crossed),
                 rep.all_converged ? 0.0 : 1.0});
        },
        t.rows);
}

void run_age4(const SweepSpec& spec, Table& t) {
    const Grid g = make_grid(spec);
    base_metadata(t, spec);
    start_columns(t, g, "t", {"E_AGE4", "nonconverged"});
    const GEOptions opts = ge_options(spec);
    const int nt = static_cast<int>(g.times.size());
    const int n = static_cast<int>(g.theta.size()) * nt;
    parallel_rows(
        n, spec.workers,
        [&](int i) {
            const int ti = i % nt, hi = i / nt;
            const PureState psi =
                jc_state(g.theta[static_cast<std::size_t>(hi)],
                         g.times[static_cast<std::size_t>(ti)]);
            const GEResult r = absolute_ge(psi, 4, opts);
            return with_grid_prefix(g, hi, ti,
                                    {r.energy, r.converged ? 0.0 : 1.0});
        },
        t.rows);
}

void run_discord(const SweepSpec& spec, Table& t) {
    const Grid g = make_grid(spec);
    base_metadata(t, spec);
    start_columns(t, g, "t", {"Q_A1P1_A2P2", "Q_A1A2_P1P2", "D_AA"});
    DiscordOptions opts;
    opts.grid = spec.discord_grid;
    opts.tolerance = spec.discord_tolerance;
    opts.seed = spec.seed;
    const Partition aligned = pair_partition_aligned();
    const Partition crossed = pair_partition_crossed();
    const int nt = static_cast<int>(g.times.size());
    const int n = static_cast<int>(g.theta.size()) * nt;
    parallel_rows(
        n, spec.workers,
        [&](int i) {
            const int ti = i % nt, hi = i / nt;
            const PureState psi =
                jc_state(g.theta[static_cast<std::size_t>(hi)],
                         g.times[static_cast<std::size_t>(ti)]);
            const double q1 = discord_pure_bipartition(psi, aligned);
            const double q2 = discord_pure_bipartition(psi, crossed);
            const DiscordResult d = discord_two_qubit(
                reduced_state(psi, std::vector<std::string>{"A1", "A2"}),
                opts);
            return with_grid_prefix(g, hi, ti, {q1, q2, d.value});
        },
        t.rows);
}

void run_partition_scan(const SweepSpec& spec, Table& t) {
    base_metadata(t, spec);
    t.columns = {"dnu_over_Gamma", "chi_prime_sq", "C_PP_collective",
                 "chi_prime_sq_product"};
    const double gamma = spec.gamma;
    const WWParams params =
        WWParams::flat_band(spec.modes, gamma, spec.bandwidth * gamma, 0.0);
    // evolve until the residual excited population is below 1e-4
    const double t_long = (std::log(1e4) + 0.3) / gamma;
    const WWSolution sol = ww_solve(params, {t_long});
    std::vector<double> grid;
    for (double r : linspace(0.0, spec.dnu_max, spec.dnu_steps))
        grid.push_back(r * gamma);
    const PartitionScan scan = partition_scan(spec.theta[0], sol, grid);
    t.metadata.emplace_back("t_used_Gt", fmt(scan.t_used * gamma));
    t.metadata.emplace_back("xi_sq_residual", fmt(scan.xi_sq));
    t.metadata.emplace_back("gamma_line_over_Gamma",
                            fmt(scan.gamma_line / gamma));
    t.metadata.emplace_back(
        "threshold_ratio",
        scan.threshold_ratio ? fmt(*scan.threshold_ratio) : "none");
    t.metadata.emplace_back(
        "predicted_dnu_over_Gamma",
        scan.predicted_dnu ? fmt(*scan.predicted_dnu / gamma) : "none");
    t.metadata.emplace_back(
        "located_dnu_over_Gamma",
        scan.located_dnu ? fmt(*scan.located_dnu / gamma) : "none");
    for (const auto& row : scan.rows)
        t.rows.push_back({row.delta_nu / gamma, row.chi2, row.c_collective,
                          row.chi2_product});
}

}  // namespace

SweepSpec default_spec(const std::string& experiment) {
    if (!known_experiment(experiment))
        throw std::invalid_argument("unknown experiment: " + experiment);
    SweepSpec s;
    s.experiment = experiment;
    if (experiment == "jc-evolution" || experiment == "ww-evolution") {
        s.theta = {kPi / 4.0};
    } else if (experiment == "invariant" || experiment == "age4-surface") {
        s.theta = linspace(0.0, kPi / 2.0, 8);
        if (experiment == "age4-surface") s.steps = 16;
    } else if (experiment == "hierarchy") {
        s.theta = {kPi / 5.0};
        s.steps = 16;
    } else if (experiment == "discord" || experiment == "partition-scan") {
        s.theta = {2.0 * kPi / 5.0};
    }
    return s;
}

void apply_json_overrides(SweepSpec& spec, const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") +
                                    e.what());
    }
    if (!j.is_object())
        throw std::invalid_argument("config must be a JSON object");
    try {
        for (const auto& [key, val] : j.items()) {
            if (key == "experiment") {
                spec.experiment = val.get<std::string>();
            } else if (key == "theta") {
                if (val.is_array())
                    spec.theta = val.get<std::vector<double>>();
                else
                    spec.theta = {val.get<double>()};
            } else if (key == "t_max") {
                spec.t_max = val.get<double>();
            } else if (key == "steps") {
                spec.steps = val.get<int>();
            } else if (key == "model") {
                spec.model = val.get<std::string>();
            } else if (key == "J") {
                spec.J = val.get<double>();
            } else if (key == "modes") {
                spec.modes = val.get<int>();
            } else if (key == "gamma") {
                spec.gamma = val.get<double>();
            } else if (key == "bandwidth") {
                spec.bandwidth = val.get<double>();
            } else if (key == "ge_restarts") {
                spec.ge_restarts = val.get<int>();
            } else if (key == "ge_max_sweeps") {
                spec.ge_max_sweeps = val.get<int>();
            } else if (key == "ge_tolerance") {
                spec.ge_tolerance = val.get<double>();
            } else if (key == "discord_grid") {
                spec.discord_grid = val.get<int>();
            } else if (key == "discord_tolerance") {
                spec.discord_tolerance = val.get<double>();
            } else if (key == "dnu_max") {
                spec.dnu_max = val.get<double>();
            } else if (key == "dnu_steps") {
                spec.dnu_steps = val.get<int>();
            } else if (key == "seed") {
                spec.seed = val.get<std::uint64_t>();
            } else if (key == "workers") {
                spec.workers = val.get<int>();
            } else if (key == "format") {
                spec.format = val.get<std::string>();
            } else if (key == "out") {
                spec.out = val.get<std::string>();
            } else {
                throw std::invalid_argument("unknown config key: " + key);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad config value: ") +
                                    e.what());
    }
}

void finalize_spec(SweepSpec& spec) {
    if (!known_experiment(spec.experiment))
        throw std::invalid_argument("unknown experiment: " + spec.experiment);
    if (spec.model != "jc" && spec.model != "ww")
        throw std::invalid_argument("model must be jc or ww");
    if (spec.theta.empty())
        throw std::invalid_argument("need at least one theta");
    for (double th : spec.theta)
        if (!(th >= 0.0) || !(th <= kPi / 2.0))
            throw std::invalid_argument("theta must lie in [0, pi/2]");
    if (spec.steps < 1) throw std::invalid_argument("steps must be >= 1");
    if (spec.workers < 1 || spec.workers > 256)
        throw std::invalid_argument("workers must lie in [1, 256]");
    if (spec.format != "csv" && spec.format != "json")
        throw std::invalid_argument("format must be csv or json");
    if (!(spec.J > 0.0)) throw std::invalid_argument("J must be positive");
    if (spec.modes < 2) throw std::invalid_argument("modes must be >= 2");
    if (!(spec.gamma > 0.0))
        throw std::invalid_argument("gamma must be positive");
    if (!(spec.bandwidth > 0.0))
        throw std::invalid_argument("bandwidth must be positive");
    if (spec.ge_restarts < 1 || spec.ge_max_sweeps < 1 ||
        !(spec.ge_tolerance > 0.0))
        throw std::invalid_argument("invalid product-overlap search settings");
    if (spec.discord_grid < 8 || !(spec.discord_tolerance > 0.0))
        throw std::invalid_argument("invalid discord search settings");
    if (!(spec.dnu_max > 0.0) || spec.dnu_steps < 1)
        throw std::invalid_argument("invalid window scan settings");
    if (spec.experiment == "partition-scan") {
        if (spec.theta.size() != 1)
            throw std::invalid_argument("partition-scan takes a single theta");
        if (!(spec.theta[0] > 0.0) || !(spec.theta[0] < kPi / 2.0))
            throw std::invalid_argument(
                "partition-scan needs theta in (0, pi/2)");
        if (spec.dnu_max > spec.bandwidth)
            throw std::invalid_argument(
                "window scan must stay inside the band");
    }
    if (spec.t_max < 0.0) {
        const bool ww_clock = spec.experiment == "ww-evolution" ||
                              (spec.experiment == "invariant" &&
                               spec.model == "ww");
        spec.t_max = ww_clock ? 5.0 : kPi;
    }
}

std::string resolved_spec_json(const SweepSpec& spec) {
    nlohmann::json j;
    j["experiment"] = spec.experiment;
    j["theta"] = spec.theta;
    j["t_max"] = spec.t_max;
    j["steps"] = spec.steps;
    j["model"] = spec.model;
    j["J"] = spec.J;
    j["modes"] = spec.modes;
    j["gamma"] = spec.gamma;
    j["bandwidth"] = spec.bandwidth;
    j["ge_restarts"] = spec.ge_restarts;
    j["ge_max_sweeps"] = spec.ge_max_sweeps;
    j["ge_tolerance"] = spec.ge_tolerance;
    j["discord_grid"] = spec.discord_grid;
    j["discord_tolerance"] = spec.discord_tolerance;
    j["dnu_max"] = spec.dnu_max;
    j["dnu_steps"] = spec.dnu_steps;
    j["seed"] = spec.seed;
    // workers, format, and out shape delivery, not results, and are left
    // out so identical experiments produce identical bytes
    return j.dump();
}

Table run_sweep(const SweepSpec& spec_in) {
    SweepSpec spec = spec_in;
    finalize_spec(spec);
    Table t;
    if (spec.experiment == "jc-evolution")
        run_jc(spec, t);
    else if (spec.experiment == "ww-evolution")
        run_ww(spec, t);
    else if (spec.experiment == "invariant")
        run_invariant(spec, t);
    else if (spec.experiment == "hierarchy")
        run_hierarchy(spec, t);
    else if (spec.experiment == "age4-surface")
        run_age4(spec, t);
    else if (spec.experiment == "discord")
        run_discord(spec, t);
    else
        run_partition_scan(spec, t);
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size())
            throw std::runtime_error("row width does not match columns");
        for (double v : row)
            if (!std::isfinite(v))
                throw std::runtime_error("sweep produced a non-finite value");
    }
    return t;
}

std::string render_csv(const Table& table) {
    std::string out;
    for (const auto& [k, v] : table.metadata)
        out += "# " + k + " = " + v + "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out += ',';
        out += table.columns[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += fmt(row[i]);
        }
        out += '\n';
    }
    return out;
}

std::string render_json(const Table& table) {
    nlohmann::json j;
    j["metadata"] = nlohmann::json::object();
    for (const auto& [k, v] : table.metadata) {
        if (k == "spec")
            j["spec"] = nlohmann::json::parse(v);
        else
            j["metadata"][k] = v;
    }
    j["columns"] = table.columns;
    j["rows"] = table.rows;
    return j.dump(2) + "\n";
}

void run_to_output(const SweepSpec& spec) {
    const Table t = run_sweep(spec);
    const std::string body =
        spec.format == "json" ? render_json(t) : render_csv(t);
    if (spec.out.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream f(spec.out, std::ios::binary);
    if (!f) throw std::invalid_argument("cannot open output file: " + spec.out);
    f << body;
    if (!f) throw std::runtime_error("failed writing output file: " + spec.out);
}

}  // namespace esd
