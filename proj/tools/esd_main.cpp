#include "esd/sweep.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

struct FlagSet {
    std::optional<std::string> theta;
    std::optional<double> t_max;
    std::optional<int> steps;
    std::optional<std::string> model;
    std::optional<double> J;
    std::optional<int> modes;
    std::optional<double> gamma;
    std::optional<double> bandwidth;
    std::optional<int> ge_restarts;
    std::optional<int> ge_max_sweeps;
    std::optional<double> ge_tolerance;
    std::optional<int> discord_grid;
    std::optional<double> discord_tolerance;
    std::optional<double> dnu_max;
    std::optional<int> dnu_steps;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> format;
    std::optional<std::string> out;
    std::optional<std::string> config;
    bool age4_surface = false;
};

std::vector<double> parse_theta_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad theta value: " + item);
        }
        while (used < item.size() &&
               std::isspace(static_cast<unsigned char>(item[used])) != 0)
            ++used;
        if (used != item.size())
            throw std::invalid_argument("bad theta value: " + item);
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty theta list");
    return out;
}

void add_common(CLI::App* cmd, FlagSet& f) {
    cmd->add_option("--theta", f.theta,
                    "preparation angle(s), radians, comma separated");
    cmd->add_option("--t-max", f.t_max, "scaled time horizon");
    cmd->add_option("--steps", f.steps, "time grid steps (steps+1 points)");
    cmd->add_option("--seed", f.seed, "seed for every stochastic search");
    cmd->add_option("--workers", f.workers, "worker threads");
    cmd->add_option("--format", f.format, "csv or json");
    cmd->add_option("--out", f.out, "output path (default stdout)");
    cmd->add_option("--config", f.config, "JSON config file");
}

void add_band(CLI::App* cmd, FlagSet& f) {
    cmd->add_option("--modes", f.modes, "number of band modes");
    cmd->add_option("--gamma", f.gamma, "band decay rate");
    cmd->add_option("--bandwidth", f.bandwidth,
                    "band half width in units of gamma");
}

void overlay(esd::SweepSpec& spec, const FlagSet& f) {
    if (f.theta) spec.theta = parse_theta_list(*f.theta);
    if (f.t_max) spec.t_max = *f.t_max;
    if (f.steps) spec.steps = *f.steps;
    if (f.model) spec.model = *f.model;
    if (f.J) spec.J = *f.J;
    if (f.modes) spec.modes = *f.modes;
    if (f.gamma) spec.gamma = *f.gamma;
    if (f.bandwidth) spec.bandwidth = *f.bandwidth;
    if (f.ge_restarts) spec.ge_restarts = *f.ge_restarts;
    if (f.ge_max_sweeps) spec.ge_max_sweeps = *f.ge_max_sweeps;
    if (f.ge_tolerance) spec.ge_tolerance = *f.ge_tolerance;
    if (f.discord_grid) spec.discord_grid = *f.discord_grid;
    if (f.discord_tolerance) spec.discord_tolerance = *f.discord_tolerance;
    if (f.dnu_max) spec.dnu_max = *f.dnu_max;
    if (f.dnu_steps) spec.dnu_steps = *f.dnu_steps;
    if (f.seed) spec.seed = *f.seed;
    if (f.workers) spec.workers = *f.workers;
    if (f.format) spec.format = *f.format;
    if (f.out) spec.out = *f.out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"entanglement sweeps for coupled atom-field pairs"};
    app.require_subcommand(1);
    FlagSet f;
    std::string experiment;

    auto* jc = app.add_subcommand("jc", "closed-form pair evolution");
    add_common(jc, f);
    jc->add_option("--J", f.J, "exchange coupling");
    jc->callback([&] { experiment = "jc-evolution"; });

    auto* ww = app.add_subcommand("ww", "discretized-band decay");
    add_common(ww, f);
    add_band(ww, f);
    ww->callback([&] { experiment = "ww-evolution"; });

    auto* inv = app.add_subcommand("invariant", "conserved-sum table");
    add_common(inv, f);
    inv->add_option("--model", f.model, "jc or ww");
    inv->add_option("--J", f.J, "exchange coupling");
    add_band(inv, f);
    inv->callback([&] { experiment = "invariant"; });

    auto* hier = app.add_subcommand("hierarchy", "geometric entanglement ladder");
    add_common(hier, f);
    hier->add_option("--restarts", f.ge_restarts, "search restarts");
    hier->add_option("--max-sweeps", f.ge_max_sweeps, "sweep cap per restart");
    hier->add_option("--ge-tol", f.ge_tolerance, "overlap tolerance");
    hier->add_flag("--age4-surface", f.age4_surface,
                   "sweep only the finest-level energy over theta and t");
    hier->callback([&] { experiment = "hierarchy"; });

    auto* dis = app.add_subcommand("discord", "pair discord columns");
    add_common(dis, f);
    dis->add_option("--grid", f.discord_grid, "measurement grid per angle");
    dis->add_option("--tol", f.discord_tolerance, "refinement tolerance");
    dis->callback([&] { experiment = "discord"; });

    auto* scan = app.add_subcommand("partition-scan",
                                    "detector-window entanglement scan");
    add_common(scan, f);
    add_band(scan, f);
    scan->add_option("--dnu-max", f.dnu_max,
                     "largest window half width, units of gamma");
    scan->add_option("--dnu-steps", f.dnu_steps, "window grid steps");
    scan->callback([&] { experiment = "partition-scan"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "invalid arguments: " << e.what() << "\n";
        return 2;
    }

    try {
        esd::SweepSpec spec = esd::default_spec(experiment);
        if (f.config) {
            esd::apply_json_overrides(spec, read_file(*f.config));
            const bool compatible =
                spec.experiment == experiment ||
                (experiment == "hierarchy" &&
                 spec.experiment == "age4-surface");
            if (!compatible)
                throw std::invalid_argument(
                    "config experiment '" + spec.experiment +
                    "' does not match the command");
        }
        overlay(spec, f);
        if (f.age4_surface) spec.experiment = "age4-surface";
        esd::run_to_output(spec);
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid spec: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
