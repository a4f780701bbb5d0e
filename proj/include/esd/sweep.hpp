#pragma once

#include "esd/dynamics.hpp"
#include "esd/geoment.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace esd {

// One fully resolved run request.  Unset time horizons are marked by a
// negative t_max and filled in by finalize_spec according to the
// experiment and model.
struct SweepSpec {
    std::string experiment = "jc-evolution";
    std::vector<double> theta;
    double t_max = -1.0;
    int steps = 64;
    std::string model = "jc";  // invariant experiment: jc or ww

    double J = 1.0;           // exchange coupling of the pair model

    int modes = 1000;         // discretized band
    double gamma = 1.0;
    double bandwidth = 40.0;  // W in units of gamma

    int ge_restarts = 32;     // product-overlap search
    int ge_max_sweeps = 500;
    double ge_tolerance = 1e-10;

    int discord_grid = 64;    // measurement search
    double discord_tolerance = 1e-6;

    double dnu_max = 3.0;     // window scan, units of gamma
    int dnu_steps = 120;

    std::uint64_t seed = 0;
    int workers = 1;
    std::string format = "csv";  // csv or json
    std::string out;             // empty writes to stdout
};

struct Table {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

// defaults for a named experiment; throws on an unknown name
SweepSpec default_spec(const std::string& experiment);

// overlay settings from a JSON object onto a spec; unknown keys throw
void apply_json_overrides(SweepSpec& spec, const std::string& json_text);

// fill derived defaults (e.g. the time horizon) and validate everything
void finalize_spec(SweepSpec& spec);

// every setting materialized, keys sorted, for reproducibility headers
std::string resolved_spec_json(const SweepSpec& spec);

// run the experiment; the row set is a pure function of the spec and in
// particular does not depend on the worker count
Table run_sweep(const SweepSpec& spec);

std::string render_csv(const Table& table);
std::string render_json(const Table& table);

// run, render, and write to spec.out or stdout
void run_to_output(const SweepSpec& spec);

}  // namespace esd
