// nanonmr — Fisher-information planning, simulation and estimation for
// correlation-limited nano-NMR protocols (correlation spectroscopy vs
// sequential phase-sensitive sampling).
//
// Subcommands: envelope, fisher, ratio-map, optimize, undersample,
// simulate, estimate, pipeline, ingest. Every physical flag accepts a unit
// suffix (25us, 100h, 2MHz, 1G). Exit codes: 0 ok, 1 usage/config error,
// 2 numeric failure. Errors are mirrored as JSON on stderr.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "nanonmr/envelopes.hpp"
#include "nanonmr/estimate.hpp"
#include "nanonmr/fisher.hpp"
#include "nanonmr/io.hpp"
#include "nanonmr/protocol.hpp"
#include "nanonmr/rng.hpp"
#include "nanonmr/simulate.hpp"
#include "nanonmr/units.hpp"

using nlohmann::json;
using namespace nanonmr;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi_v<double>;

// String-typed option with config-file fallback: command line beats config
// beats built-in default.
class Args {
public:
    Args(CLI::App* cmd, json cfg) : cmd_(cmd), cfg_(std::move(cfg)) {}

    std::string& bind(const std::string& flag, std::string def, const std::string& help)
    {
        values_.push_back(std::move(def));
        std::string& slot = values_.back();
        CLI::Option* opt = cmd_->add_option("--" + flag, slot, help);
        bound_.push_back({flag, opt, &slot});
        return slot;
    }

    void resolve() const
    {
        for (const auto& b : bound_) {
            if (b.opt->count() > 0)
                continue;
            if (!cfg_.contains(b.flag))
                continue;
            const json& v = cfg_.at(b.flag);
            *b.slot = v.is_string() ? v.get<std::string>() : v.dump();
        }
    }

private:
    struct Binding {
        std::string flag;
        CLI::Option* opt;
        std::string* slot;
    };
    CLI::App* cmd_;
    json cfg_;
    std::deque<std::string> values_;
    std::vector<Binding> bound_;
};

json load_config(int argc, char** argv)
{
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            std::ifstream in(argv[i + 1]);
            if (!in)
                throw std::invalid_argument(std::string("cannot open config ") + argv[i + 1]);
            json cfg;
            in >> cfg;
            if (!cfg.is_object())
                throw std::invalid_argument("config must be a JSON object");
            return cfg;
        }
    }
    return json::object();
}

struct Range {
    double from = 0.0;
    double to = 0.0;
    long count = 0;
};

Range parse_range(const std::string& text, double (*unit)(const std::string&))
{
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw std::invalid_argument("range must be from:to:count, got '" + text + "'");
    Range r;
    r.from = unit(text.substr(0, c1));
    r.to = unit(text.substr(c1 + 1, c2 - c1 - 1));
    r.count = std::stol(text.substr(c2 + 1));
    if (r.count < 1)
        throw std::invalid_argument("range count must be >= 1");
    return r;
}

std::vector<double> range_values(const Range& r, bool log_scale)
{
    std::vector<double> v(static_cast<std::size_t>(r.count));
    if (r.count == 1) {
        v[0] = r.from;
        return v;
    }
    if (log_scale) {
        if (!(r.from > 0.0 && r.to > 0.0))
            throw std::invalid_argument("log-scaled range needs positive endpoints");
        const double llo = std::log(r.from), lhi = std::log(r.to);
        for (long i = 0; i < r.count; ++i)
            v[static_cast<std::size_t>(i)] =
                std::exp(llo + (lhi - llo) * static_cast<double>(i)
                                   / static_cast<double>(r.count - 1));
    } else {
        for (long i = 0; i < r.count; ++i)
            v[static_cast<std::size_t>(i)] =
                r.from + (r.to - r.from) * static_cast<double>(i)
                             / static_cast<double>(r.count - 1);
    }
    return v;
}

EnvelopeKind parse_envelope(const std::string& name)
{
    if (name == "power-law")
        return EnvelopeKind::PowerLawDiffusion;
    if (name == "exp" || name == "exponential")
        return EnvelopeKind::Exponential;
    throw std::invalid_argument("unknown envelope '" + name + "' (power-law|exp)");
}

std::ostream& open_output(const std::string& path, std::ofstream& file)
{
    if (path == "-")
        return std::cout;
    file.open(path);
    if (!file)
        throw std::runtime_error("cannot open output " + path);
    return file;
}

void emit_json(const std::string& out_path, const json& doc)
{
    std::ofstream file;
    std::ostream& out = open_output(out_path, file);
    out << doc.dump(2) << "\n";
}

json warnings_json(const Warnings& w)
{
    json arr = json::array();
    for (const auto& m : w.messages)
        arr.push_back(m);
    return arr;
}

// shared model/readout/timing flag group
struct PhysicsFlags {
    std::string* phi_rms = nullptr;
    std::string* f_delta = nullptr;
    std::string* t_d = nullptr;
    std::string* envelope = nullptr;
    std::string* eta0 = nullptr;
    std::string* eta1 = nullptr;
    std::string* tau = nullptr;
    std::string* tau_o = nullptr;
    std::string* total_time = nullptr;

    void bind(Args& args)
    {
        phi_rms = &args.bind("phi-rms", "1", "rms phase per acquisition, rad");
        f_delta = &args.bind("f-delta", "100Hz", "frequency offset delta/2pi");
        t_d = &args.bind("t-d", "100us", "diffusion/correlation time");
        envelope = &args.bind("envelope", "power-law", "correlation envelope: power-law|exp");
        eta0 = &args.bind("eta0", "0.04", "expected photons per readout, state |0>");
        eta1 = &args.bind("eta1", "0.03", "expected photons per readout, state |1>");
        tau = &args.bind("tau", "10us", "phase acquisition duration");
        tau_o = &args.bind("tau-o", "15us", "per-measurement overhead");
        total_time = &args.bind("total-time", "1h", "experiment duration T");
    }

    CorrelationModel model() const
    {
        CorrelationModel m;
        m.phi_rms = parse_number(*phi_rms);
        m.delta = kTwoPi * parse_frequency(*f_delta);
        m.t_d = parse_time(*t_d);
        m.kind = parse_envelope(*envelope);
        return m;
    }
    ReadoutParams readout() const
    {
        return {parse_number(*eta0), parse_number(*eta1)};
    }
    ProtocolTiming timing() const
    {
        return {parse_time(*tau), parse_time(*tau_o), parse_time(*total_time)};
    }
};

}  // namespace

// --------------------------------------------------------------------------

static int run(int argc, char** argv)
{
    CLI::App app{"Fisher-information planning and estimation for nano-NMR protocols"};
    app.require_subcommand(1);
    app.fallthrough(true);
    const json cfg = load_config(argc, argv);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config supplying defaults for flags");

    std::deque<Args> arg_sets;

    // ---- envelope ----
    auto* cmd_env = app.add_subcommand("envelope", "tabulate a correlation envelope as CSV");
    Args& a_env = arg_sets.emplace_back(cmd_env, cfg);
    std::string& env_kind = a_env.bind("kind", "power-law", "power-law|exp");
    std::string& env_z = a_env.bind("z", "0:10:101", "z grid from:to:count (dimensionless)");
    std::string& env_out = a_env.bind("out", "-", "output path or -");
    cmd_env->callback([&] {
        a_env.resolve();
        const EnvelopeKind kind = parse_envelope(env_kind);
        const Range r = parse_range(env_z, +[](const std::string& s) { return parse_number(s); });
        std::ofstream file;
        std::ostream& out = open_output(env_out, file);
        out << "z,C\n";
        for (double z : range_values(r, false)) {
            const double c = kind == EnvelopeKind::PowerLawDiffusion ? envelope_power_law(z)
                                                                     : envelope_exponential(z);
            out << format_double(z) << "," << format_double(c) << "\n";
        }
    });

    // ---- fisher ----
    auto* cmd_fisher = app.add_subcommand("fisher", "total or single-measurement information");
    Args& a_fis = arg_sets.emplace_back(cmd_fisher, cfg);
    PhysicsFlags fis_phys;
    fis_phys.bind(a_fis);
    std::string& fis_protocol = a_fis.bind("protocol", "qdyne", "cs|qdyne");
    std::string& fis_method = a_fis.bind(
        "method", "quadrature",
        "quadrature|sum|closed-powerlaw|closed-powerlaw-small-delta|closed-exp|"
        "closed-exp-small-delta|single");
    std::string& fis_t = a_fis.bind("t", "100us", "separation t for method=single");
    std::string& fis_out = a_fis.bind("out", "-", "output path or -");
    cmd_fisher->callback([&] {
        a_fis.resolve();
        const CorrelationModel model = fis_phys.model();
        const ReadoutParams readout = fis_phys.readout();
        const ProtocolTiming timing = fis_phys.timing();
        const bool qdyne = fis_protocol == "qdyne";
        if (!qdyne && fis_protocol != "cs")
            throw std::invalid_argument("protocol must be cs or qdyne");
        Warnings warnings;

        json doc{{"protocol", fis_protocol}, {"method", fis_method}};
        if (fis_method == "single") {
            const double t = parse_time(fis_t);
            doc["t_s"] = t;
            doc["value"] = qdyne ? fisher_single_qdyne(model, readout, t)
                                 : fisher_single_cs(model, readout, t);
        } else {
            FisherResult r;
            if (fis_method == "quadrature")
                r = qdyne ? fisher_total_qdyne_numeric(model, readout, timing, &warnings)
                          : fisher_total_cs_numeric(model, readout, timing, &warnings);
            else if (fis_method == "sum")
                r = qdyne ? fisher_total_qdyne_sum(model, readout, timing)
                          : fisher_total_cs_sum(model, readout, timing);
            else if (fis_method == "closed-powerlaw")
                r = qdyne
                        ? fisher_total_qdyne_closed_powerlaw(model, readout, timing, &warnings)
                        : fisher_total_cs_closed_powerlaw(model, readout, timing);
            else if (fis_method == "closed-powerlaw-small-delta" && !qdyne)
                r = fisher_total_cs_closed_powerlaw(model, readout, timing, true);
            else if (fis_method == "closed-exp")
                r = qdyne ? fisher_total_qdyne_closed_exponential(model, readout, timing)
                          : fisher_total_cs_closed_exponential(model, readout, timing);
            else if (fis_method == "closed-exp-small-delta")
                r = qdyne ? fisher_total_qdyne_closed_exponential(model, readout, timing, true)
                          : fisher_total_cs_closed_exponential(model, readout, timing, true);
            else
                throw std::invalid_argument("unknown method '" + fis_method + "'");
            doc["value_s2"] = r.value;
            doc["abs_error_estimate"] = r.abs_error_estimate;
            doc["converged"] = r.converged;
            doc["resolvable"] =
                model.delta > 0.0 ? rayleigh_resolvable(r.value, model.delta) : false;
        }
        doc["warnings"] = warnings_json(warnings);
        emit_json(fis_out, doc);
    });

    // ---- ratio-map ----
    auto* cmd_map = app.add_subcommand("ratio-map", "R_delta over a 2-axis parameter plane");
    Args& a_map = arg_sets.emplace_back(cmd_map, cfg);
    PhysicsFlags map_phys;
    map_phys.bind(a_map);
    std::string& map_x_axis = a_map.bind("x-axis", "delta",
                                         "delta|t-d|tau-tilde|chi|total-time");
    std::string& map_x = a_map.bind("x-range", "10Hz:10kHz:25", "x axis from:to:count");
    std::string& map_x_scale = a_map.bind("x-scale", "log", "log|linear");
    std::string& map_y_axis = a_map.bind("y-axis", "total-time", "second axis");
    std::string& map_y = a_map.bind("y-range", "1h:100h:9", "y axis from:to:count");
    std::string& map_y_scale = a_map.bind("y-scale", "log", "log|linear");
    std::string& map_couple = a_map.bind("couple-delta-td", "",
                                         "slave delta to T_D: (delta/2pi)*T_D product");
    std::string& map_out = a_map.bind("out", "-", "output path or -");
    cmd_map->callback([&] {
        a_map.resolve();
        GridSpec spec;
        spec.model = map_phys.model();
        spec.readout_cs = map_phys.readout();
        spec.readout_qd = map_phys.readout();
        spec.timing_cs = map_phys.timing();
        spec.timing_qd = map_phys.timing();

        const auto axis_of = [](const std::string& name) -> SweepAxis {
            if (name == "delta")
                return SweepAxis::Delta;
            if (name == "t-d")
                return SweepAxis::TDiffusion;
            if (name == "tau-tilde")
                return SweepAxis::TauTilde;
            if (name == "chi")
                return SweepAxis::Chi;
            if (name == "total-time")
                return SweepAxis::TotalTime;
            throw std::invalid_argument("unknown axis '" + name + "'");
        };
        const auto axis_unit = [](SweepAxis ax) -> double (*)(const std::string&) {
            switch (ax) {
            case SweepAxis::Delta:
                return +[](const std::string& s) { return parse_frequency(s); };
            case SweepAxis::Chi:
                return +[](const std::string& s) { return parse_number(s); };
            default:
                return +[](const std::string& s) { return parse_time(s); };
            }
        };
        // delta axis: CLI speaks ordinary frequency, the library rad/s
        const auto axis_internal = [](SweepAxis ax, double v) {
            return ax == SweepAxis::Delta ? kTwoPi * v : v;
        };
        const auto axis_cli = [](SweepAxis ax, double v) {
            return ax == SweepAxis::Delta ? v / kTwoPi : v;
        };

        spec.x_axis = axis_of(map_x_axis);
        spec.y_axis = axis_of(map_y_axis);
        for (double v : range_values(parse_range(map_x, axis_unit(spec.x_axis)),
                                     map_x_scale == "log"))
            spec.x_values.push_back(axis_internal(spec.x_axis, v));
        for (double v : range_values(parse_range(map_y, axis_unit(spec.y_axis)),
                                     map_y_scale == "log"))
            spec.y_values.push_back(axis_internal(spec.y_axis, v));
        if (!map_couple.empty())
            spec.delta_td_product = parse_number(map_couple);

        const GridMap map = grid_map(spec);
        std::ofstream file;
        std::ostream& out = open_output(map_out, file);
        out << "x,y,R_delta,I_cs,I_qd,resolvable_cs,resolvable_qd\n";
        for (const auto& cell : map.cells) {
            out << format_double(axis_cli(spec.x_axis, cell.x)) << ","
                << format_double(axis_cli(spec.y_axis, cell.y)) << ","
                << format_double(cell.r_delta) << "," << format_double(cell.i_cs) << ","
                << format_double(cell.i_qd) << "," << (cell.resolvable_cs ? 1 : 0) << ","
                << (cell.resolvable_qd ? 1 : 0) << "\n";
        }
    });

    // ---- optimize ----
    auto* cmd_opt = app.add_subcommand("optimize", "optimal DD duration tau");
    Args& a_opt = arg_sets.emplace_back(cmd_opt, cfg);
    std::string& opt_objective = a_opt.bind("objective", "snr-rate", "signal|snr-rate");
    std::string& opt_t2 = a_opt.bind("t2", "inf", "sensor coherence time (or inf)");
    std::string& opt_td = a_opt.bind("t-d", "inf", "diffusion time (or inf)");
    std::string& opt_envelope = a_opt.bind("envelope", "power-law", "power-law|exp");
    std::string& opt_tau_o = a_opt.bind("tau-o", "0s", "overhead time");
    std::string& opt_eta0 = a_opt.bind("eta0", "0.04", "photons, state |0>");
    std::string& opt_eta1 = a_opt.bind("eta1", "0.03", "photons, state |1>");
    std::string& opt_brms = a_opt.bind("b-rms", "", "rms field at the sensor");
    std::string& opt_depth = a_opt.bind("depth", "", "sensor depth (with --spin-density)");
    std::string& opt_density = a_opt.bind("spin-density", "", "nuclear spins per m^3");
    std::string& opt_gamma = a_opt.bind("gamma-sensor", "1.76085963023e11",
                                        "sensor gyromagnetic ratio, rad/s/T");
    std::string& opt_lo = a_opt.bind("tau-min", "100ns", "lower search bound");
    std::string& opt_hi = a_opt.bind("tau-max", "5ms", "upper search bound");
    std::string& opt_window = a_opt.bind(
        "readout-window", "", "optimize the photon collection window from a "
                              "t_ns,counts0,counts1 CSV instead of tau");
    std::string& opt_out = a_opt.bind("out", "-", "output path or -");
    cmd_opt->callback([&] {
        a_opt.resolve();
        if (!opt_window.empty()) {
            Warnings warnings;
            const ReadoutTrace trace = read_readout_trace_csv(opt_window);
            const ReadoutWindowResult w = readout_window_optimize(trace, &warnings);
            emit_json(opt_out, json{{"t_snr_s", w.t_snr},
                                    {"t_fisher_s", w.t_fisher},
                                    {"merit_snr_max", w.merit_snr[w.index_snr]},
                                    {"merit_fisher_max", w.merit_fisher[w.index_fisher]},
                                    {"degenerate", w.degenerate},
                                    {"warnings", warnings_json(warnings)}});
            return;
        }
        SensorPhysics phys;
        phys.gamma_sensor = parse_number(opt_gamma);
        phys.t2 = (opt_t2 == "inf") ? std::numeric_limits<double>::infinity()
                                    : parse_time(opt_t2);
        if (!opt_density.empty())
            phys.spin_density = parse_number(opt_density);
        if (!opt_depth.empty())
            phys.depth = parse_length(opt_depth);
        if (!opt_brms.empty())
            phys.b_rms = parse_field(opt_brms);
        else if (!opt_depth.empty() && !opt_density.empty())
            phys.b_rms = brms_from_depth(phys.depth, phys.spin_density, phys);
        else
            throw std::invalid_argument("need --b-rms or --depth with --spin-density");
        const double t_d = (opt_td == "inf") ? std::numeric_limits<double>::infinity()
                                             : parse_time(opt_td);
        const ReadoutParams readout{parse_number(opt_eta0), parse_number(opt_eta1)};
        const TauObjective objective = (opt_objective == "signal") ? TauObjective::signal
                                                                   : TauObjective::snr_rate;
        const TauOptimum opt =
            optimize_tau(objective, phys, readout, parse_envelope(opt_envelope), t_d,
                         parse_time(opt_lo), parse_time(opt_hi), parse_time(opt_tau_o));
        emit_json(opt_out, json{{"tau_star_s", opt.tau_star},
                                {"value", opt.value},
                                {"at_boundary", opt.at_boundary},
                                {"phi_rms_at_star", phi_rms_from(opt.tau_star, phys)}});
    });

    // ---- undersample ----
    auto* cmd_us = app.add_subcommand("undersample", "undersampling time steps");
    Args& a_us = arg_sets.emplace_back(cmd_us, cfg);
    std::string& us_fl = a_us.bind("f-larmor", "2MHz", "Larmor frequency");
    std::string& us_ft = a_us.bind("f-target", "2kHz", "target undersampled frequency");
    std::string& us_n = a_us.bind("n-samples", "10", "points per undersampled period");
    std::string& us_out = a_us.bind("out", "-", "output path or -");
    cmd_us->callback([&] {
        a_us.resolve();
        const double fl = parse_frequency(us_fl);
        const double ft = parse_frequency(us_ft);
        const int n = static_cast<int>(parse_number(us_n));
        const UndersampleStep step = undersample_step(fl, ft, n);
        emit_json(us_out, json{{"t_s_min_s", undersample_min_step(fl, ft)},
                               {"k", step.k},
                               {"t_s_s", step.t_s}});
    });

    // ---- simulate ----
    auto* cmd_sim = app.add_subcommand("simulate", "synthesize photon traces / CS sweeps");
    Args& a_sim = arg_sets.emplace_back(cmd_sim, cfg);
    PhysicsFlags sim_phys;
    sim_phys.bind(a_sim);
    std::string& sim_protocol = a_sim.bind("protocol", "qdyne", "qdyne|cs");
    std::string& sim_n = a_sim.bind("n", "100000", "number of measurements");
    std::string& sim_seed = a_sim.bind("seed", "1", "RNG seed (uint64)");
    std::string& sim_count_model = a_sim.bind("count-model", "poisson", "poisson|bernoulli");
    std::string& sim_t2 = a_sim.bind("t2", "", "sensor T2 for contrast attenuation");
    std::string& sim_tau_w = a_sim.bind("tau-w", "0us:500us:26", "CS: waiting times from:to:count");
    std::string& sim_repeats = a_sim.bind("n-repeats", "10000", "CS: repeats per waiting time");
    std::string& sim_out = a_sim.bind("out", "trace.txt", "output path");
    cmd_sim->callback([&] {
        a_sim.resolve();
        if (sim_protocol == "qdyne") {
            TraceConfig config;
            config.model = sim_phys.model();
            config.readout = sim_phys.readout();
            config.timing = sim_phys.timing();
            config.n_measurements = static_cast<std::int64_t>(parse_number(sim_n));
            config.seed = static_cast<std::uint64_t>(std::stoull(sim_seed));
            config.count_model = (sim_count_model == "bernoulli") ? CountModel::Bernoulli
                                                                  : CountModel::Poisson;
            if (!sim_t2.empty())
                config.t2 = parse_time(sim_t2);
            // keep the declared total time consistent with the trace
            config.timing.total_time =
                static_cast<double>(config.n_measurements) * config.timing.tau_tilde();
            Warnings warnings;
            const PhotonTrace trace = simulate_qdyne_trace(config, &warnings);
            write_trace(sim_out, trace);
            for (const auto& w : warnings.messages)
                std::cerr << "# warning: " << w << "\n";
        } else if (sim_protocol == "cs") {
            const Range r = parse_range(sim_tau_w,
                                        +[](const std::string& s) { return parse_time(s); });
            const CsSweep sweep = simulate_cs_sweep(
                sim_phys.model(), sim_phys.readout(), sim_phys.timing().tau,
                range_values(r, false), static_cast<long>(parse_number(sim_repeats)),
                static_cast<std::uint64_t>(std::stoull(sim_seed)));
            std::ofstream file;
            std::ostream& out = open_output(sim_out, file);
            out << "tau_w_s,mean_contrast\n";
            for (std::size_t i = 0; i < sweep.tau_w_values.size(); ++i)
                out << format_double(sweep.tau_w_values[i]) << ","
                    << format_double(sweep.contrast_means[i]) << "\n";
        } else {
            throw std::invalid_argument("protocol must be qdyne or cs");
        }
    });

    // ---- estimate ----
    auto* cmd_est = app.add_subcommand("estimate", "fit autocorrelations from a trace");
    Args& a_est = arg_sets.emplace_back(cmd_est, cfg);
    std::string& est_trace = a_est.bind("trace", "trace.txt", "input trace file");
    std::string& est_max_lag = a_est.bind("max-lag", "1ms", "autocorrelation depth");
    std::string& est_block = a_est.bind("block-duration", "", "slice: block length");
    std::string& est_group = a_est.bind("group-size", "20", "slice: blocks per group");
    std::string& est_group_mode =
        a_est.bind("group-mode", "average", "slice: average|concat block combination");
    std::string& est_envelope = a_est.bind("envelope", "power-law", "fit envelope");
    std::string& est_nuisance = a_est.bind("nuisance", "0", "1: fit additive exp nuisance");
    std::string& est_starts = a_est.bind("n-starts", "100", "multistart count");
    std::string& est_seed = a_est.bind("seed", "1", "multistart seed");
    std::string& est_true_delta = a_est.bind("true-f-delta", "", "reference f_delta for rmse");
    std::string& est_ac_out = a_est.bind("ac-out", "", "also dump the autocorrelation CSV");
    std::string& est_out = a_est.bind("out", "-", "output path or -");
    cmd_est->callback([&] {
        a_est.resolve();
        const PhotonTrace trace = read_trace(est_trace);
        const double max_lag = parse_time(est_max_lag);
        const EnvelopeKind envelope = parse_envelope(est_envelope);
        const bool nuisance = parse_number(est_nuisance) != 0.0;
        const int n_starts = static_cast<int>(parse_number(est_starts));
        const auto seed = static_cast<std::uint64_t>(std::stoull(est_seed));

        const AutocorrResult full_ac = autocorrelation(trace, max_lag);
        if (!est_ac_out.empty()) {
            std::ofstream file;
            std::ostream& out = open_output(est_ac_out, file);
            out << "lag_s,value\n";
            for (std::size_t i = 0; i < full_ac.lags.size(); ++i)
                out << format_double(full_ac.lags[i]) << ","
                    << format_double(full_ac.values[i]) << "\n";
        }

        json doc;
        if (est_block.empty()) {
            const FitModelSpec spec = make_default_fit_spec(full_ac, envelope, nuisance);
            const FitResult fit = fit_autocorrelation(full_ac, spec, n_starts, seed);
            doc["fit"] = {{"params", fit.params},
                          {"param_errors", fit.param_errors},
                          {"f_delta_hz", fit.delta() / kTwoPi},
                          {"t_d_s", fit.t_d()},
                          {"r_squared", fit.r_squared},
                          {"converged", fit.converged},
                          {"n_iterations", fit.n_iterations}};
        } else {
            const GroupMode mode = (est_group_mode == "concat")
                                       ? GroupMode::ConcatenateBlocks
                                       : GroupMode::AverageAutocorrelations;
            const auto groups =
                slice_blocks(trace, parse_time(est_block),
                             static_cast<int>(parse_number(est_group)), max_lag, mode);
            const FitModelSpec spec = make_default_fit_spec(groups.front(), envelope, nuisance);
            std::optional<double> ref;
            if (!est_true_delta.empty())
                ref = kTwoPi * parse_frequency(est_true_delta);
            const EstimatorStats stats =
                estimator_distribution(groups, spec, n_starts, seed, ref);
            json est_hz = json::array();
            for (double d : stats.estimates)
                est_hz.push_back(d / kTwoPi);
            doc["stats"] = {{"n_groups", groups.size()},
                            {"estimates_f_hz", est_hz},
                            {"mean_f_hz", stats.mean / kTwoPi},
                            {"rmse_f_hz", stats.rmse / kTwoPi},
                            {"n_failed", stats.n_failed}};
        }
        emit_json(est_out, doc);
    });

    // ---- pipeline ----
    auto* cmd_pipe = app.add_subcommand(
        "pipeline", "simulate -> slice -> fit -> rmse vs Cramer-Rao, all artifacts");
    Args& a_pipe = arg_sets.emplace_back(cmd_pipe, cfg);
    PhysicsFlags pipe_phys;
    pipe_phys.bind(a_pipe);
    std::string& pipe_n = a_pipe.bind("n", "200000", "measurements per trace");
    std::string& pipe_seed = a_pipe.bind("seed", "1", "RNG seed");
    std::string& pipe_t2 = a_pipe.bind("t2", "", "sensor T2");
    std::string& pipe_block = a_pipe.bind("block-duration", "", "block length (default: eighth)");
    std::string& pipe_group = a_pipe.bind("group-size", "1", "blocks per group");
    std::string& pipe_max_lag = a_pipe.bind("max-lag", "", "fit depth (default: 8 T_D)");
    std::string& pipe_starts = a_pipe.bind("n-starts", "60", "multistart count");
    std::string& pipe_pad = a_pipe.bind("zero-pad", "4", "Fourier zero-padding factor");
    std::string& pipe_dir = a_pipe.bind("out-dir", "pipeline_out", "artifact directory");
    cmd_pipe->callback([&] {
        a_pipe.resolve();
        namespace fs = std::filesystem;
        fs::create_directories(pipe_dir);

        TraceConfig config;
        config.model = pipe_phys.model();
        config.readout = pipe_phys.readout();
        config.timing = pipe_phys.timing();
        config.n_measurements = static_cast<std::int64_t>(parse_number(pipe_n));
        config.seed = static_cast<std::uint64_t>(std::stoull(pipe_seed));
        if (!pipe_t2.empty())
            config.t2 = parse_time(pipe_t2);
        config.timing.total_time =
            static_cast<double>(config.n_measurements) * config.timing.tau_tilde();

        Warnings warnings;
        const PhotonTrace trace = simulate_qdyne_trace(config, &warnings);
        write_trace((fs::path(pipe_dir) / "trace.txt").string(), trace);

        const double max_lag =
            pipe_max_lag.empty() ? 8.0 * config.model.t_d : parse_time(pipe_max_lag);
        const double block =
            pipe_block.empty() ? trace.duration() / 8.0 : parse_time(pipe_block);
        const int group = static_cast<int>(parse_number(pipe_group));
        const int n_starts = static_cast<int>(parse_number(pipe_starts));

        const AutocorrResult full_ac = autocorrelation(trace, max_lag);
        {
            std::ofstream out(fs::path(pipe_dir) / "autocorr.csv");
            out << "lag_s,value\n";
            for (std::size_t i = 0; i < full_ac.lags.size(); ++i)
                out << format_double(full_ac.lags[i]) << ","
                    << format_double(full_ac.values[i]) << "\n";
        }

        const auto groups = slice_blocks(trace, block, group, max_lag);
        FitModelSpec spec = make_default_fit_spec(groups.front(), config.model.kind, false);
        // narrow the frequency search band around the spectral peak; the
        // Nyquist-wide default needs far more starts to lock reliably
        try {
            const FourierBaseline seed_fb = fourier_baseline(full_ac, 8);
            const double center = kTwoPi * seed_fb.peak_frequency;
            spec.delta = {0.5 * center, std::min(1.5 * center, spec.delta.upper)};
        } catch (const std::exception&) {
        }

        json fits = json::array();
        std::vector<double> r2s;
        for (std::size_t i = 0; i < groups.size(); ++i) {
            const FitResult fit = fit_autocorrelation(groups[i], spec, n_starts,
                                                      split_seed(config.seed, 1000 + i));
            r2s.push_back(fit.r_squared);
            fits.push_back({{"group", i},
                            {"f_delta_hz", fit.delta() / kTwoPi},
                            {"t_d_s", fit.t_d()},
                            {"amp", fit.amp()},
                            {"r_squared", fit.r_squared},
                            {"converged", fit.converged}});
        }
        {
            std::ofstream out(fs::path(pipe_dir) / "fits.json");
            out << fits.dump(2) << "\n";
        }

        const EstimatorStats stats = estimator_distribution(
            groups, spec, n_starts, split_seed(config.seed, 999), config.model.delta);

        const FisherResult info =
            fisher_total_qdyne_numeric(config.model, config.readout, config.timing, &warnings);
        const double crb = info.value > 0.0 ? 1.0 / std::sqrt(info.value)
                                            : std::numeric_limits<double>::infinity();

        json stats_doc{{"n_groups", groups.size()},
                       {"rmse_f_hz", stats.rmse / kTwoPi},
                       {"crb_f_hz", crb / kTwoPi},
                       {"rmse_over_crb", stats.rmse * std::sqrt(std::max(info.value, 0.0))},
                       {"i_delta_s2", info.value},
                       {"true_f_delta_hz", config.model.delta / kTwoPi},
                       {"n_failed", stats.n_failed},
                       {"warnings", warnings_json(warnings)}};

        // signal presence: pure-noise autocorrelations fit with tiny R^2
        std::sort(r2s.begin(), r2s.end());
        const double median_r2 = r2s.empty() ? 0.0 : r2s[r2s.size() / 2];
        stats_doc["median_r_squared"] = median_r2;
        stats_doc["no_signal_detected"] = median_r2 < 0.2;

        try {
            const FourierBaseline fb =
                fourier_baseline(full_ac, static_cast<int>(parse_number(pipe_pad)));
            stats_doc["fourier_peak_f_hz"] = fb.peak_frequency;
            stats_doc["fourier_half_fwhm_hz"] = fb.half_fwhm;
        } catch (const std::exception& e) {
            stats_doc["fourier_error"] = e.what();
        }
        {
            std::ofstream out(fs::path(pipe_dir) / "stats.json");
            out << stats_doc.dump(2) << "\n";
        }
    });

    // ---- ingest ----
    auto* cmd_ing = app.add_subcommand("ingest", "bin photon time tags into a trace");
    Args& a_ing = arg_sets.emplace_back(cmd_ing, cfg);
    std::string& ing_tags = a_ing.bind("timetags", "tags.txt", "time tag file (ns per line)");
    std::string& ing_tau = a_ing.bind("tau-tilde", "25us", "measurement period");
    std::string& ing_off = a_ing.bind("window-offset", "0s", "collection window start");
    std::string& ing_len = a_ing.bind("window-length", "1us", "collection window length");
    std::string& ing_n = a_ing.bind("n", "0", "measurement count (0: infer from last tag)");
    std::string& ing_out = a_ing.bind("out", "trace.txt", "output trace path");
    cmd_ing->callback([&] {
        a_ing.resolve();
        const auto tags = read_timetags(ing_tags);
        const PhotonTrace trace = ingest_timetags(
            tags, parse_time(ing_tau), parse_time(ing_off), parse_time(ing_len),
            static_cast<std::int64_t>(parse_number(ing_n)));
        write_trace(ing_out, trace);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        json err{{"error", {{"type", "usage"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}

int main(int argc, char** argv)
{
    try {
        return run(argc, argv);
    } catch (const std::invalid_argument& e) {
        json err{{"error", {{"type", "config"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        json err{{"error", {{"type", "domain"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        json err{{"error", {{"type", "numeric"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 2;
    }
}
