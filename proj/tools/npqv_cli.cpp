// npqv: command-line front end.
//
// Data goes to stdout (or --out); progress and human-readable summaries go to
// stderr. Exit codes: 0 success, 2 invalid input or refusal, 3 promise
// violation.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "npqv/npqv.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitPromise = 3;

// Values from --config fill options that were not given on the command line.
// Top-level scalars apply to every subcommand; an object keyed by the
// subcommand name overrides them for that subcommand.
void merge_config(CLI::App& sub, const json& config) {
    std::map<std::string, json> values;
    for (const auto& [key, value] : config.items()) {
        if (!value.is_object()) {
            values[key] = value;
        }
    }
    if (config.contains(sub.get_name()) && config[sub.get_name()].is_object()) {
        for (const auto& [key, value] : config[sub.get_name()].items()) {
            values[key] = value;
        }
    }
    for (auto* opt : sub.get_options()) {
        const auto name = opt->get_single_name();
        const auto it = values.find(name);
        if (it == values.end() || opt->count() > 0) {
            continue;
        }
        if (it->second.is_array()) {
            for (const auto& v : it->second) {
                opt->add_result(v.is_string() ? v.get<std::string>() : v.dump());
            }
        } else if (it->second.is_boolean()) {
            opt->add_result(it->second.get<bool>() ? "true" : "false");
        } else {
            opt->add_result(it->second.is_string() ? it->second.get<std::string>() : it->second.dump());
        }
        opt->run_callback();
    }
}

void require(CLI::App& sub, const std::string& name) {
    if (sub.get_option("--" + name)->count() == 0) {
        throw npqv::InputError("--" + name + " is required (on the command line or in --config)");
    }
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) {
                throw npqv::InputError("cannot open '" + path + "' for writing");
            }
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

npqv::Formula load_formula(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw npqv::InputError("cannot open instance '" + path + "'");
    }
    return npqv::parse_formula(in);
}

// "a:b:step" (inclusive, tolerant to rounding) or a comma-separated list.
std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    auto number = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) {
                throw std::invalid_argument(s);
            }
            return v;
        } catch (const std::exception&) {
            throw npqv::InputError("bad grid value '" + s + "'");
        }
    };
    if (std::count(text.begin(), text.end(), ':') == 2) {
        const auto a = text.find(':');
        const auto b = text.find(':', a + 1);
        const double lo = number(text.substr(0, a));
        const double hi = number(text.substr(a + 1, b - a - 1));
        const double step = number(text.substr(b + 1));
        if (!(step > 0.0) || hi < lo) {
            throw npqv::InputError("grid range needs lo <= hi and step > 0");
        }
        const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
        for (std::size_t i = 0; i <= count; ++i) {
            grid.push_back(lo + static_cast<double>(i) * step);
        }
        return grid;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        grid.push_back(number(item));
    }
    return grid;
}

struct ProtocolFlags {
    npqv::ProtocolParams p;
    std::size_t m = 0;  // 0 means m = n

    void add(CLI::App& sub) {
        sub.add_option("--n", p.n, "number of variables / pulses")->capture_default_str();
        sub.add_option("--m", m, "number of clauses (default n)");
        sub.add_option("--mu", p.optical.mu, "mean photon number per pulse")->capture_default_str();
        sub.add_option("--nu", p.optical.nu, "interference visibility")->capture_default_str();
        sub.add_option("--delta", p.delta, "promised unsatisfiable fraction")->capture_default_str();
        sub.add_option("--dark", p.optical.p_dark, "dark-count probability per detector")->capture_default_str();
        sub.add_option("--gamma", p.gamma, "classical exponent per missing bit")->capture_default_str();
        sub.add_option("--c-min", p.targets.c_min, "completeness target")->capture_default_str();
        sub.add_option("--s-max", p.targets.s_max, "soundness target")->capture_default_str();
    }

    npqv::ProtocolParams resolve() const {
        auto q = p;
        q.m = m == 0 ? p.n : m;
        q.validate();
        return q;
    }
};

json bounds_json(const npqv::ProtocolParams& p) {
    json j = npqv::analyze(p);
    j["n"] = p.n;
    j["m"] = p.m;
    j["mu"] = p.optical.mu;
    j["nu"] = p.optical.nu;
    j["delta"] = p.delta;
    j["p_dark"] = p.optical.p_dark;
    j["meets_targets"] = npqv::meets_targets(npqv::analyze(p), p.targets);
    return j;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator for a photonic NP verification protocol based on 2-out-of-4 SAT"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON file with default flag values")->check(CLI::ExistingFile);

    std::string out_path;
    std::uint64_t seed = 0;
    unsigned threads = 0;

    // gen-instance
    auto* gen = app.add_subcommand("gen-instance", "generate a balanced planted 2-out-of-4 SAT instance");
    std::size_t gen_n = 0;
    std::size_t gen_degree = npqv::kDefaultDegree;
    std::uint32_t gen_delta_milli = npqv::kDefaultDeltaMilli;
    std::size_t gen_unsat = 0;
    std::size_t gen_copies = 1;
    gen->add_option("--n", gen_n, "number of variables");
    gen->add_option("--degree", gen_degree, "occurrences per variable")->capture_default_str();
    gen->add_option("--delta-milli", gen_delta_milli, "delta promise recorded in the header (1/1000)")
        ->capture_default_str();
    gen->add_option("--unsat", gen_unsat,
                    "perturb into a certified NO-instance with at least this many unsatisfiable clauses (n <= 26)");
    gen->add_option("--copies", gen_copies, "emit this many disjoint copies of the instance")->capture_default_str();
    gen->add_option("--seed", seed, "random seed");
    gen->add_option("--out", out_path, "output file (default stdout)");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "analytic click probabilities, thresholds and Chernoff bounds");
    ProtocolFlags analyze_flags;
    analyze_flags.add(*analyze);
    analyze->add_option("--out", out_path, "output file (default stdout)");

    // mu-window
    auto* window = app.add_subcommand("mu-window", "range of mu meeting the completeness and soundness targets");
    ProtocolFlags window_flags;
    window_flags.add(*window);
    double window_mu_hi = 10.0;
    window->add_option("--mu-hi", window_mu_hi, "upper end of the search range")->capture_default_str();
    window->add_option("--out", out_path, "output file (default stdout)");

    // run
    auto* run = app.add_subcommand("run", "simulate protocol runs");
    ProtocolFlags run_flags;
    run_flags.add(*run);
    std::string run_mode = "assignment";
    std::string run_role = "honest";
    std::string run_strategy = "exhaustive";
    std::string run_instance;
    std::string run_payload;
    std::size_t run_trials = 1;
    std::size_t run_restarts = 20;
    run->add_option("--mode", run_mode, "honest runs: instance or assignment")->capture_default_str();
    run->add_option("--role", run_role, "honest or adversary")->capture_default_str();
    run->add_option("--strategy", run_strategy, "adversary: exhaustive, local-search, fixed, vacuum")
        ->capture_default_str();
    run->add_option("--assignment", run_payload, "bit string for the fixed strategy");
    run->add_option("--restarts", run_restarts, "local-search restarts")->capture_default_str();
    run->add_option("--instance", run_instance, "instance file");
    run->add_option("--trials", run_trials, "number of runs")->capture_default_str();
    run->add_option("--seed", seed, "random seed");
    run->add_option("--threads", threads, "worker threads (0 = all cores)");
    run->add_option("--out", out_path, "output file (default stdout)");

    // sweeps
    auto make_sweep = [&](const char* name, const char* help, ProtocolFlags& flags, std::string& grid,
                          std::size_t& trials, std::string& mode, std::string& format, std::size_t& degree) {
        auto* s = app.add_subcommand(name, help);
        flags.add(*s);
        s->add_option("--grid", grid, "lo:hi:step or comma-separated values");
        s->add_option("--trials", trials, "trials per grid point")->capture_default_str();
        s->add_option("--mode", mode, "instance or assignment")->capture_default_str();
        s->add_option("--format", format, "csv or json")->capture_default_str()->check(CLI::IsMember({"csv", "json"}));
        s->add_option("--degree", degree, "occurrences per variable (m = n * degree / 4 on the N axis)")
            ->capture_default_str();
        s->add_option("--seed", seed, "random seed");
        s->add_option("--threads", threads, "worker threads (0 = all cores)");
        s->add_option("--out", out_path, "output file (default stdout)");
        return s;
    };
    ProtocolFlags mu_flags, n_flags;
    std::string mu_grid, n_grid, mu_mode = "assignment", n_mode = "assignment", mu_format = "csv", n_format = "csv";
    std::size_t mu_trials = 100, n_trials = 100, mu_degree = npqv::kDefaultDegree, n_degree = npqv::kDefaultDegree;
    auto* sweep_mu = make_sweep("sweep-mu", "Monte-Carlo sweep over mu", mu_flags, mu_grid, mu_trials, mu_mode,
                                mu_format, mu_degree);
    auto* sweep_n =
        make_sweep("sweep-n", "Monte-Carlo sweep over N", n_flags, n_grid, n_trials, n_mode, n_format, n_degree);

    // classical-cost
    auto* cost = app.add_subcommand("classical-cost", "work left to a classical solver after the protocol");
    std::size_t cost_missing = 0;
    double cost_gamma = 0.4;
    cost->add_option("--missing", cost_missing, "missing bits");
    cost->add_option("--gamma", cost_gamma, "exponent per missing bit")->capture_default_str();
    cost->add_option("--out", out_path, "output file (default stdout)");

    // delta
    auto* delta = app.add_subcommand("delta", "exact unsatisfiable fraction by exhaustive search (n <= 26)");
    std::string delta_instance;
    delta->add_option("--instance", delta_instance, "instance file");
    delta->add_option("--out", out_path, "output file (default stdout)");

    // published-runs
    auto* table = app.add_subcommand("published-runs", "replicate the published experimental runs");
    std::size_t published_trials = 1000;
    table->add_option("--trials", published_trials, "trials per row")->capture_default_str();
    table->add_option("--seed", seed, "random seed");
    table->add_option("--threads", threads, "worker threads (0 = all cores)");
    table->add_option("--out", out_path, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            json config;
            try {
                config = json::parse(in);
            } catch (const json::exception& e) {
                throw npqv::InputError(std::string("config: ") + e.what());
            }
            if (!config.is_object()) {
                throw npqv::InputError("config must be a JSON object");
            }
            merge_config(*sub, config);
        }

        if (sub == gen) {
            require(*gen, "n");
            require(*gen, "seed");
            auto f = npqv::gen_balanced_planted(gen_n, gen_degree, seed, gen_delta_milli);
            if (gen_unsat > 0) {
                npqv::Rng rng(npqv::derive_seed(seed, {1}));
                f = npqv::perturb_to_unsat(f, gen_unsat, rng);
            }
            if (gen_copies > 1) {
                f = npqv::replicate(f, gen_copies);
            }
            Output out(out_path);
            npqv::serialize(f, out.stream());
            std::cerr << "n=" << f.n() << " M=" << f.m() << " degree=" << f.degree()
                      << " balanced: every variable occurs " << f.degree() << " times"
                      << (f.planted() ? ", planted assignment included" : ", NO-instance")
                      << " (delta=" << f.delta() << ")\n";
        } else if (sub == analyze) {
            const auto p = analyze_flags.resolve();
            Output out(out_path);
            out.stream() << bounds_json(p).dump(2) << '\n';
        } else if (sub == window) {
            const auto p = window_flags.resolve();
            npqv::MuWindowOptions opt;
            opt.mu_hi = window_mu_hi;
            opt.p_dark = p.optical.p_dark;
            const auto w = npqv::mu_window(p.n, p.optical.nu, p.delta, p.m, p.targets, opt);
            json j{{"n", p.n}, {"m", p.m}, {"nu", p.optical.nu}, {"delta", p.delta}, {"found", w.has_value()}};
            if (w) {
                j["mu_min"] = w->mu_min;
                j["mu_max"] = w->mu_max;
                j["open_above"] = w->open_above;
                std::cerr << "advantage window: mu in [" << w->mu_min << ", " << w->mu_max << "]\n";
            } else {
                std::cerr << "no mu meets the targets\n";
            }
            Output out(out_path);
            out.stream() << j.dump(2) << '\n';
        } else if (sub == run) {
            require(*run, "seed");
            if (run_trials == 0) {
                throw npqv::InputError("--trials must be >= 1");
            }
            auto p = run_flags.resolve();
            Output out(out_path);
            if (run_role == "honest") {
                const auto mode = npqv::trial_mode_from_string(run_mode);
                std::optional<npqv::Formula> f;
                if (mode == npqv::TrialMode::Instance) {
                    if (run_instance.empty()) {
                        f = npqv::gen_balanced_planted(p.n, p.m * 4 / p.n, npqv::derive_seed(seed, {2}),
                                                       static_cast<std::uint32_t>(std::lround(p.delta * 1000.0)));
                        if (f->m() != p.m) {
                            throw npqv::InputError("m must equal n * degree / 4 for a generated instance");
                        }
                    } else {
                        f = load_formula(run_instance);
                        p.n = f->n();
                        p.m = f->m();
                    }
                } else if (!run_instance.empty()) {
                    throw npqv::InputError("--instance requires --mode instance");
                }
                const auto runs = npqv::run_trials(p, mode, run_trials, seed, 0.0, threads, f ? &*f : nullptr);
                std::size_t accepted = 0;
                for (const auto& r : runs) {
                    accepted += r.verdict ? 1 : 0;
                }
                std::cerr << "accepted " << accepted << " of " << runs.size() << " runs\n";
                out.stream() << (runs.size() == 1 ? json(runs.front()) : json(runs)).dump(2) << '\n';
            } else if (run_role == "adversary") {
                if (run_instance.empty()) {
                    throw npqv::InputError("adversary runs need --instance with a NO-instance");
                }
                const auto f = load_formula(run_instance);
                if (run->get_option("--delta")->count() == 0 && f.delta_milli() > 0) {
                    p.delta = f.delta();
                }
                npqv::AdversaryStrategy strategy{npqv::strategy_from_string(run_strategy), std::nullopt, run_restarts};
                if (!run_payload.empty()) {
                    strategy.payload = npqv::Assignment::from_string(run_payload);
                }
                npqv::Rng rng(seed);
                const auto est = npqv::empirical_soundness(f, strategy, p, run_trials, rng);
                p.n = f.n();
                p.m = f.m();
                const auto b = npqv::analyze(p);
                json j{{"role", "adversary"},
                       {"strategy", npqv::to_string(strategy.kind)},
                       {"n", p.n},
                       {"m", p.m},
                       {"nu", p.optical.nu},
                       {"mu", p.optical.mu},
                       {"delta", p.delta},
                       {"threshold", est.threshold},
                       {"trials", est.trials},
                       {"accepted", est.accepted},
                       {"acceptance_frequency", est.frequency()},
                       {"sigma", est.sigma()},
                       {"mean_satisfied", est.mean_satisfied},
                       {"mean_clicks_per_pulse", est.mean_clicks_per_pulse},
                       {"completeness_lb", b.completeness_lb},
                       {"soundness_ub", b.soundness_ub},
                       {"gap", b.gap},
                       {"seed", seed}};
                if (est.played) {
                    j["satisfied_by_played"] = npqv::count_satisfied(f, *est.played);
                }
                std::cerr << "accepted " << est.accepted << " of " << est.trials << " adversarial runs\n";
                out.stream() << j.dump(2) << '\n';
            } else {
                throw npqv::InputError("--role must be honest or adversary");
            }
        } else if (sub == sweep_mu || sub == sweep_n) {
            const bool on_mu = sub == sweep_mu;
            require(*sub, "seed");
            require(*sub, "grid");
            npqv::SweepSpec spec;
            spec.axis = on_mu ? npqv::SweepAxis::Mu : npqv::SweepAxis::N;
            spec.grid = parse_grid(on_mu ? mu_grid : n_grid);
            spec.fixed = (on_mu ? mu_flags : n_flags).resolve();
            spec.trials = on_mu ? mu_trials : n_trials;
            spec.seed = seed;
            spec.mode = npqv::trial_mode_from_string(on_mu ? mu_mode : n_mode);
            spec.degree = on_mu ? mu_degree : n_degree;
            spec.threads = threads;
            const auto rows = npqv::sweep(spec);
            Output out(out_path);
            if ((on_mu ? mu_format : n_format) == "csv") {
                npqv::write_sweep_csv(rows, spec.axis, out.stream());
            } else {
                json arr = json::array();
                for (const auto& r : rows) {
                    arr.push_back({{"axis", npqv::to_string(spec.axis)},
                                   {"value", r.axis_value},
                                   {"n", r.params.n},
                                   {"m", r.params.m},
                                   {"bounds", r.bounds},
                                   {"trials", r.trials},
                                   {"mean_single_clicks", r.mean_single_clicks},
                                   {"mean_correct_clicks", r.mean_correct_clicks},
                                   {"mean_double_clicks", r.mean_double_clicks},
                                   {"mean_total_clicks", r.mean_total_clicks},
                                   {"mean_correct_bits", r.mean_correct_bits},
                                   {"mean_satisfied", r.mean_satisfied},
                                   {"accept_rate", r.accept_rate},
                                   {"err_total_clicks", r.err_total_clicks},
                                   {"err_correct_bits", r.err_correct_bits},
                                   {"err_single_clicks", r.err_single_clicks}});
                }
                out.stream() << arr.dump(2) << '\n';
            }
            std::cerr << rows.size() << " grid points, " << spec.trials << " trials each\n";
        } else if (sub == cost) {
            require(*cost, "missing");
            // s_clk = 0 out of n = missing gives exactly `missing` missing bits.
            const auto c = npqv::classical_cost(cost_missing, 0, cost_gamma);
            json j{{"missing_bits", c.missing_bits},
                   {"gamma", cost_gamma},
                   {"log2_ops", c.log2_ops},
                   {"log10_ops", c.log10_ops()},
                   {"ops", c.ops()}};
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.3g", c.ops());
            std::cerr << "about " << buf << " operations (2^" << c.log2_ops << ")\n";
            Output out(out_path);
            out.stream() << j.dump(2) << '\n';
        } else if (sub == delta) {
            require(*delta, "instance");
            const auto f = load_formula(delta_instance);
            const auto unsat = npqv::min_unsatisfied(f);
            json j{{"n", f.n()},
                   {"m", f.m()},
                   {"min_unsatisfied", unsat},
                   {"delta", static_cast<double>(unsat) / static_cast<double>(f.m())},
                   {"satisfiable", unsat == 0}};
            Output out(out_path);
            out.stream() << j.dump(2) << '\n';
        } else if (sub == table) {
            require(*table, "seed");
            const auto reps = npqv::replicate_published_runs(npqv::kPublishedRuns, published_trials, seed, threads);
            json arr = json::array();
            for (const auto& r : reps) {
                arr.push_back({{"n", r.row.n},
                               {"nu", r.row.nu},
                               {"mu", r.row.mu},
                               {"published_single_clicks", r.row.single_clicks},
                               {"analytic_single_clicks", r.analytic_single},
                               {"simulated_mean_single_clicks", r.sim_mean_single},
                               {"simulated_sigma_of_mean", r.sim_sigma_mean},
                               {"simulation_within_3sigma", r.sim_within_3sigma},
                               {"relative_error_vs_published", r.rel_error_vs_published},
                               {"within_tolerance", r.within_published_tolerance},
                               {"published_satisfied_clauses", r.row.satisfied_clauses},
                               {"satisfied_from_rates", r.satisfied_from_rates},
                               {"missing_bits_identity", r.missing_identity}});
            }
            Output out(out_path);
            out.stream() << arr.dump(2) << '\n';
        }
    } catch (const npqv::PromiseViolation& e) {
        std::cerr << "promise violation: " << e.what() << '\n';
        return kExitPromise;
    } catch (const npqv::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitOk;
}
