#include "qmem/runner.hpp"
#include "qmem/absence.hpp"
#include "qmem/decoupling.hpp"
#include "qmem/errors.hpp"
#include "qmem/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>

namespace qmem {

using nlohmann::json;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct Experiment {
    std::string subcommand;
    std::set<std::string> keys;
    bool stochastic = false;
};

const std::map<std::string, Experiment>& experiments() {
    static const std::map<std::string, Experiment> table = {
        {"criteria_scan", {"criteria-scan", {"hamiltonian", "times", "epsilon", "slack", "criterion"}, false}},
        {"depolarizing_threshold", {"depol-threshold", {"grid_points", "tolerance"}, false}},
        {"decoupling", {"decoupling", {"channel", "samples", "delta", "noise", "epsilon", "converse_delta"}, true}},
        {"converse", {"converse", {"channel", "epsilon", "delta", "samples", "trials"}, true}},
        {"lightcone", {"lightcone", {"hamiltonian", "times", "epsilon", "slack"}, false}},
        {"recurrence", {"recurrence", {"hamiltonian", "t_max", "step", "tolerance", "epsilon", "slack"}, false}},
        {"absence", {"absence", {"hamiltonian", "times", "samples", "phi_index", "target_delta", "tolerance"}, true}},
    };
    return table;
}

// Parsed config with typed accessors that report bad fields as ConfigError.
class Config {
public:
    Config(const json& j, fs::path base) : j_(j), base_(std::move(base)) {}

    bool has(const char* key) const { return j_.contains(key); }
    const json& at(const char* key) const {
        if (!j_.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
        return j_.at(key);
    }
    template <typename T>
    T get(const char* key) const {
        try {
            return at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(std::string("field '") + key + "' has the wrong type");
        }
    }
    template <typename T>
    T get(const char* key, T fallback) const {
        return has(key) ? get<T>(key) : fallback;
    }
    double probability(const char* key, double fallback, bool allow_one = false) const {
        const double x = get<double>(key, fallback);
        if (!(x >= 0.0) || !(allow_one ? x <= 1.0 : x < 1.0)) throw ConfigError(std::string(key) + " out of range");
        return x;
    }
    double positive(const char* key, double fallback) const {
        const double x = get<double>(key, fallback);
        if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(std::string(key) + " must be positive");
        return x;
    }
    std::size_t count(const char* key, long long fallback) const {
        const auto n = get<long long>(key, fallback);
        if (n < 1) throw ConfigError(std::string(key) + " must be at least 1");
        return static_cast<std::size_t>(n);
    }
    const fs::path& base() const { return base_; }

private:
    const json& j_;
    fs::path base_;
};

struct Output {
    std::optional<fs::path> path;
    Format format = Format::csv;
};

Output parse_output(const json& config) {
    Output out;
    if (!config.contains("output") || config.at("output").is_null()) return out;
    const json& o = config.at("output");
    std::string format;
    if (o.is_string()) {
        out.path = o.get<std::string>();
    } else if (o.is_object()) {
        if (!o.contains("path") || !o.at("path").is_string()) throw ConfigError("output.path must be a string");
        out.path = o.at("path").get<std::string>();
        if (o.contains("format")) {
            if (!o.at("format").is_string()) throw ConfigError("output.format must be a string");
            format = o.at("format").get<std::string>();
        }
    } else {
        throw ConfigError("output must be a path or {path, format}");
    }
    if (out.path->empty()) throw ConfigError("output.path is empty");
    if (format.empty()) format = out.path->extension() == ".json" ? "json" : "csv";
    out.format = parse_format(format);
    return out;
}

Channel parse_channel(const json& j, const fs::path& base) {
    if (j.is_string()) {
        fs::path p = j.get<std::string>();
        if (p.is_relative()) p = base / p;
        return Channel::from_kraus(load_kraus_file(p));
    }
    if (!j.is_object()) throw ConfigError("channel must be a Kraus file path or an object");
    const Config c(j, base);
    const std::string kind = c.get<std::string>("kind");
    if (kind == "kraus_file") return parse_channel(c.at("path"), base);
    if (kind == "kraus") return Channel::from_kraus(parse_kraus(c.at("operators")));
    if (kind == "depolarizing") return depolarizing(c.probability("p", 0.0, true));
    if (kind == "identity") return Channel::identity(static_cast<Index>(c.count("dim", 2)));
    if (kind == "constant") {
        const auto d_in = static_cast<Index>(c.count("input_dim", 2));
        const auto d_out = static_cast<Index>(c.count("output_dim", d_in));
        return Channel::constant(d_in, maximally_mixed_matrix<double>(d_out));
    }
    if (kind == "random_stinespring") {
        Rng rng = make_rng(c.get<std::uint64_t>("seed", 1), 0);
        return random_stinespring(static_cast<Index>(c.count("d_a", 2)), static_cast<Index>(c.count("d_e", 2)), rng);
    }
    throw ConfigError("channel.kind must be kraus_file, kraus, depolarizing, identity, constant or random_stinespring");
}

struct Result {
    Table table;
    ojson document; // JSON output; the table rows when null
    std::string summary;
};

std::string fixed(double x, int digits = 6) {
    if (!std::isfinite(x)) return format_double(x);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

const char* yes_no(bool b) { return b ? "true" : "false"; }

CriteriaOptions criteria_options(const Config& c) {
    CriteriaOptions o;
    o.epsilon = c.probability("epsilon", 0.05);
    o.slack = c.get<double>("slack", 0.0);
    if (!std::isfinite(o.slack) || o.slack < 0) throw ConfigError("slack must be non-negative");
    return o;
}

ojson verdict_json(const CriterionVerdict& v) {
    ojson o;
    o["equation"] = v.equation;
    o["t"] = json_number(v.time);
    o["lhs_bits"] = json_number(v.lhs);
    o["rhs_bits"] = json_number(v.rhs);
    o["margin_bits"] = json_number(v.margin);
    o["verdict"] = to_string(v.verdict);
    return o;
}

Result run_criteria_scan(const Config& c) {
    const HamiltonianSpec spec = parse_hamiltonian(c.at("hamiltonian"));
    const auto times = parse_times(c.at("times"));
    const auto opts = criteria_options(c);
    const std::string criterion = c.get<std::string>("criterion", "system");
    static const std::set<std::string> known = {"system", "environment", "18", "20", "29", "30"};
    if (!known.count(criterion)) throw ConfigError("criterion must be system, environment, 18, 20, 29 or 30");
    const bool env = criterion == "environment" || criterion == "29" || criterion == "30";

    const ThermalizationModel model(spec);
    const auto pairs = criteria_scan(model, times, env, opts);
    Result r;
    r.table.columns = {"t", "lhs_bits", "rhs_bits", "margin_bits", "verdict"};
    std::map<std::string, int> tally;
    for (const auto& p : pairs) {
        const CriterionVerdict* v = nullptr;
        if (criterion == "18" || criterion == "29") v = &p.firing;
        else if (criterion == "20" || criterion == "30") v = &p.retention;
        else v = p.firing.verdict != Verdict::inconclusive ? &p.firing : &p.retention;
        r.table.add_row({v->time, v->lhs, v->rhs, v->margin, std::string(to_string(v->verdict))});
        ++tally[to_string(v->verdict)];
    }
    const auto cert = model.certificates();
    r.document["experiment"] = "criteria_scan";
    r.document["criterion"] = criterion;
    r.document["epsilon"] = opts.epsilon;
    r.document["slack"] = opts.slack;
    r.document["certificates"] = {{"system", cert.system}, {"environment", cert.environment}};
    r.document["rows"] = to_json(r.table);
    r.summary = "criteria_scan: " + std::to_string(times.size()) + " times, memory_lost " +
                std::to_string(tally["memory_lost"]) + ", memory_retained " + std::to_string(tally["memory_retained"]) +
                ", inconclusive " + std::to_string(tally["inconclusive"]);
    return r;
}

Result run_depolarizing_threshold(const Config& c) {
    const std::size_t points = c.count("grid_points", 101);
    const double tolerance = c.positive("tolerance", 1e-9);
    const auto th = iid_threshold(depolarizing, 0.0, 1.0, tolerance);
    Result r;
    r.table.columns = {"p", "H_S", "H_E"};
    const MatrixXc pi = maximally_mixed_matrix<double>(2);
    for (std::size_t i = 0; i < points; ++i) {
        const double p = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
        const DensityMatrix tau = dilation_output(depolarizing(p), pi);
        const double hs = von_neumann(partial_trace(tau, {"S"}));
        const double he = von_neumann(partial_trace(tau, {"E"}));
        r.table.add_row({p, hs, he});
    }
    r.document["experiment"] = "depolarizing_threshold";
    r.document["p_c"] = th.p_c;
    r.document["iterations"] = th.iterations;
    r.document["grid"] = to_json(r.table);
    r.summary = "p_c = " + fixed(th.p_c);
    return r;
}

std::vector<double> parse_deltas(const json& j) {
    std::vector<double> out;
    if (j.is_number()) out.push_back(j.get<double>());
    else if (j.is_array())
        for (const auto& x : j) {
            if (!x.is_number()) throw ConfigError("delta must be numbers");
            out.push_back(x.get<double>());
        }
    else throw ConfigError("delta must be a number or a list");
    if (out.empty()) throw ConfigError("delta is empty");
    for (double d : out)
        if (!(d > 0) || !std::isfinite(d)) throw ConfigError("delta must be positive");
    return out;
}

Result run_decoupling(const Config& c) {
    const Channel ch = parse_channel(c.at("channel"), c.base());
    DecouplingOptions o;
    o.n_samples = c.count("samples", 200);
    o.seed = c.get<std::uint64_t>("seed");
    if (c.has("delta")) o.deltas = parse_deltas(c.at("delta"));
    o.noise = c.get<double>("noise", 0.0);
    if (!(o.noise >= 0) || !std::isfinite(o.noise)) throw ConfigError("noise must be non-negative");
    o.epsilon = c.probability("epsilon", 0.05);
    o.converse_delta = c.positive("converse_delta", 0.01);

    const DecouplingReport rep = decoupling_report(ch, o);
    Result r;
    r.table.columns = {"n_samples", "seed", "empirical_mean", "empirical_std", "h_min_cond", "bound",
                       "chain_entropy", "chain_bound", "gap", "product_shortcut", "delta", "tail_fraction",
                       "tail_bound", "asserted", "pass", "converse_holds"};
    ojson tail = ojson::array();
    for (const auto& [delta, t] : rep.tail) {
        r.table.add_row({static_cast<long long>(rep.n_samples), static_cast<long long>(rep.seed), rep.empirical_mean,
                         rep.empirical_std, rep.bound.h_min_cond, rep.bound.bound, rep.bound.chain_entropy,
                         rep.bound.chain_bound, rep.bound.gap, std::string(yes_no(rep.bound.product_shortcut)), delta,
                         t.tail_fraction, t.tail_bound, std::string(yes_no(t.asserted)), std::string(yes_no(t.pass)),
                         std::string(yes_no(rep.converse_holds))});
        tail.push_back({{"delta", delta}, {"tail_fraction", t.tail_fraction}, {"tail_bound", t.tail_bound},
                        {"asserted", t.asserted}, {"pass", t.pass}});
    }
    ojson& d = r.document;
    d["experiment"] = "decoupling";
    d["n_samples"] = rep.n_samples;
    d["seed"] = rep.seed;
    d["input_dim"] = ch.input_dim();
    d["output_dim"] = ch.output_dim();
    d["empirical_mean"] = rep.empirical_mean;
    d["empirical_std"] = rep.empirical_std;
    d["bound"] = {{"h_min_cond", rep.bound.h_min_cond},       {"bound", rep.bound.bound},
                  {"chain_entropy", rep.bound.chain_entropy}, {"chain_bound", rep.bound.chain_bound},
                  {"gap", rep.bound.gap},                     {"product_shortcut", rep.bound.product_shortcut}};
    d["tail"] = tail;
    d["converse_holds"] = rep.converse_holds;
    r.summary = "mean distance = " + fixed(rep.empirical_mean) + ", bound = " + fixed(rep.bound.bound) +
                ", H_min(A'|B) = " + fixed(rep.bound.h_min_cond);
    return r;
}

Result run_converse(const Config& c) {
    const Channel ch = parse_channel(c.at("channel"), c.base());
    const double eps = c.probability("epsilon", 0.05);
    const double delta = c.positive("delta", 0.001);
    const std::size_t samples = c.count("samples", 50);
    const auto trials = static_cast<std::size_t>(c.get<long long>("trials", 10));
    const auto seed = c.get<std::uint64_t>("seed");
    const ConverseResult res = converse_check(ch, eps, delta, samples, trials, seed);
    const ConverseTerms& t = res.terms;
    Result r;
    r.table.columns = {"epsilon", "delta", "h_max_ab", "fidelity_term", "epsilon_term", "lhs", "h_min_b", "holds",
                       "min_trial_average", "empirical_consistent"};
    const double min_avg = t.holds ? res.min_trial_average : std::nan("");
    r.table.add_row({eps, delta, t.h_max_ab, t.fidelity_term, t.epsilon_term, t.lhs, t.h_min_b,
                     std::string(yes_no(t.holds)), min_avg, std::string(yes_no(res.empirical_consistent))});
    ojson& d = r.document;
    d["experiment"] = "converse";
    d["epsilon"] = eps;
    d["delta"] = delta;
    d["seed"] = seed;
    d["h_max_ab"] = t.h_max_ab;
    d["fidelity_term"] = t.fidelity_term;
    d["epsilon_term"] = json_number(t.epsilon_term);
    d["lhs"] = json_number(t.lhs);
    d["h_min_b"] = t.h_min_b;
    d["holds"] = t.holds;
    ojson avgs = ojson::array();
    for (double a : res.trial_averages) avgs.push_back(a);
    d["trial_averages"] = avgs;
    d["min_trial_average"] = json_number(min_avg);
    d["empirical_consistent"] = res.empirical_consistent;
    r.summary = "lhs = " + fixed(t.lhs) + ", H_min(B) = " + fixed(t.h_min_b) + ", holds = " + yes_no(t.holds);
    if (t.holds) r.summary += ", min trial average = " + fixed(res.min_trial_average);
    return r;
}

Result run_lightcone(const Config& c) {
    const HamiltonianSpec spec = parse_hamiltonian(c.at("hamiltonian"));
    const auto times = parse_times(c.at("times"));
    const auto opts = criteria_options(c);
    const ThermalizationModel model(spec);
    const LightconeResult lc = lightcone_scan(model, times, opts);
    Result r;
    r.table.columns = {"t", "h_max_e", "s_deficit", "eq18"};
    for (const auto& row : lc.rows) r.table.add_row({row.t, row.h_max_e, row.s_deficit, std::string(to_string(row.eq18))});
    ojson& d = r.document;
    d["experiment"] = "lightcone";
    d["epsilon"] = opts.epsilon;
    d["t_star"] = json_number(lc.t_star);
    d["slope_h_max_e"] = lc.slope_h_max_e;
    d["slope_s_deficit"] = lc.slope_s_deficit;
    d["boundary_size"] = lc.boundary_size;
    d["rows"] = to_json(r.table);
    r.summary = "t* = " + (std::isfinite(lc.t_star) ? fixed(lc.t_star) : std::string("none")) +
                ", slope H_max(E) = " + fixed(lc.slope_h_max_e) + ", |boundary| = " + std::to_string(lc.boundary_size);
    return r;
}

Result run_recurrence(const Config& c) {
    const HamiltonianSpec spec = parse_hamiltonian(c.at("hamiltonian"));
    const double t_max = c.positive("t_max", 10.0);
    const double step = c.positive("step", 0.01);
    const double tol = c.positive("tolerance", 1e-8);
    const auto opts = criteria_options(c);
    const ThermalizationModel model(spec);
    const RecurrenceResult rec = recurrence_scan(model, t_max, step, tol, opts);
    const double t_rec = rec.t_rec ? *rec.t_rec : std::nan("");
    const double margin = rec.eq20_at_rec ? rec.eq20_at_rec->margin : std::nan("");
    const std::string verdict = rec.eq20_at_rec ? to_string(rec.eq20_at_rec->verdict) : "";
    Result r;
    r.table.columns = {"t_rec", "distance_at_rec", "min_distance", "t_min_distance", "steps", "eq20_margin_bits",
                       "eq20_verdict"};
    r.table.add_row({t_rec, rec.distance_at_rec, rec.min_distance, rec.t_min_distance, static_cast<long long>(rec.steps),
                     margin, verdict});
    ojson& d = r.document;
    d["experiment"] = "recurrence";
    d["t_max"] = t_max;
    d["step"] = step;
    d["tolerance"] = tol;
    d["t_rec"] = json_number(t_rec);
    d["distance_at_rec"] = json_number(rec.distance_at_rec);
    d["min_distance"] = json_number(rec.min_distance);
    d["t_min_distance"] = rec.t_min_distance;
    d["steps"] = rec.steps;
    d["eq20_at_rec"] = rec.eq20_at_rec ? verdict_json(*rec.eq20_at_rec) : ojson(nullptr);
    r.summary = rec.t_rec ? "t_rec = " + fixed(*rec.t_rec) + ", distance = " + format_double(rec.distance_at_rec)
                          : "no recurrence up to t = " + fixed(t_max) + ", min distance = " + fixed(rec.min_distance);
    return r;
}

Result run_absence(const Config& c) {
    HamiltonianSpec spec = parse_hamiltonian(c.at("hamiltonian"));
    const auto phi_index = static_cast<Index>(c.get<long long>("phi_index", 0));
    AbsenceOptions o;
    o.times = parse_times(c.at("times"));
    o.n_env_samples = c.count("samples", 100);
    o.seed = c.get<std::uint64_t>("seed");
    o.tolerance = c.positive("tolerance", 1e-8);
    std::optional<double> tuned_g;
    if (c.has("target_delta")) {
        const double target = c.probability("target_delta", 0.95, true);
        auto* cp = std::get_if<CoupledProduct>(&spec.kind);
        if (!cp) throw ConfigError("target_delta needs a coupled_product hamiltonian");
        const CouplingSearch s = tune_coupling(*cp, phi_index, target);
        cp->g = s.g;
        tuned_g = s.g;
        spec = normalized(std::move(spec));
    }
    const AbsenceReport rep = verify_absence(spec, phi_index, o);
    const double g = tuned_g ? *tuned_g : std::nan("");
    Result r;
    r.table.columns = {"g", "delta_phi", "delta_unconstrained", "bound", "bound_valid", "deterministic_max_distance",
                       "min_fidelity_margin", "deterministic_ok", "mc_radius", "mc_exceed_fraction", "mc_bound",
                       "mc_asserted", "mc_ok", "seed"};
    r.table.add_row({g, rep.delta_phi, rep.delta_unconstrained, rep.bound.bound, std::string(yes_no(rep.bound.valid)),
                     rep.deterministic_max_distance, rep.min_fidelity_margin, std::string(yes_no(rep.deterministic_ok)),
                     rep.mc_radius, rep.mc_exceed_fraction, rep.mc_bound, std::string(yes_no(rep.mc_asserted)),
                     std::string(yes_no(rep.mc_ok)), static_cast<long long>(rep.seed)});
    ojson& d = r.document;
    d["experiment"] = "absence";
    d["g"] = json_number(g);
    d["delta_phi"] = rep.delta_phi;
    d["delta_unconstrained"] = rep.delta_unconstrained;
    d["bound"] = rep.bound.bound;
    d["bound_valid"] = rep.bound.valid;
    d["deterministic_max_distance"] = rep.deterministic_max_distance;
    d["min_fidelity_margin"] = rep.min_fidelity_margin;
    d["deterministic_ok"] = rep.deterministic_ok;
    d["mc_radius"] = rep.mc_radius;
    d["mc_exceed_fraction"] = rep.mc_exceed_fraction;
    d["mc_bound"] = rep.mc_bound;
    d["mc_asserted"] = rep.mc_asserted;
    d["mc_ok"] = rep.mc_ok;
    d["times"] = rep.times;
    d["seed"] = rep.seed;
    r.summary = "delta_phi = " + fixed(rep.delta_phi) + ", bound = " + fixed(rep.bound.bound) +
                ", max distance = " + fixed(rep.deterministic_max_distance);
    return r;
}

using Runner = std::function<Result(const Config&)>;

const std::map<std::string, Runner>& runners() {
    static const std::map<std::string, Runner> table = {
        {"criteria_scan", run_criteria_scan}, {"depolarizing_threshold", run_depolarizing_threshold},
        {"decoupling", run_decoupling},       {"converse", run_converse},
        {"lightcone", run_lightcone},         {"recurrence", run_recurrence},
        {"absence", run_absence},
    };
    return table;
}

void apply_overrides(json& config, const Overrides& o) {
    if (o.seed) config["seed"] = *o.seed;
    if (o.epsilon) config["epsilon"] = *o.epsilon;
    if (o.delta) config["delta"] = *o.delta;
    if (o.samples) config["samples"] = *o.samples;
    if (o.output || o.format) {
        json out = json::object();
        if (config.contains("output") && config["output"].is_object()) out = config["output"];
        else if (config.contains("output") && config["output"].is_string()) out["path"] = config["output"];
        if (o.output) out["path"] = *o.output;
        if (o.format) out["format"] = *o.format;
        config["output"] = out;
    }
}

std::string validate(const json& config) {
    if (!config.is_object()) throw ConfigError("config must be a JSON object");
    if (!config.contains("schema") || !config["schema"].is_number_integer() || config["schema"].get<long long>() != 1) {
        throw ConfigError("config must declare \"schema\": 1");
    }
    if (!config.contains("experiment") || !config["experiment"].is_string()) throw ConfigError("missing field 'experiment'");
    const std::string name = config["experiment"].get<std::string>();
    const auto it = experiments().find(name);
    if (it == experiments().end()) throw ConfigError("unknown experiment '" + name + "'");
    for (const auto& [key, value] : config.items()) {
        if (key == "schema" || key == "experiment" || key == "output" || key == "seed") continue;
        if (!it->second.keys.count(key)) throw ConfigError("unknown field '" + key + "' for " + name);
    }
    if (config.contains("seed") && (!config["seed"].is_number_integer() || config["seed"].get<long long>() < 0)) {
        throw ConfigError("seed must be a non-negative integer");
    }
    if (it->second.stochastic && !config.contains("seed")) throw ConfigError(name + " needs a seed");
    return name;
}

} // namespace

std::string experiment_for_subcommand(const std::string& subcommand) {
    for (const auto& [name, e] : experiments())
        if (e.subcommand == subcommand) return name;
    return {};
}

json default_config(const std::string& experiment) {
    json c = {{"schema", 1}, {"experiment", experiment}};
    if (experiment == "criteria_scan") {
        c["hamiltonian"] = {{"kind", "matrix"}, {"dims", {2, 8}}, {"random", {{"seed", 1}}}};
        c["times"] = {{"start", 0.0}, {"stop", 10.0}, {"count", 51}};
    } else if (experiment == "decoupling") {
        c["channel"] = {{"kind", "depolarizing"}, {"p", 0.3}};
        c["seed"] = 1;
    } else if (experiment == "converse") {
        c["channel"] = {{"kind", "identity"}, {"dim", 2048}};
        c["epsilon"] = 0.05;
        c["delta"] = 0.001;
        c["seed"] = 1;
    } else if (experiment == "lightcone") {
        c["hamiltonian"] = {{"kind", "spin_chain"}, {"model", "ising"}, {"sites", 8},
                            {"j", 1.0},            {"hx", 1.0},         {"system_sites", {0, 1}}};
        c["times"] = {{"start", 0.0}, {"stop", 4.0}, {"count", 41}};
    } else if (experiment == "recurrence") {
        c["hamiltonian"] = {{"kind", "spin_chain"}, {"model", "heisenberg"}, {"sites", 2}, {"system_sites", {0}}};
        c["t_max"] = 3.0;
        c["step"] = 0.031415926535897934;
    } else if (experiment == "absence") {
        c["hamiltonian"] = {{"kind", "coupled_product"}, {"random", {{"d_s", 2}, {"d_e", 16}, {"seed", 1}}}};
        c["target_delta"] = 0.95;
        c["times"] = {{"start", 0.0}, {"stop", 100.0}, {"count", 100}};
        c["seed"] = 1;
    }
    return c;
}

namespace {

int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_numerical;
    }
}

int run_in(json config, const Overrides& overrides, const fs::path& base, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        apply_overrides(config, overrides);
        const std::string name = validate(config);
        const Output output = parse_output(config);
        const Config c(config, base);
        const Result r = runners().at(name)(c);
        if (output.path) {
            if (output.format == Format::csv) emit(r.table, Format::csv, *output.path);
            else write_atomic(*output.path, (r.document.is_null() ? to_json(r.table) : r.document).dump(2) + "\n");
        }
        out << r.summary << std::endl;
        return int(exit_ok);
    });
}

json load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
}

} // namespace

int run(json config, const Overrides& overrides, std::ostream& out, std::ostream& err) {
    return run_in(std::move(config), overrides, fs::current_path(), out, err);
}

int run(const fs::path& config_path, const Overrides& overrides, std::ostream& out, std::ostream& err) {
    json config;
    if (const int rc = guarded(err, [&] { config = load(config_path); return int(exit_ok); }); rc != exit_ok) return rc;
    return run_in(std::move(config), overrides, config_path.parent_path(), out, err);
}

int run(const std::string& experiment, const std::optional<fs::path>& config_path, const Overrides& overrides,
        std::ostream& out, std::ostream& err) {
    if (!experiments().count(experiment)) {
        err << "error: unknown experiment '" << experiment << "'\n";
        return exit_validation;
    }
    if (!config_path) return run_in(default_config(experiment), overrides, fs::current_path(), out, err);
    json config;
    const int rc = guarded(err, [&] {
        config = load(*config_path);
        if (!config.is_object()) throw ConfigError("config must be a JSON object");
        if (!config.contains("experiment")) config["experiment"] = experiment;
        if (config["experiment"] != experiment) throw ConfigError("config describes a different experiment");
        return int(exit_ok);
    });
    if (rc != exit_ok) return rc;
    return run_in(std::move(config), overrides, config_path->parent_path(), out, err);
}

} // namespace qmem
