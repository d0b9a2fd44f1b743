#include "tarraq/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace tarraq {

using nlohmann::json;

namespace {

void check_keys(const json &j, const std::string &where, std::initializer_list<const char *> allowed)
{
    if (!j.is_object())
    {
        throw ConfigError(where + ": expected an object");
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto &item : j.items())
    {
        if (ok.count(item.key()) == 0)
        {
            throw ConfigError(where + ": unknown key '" + item.key() + "'");
        }
    }
}

template <typename T>
void read(const json &j, const char *key, T &out, const std::string &where)
{
    if (!j.contains(key))
    {
        return;
    }
    try
    {
        out = j.at(key).get<T>();
    }
    catch (const json::exception &)
    {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

Vec3 read_vec3(const json &j, const std::string &where)
{
    if (!j.is_array() || j.size() != 3)
    {
        throw ConfigError(where + ": expected [x, y, z]");
    }
    try
    {
        return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    }
    catch (const json::exception &)
    {
        throw ConfigError(where + ": expected numbers");
    }
}

void parse_scenario(const json &j, SimConfig &c)
{
    const std::string w = "scenario";
    check_keys(j, w,
               {"box", "n_nodes", "v_min", "v_max", "duration", "warmup", "tick", "mobility", "static_positions",
                "bs_position"});
    if (j.contains("box"))
    {
        c.box = read_vec3(j["box"], w + ".box");
    }
    read(j, "n_nodes", c.n_nodes, w);
    read(j, "v_min", c.speeds.v_l, w);
    read(j, "v_max", c.speeds.v_u, w);
    read(j, "duration", c.duration, w);
    read(j, "warmup", c.warmup, w);
    read(j, "tick", c.tick, w);
    if (j.contains("mobility"))
    {
        std::string m;
        read(j, "mobility", m, w);
        if (m == "rwp")
        {
            c.mobility = MobilityKind::rwp;
        }
        else if (m == "fixed")
        {
            c.mobility = MobilityKind::fixed;
        }
        else
        {
            throw ConfigError(w + ".mobility: expected 'rwp' or 'fixed'");
        }
    }
    if (j.contains("static_positions"))
    {
        const json &a = j["static_positions"];
        if (!a.is_array())
        {
            throw ConfigError(w + ".static_positions: expected an array");
        }
        c.static_positions.clear();
        for (const auto &p : a)
        {
            c.static_positions.push_back(read_vec3(p, w + ".static_positions"));
        }
    }
    if (j.contains("bs_position"))
    {
        c.bs_position = read_vec3(j["bs_position"], w + ".bs_position");
    }
}

void parse_radio(const json &j, SimConfig &c)
{
    const std::string w = "radio";
    check_keys(j, w,
               {"p_tx", "gamma_th", "gamma_th_db", "n0", "alpha", "phi", "epsilon", "L", "interference_gain",
                "e_elec", "e_fs"});
    RadioModel &r = c.radio;
    read(j, "p_tx", r.p_tx, w);
    if (j.contains("gamma_th") && j.contains("gamma_th_db"))
    {
        throw ConfigError(w + ": give gamma_th or gamma_th_db, not both");
    }
    read(j, "gamma_th", r.gamma_th, w);
    if (j.contains("gamma_th_db"))
    {
        double db = 0.0;
        read(j, "gamma_th_db", db, w);
        r.gamma_th = db_to_linear(db);
    }
    read(j, "n0", r.n0, w);
    read(j, "alpha", r.alpha, w);
    read(j, "phi", r.phi, w);
    read(j, "epsilon", r.epsilon, w);
    read(j, "L", r.L, w);
    read(j, "interference_gain", r.interference_gain, w);
    read(j, "e_elec", r.e_elec, w);
    read(j, "e_fs", r.e_fs, w);
}

void parse_traffic(const json &j, SimConfig &c)
{
    const std::string w = "traffic";
    check_keys(j, w,
               {"session_rate", "cbr_bps", "burst", "packet_bytes", "max_cache", "service_time", "retry_limit", "ttl",
                "fixed_source"});
    read(j, "session_rate", c.session_rate, w);
    read(j, "cbr_bps", c.cbr_bps, w);
    read(j, "burst", c.burst, w);
    read(j, "packet_bytes", c.packet_bytes, w);
    read(j, "max_cache", c.max_cache, w);
    read(j, "service_time", c.service_time, w);
    read(j, "retry_limit", c.retry_limit, w);
    read(j, "ttl", c.ttl, w);
    if (j.contains("fixed_source") && !j["fixed_source"].is_null())
    {
        int s = 0;
        read(j, "fixed_source", s, w);
        c.fixed_source = s;
    }
}

void parse_hello(const json &j, SimConfig &c)
{
    const std::string w = "hello";
    check_keys(j, w, {"base_bytes", "per_neighbor_bytes", "fixed_si", "timeout_factor", "reply"});
    read(j, "base_bytes", c.hello_base_bytes, w);
    read(j, "per_neighbor_bytes", c.hello_per_neighbor_bytes, w);
    read(j, "fixed_si", c.fixed_si, w);
    read(j, "timeout_factor", c.timeout_factor, w);
    if (j.contains("reply") && !j["reply"].is_null())
    {
        bool b = false;
        read(j, "reply", b, w);
        c.hello_reply = b;
    }
}

void parse_qrouting(const json &j, QRoutingConfig &q)
{
    const std::string w = "protocol.qrouting";
    check_keys(j, w,
               {"phi", "r_max", "r_min", "sigma", "energy_weight", "tau0", "k_max", "epsilon", "link_cap", "ncr_floor",
                "gamma_default", "alpha_min", "alpha_max", "update_form"});
    if (j.contains("phi"))
    {
        std::vector<double> phi;
        read(j, "phi", phi, w);
        if (phi.size() != 3)
        {
            throw ConfigError(w + ".phi: expected three weights");
        }
        std::copy(phi.begin(), phi.end(), q.weights.phi.begin());
    }
    read(j, "r_max", q.weights.r_max, w);
    read(j, "r_min", q.weights.r_min, w);
    read(j, "sigma", q.weights.sigma, w);
    read(j, "energy_weight", q.weights.energy_weight, w);
    read(j, "tau0", q.tau0, w);
    read(j, "k_max", q.k_max, w);
    read(j, "epsilon", q.epsilon, w);
    read(j, "link_cap", q.link_cap, w);
    read(j, "ncr_floor", q.ncr_floor, w);
    read(j, "gamma_default", q.gamma_default, w);
    read(j, "alpha_min", q.alpha_min, w);
    read(j, "alpha_max", q.alpha_max, w);
    if (j.contains("update_form"))
    {
        std::string f;
        read(j, "update_form", f, w);
        try
        {
            q.form = parse_q_update_form(f);
        }
        catch (const std::invalid_argument &e)
        {
            throw ConfigError(e.what());
        }
    }
}

void parse_protocol_section(const json &j, SimConfig &c)
{
    const std::string w = "protocol";
    check_keys(j, w,
               {"name", "delta", "t_s_min", "t_s_max", "tar", "velocity_tol", "kf", "qrouting", "initial_energy"});
    if (j.contains("name"))
    {
        std::string n;
        read(j, "name", n, w);
        c.protocol = tarraq::parse_protocol(n);
    }
    read(j, "delta", c.sensing.delta, w);
    read(j, "t_s_min", c.sensing.t_s_min, w);
    read(j, "t_s_max", c.sensing.t_s_max, w);
    read(j, "tar", c.sensing.tar, w);
    read(j, "velocity_tol", c.velocity_tol, w);
    read(j, "initial_energy", c.initial_energy, w);
    if (j.contains("kf"))
    {
        const json &k = j["kf"];
        check_keys(k, w + ".kf", {"m0", "q", "r"});
        read(k, "m0", c.kf.m0, w + ".kf");
        read(k, "q", c.kf.q, w + ".kf");
        read(k, "r", c.kf.r, w + ".kf");
    }
    if (j.contains("qrouting"))
    {
        parse_qrouting(j["qrouting"], c.qrouting);
    }
}

AnalyticsCase parse_case(const json &j, const std::string &w, std::size_t index)
{
    check_keys(j, w, {"name", "n_nodes", "L", "R", "v_min", "v_max", "v_c"});
    AnalyticsCase a;
    a.name = "case" + std::to_string(index);
    read(j, "name", a.name, w);
    read(j, "n_nodes", a.n_nodes, w);
    read(j, "L", a.L, w);
    read(j, "R", a.R, w);
    read(j, "v_min", a.v_l, w);
    read(j, "v_max", a.v_u, w);
    read(j, "v_c", a.v_c, w);
    return a;
}

std::vector<AnalyticsCase> parse_cases(const json &j, const std::string &w)
{
    if (!j.is_array() || j.empty())
    {
        throw ConfigError(w + ": expected a non-empty array");
    }
    std::vector<AnalyticsCase> out;
    for (std::size_t i = 0; i < j.size(); ++i)
    {
        out.push_back(parse_case(j[i], w + "[" + std::to_string(i) + "]", i));
    }
    return out;
}

std::vector<AnalyticsCase> fig5_cases()
{
    std::vector<AnalyticsCase> out;
    for (double L : {400.0, 600.0})
    {
        for (double R : {150.0, 200.0})
        {
            AnalyticsCase a;
            a.L = L;
            a.R = R;
            std::ostringstream name;
            name << "L" << L << "_R" << R;
            a.name = name.str();
            out.push_back(a);
        }
    }
    return out;
}

void validate_case(const AnalyticsCase &a)
{
    try
    {
        a.scenario().validate();
    }
    catch (const std::invalid_argument &e)
    {
        throw ConfigError(a.name + ": " + e.what());
    }
}

} // namespace

AnalyticScenario AnalyticsCase::scenario() const
{
    return AnalyticScenario::from_box(n_nodes, L, R, v_l, v_u, v_c);
}

double db_to_linear(double db)
{
    return std::pow(10.0, db / 10.0);
}

double linear_to_db(double x)
{
    return 10.0 * std::log10(x);
}

void sync_radio(SimConfig &cfg)
{
    cfg.radio.N = cfg.n_nodes;
}

HarnessConfig default_config()
{
    HarnessConfig h;
    h.analytics.cases = fig5_cases();
    h.validate.cases = fig5_cases();
    h.sweep_si.deltas = {0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95};
    h.sweep_si.eta = {0.1, 0.5, 1.0, 2.0, 5.0};
    sync_radio(h.sim);
    return h;
}

HarnessConfig parse_config(const std::string &text)
{
    json j;
    try
    {
        j = json::parse(text);
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    check_keys(j, "config",
               {"scenario", "radio", "traffic", "hello", "protocol", "seed", "analytics", "validate", "experiment",
                "sweep_si"});
    HarnessConfig h = default_config();
    SimConfig &c = h.sim;
    if (j.contains("scenario"))
    {
        parse_scenario(j["scenario"], c);
    }
    if (j.contains("radio"))
    {
        parse_radio(j["radio"], c);
    }
    if (j.contains("traffic"))
    {
        parse_traffic(j["traffic"], c);
    }
    if (j.contains("hello"))
    {
        parse_hello(j["hello"], c);
    }
    if (j.contains("protocol"))
    {
        parse_protocol_section(j["protocol"], c);
    }
    read(j, "seed", c.seed, "config");
    if (!(j.contains("radio") && j["radio"].contains("L")))
    {
        c.radio.L = std::max({c.box.x, c.box.y, c.box.z});
    }
    sync_radio(c);

    if (j.contains("analytics"))
    {
        const json &a = j["analytics"];
        check_keys(a, "analytics", {"cases", "grid_points"});
        if (a.contains("cases"))
        {
            h.analytics.cases = parse_cases(a["cases"], "analytics.cases");
        }
        read(a, "grid_points", h.analytics.grid_points, "analytics");
        if (h.analytics.grid_points < 2)
        {
            throw ConfigError("analytics.grid_points must be at least 2");
        }
    }
    for (const auto &a : h.analytics.cases)
    {
        validate_case(a);
    }

    if (j.contains("validate"))
    {
        const json &v = j["validate"];
        const std::string w = "validate";
        check_keys(v, w,
                   {"cases", "duration", "warmup", "seeds", "ks_tol", "rate_tol", "mixture_points", "grid_points"});
        if (v.contains("cases"))
        {
            h.validate.cases = parse_cases(v["cases"], "validate.cases");
        }
        read(v, "duration", h.validate.duration, w);
        read(v, "warmup", h.validate.warmup, w);
        read(v, "seeds", h.validate.seeds, w);
        read(v, "ks_tol", h.validate.ks_tol, w);
        read(v, "rate_tol", h.validate.rate_tol, w);
        read(v, "mixture_points", h.validate.mixture_points, w);
        read(v, "grid_points", h.validate.grid_points, w);
    }
    if (!(h.validate.duration > h.validate.warmup) || h.validate.warmup < 0.0 || h.validate.seeds < 1 ||
        h.validate.mixture_points < 1 || h.validate.grid_points < 2)
    {
        throw ConfigError("validate: need duration > warmup >= 0, seeds >= 1, mixture_points >= 1");
    }
    for (const auto &a : h.validate.cases)
    {
        validate_case(a);
    }

    if (j.contains("experiment"))
    {
        const json &e = j["experiment"];
        const std::string w = "experiment";
        check_keys(e, w,
                   {"name", "protocols", "deltas", "gamma_th_db", "v_max", "replications", "ci", "ci_level",
                    "bootstrap_samples"});
        ExperimentConfig &x = h.experiment;
        read(e, "name", x.name, w);
        if (e.contains("protocols"))
        {
            std::vector<std::string> names;
            read(e, "protocols", names, w);
            x.protocols.clear();
            for (const auto &n : names)
            {
                x.protocols.push_back(tarraq::parse_protocol(n));
            }
        }
        read(e, "deltas", x.deltas, w);
        read(e, "gamma_th_db", x.gamma_th_db, w);
        read(e, "v_max", x.v_max, w);
        read(e, "replications", x.replications, w);
        read(e, "ci", x.ci, w);
        read(e, "ci_level", x.ci_level, w);
        read(e, "bootstrap_samples", x.bootstrap_samples, w);
    }
    const ExperimentConfig &x = h.experiment;
    if (x.replications < 1 || x.protocols.empty() || x.deltas.empty() || x.gamma_th_db.empty() || x.v_max.empty())
    {
        throw ConfigError("experiment: need replications >= 1 and non-empty grid lists");
    }
    if (x.ci != "normal" && x.ci != "bootstrap")
    {
        throw ConfigError("experiment.ci: expected 'normal' or 'bootstrap'");
    }
    if (!(x.ci_level > 0.0 && x.ci_level < 1.0) || x.bootstrap_samples < 1)
    {
        throw ConfigError("experiment: ci_level must lie in (0, 1)");
    }

    if (j.contains("sweep_si"))
    {
        const json &s = j["sweep_si"];
        check_keys(s, "sweep_si", {"deltas", "eta"});
        read(s, "deltas", h.sweep_si.deltas, "sweep_si");
        read(s, "eta", h.sweep_si.eta, "sweep_si");
    }
    for (double d : h.sweep_si.deltas)
    {
        if (!(d > 0.5 && d < 1.0))
        {
            throw ConfigError("sweep_si.deltas must lie in (0.5, 1)");
        }
    }
    for (double e : h.sweep_si.eta)
    {
        if (!(e > 0.0))
        {
            throw ConfigError("sweep_si.eta must be positive");
        }
    }

    c.validate();
    return h;
}

HarnessConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError("cannot open config file: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace tarraq
