#include "tarraq/harness.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <ostream>
#include <thread>

namespace tarraq {

namespace {

std::ofstream open_out(const std::string &dir, const std::string &name)
{
    std::filesystem::create_directories(dir);
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream os(path);
    if (!os)
    {
        throw std::runtime_error("cannot write " + path.string());
    }
    return os;
}

double interp(const std::vector<double> &x, const std::vector<double> &y, double at)
{
    if (at <= x.front())
    {
        return y.front();
    }
    const auto it = std::upper_bound(x.begin(), x.end(), at);
    if (it == x.end())
    {
        return y.back();
    }
    const std::size_t i = static_cast<std::size_t>(it - x.begin());
    const double w = (at - x[i - 1]) / (x[i] - x[i - 1]);
    return y[i - 1] + w * (y[i] - y[i - 1]);
}

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double> &nodes, std::vector<double> &weights)
{
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
    {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it)
        {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k)
            {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15)
            {
                break;
            }
        }
        nodes[static_cast<std::size_t>(i)] = x;
        weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

} // namespace

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)> &fn)
{
    std::size_t workers = jobs > 0 ? static_cast<std::size_t>(jobs) : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(count, 1));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (;;)
        {
            const std::size_t i = next.fetch_add(1);
            if (i >= count)
            {
                return;
            }
            try
            {
                fn(i);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure)
                {
                    failure = std::current_exception();
                }
                next = count;
            }
        }
    };
    if (workers <= 1)
    {
        work();
    }
    else
    {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
        {
            pool.emplace_back(work);
        }
        for (auto &t : pool)
        {
            t.join();
        }
    }
    if (failure)
    {
        std::rethrow_exception(failure);
    }
}

std::uint64_t derive_seed(std::uint64_t base, const std::string &key, std::uint64_t rep)
{
    return base ^ splitmix64(fnv1a(key) ^ splitmix64(rep));
}

std::string fmt_num(double x)
{
    if (std::isnan(x))
    {
        return "nan";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// ---- analytics ----

AnalyticsRow analyze_case(const AnalyticsCase &c, std::size_t grid_points, DistributionCurve *nit,
                          DistributionCurve *ncit)
{
    const AnalyticScenario scn = c.scenario();
    scn.validate();
    AnalyticsRow row;
    row.c = c;
    row.eta_a_quadrature = arrival_rate_quadrature(scn);
    try
    {
        row.eta_a_closed_form = arrival_rate_closed_form(scn);
    }
    catch (const BranchError &)
    {
        row.eta_a_closed_form = std::numeric_limits<double>::quiet_NaN();
    }
    row.eta_c = change_rate(scn);
    const DistributionCurve a = nit_distribution(scn, default_grid(row.eta_a_quadrature, grid_points));
    const DistributionCurve b = ncit_distribution(scn, default_grid(row.eta_c, grid_points));
    row.nit_fit = fit_error(a);
    row.ncit_fit = fit_error(b);
    row.ncit_mass = pdf_mass(b);
    if (nit != nullptr)
    {
        *nit = a;
    }
    if (ncit != nullptr)
    {
        *ncit = b;
    }
    return row;
}

std::vector<AnalyticsRow> run_analytics(const AnalyticsConfig &cfg, const std::string &out_dir, int jobs)
{
    const std::size_t n = cfg.cases.size();
    std::vector<AnalyticsRow> rows(n);
    std::vector<DistributionCurve> nit(n);
    std::vector<DistributionCurve> ncit(n);
    parallel_for(n, jobs, [&](std::size_t i) { rows[i] = analyze_case(cfg.cases[i], cfg.grid_points, &nit[i], &ncit[i]); });
    if (!out_dir.empty())
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            auto a = open_out(out_dir, "nit_" + cfg.cases[i].name + ".csv");
            write_curve_csv(a, nit[i]);
            auto b = open_out(out_dir, "ncit_" + cfg.cases[i].name + ".csv");
            write_curve_csv(b, ncit[i]);
        }
        auto s = open_out(out_dir, "analytics_summary.csv");
        write_analytics_summary(s, rows);
    }
    return rows;
}

void write_analytics_summary(std::ostream &os, const std::vector<AnalyticsRow> &rows)
{
    os << "name,n_nodes,L,R,v_min,v_max,v_c,eta_a_quadrature,eta_a_closed_form,eta_c,"
          "nit_pdf_sup_err,nit_cdf_sup_err,ncit_pdf_sup_err,ncit_cdf_sup_err,ncit_pdf_mass\n";
    for (const auto &r : rows)
    {
        os << r.c.name << ',' << fmt_num(r.c.n_nodes) << ',' << fmt_num(r.c.L) << ',' << fmt_num(r.c.R) << ','
           << fmt_num(r.c.v_l) << ',' << fmt_num(r.c.v_u) << ',' << fmt_num(r.c.v_c) << ','
           << fmt_num(r.eta_a_quadrature) << ',' << fmt_num(r.eta_a_closed_form) << ',' << fmt_num(r.eta_c) << ','
           << fmt_num(r.nit_fit.pdf_sup) << ',' << fmt_num(r.nit_fit.cdf_sup) << ',' << fmt_num(r.ncit_fit.pdf_sup)
           << ',' << fmt_num(r.ncit_fit.cdf_sup) << ',' << fmt_num(r.ncit_mass) << '\n';
    }
}

// ---- mobility Monte Carlo ----

EncounterLog simulate_encounters(const AnalyticsCase &c, double duration, double warmup, std::uint64_t seed)
{
    c.scenario().validate();
    if (!(duration > warmup) || warmup < 0.0)
    {
        throw std::invalid_argument("simulate_encounters: need duration > warmup >= 0");
    }
    const auto n = static_cast<std::size_t>(std::llround(c.n_nodes));
    const Vec3 box{c.L, c.L, c.L};
    const SpeedBounds speeds{c.v_l, c.v_u};
    const double R2 = c.R * c.R;
    Rng rng = make_rng(seed, Stream::mobility);

    struct Leg
    {
        MobilityState s;
        double t0{0.0};
        double t_end{0.0};
    };
    std::vector<Leg> legs(n);
    for (auto &l : legs)
    {
        l.s = rwp_init(box, speeds, rng);
        l.t_end = distance(l.s.position, l.s.waypoint) / l.s.speed;
    }
    auto pos = [&](std::size_t i, double t) { return legs[i].s.position + legs[i].s.velocity * (t - legs[i].t0); };

    std::vector<char> inside(n * n, 0);
    for (std::size_t i = 0; i < n; ++i)
    {
        for (std::size_t j = i + 1; j < n; ++j)
        {
            inside[i * n + j] = norm_squared(pos(j, 0.0) - pos(i, 0.0)) < R2;
        }
    }
    std::vector<std::vector<double>> arrivals(n);
    std::vector<std::vector<double>> changes(n);
    EncounterLog log;
    auto record = [&](std::size_t i, std::size_t j, double te, bool arrival) {
        if (te < warmup)
        {
            return;
        }
        changes[i].push_back(te);
        changes[j].push_back(te);
        if (arrival)
        {
            arrivals[i].push_back(te);
            arrivals[j].push_back(te);
            log.arrivals += 2;
        }
        else
        {
            log.departures += 2;
        }
    };

    double t = 0.0;
    while (t < duration)
    {
        double t_next = duration;
        for (const auto &l : legs)
        {
            t_next = std::min(t_next, l.t_end);
        }
        const double dt = t_next - t;
        for (std::size_t i = 0; i < n; ++i)
        {
            const Vec3 pi = pos(i, t);
            for (std::size_t j = i + 1; j < n; ++j)
            {
                const Vec3 p = pos(j, t) - pi;
                const Vec3 v = legs[j].s.velocity - legs[i].s.velocity;
                char &in = inside[i * n + j];
                const double cc = norm_squared(p) - R2;
                in = cc < 0.0;
                const double a = norm_squared(v);
                if (a == 0.0)
                {
                    continue;
                }
                const double b = dot(p, v);
                const double disc = b * b - a * cc;
                if (disc <= 0.0)
                {
                    continue;
                }
                const double sq = std::sqrt(disc);
                const double s1 = (-b - sq) / a;
                const double s2 = (-b + sq) / a;
                if (!in && s1 > 0.0 && s1 <= dt)
                {
                    record(i, j, t + s1, true);
                    in = 1;
                }
                if (in && s2 > 0.0 && s2 <= dt)
                {
                    record(i, j, t + s2, false);
                    in = 0;
                }
            }
        }
        t = t_next;
        for (auto &l : legs)
        {
            if (l.t_end <= t)
            {
                l.s.position = l.s.waypoint;
                l.t0 = t;
                rwp_new_leg(l.s, box, speeds, rng);
                l.t_end = t + distance(l.s.position, l.s.waypoint) / l.s.speed;
            }
        }
    }

    auto gaps = [](std::vector<double> &times, std::vector<double> &out) {
        std::sort(times.begin(), times.end());
        for (std::size_t k = 1; k < times.size(); ++k)
        {
            out.push_back(times[k] - times[k - 1]);
        }
    };
    for (std::size_t i = 0; i < n; ++i)
    {
        gaps(arrivals[i], log.nit);
        gaps(changes[i], log.ncit);
    }
    log.node_seconds = static_cast<double>(n) * (duration - warmup);
    return log;
}

double MixtureReference::nit_at(double x) const
{
    if (x > t.back())
    {
        return 1.0 - (1.0 - nit_cdf.back()) * std::exp(-eta_a * (x - t.back()));
    }
    return interp(t, nit_cdf, x);
}

double MixtureReference::ncit_at(double x) const
{
    if (x > t.back())
    {
        return 1.0 - (1.0 - ncit_cdf.back()) * std::exp(-eta_c * (x - t.back()));
    }
    return interp(t, ncit_cdf, x);
}

MixtureReference mixture_reference(const AnalyticsCase &c, int points, std::size_t grid_points, double t_max)
{
    std::vector<double> x;
    std::vector<double> w;
    gauss_legendre(points, x, w);
    const double lo = std::log(c.v_l);
    const double hi = std::log(c.v_u);
    MixtureReference ref;
    ref.t = linear_grid(t_max, grid_points);
    ref.nit_cdf.assign(grid_points, 0.0);
    ref.ncit_cdf.assign(grid_points, 0.0);
    double weight_sum = 0.0;
    double eta_sum = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k)
    {
        AnalyticsCase ck = c;
        ck.v_c = std::exp(0.5 * (lo + hi) + 0.5 * (hi - lo) * x[k]);
        const AnalyticScenario scn = ck.scenario();
        const DistributionCurve a = nit_distribution(scn, ref.t);
        const DistributionCurve b = ncit_distribution(scn, ref.t);
        const double eta = a.rate_param;
        const double wk = w[k] * eta;
        for (std::size_t i = 0; i < grid_points; ++i)
        {
            ref.nit_cdf[i] += wk * a.cdf[i];
            ref.ncit_cdf[i] += wk * b.cdf[i];
        }
        weight_sum += w[k];
        eta_sum += wk;
    }
    for (std::size_t i = 0; i < grid_points; ++i)
    {
        ref.nit_cdf[i] /= eta_sum;
        ref.ncit_cdf[i] /= eta_sum;
    }
    ref.eta_a = eta_sum / weight_sum;
    ref.eta_c = 2.0 * ref.eta_a;
    return ref;
}

double ks_distance(std::vector<double> sample, const std::function<double(double)> &cdf)
{
    if (sample.empty())
    {
        throw std::invalid_argument("ks_distance: empty sample");
    }
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i)
    {
        const double f = cdf(sample[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

double ValidationRow::balance() const
{
    const double m = static_cast<double>(std::max(arrivals, departures));
    if (m == 0.0)
    {
        return 0.0;
    }
    const double a = static_cast<double>(arrivals);
    const double b = static_cast<double>(departures);
    return std::fabs(a - b) / m;
}

std::vector<ValidationRow> run_validation(const ValidateConfig &cfg, std::uint64_t seed_base,
                                          const std::string &out_dir, int jobs)
{
    const std::size_t nc = cfg.cases.size();
    const auto seeds = static_cast<std::size_t>(cfg.seeds);
    std::vector<EncounterLog> logs(nc * seeds);
    parallel_for(logs.size(), jobs, [&](std::size_t k) {
        const AnalyticsCase &c = cfg.cases[k / seeds];
        logs[k] = simulate_encounters(c, cfg.duration, cfg.warmup,
                                      derive_seed(seed_base, "validate:" + c.name, k % seeds));
    });

    std::vector<ValidationRow> rows(nc);
    std::vector<MixtureReference> refs(nc);
    std::vector<EncounterLog> pooled(nc);
    for (std::size_t ci = 0; ci < nc; ++ci)
    {
        EncounterLog &p = pooled[ci];
        for (std::size_t s = 0; s < seeds; ++s)
        {
            const EncounterLog &l = logs[ci * seeds + s];
            p.nit.insert(p.nit.end(), l.nit.begin(), l.nit.end());
            p.ncit.insert(p.ncit.end(), l.ncit.begin(), l.ncit.end());
            p.arrivals += l.arrivals;
            p.departures += l.departures;
            p.node_seconds += l.node_seconds;
        }
        if (p.nit.empty() || p.ncit.empty())
        {
            throw std::runtime_error("validate: no neighbor events observed for " + cfg.cases[ci].name);
        }
    }
    parallel_for(nc, jobs, [&](std::size_t ci) {
        const AnalyticsCase &c = cfg.cases[ci];
        const double eta = arrival_rate_quadrature(c.scenario());
        refs[ci] = mixture_reference(c, cfg.mixture_points, cfg.grid_points, 12.0 / eta);
    });
    for (std::size_t ci = 0; ci < nc; ++ci)
    {
        const EncounterLog &p = pooled[ci];
        const MixtureReference &ref = refs[ci];
        ValidationRow &r = rows[ci];
        r.name = cfg.cases[ci].name;
        r.nit_samples = p.nit.size();
        r.ncit_samples = p.ncit.size();
        r.ks_nit = ks_distance(p.nit, [&](double x) { return ref.nit_at(x); });
        r.ks_ncit = ks_distance(p.ncit, [&](double x) { return ref.ncit_at(x); });
        r.arrivals = p.arrivals;
        r.departures = p.departures;
        r.eta_a_empirical = static_cast<double>(p.arrivals) / p.node_seconds;
        r.eta_c_empirical = static_cast<double>(p.arrivals + p.departures) / p.node_seconds;
        r.eta_a_analytic = ref.eta_a;
        r.eta_c_analytic = ref.eta_c;
        auto in_band = [&](double ratio) { return ratio >= 1.0 - cfg.rate_tol && ratio <= 1.0 + cfg.rate_tol; };
        r.pass = r.ks_nit <= cfg.ks_tol && r.ks_ncit <= cfg.ks_tol && in_band(r.ratio_a()) && in_band(r.ratio_c());

        if (!out_dir.empty())
        {
            auto os = open_out(out_dir, "validate_" + r.name + "_cdf.csv");
            std::vector<double> a = p.nit;
            std::vector<double> b = p.ncit;
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            auto ecdf = [](const std::vector<double> &s, double x) {
                return static_cast<double>(std::upper_bound(s.begin(), s.end(), x) - s.begin()) /
                       static_cast<double>(s.size());
            };
            os << "t,nit_empirical,nit_analytic,ncit_empirical,ncit_analytic\n";
            for (double x : ref.t)
            {
                os << fmt_num(x) << ',' << fmt_num(ecdf(a, x)) << ',' << fmt_num(ref.nit_at(x)) << ','
                   << fmt_num(ecdf(b, x)) << ',' << fmt_num(ref.ncit_at(x)) << '\n';
            }
        }
    }
    if (!out_dir.empty())
    {
        auto os = open_out(out_dir, "validate_summary.csv");
        write_validation_summary(os, rows);
    }
    return rows;
}

void write_validation_summary(std::ostream &os, const std::vector<ValidationRow> &rows)
{
    os << "name,nit_samples,ncit_samples,ks_nit,ks_ncit,eta_a_empirical,eta_a_analytic,ratio_a,"
          "eta_c_empirical,eta_c_analytic,ratio_c,arrivals,departures,balance,pass\n";
    for (const auto &r : rows)
    {
        os << r.name << ',' << r.nit_samples << ',' << r.ncit_samples << ',' << fmt_num(r.ks_nit) << ','
           << fmt_num(r.ks_ncit) << ',' << fmt_num(r.eta_a_empirical) << ',' << fmt_num(r.eta_a_analytic) << ','
           << fmt_num(r.ratio_a()) << ',' << fmt_num(r.eta_c_empirical) << ',' << fmt_num(r.eta_c_analytic) << ','
           << fmt_num(r.ratio_c()) << ',' << r.arrivals << ',' << r.departures << ',' << fmt_num(r.balance()) << ','
           << (r.pass ? 1 : 0) << '\n';
    }
}

// ---- routing experiments ----

std::string GridPoint::seed_key() const
{
    return "gamma=" + fmt_num(gamma_th_db) + ";vmax=" + fmt_num(v_max);
}

std::vector<GridPoint> expand_grid(const ExperimentConfig &x)
{
    std::vector<GridPoint> out;
    for (Protocol p : x.protocols)
    {
        for (double d : x.deltas)
        {
            for (double g : x.gamma_th_db)
            {
                for (double v : x.v_max)
                {
                    out.push_back({p, d, g, v});
                }
            }
        }
    }
    return out;
}

SimConfig point_config(const SimConfig &base, const GridPoint &p, std::uint64_t seed)
{
    SimConfig c = base;
    c.protocol = p.protocol;
    c.sensing.delta = p.delta;
    c.radio.gamma_th = db_to_linear(p.gamma_th_db);
    c.speeds.v_u = p.v_max;
    c.seed = seed;
    return c;
}

double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0))
    {
        throw std::invalid_argument("normal_quantile: p must lie in (0, 1)");
    }
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

Stat normal_ci(const std::vector<double> &xs, double level)
{
    Stat s;
    if (xs.empty())
    {
        s.mean = std::numeric_limits<double>::quiet_NaN();
        s.half_width = s.mean;
        return s;
    }
    const double n = static_cast<double>(xs.size());
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() < 2)
    {
        return s;
    }
    double ss = 0.0;
    for (double x : xs)
    {
        ss += (x - s.mean) * (x - s.mean);
    }
    s.half_width = normal_quantile(0.5 + 0.5 * level) * std::sqrt(ss / (n - 1.0) / n);
    return s;
}

Stat bootstrap_ci(const std::vector<double> &xs, double level, int samples, std::uint64_t seed)
{
    Stat s = normal_ci(xs, level);
    if (xs.size() < 2)
    {
        s.half_width = 0.0;
        return s;
    }
    Rng rng{splitmix64(seed)};
    std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
    std::vector<double> means(static_cast<std::size_t>(samples));
    for (auto &m : means)
    {
        double acc = 0.0;
        for (std::size_t k = 0; k < xs.size(); ++k)
        {
            acc += xs[pick(rng)];
        }
        m = acc / static_cast<double>(xs.size());
    }
    std::sort(means.begin(), means.end());
    auto q = [&](double p) {
        const double pos = p * static_cast<double>(means.size() - 1);
        const auto i = static_cast<std::size_t>(pos);
        const double f = pos - static_cast<double>(i);
        return i + 1 < means.size() ? means[i] * (1.0 - f) + means[i + 1] * f : means.back();
    };
    s.half_width = 0.5 * (q(0.5 + 0.5 * level) - q(0.5 - 0.5 * level));
    return s;
}

ExperimentResult run_experiment(const SimConfig &base, const ExperimentConfig &x, std::uint64_t seed_base, int jobs,
                                const std::function<void(const std::string &)> &log)
{
    const std::vector<GridPoint> grid = expand_grid(x);
    const auto reps = static_cast<std::size_t>(x.replications);
    std::vector<RunRow> rows(grid.size() * reps);
    std::vector<std::string> failures(rows.size());
    std::mutex log_mutex;
    parallel_for(rows.size(), jobs, [&](std::size_t k) {
        const GridPoint &p = grid[k / reps];
        RunRow &r = rows[k];
        r.point = p;
        r.replication = static_cast<int>(k % reps);
        r.seed = derive_seed(seed_base, p.seed_key(), k % reps);
        try
        {
            const RunMetrics m = run_simulation(point_config(base, p, r.seed));
            r.pdr = m.pdr();
            r.e2ed_ms = m.e2ed_ms();
            r.hello_count = static_cast<double>(m.hello_count);
            r.hello_kbits = m.hello_bits / 1000.0;
            r.energy_j = m.energy_total;
        }
        catch (const std::exception &e)
        {
            failures[k] = to_string(p.protocol) + " delta=" + fmt_num(p.delta) + " gamma_th=" +
                          fmt_num(p.gamma_th_db) + " v_max=" + fmt_num(p.v_max) + " rep=" +
                          std::to_string(k % reps) + ": " + e.what();
            if (log)
            {
                std::lock_guard<std::mutex> lock(log_mutex);
                log(failures[k]);
            }
        }
    });

    ExperimentResult out;
    for (std::size_t g = 0; g < grid.size(); ++g)
    {
        AggregateRow agg;
        agg.point = grid[g];
        for (std::size_t r = 0; r < reps; ++r)
        {
            if (!failures[g * reps + r].empty())
            {
                agg.complete = false;
                out.errors.push_back(failures[g * reps + r]);
            }
        }
        std::vector<double> cols[5];
        if (agg.complete)
        {
            for (std::size_t r = 0; r < reps; ++r)
            {
                const RunRow &row = rows[g * reps + r];
                out.rows.push_back(row);
                cols[0].push_back(row.pdr);
                cols[1].push_back(row.e2ed_ms);
                cols[2].push_back(row.hello_count);
                cols[3].push_back(row.hello_kbits);
                cols[4].push_back(row.energy_j);
            }
        }
        agg.n = static_cast<int>(cols[0].size());
        Stat *stats[5] = {&agg.pdr, &agg.e2ed_ms, &agg.hello_count, &agg.hello_kbits, &agg.energy_j};
        for (std::size_t m = 0; m < 5; ++m)
        {
            *stats[m] = x.ci == "bootstrap"
                            ? bootstrap_ci(cols[m], x.ci_level, x.bootstrap_samples,
                                           derive_seed(seed_base, grid[g].seed_key() + to_string(grid[g].protocol), m))
                            : normal_ci(cols[m], x.ci_level);
        }
        out.aggregate.push_back(agg);
    }
    return out;
}

void write_raw_csv(std::ostream &os, const std::vector<RunRow> &rows)
{
    os << "seed,protocol,delta,gamma_th,v_max,pdr,e2ed_ms,hello_count,hello_kbits,energy_j\n";
    for (const auto &r : rows)
    {
        os << r.seed << ',' << to_string(r.point.protocol) << ',' << fmt_num(r.point.delta) << ','
           << fmt_num(r.point.gamma_th_db) << ',' << fmt_num(r.point.v_max) << ',' << fmt_num(r.pdr) << ','
           << fmt_num(r.e2ed_ms) << ',' << fmt_num(r.hello_count) << ',' << fmt_num(r.hello_kbits) << ','
           << fmt_num(r.energy_j) << '\n';
    }
}

void write_aggregate_csv(std::ostream &os, const std::vector<AggregateRow> &rows)
{
    os << "protocol,delta,gamma_th,v_max,n,complete,pdr_mean,pdr_ci,e2ed_ms_mean,e2ed_ms_ci,hello_count_mean,"
          "hello_count_ci,hello_kbits_mean,hello_kbits_ci,energy_j_mean,energy_j_ci\n";
    for (const auto &r : rows)
    {
        os << to_string(r.point.protocol) << ',' << fmt_num(r.point.delta) << ',' << fmt_num(r.point.gamma_th_db)
           << ',' << fmt_num(r.point.v_max) << ',' << r.n << ',' << (r.complete ? 1 : 0);
        for (const Stat *s : {&r.pdr, &r.e2ed_ms, &r.hello_count, &r.hello_kbits, &r.energy_j})
        {
            os << ',' << fmt_num(s->mean) << ',' << fmt_num(s->half_width);
        }
        os << '\n';
    }
}

// ---- sensing interval table ----

std::vector<SiRow> sweep_si(const SweepSiConfig &cfg, const SensingConfig &sensing)
{
    std::vector<SiRow> rows;
    for (double d : cfg.deltas)
    {
        SensingConfig s = sensing;
        s.delta = d;
        for (double eta : cfg.eta)
        {
            const IntervalResult r = resilient_interval(eta, s);
            rows.push_back({d, eta, r.x, r.t_s, r.unclamped, r.clamped});
        }
    }
    return rows;
}

void write_si_csv(std::ostream &os, const std::vector<SiRow> &rows)
{
    os << "delta,eta_e,x,t_s,t_s_unclamped,clamped\n";
    for (const auto &r : rows)
    {
        os << fmt_num(r.delta) << ',' << fmt_num(r.eta) << ',' << fmt_num(r.x) << ',' << fmt_num(r.t_s) << ','
           << fmt_num(r.unclamped) << ',' << (r.clamped ? 1 : 0) << '\n';
    }
}

} // namespace tarraq
