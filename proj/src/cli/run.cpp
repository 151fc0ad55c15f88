#include "mqmed/cli/run.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "internal/parallel.hpp"
#include "mqmed/cli/svg.hpp"
#include "mqmed/cli/table_io.hpp"
#include "mqmed/errors.hpp"

namespace mqmed::cli {

namespace {

namespace fs = std::filesystem;

std::string time_unit_label(const RunConfig& cfg)
{
    return "t [" + std::string(units::unit_name(cfg.time_unit)) + "]";
}

std::string energy_unit_label(const RunConfig& cfg)
{
    return std::string(units::unit_name(cfg.energy_unit));
}

TableHeader header(const RunConfig& cfg)
{
    TableHeader h;
    h.config_hash = cfg.hash;
    h.task = std::string(task_name(cfg.task));
    h.extra.emplace_back("energy_unit", energy_unit_label(cfg));
    h.extra.emplace_back("time_unit", std::string(units::unit_name(cfg.time_unit)));
    return h;
}

class Writer {
public:
    Writer(const RunConfig& cfg, RunResult& result) : cfg_(cfg), result_(result)
    {
        fs::create_directories(cfg.output.directory);
    }

    template <class Fn>
    void file(const std::string& name, Fn&& fill)
    {
        const std::string path = (fs::path(cfg_.output.directory) / name).string();
        std::ofstream os(path, std::ios::binary);
        if (!os) throw Error("cannot write '" + path + "'");
        fill(os);
        os.flush();
        if (!os) throw Error("write failed for '" + path + "'");
        result_.files.push_back(path);
    }

    void text(const std::string& name, const std::string& body)
    {
        file(name, [&](std::ostream& os) { os << body; });
    }

private:
    const RunConfig& cfg_;
    RunResult& result_;
};

Eigen::VectorXd energies_of(const Model& model)
{
    const auto& e = model.subsystem.energies;
    return Eigen::Map<const Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(e.size()));
}

RateSet rates_for(const RunConfig& cfg)
{
    if (!cfg.rates_file.empty())
        return read_rate_table_file(cfg.rates_file, cfg.model.subsystem.labels, cfg.mode_labels,
                                    energies_of(cfg.model));
    RateOptions opt;
    opt.route = cfg.route;
    opt.workers = cfg.workers;
    opt.generic_dim_cap = cfg.generic_dim_cap;
    RateSet r = compute_rate_set(cfg.model, cfg.quadrature, opt);
    r.mode_labels = cfg.mode_labels;
    return r;
}

// Population rates alone; dissipative spectral densities are resolved separately.
RateSet population_rates(const RunConfig& cfg)
{
    RateSet r = empty_rate_set(cfg.model);
    r.mode_labels = cfg.mode_labels;
    const std::size_t n = cfg.model.n_states();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (a != b && cfg.model.subsystem.coupling(a, b) != 0.0) pairs.emplace_back(a, b);
    std::vector<RateValue> vals(pairs.size());
    internal::parallel_for(pairs.size(), worker_count(cfg.workers), [&](std::size_t i) {
        vals[i] = population_rate_harmonic(cfg.model, pairs[i].first, pairs[i].second, cfg.quadrature);
    });
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto a = static_cast<Eigen::Index>(pairs[i].first);
        const auto b = static_cast<Eigen::Index>(pairs[i].second);
        r.K(b, a) = vals[i].value;
        r.K_error(b, a) = vals[i].error;
        r.K_eta(b, a) = vals[i].damping_eta.value_or(0.0);
    }
    return r;
}

// Trajectories always start at t = 0 so the ledger and the E_j origin coincide.
void with_origin(const RunConfig& cfg, std::vector<double>& times, std::vector<double>& times_out)
{
    times = cfg.times;
    times_out = cfg.times_user;
    if (times.front() != 0.0) {
        times.insert(times.begin(), 0.0);
        times_out.insert(times_out.begin(), 0.0);
    }
}

Eigen::VectorXd initial_populations(const RunConfig& cfg)
{
    Eigen::VectorXd p0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cfg.model.n_states()));
    p0(static_cast<Eigen::Index>(*cfg.initial_state)) = 1.0;
    return p0;
}

void print_rate_summary(std::ostream& out, const RateSet& r)
{
    const auto n = static_cast<Eigen::Index>(r.n_states());
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            if (a != b && r.K(b, a) != 0.0)
                out << "  K(" << r.state_labels[static_cast<std::size_t>(a)] << " -> "
                    << r.state_labels[static_cast<std::size_t>(b)] << ") = " << format_double(r.K(b, a)) << "\n";
    if (auto eta = r.damping_eta()) out << "  damping applied: eta = " << format_double(*eta) << "\n";
}

int task_rates(const RunConfig& cfg, Writer& w, std::ostream& out)
{
    const RateSet r = rates_for(cfg);
    if (cfg.output.csv) w.file("rates.csv", [&](std::ostream& os) { write_rate_table(os, header(cfg), r); });
    out << "rates: " << r.n_states() << " states, " << r.n_modes() << " modes\n";
    print_rate_summary(out, r);
    return kExitOk;
}

int task_dynamics(const RunConfig& cfg, Writer& w, std::ostream& out)
{
    const RateSet r = rates_for(cfg);
    std::vector<double> times, times_out;
    with_origin(cfg, times, times_out);
    const Eigen::VectorXd p0 = initial_populations(cfg);
    Trajectory traj = propagate(r, p0, times);
    traj.mode_labels = cfg.mode_labels;
    const double max_residual = energy_ledger(traj, energies_of(cfg.model));

    if (cfg.output.csv) {
        w.file("rates.csv", [&](std::ostream& os) { write_rate_table(os, header(cfg), r); });
        w.file("trajectory.csv", [&](std::ostream& os) { write_trajectory(os, header(cfg), traj, times_out); });
    }
    if (cfg.output.svg)
        w.text("dissipation.svg", stacked_area_svg(times_out, traj.E, traj.mode_labels, "Energy dissipated per mode",
                                                   time_unit_label(cfg), "E_j [" + energy_unit_label(cfg) + "]"));

    std::ostringstream led;
    write_header(led, header(cfg));
    led << "quantity,value\n";
    const auto last = static_cast<Eigen::Index>(traj.size()) - 1;
    double total = 0.0;
    for (std::size_t j = 0; j < traj.mode_labels.size(); ++j) {
        const double e = traj.E(last, static_cast<Eigen::Index>(j));
        total += e;
        led << "E_" << traj.mode_labels[j] << "," << format_double(e) << "\n";
    }
    led << "E_total," << format_double(total) << "\n";
    led << "E_sub_change," << format_double(traj.E_sub.back() - traj.E_sub.front()) << "\n";
    led << "max_abs_residual," << format_double(max_residual) << "\n";
    led << "propagation," << (traj.used_numeric ? "numeric" : "eigen") << "\n";
    w.text("ledger.csv", led.str());

    out << "dynamics: " << traj.size() << " time points, max |ledger residual| = " << format_double(max_residual)
        << "\n";
    out << "  total dissipated energy at t_end = " << format_double(total) << "\n";
    return kExitOk;
}

int task_dsd(const RunConfig& cfg, Writer& w, std::ostream& out)
{
    const std::size_t n = cfg.model.n_states();
    const RateSet pops = population_rates(cfg);
    std::vector<double> times, times_out;
    with_origin(cfg, times, times_out);
    const Trajectory traj = propagate(pops, initial_populations(cfg), times);

    // One job per (owner, partner) pair; files are written afterwards in a fixed order.
    std::vector<std::pair<std::size_t, std::size_t>> jobs;
    for (const auto& [owner, table] : cfg.sd_tables)
        for (std::size_t b = 0; b < n; ++b)
            if (b != owner && cfg.model.subsystem.coupling(owner, b) != 0.0) jobs.emplace_back(owner, b);
    std::vector<DissipativeSpectralDensity> dsd(jobs.size());
    internal::parallel_for(jobs.size(), worker_count(cfg.workers), [&](std::size_t i) {
        dsd[i] = dissipative_spectral_density(cfg.model, cfg.sd_tables.at(jobs[i].first), jobs[i].first,
                                              jobs[i].second, cfg.omega_grid, cfg.quadrature);
    });

    const auto& labels = cfg.model.subsystem.labels;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto& d = dsd[i];
        if (!cfg.output.csv) break;
        w.file("dsd_" + labels[d.owner] + "_" + labels[d.other] + ".csv", [&](std::ostream& os) {
            TableHeader h = header(cfg);
            h.extra.emplace_back("owner", labels[d.owner]);
            h.extra.emplace_back("partner", labels[d.other]);
            h.extra.emplace_back("max_error", format_double(d.max_error));
            write_header(os, h);
            os << "omega,J_forward,J_backward\n";
            for (std::size_t k = 0; k < d.omega.size(); ++k)
                os << format_double(d.omega[k]) << ',' << format_double(d.forward[k]) << ','
                   << format_double(d.backward[k]) << "\n";
        });
    }

    for (const auto& [owner, table] : cfg.sd_tables) {
        std::vector<DissipativeSpectralDensity> mine;
        for (std::size_t i = 0; i < jobs.size(); ++i)
            if (jobs[i].first == owner) mine.push_back(dsd[i]);
        if (mine.empty()) continue;
        Eigen::MatrixXd D(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(cfg.omega_grid.size()));
        for (std::size_t k = 0; k < times.size(); ++k) {
            const Eigen::VectorXd p = traj.P.row(static_cast<Eigen::Index>(k)).transpose();
            const auto row = dissipation_density(mine, p);
            for (std::size_t q = 0; q < row.size(); ++q)
                D(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(q)) = row[q];
        }
        if (cfg.output.csv)
            w.file("D_" + labels[owner] + ".csv", [&](std::ostream& os) {
                TableHeader h = header(cfg);
                h.extra.emplace_back("owner", labels[owner]);
                write_header(os, h);
                os << "t,omega,D\n";
                for (Eigen::Index k = 0; k < D.rows(); ++k)
                    for (Eigen::Index q = 0; q < D.cols(); ++q)
                        os << format_double(times_out[static_cast<std::size_t>(k)]) << ','
                           << format_double(cfg.omega_grid[static_cast<std::size_t>(q)]) << ','
                           << format_double(D(k, q)) << "\n";
            });
        if (cfg.output.svg)
            w.text("D_" + labels[owner] + ".svg",
                   heatmap_svg(times_out, cfg.omega_grid, D, "Dissipation density of state " + labels[owner],
                               time_unit_label(cfg), "omega [" + energy_unit_label(cfg) + "]"));
    }
    out << "dsd: " << jobs.size() << " dissipative spectral densities on " << cfg.omega_grid.size()
        << " frequencies\n";
    return kExitOk;
}

int task_spin(const RunConfig& cfg, Writer& w, std::ostream& out, std::ostream& err)
{
    RateSet exact = spin_rates_exact(cfg.model, cfg.quadrature, cfg.workers);
    exact.mode_labels = cfg.mode_labels;
    if (cfg.output.csv) w.file("rates_exact.csv", [&](std::ostream& os) { write_rate_table(os, header(cfg), exact); });
    out << "spin: exact rates\n";
    print_rate_summary(out, exact);

    WeakCouplingOptions wo;
    wo.max_ratio = cfg.weak_max_ratio;
    wo.override_guard = cfg.weak_override;
    wo.workers = cfg.workers;
    try {
        RateSet weak = spin_rates_weak(cfg.model, cfg.quadrature, wo);
        weak.mode_labels = cfg.mode_labels;
        if (cfg.output.csv) w.file("rates_weak.csv", [&](std::ostream& os) { write_rate_table(os, header(cfg), weak); });
        out << "spin: weak-coupling rates\n";
        print_rate_summary(out, weak);
    } catch (const ModelError& e) {
        err << "warning: weak-coupling rates skipped: " << e.what() << "\n";
    }
    return kExitOk;
}

int task_verify(const RunConfig& cfg, Writer& w, std::ostream& out)
{
    const RateSet r = rates_for(cfg);
    const BalanceReport rep = verify_balance(r, cfg.model, cfg.balance);
    const auto lines = rep.violations(r.state_labels, r.mode_labels);

    std::ostringstream os;
    write_header(os, header(cfg));
    os << "check,from,to,mode,value,expected,deviation,status\n";
    auto st = [](bool ok) { return ok ? "pass" : "FAIL"; };
    for (const auto& p : rep.populations) {
        if (!p.checked) continue;
        os << "detailed_balance," << r.state_labels[p.a] << ',' << r.state_labels[p.b] << ",-,"
           << format_double(p.ratio) << ',' << format_double(p.expected) << ',' << format_double(p.rel_dev) << ','
           << st(p.ok) << "\n";
    }
    for (const auto& d : rep.dissipation) {
        if (!d.checked) continue;
        os << "dissipation_balance," << r.state_labels[d.a] << ',' << r.state_labels[d.b] << ','
           << r.mode_labels[d.j] << ',' << format_double(d.ratio) << ',' << format_double(d.expected) << ','
           << format_double(d.rel_dev) << ',' << st(d.ok) << "\n";
    }
    for (const auto& s : rep.sum_rules) {
        os << "energy_sum_rule," << r.state_labels[s.a] << ',' << r.state_labels[s.b] << ",-,"
           << format_double(s.sum) << ',' << format_double(s.expected) << ',' << format_double(s.abs_dev) << ','
           << st(s.ok) << "\n";
    }
    w.text("verify.csv", os.str());

    if (rep.ok()) {
        out << "verify: PASS (" << rep.populations.size() << " pair, " << rep.dissipation.size() << " dissipation, "
            << rep.sum_rules.size() << " sum-rule checks)\n";
        return kExitOk;
    }
    out << "verify: FAIL\n";
    for (const auto& l : lines) out << "  " << l << "\n";
    return kExitVerificationFailed;
}

int task_oracle_compare(const RunConfig& cfg, Writer& w, std::ostream& out)
{
    std::vector<double> times, times_out;
    with_origin(cfg, times, times_out);
    const TruncatedSystem ts = build_truncated(cfg.model, cfg.truncation);
    const ExactPropagator prop(ts, *cfg.initial_state, cfg.model.thermal);
    ExactResult exact = prop.evaluate(times);
    exact.state_labels = cfg.model.subsystem.labels;
    exact.mode_labels = cfg.mode_labels;

    const RateSet r = rates_for(cfg);
    const Eigen::VectorXd p0 = initial_populations(cfg);
    Trajectory traj = propagate(r, p0, times);
    traj.mode_labels = cfg.mode_labels;
    energy_ledger(traj, energies_of(cfg.model));
    const ComparisonReport rep = compare_report(exact, traj, cfg.model, cfg.comparison);

    if (cfg.output.csv)
        w.file("comparison.csv", [&](std::ostream& os) { write_comparison_table(os, header(cfg), exact, traj, times_out); });
    if (cfg.output.svg) {
        w.text("dissipation_exact.svg", stacked_area_svg(times_out, exact.E, cfg.mode_labels, "Exact energy per mode",
                                                         time_unit_label(cfg), "E_j [" + energy_unit_label(cfg) + "]"));
        w.text("dissipation_mqmed.svg", stacked_area_svg(times_out, traj.E, cfg.mode_labels, "Rate-theory energy per mode",
                                                         time_unit_label(cfg), "E_j [" + energy_unit_label(cfg) + "]"));
    }

    std::ostringstream os;
    TableHeader h = header(cfg);
    h.extra.emplace_back("oracle_dim", std::to_string(ts.dim));
    write_header(os, h);
    for (const auto& f : rep.regime_flags) os << "# regime " << f << "\n";
    os << "quantity,max_abs,max_rel,status\n";
    for (const auto& q : rep.quantities)
        os << q.name << ',' << format_double(q.max_abs) << ',' << format_double(q.max_rel) << ','
           << (q.pass ? "pass" : "FAIL") << "\n";
    os << "boltzmann," << format_double(rep.boltzmann_deviation) << ",," << (rep.boltzmann_pass ? "pass" : "FAIL")
       << "\n";

    if (cfg.oracle_eta) {
        // Exponentially windowed early-time slopes, exact vs the rate equations at t = 0.
        const double eta = *cfg.oracle_eta;
        const auto slopes = prop.laplace_slopes(eta);
        const Eigen::VectorXd mode_rate = dissipation_weights(r) * p0;
        const Eigen::VectorXd pop_rate = rate_matrix(r) * p0;
        os << "# slopes eta " << format_double(eta) << "\n";
        for (std::size_t j = 0; j < cfg.mode_labels.size(); ++j)
            os << "slope_E_" << cfg.mode_labels[j] << ',' << format_double(slopes[j]) << ','
               << format_double(mode_rate(static_cast<Eigen::Index>(j))) << ",info\n";
        for (std::size_t a = 0; a < cfg.model.n_states(); ++a)
            os << "slope_P_" << cfg.model.subsystem.labels[a] << ',' << format_double(slopes[cfg.mode_labels.size() + a])
               << ',' << format_double(pop_rate(static_cast<Eigen::Index>(a))) << ",info\n";
    }
    w.text("comparison_report.csv", os.str());

    out << "oracle-compare: dimension " << ts.dim << ", " << (rep.pass ? "PASS" : "FAIL") << "\n";
    for (const auto& f : rep.regime_flags) out << "  regime: " << f << "\n";
    for (const auto& q : rep.quantities)
        out << "  " << q.name << ": max abs dev " << format_double(q.max_abs) << (q.pass ? "" : "  (FAIL)") << "\n";
    return rep.pass ? kExitOk : kExitVerificationFailed;
}

}  // namespace

RunResult run_task(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    RunResult result;
    Writer w(cfg, result);
    switch (cfg.task) {
    case Task::rates: result.exit_code = task_rates(cfg, w, out); break;
    case Task::dynamics: result.exit_code = task_dynamics(cfg, w, out); break;
    case Task::dsd: result.exit_code = task_dsd(cfg, w, out); break;
    case Task::spin: result.exit_code = task_spin(cfg, w, out, err); break;
    case Task::verify: result.exit_code = task_verify(cfg, w, out); break;
    case Task::oracle_compare: result.exit_code = task_oracle_compare(cfg, w, out); break;
    }
    return result;
}

void describe_model(const RunConfig& cfg, std::ostream& out)
{
    const Model& m = cfg.model;
    const auto& s = m.subsystem;
    out << "mqmed " << kToolVersion << "  config " << hash_hex(cfg.hash) << "\n";
    out << "task: " << task_name(cfg.task) << "\n";
    out << "units: energy " << units::unit_name(cfg.energy_unit) << ", time " << units::unit_name(cfg.time_unit) << "\n";
    if (m.thermal.zero_temperature) out << "thermal: zero temperature\n";
    else out << "thermal: beta = " << format_double(m.thermal.beta) << "\n";

    out << "states (" << s.size() << "):\n";
    for (std::size_t a = 0; a < s.size(); ++a) out << "  " << s.labels[a] << "  E = " << format_double(s.energies[a]) << "\n";
    out << "couplings:\n";
    if (s.couplings.empty()) out << "  (none)\n";
    for (const auto& c : s.couplings)
        out << "  " << s.labels[c.a] << " - " << s.labels[c.b] << "  V = " << format_double(c.value) << "\n";

    const std::size_t nm = m.n_modes();
    out << "bath: " << bath_kind_name(m.bath) << ", " << nm << " modes\n";
    if (nm == 0) out << "warning: the bath has 0 modes; every rate integral is undamped and will not converge\n";

    if (is_harmonic(m.bath) && nm > 0) {
        const Reorganization re = reorganization_energies(m.bath, s.size());
        out << "reorganization energies Lambda_AB:\n";
        for (std::size_t a = 0; a < s.size(); ++a) {
            out << "  " << s.labels[a] << ":";
            for (std::size_t b = 0; b < s.size(); ++b)
                out << ' ' << format_double(re.total(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
            out << "\n";
        }
        for (std::size_t a = 0; a < s.size(); ++a)
            out << "  Lambda_" << s.labels[a] << s.labels[a] << " = "
                << format_double(re.total(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a))) << "\n";
    }

    const RegimeDiagnostics d = regime_diagnostics(m);
    out << "regime:\n";
    out << "  max V/dE = " << format_double(d.coupling_ratio) << "\n";
    if (std::holds_alternative<SpinBath>(m.bath)) {
        const bool valid = d.reorganization_ratio <= cfg.weak_max_ratio;
        out << "  max gamma/omega = " << format_double(d.reorganization_ratio) << "  weak-coupling "
            << (valid ? "valid" : "NOT valid") << " (limit " << format_double(cfg.weak_max_ratio) << ")\n";
    } else if (is_harmonic(m.bath)) {
        out << "  max lambda/omega = " << format_double(d.reorganization_ratio) << "\n";
    }
    if (nm > 0 && (is_harmonic(m.bath) || std::holds_alternative<SpinBath>(m.bath))) {
        if (m.thermal.zero_temperature) out << "  beta*omega: infinite (zero temperature)\n";
        else
            out << "  beta*omega in [" << format_double(d.min_beta_omega) << ", " << format_double(d.max_beta_omega)
                << "]\n";
    }
}

int run_file(const std::string& path, std::ostream& out, std::ostream& err)
{
    try {
        const RunConfig cfg = load_config(path);
        const RunResult r = run_task(cfg, out, err);
        for (const auto& f : r.files) out << "wrote " << f << "\n";
        return r.exit_code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

int describe_file(const std::string& path, std::ostream& out, std::ostream& err)
{
    try {
        describe_model(load_config(path), out);
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

}  // namespace mqmed::cli
