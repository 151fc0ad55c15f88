#include "mqmed/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mqmed/errors.hpp"

namespace mqmed::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void fail(const std::string& key, const std::string& what)
{
    throw ConfigError("config key '" + key + "': " + what);
}

std::string child(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i)
{
    return path + "[" + std::to_string(i) + "]";
}

void allow_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys)
{
    if (!obj.is_object()) fail(path, "expected an object");
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!ok.count(it.key())) fail(child(path, it.key()), "unknown key");
}

const json* find(const json& obj, const char* key)
{
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double number(const json& v, const std::string& path)
{
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "must be finite");
    return x;
}

double number_at(const json& obj, const char* key, const std::string& path)
{
    const json* v = find(obj, key);
    if (!v) fail(child(path, key), "missing");
    return number(*v, child(path, key));
}

std::string string_at(const json& obj, const char* key, const std::string& path)
{
    const json* v = find(obj, key);
    if (!v) fail(child(path, key), "missing");
    if (!v->is_string()) fail(child(path, key), "expected a string");
    return v->get<std::string>();
}

std::optional<double> opt_number(const json& obj, const char* key, const std::string& path)
{
    const json* v = find(obj, key);
    if (!v || v->is_null()) return std::nullopt;
    return number(*v, child(path, key));
}

std::size_t count_at(const json& v, const std::string& path)
{
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(path, "expected a nonnegative integer");
    return static_cast<std::size_t>(v.get<long long>());
}

bool bool_at(const json& v, const std::string& path)
{
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
}

// line:col of a byte offset in text (1-based).
std::string line_col(const std::string& text, std::size_t byte)
{
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return std::to_string(line) + ":" + std::to_string(col);
}

// Internal times are in the reciprocal of the energy unit.
double to_internal_time(double t, units::Unit time_unit, units::Unit energy_unit, const std::string& key)
{
    using units::Unit;
    Unit internal = Unit::dimensionless;
    if (energy_unit == Unit::wavenumber) internal = Unit::wavenumber_time;
    if (energy_unit == Unit::rad_per_fs) internal = Unit::femtosecond;
    try {
        return units::unit_convert(t, time_unit, internal);
    } catch (const UnitError& e) {
        fail(key, e.what());
    }
}

std::vector<double> grid(const json& v, const std::string& path)
{
    std::vector<double> out;
    if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], index(path, i)));
    } else if (v.is_object()) {
        allow_keys(v, path, {"start", "stop", "count"});
        const double start = number_at(v, "start", path);
        const double stop = number_at(v, "stop", path);
        const json* c = find(v, "count");
        if (!c) fail(child(path, "count"), "missing");
        const std::size_t n = count_at(*c, child(path, "count"));
        if (n == 0) fail(child(path, "count"), "must be positive");
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(n == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(n - 1));
        if (n > 1) out.back() = stop;
    } else {
        fail(path, "expected an array or {start, stop, count}");
    }
    if (out.empty()) fail(path, "grid must be nonempty");
    for (std::size_t i = 1; i < out.size(); ++i)
        if (!(out[i] > out[i - 1])) fail(path, "grid must be strictly ascending");
    return out;
}

std::size_t state_ref(const json& v, const SubsystemSpec& s, const std::string& path)
{
    if (!v.is_string()) fail(path, "expected a state label");
    const std::string label = v.get<std::string>();
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.labels[i] == label) return i;
    fail(path, "unknown state '" + label + "'");
}

void parse_units(const json* u, RunConfig& cfg)
{
    if (!u) return;
    allow_keys(*u, "units", {"energy", "time"});
    try {
        if (find(*u, "energy")) cfg.energy_unit = units::parse_unit(string_at(*u, "energy", "units"));
        if (find(*u, "time")) cfg.time_unit = units::parse_unit(string_at(*u, "time", "units"));
    } catch (const UnitError& e) {
        fail("units", e.what());
    }
    using units::Unit;
    if (cfg.energy_unit != Unit::wavenumber && cfg.energy_unit != Unit::rad_per_fs &&
        cfg.energy_unit != Unit::dimensionless)
        fail("units.energy", "must be cm-1, rad/fs or dimensionless");
    if (cfg.time_unit != Unit::femtosecond && cfg.time_unit != Unit::wavenumber_time &&
        cfg.time_unit != Unit::dimensionless)
        fail("units.time", "must be fs, cm or dimensionless");
}

void parse_subsystem(const json* s, RunConfig& cfg)
{
    if (!s) fail("subsystem", "missing");
    allow_keys(*s, "subsystem", {"states", "couplings"});
    const json* states = find(*s, "states");
    if (!states || !states->is_array()) fail("subsystem.states", "expected an array");
    auto& sub = cfg.model.subsystem;
    for (std::size_t i = 0; i < states->size(); ++i) {
        const std::string p = index("subsystem.states", i);
        const json& st = (*states)[i];
        allow_keys(st, p, {"label", "energy"});
        const std::string label = string_at(st, "label", p);
        if (std::find(sub.labels.begin(), sub.labels.end(), label) != sub.labels.end())
            fail(child(p, "label"), "duplicate state label '" + label + "'");
        sub.labels.push_back(label);
        sub.energies.push_back(number_at(st, "energy", p));
    }
    if (sub.size() < 2) fail("subsystem.states", "at least 2 states are required");
    if (const json* cs = find(*s, "couplings")) {
        if (!cs->is_array()) fail("subsystem.couplings", "expected an array");
        for (std::size_t i = 0; i < cs->size(); ++i) {
            const std::string p = index("subsystem.couplings", i);
            const json& c = (*cs)[i];
            allow_keys(c, p, {"a", "b", "value"});
            const json* a = find(c, "a");
            const json* b = find(c, "b");
            if (!a) fail(child(p, "a"), "missing");
            if (!b) fail(child(p, "b"), "missing");
            Coupling cp{state_ref(*a, sub, child(p, "a")), state_ref(*b, sub, child(p, "b")), number_at(c, "value", p)};
            if (cp.a == cp.b) fail(p, "a state cannot couple to itself");
            sub.couplings.push_back(cp);
        }
    }
}

void parse_thermal(const json* t, RunConfig& cfg)
{
    if (!t) fail("thermal", "missing");
    allow_keys(*t, "thermal", {"temperature", "beta", "zero_temperature"});
    const int given = (find(*t, "temperature") ? 1 : 0) + (find(*t, "beta") ? 1 : 0) +
                      (find(*t, "zero_temperature") ? 1 : 0);
    if (given != 1) fail("thermal", "give exactly one of temperature, beta, zero_temperature");
    if (const json* z = find(*t, "zero_temperature")) {
        if (!bool_at(*z, "thermal.zero_temperature")) fail("thermal.zero_temperature", "only true is meaningful");
        cfg.model.thermal = ThermalSpec::at_zero_temperature();
    } else if (find(*t, "beta")) {
        const double beta = number_at(*t, "beta", "thermal");
        if (!(beta > 0.0)) fail("thermal.beta", "must be positive");
        cfg.model.thermal = ThermalSpec{beta, false};
    } else {
        const double kelvin = number_at(*t, "temperature", "thermal");
        try {
            cfg.model.thermal = ThermalSpec{units::beta_from_kelvin(kelvin, cfg.energy_unit), false};
        } catch (const UnitError& e) {
            fail("thermal.temperature", e.what());
        }
    }
}

Eigen::MatrixXcd parse_matrix(const json& m, const std::string& path)
{
    if (!m.is_array() || m.empty()) fail(path, "expected a nonempty array of rows");
    const auto n = static_cast<Eigen::Index>(m.size());
    Eigen::MatrixXcd out(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const json& row = m[static_cast<std::size_t>(r)];
        const std::string rp = index(path, static_cast<std::size_t>(r));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) fail(rp, "rows must form a square matrix");
        for (Eigen::Index c = 0; c < n; ++c) {
            const json& e = row[static_cast<std::size_t>(c)];
            const std::string ep = index(rp, static_cast<std::size_t>(c));
            if (e.is_array()) {
                if (e.size() != 2) fail(ep, "complex entries are [re, im]");
                out(r, c) = cplx(number(e[0], index(ep, 0)), number(e[1], index(ep, 1)));
            } else {
                out(r, c) = number(e, ep);
            }
        }
    }
    return out;
}

std::string resolve(const RunConfig& cfg, const std::string& p)
{
    const fs::path path(p);
    if (path.is_absolute()) return path.string();
    return (fs::path(cfg.base_dir) / path).lexically_normal().string();
}

void parse_bath(const json* b, RunConfig& cfg)
{
    if (!b) fail("bath", "missing");
    allow_keys(*b, "bath", {"kind", "modes", "sd_file", "n_modes"});
    const std::string kind = string_at(*b, "kind", "bath");
    const auto& sub = cfg.model.subsystem;
    const json empty = json::array();
    const json* modes = find(*b, "modes");
    if (modes && !modes->is_array()) fail("bath.modes", "expected an array");
    if (!modes) modes = &empty;
    auto label_of = [&](const json& m, std::size_t j, const std::string& p) {
        if (const json* l = find(m, "label")) {
            if (!l->is_string()) fail(child(p, "label"), "expected a string");
            return l->get<std::string>();
        }
        return "mode" + std::to_string(j);
    };

    if (kind == "ho-general") {
        HarmonicBath bath;
        for (std::size_t j = 0; j < modes->size(); ++j) {
            const std::string p = index("bath.modes", j);
            const json& m = (*modes)[j];
            allow_keys(m, p, {"label", "omega", "displacements"});
            HarmonicMode hm;
            hm.omega = number_at(m, "omega", p);
            if (!(hm.omega > 0.0)) fail(child(p, "omega"), "must be positive");
            hm.displacement.assign(sub.size(), 0.0);
            if (const json* d = find(m, "displacements")) {
                if (!d->is_object()) fail(child(p, "displacements"), "expected {state: displacement}");
                for (auto it = d->begin(); it != d->end(); ++it) {
                    const std::string dp = child(child(p, "displacements"), it.key());
                    hm.displacement[state_ref(json(it.key()), sub, dp)] = number(it.value(), dp);
                }
            }
            bath.modes.push_back(hm);
            cfg.mode_labels.push_back(label_of(m, j, p));
        }
        cfg.model.bath = bath;
    } else if (kind == "ho-local") {
        LocalHarmonicBath bath;
        for (std::size_t j = 0; j < modes->size(); ++j) {
            const std::string p = index("bath.modes", j);
            const json& m = (*modes)[j];
            allow_keys(m, p, {"label", "owner", "omega", "displacement", "reorganization"});
            LocalHarmonicMode lm;
            const json* owner = find(m, "owner");
            if (!owner) fail(child(p, "owner"), "missing");
            lm.owner = state_ref(*owner, sub, child(p, "owner"));
            lm.omega = number_at(m, "omega", p);
            if (!(lm.omega > 0.0)) fail(child(p, "omega"), "must be positive");
            const bool has_d = find(m, "displacement") != nullptr;
            const bool has_l = find(m, "reorganization") != nullptr;
            if (has_d == has_l) fail(p, "give exactly one of displacement, reorganization");
            if (has_d) {
                lm.displacement = number_at(m, "displacement", p);
            } else {
                const double lam = number_at(m, "reorganization", p);
                if (lam < 0.0) fail(child(p, "reorganization"), "must be nonnegative");
                lm.displacement = std::sqrt(2.0 * lam) / lm.omega;
            }
            bath.modes.push_back(lm);
            cfg.mode_labels.push_back(label_of(m, j, p));
        }
        cfg.model.bath = bath;
    } else if (kind == "spin") {
        SpinBath bath;
        for (std::size_t j = 0; j < modes->size(); ++j) {
            const std::string p = index("bath.modes", j);
            const json& m = (*modes)[j];
            allow_keys(m, p, {"label", "omega", "gamma"});
            SpinMode sm{number_at(m, "omega", p), number_at(m, "gamma", p)};
            if (sm.omega < 0.0) fail(child(p, "omega"), "must be nonnegative");
            bath.modes.push_back(sm);
            cfg.mode_labels.push_back(label_of(m, j, p));
        }
        cfg.model.bath = bath;
    } else if (kind == "generic") {
        GenericBath bath;
        for (std::size_t j = 0; j < modes->size(); ++j) {
            const std::string p = index("bath.modes", j);
            const json& m = (*modes)[j];
            allow_keys(m, p, {"label", "matrices"});
            const json* mats = find(m, "matrices");
            if (!mats || !mats->is_object()) fail(child(p, "matrices"), "expected {state: matrix}");
            GenericMode gm;
            gm.v.resize(sub.size());
            std::vector<bool> seen(sub.size(), false);
            for (auto it = mats->begin(); it != mats->end(); ++it) {
                const std::string mp = child(child(p, "matrices"), it.key());
                const std::size_t a = state_ref(json(it.key()), sub, mp);
                gm.v[a] = parse_matrix(it.value(), mp);
                seen[a] = true;
            }
            for (std::size_t a = 0; a < sub.size(); ++a)
                if (!seen[a]) fail(child(p, "matrices"), "no matrix for state '" + sub.labels[a] + "'");
            bath.modes.push_back(std::move(gm));
            cfg.mode_labels.push_back(label_of(m, j, p));
        }
        cfg.model.bath = std::move(bath);
    } else if (kind == "sd-table") {
        const json* f = find(*b, "sd_file");
        if (!f) fail("bath.sd_file", "missing");
        std::map<std::size_t, std::string> files;
        if (f->is_string()) {
            files[0] = f->get<std::string>();
        } else if (f->is_object()) {
            for (auto it = f->begin(); it != f->end(); ++it) {
                const std::string fp = child("bath.sd_file", it.key());
                if (!it.value().is_string()) fail(fp, "expected a file path");
                files[state_ref(json(it.key()), sub, fp)] = it.value().get<std::string>();
            }
        } else {
            fail("bath.sd_file", "expected a path or {state: path}");
        }
        if (const json* n = find(*b, "n_modes")) cfg.sd_modes = count_at(*n, "bath.n_modes");
        if (cfg.sd_modes == 0) fail("bath.n_modes", "must be positive");
        if (!modes->empty()) fail("bath.modes", "sd-table baths take their modes from sd_file");
        LocalHarmonicBath bath;
        for (const auto& [owner, file] : files) {
            const std::string path = resolve(cfg, file);
            if (!fs::exists(path)) fail("bath.sd_file", "file not found: " + path);
            SpectralDensityTable table;
            try {
                table = read_spectral_density_file(path, owner, owner);
            } catch (const Error& e) {
                fail("bath.sd_file", e.what());
            }
            std::vector<HarmonicMode> hm;
            try {
                hm = discretize_spectral_density(table, cfg.sd_modes, sub.size());
            } catch (const Error& e) {
                fail("bath.sd_file", e.what());
            }
            for (std::size_t k = 0; k < hm.size(); ++k) {
                bath.modes.push_back(LocalHarmonicMode{owner, hm[k].omega, hm[k].d(owner)});
                cfg.mode_labels.push_back(sub.labels[owner] + "_" + std::to_string(k));
            }
            cfg.sd_tables.emplace(owner, std::move(table));
        }
        cfg.model.bath = bath;
    } else {
        fail("bath.kind", "must be one of ho-general, ho-local, spin, generic, sd-table (got '" + kind + "')");
    }
}

void parse_task(const json* t, RunConfig& cfg)
{
    if (!t) fail("task", "missing");
    allow_keys(*t, "task", {"kind", "initial_state", "route", "rates_file", "weak_override", "weak_max_ratio"});
    const std::string kind = string_at(*t, "kind", "task");
    if (kind == "rates") cfg.task = Task::rates;
    else if (kind == "dynamics") cfg.task = Task::dynamics;
    else if (kind == "dsd") cfg.task = Task::dsd;
    else if (kind == "spin") cfg.task = Task::spin;
    else if (kind == "verify") cfg.task = Task::verify;
    else if (kind == "oracle-compare") cfg.task = Task::oracle_compare;
    else fail("task.kind", "must be one of rates, dynamics, dsd, spin, verify, oracle-compare (got '" + kind + "')");
    if (const json* s = find(*t, "initial_state")) cfg.initial_state = state_ref(*s, cfg.model.subsystem, "task.initial_state");
    if (find(*t, "route")) {
        const std::string r = string_at(*t, "route", "task");
        if (r == "trace-product") cfg.route = RateRoute::trace_product;
        else if (r == "line-broadening") cfg.route = RateRoute::line_broadening;
        else if (r == "local") cfg.route = RateRoute::local;
        else fail("task.route", "must be trace-product, line-broadening or local");
    }
    if (find(*t, "rates_file")) {
        cfg.rates_file = resolve(cfg, string_at(*t, "rates_file", "task"));
        if (!fs::exists(cfg.rates_file)) fail("task.rates_file", "file not found: " + cfg.rates_file);
    }
    if (const json* w = find(*t, "weak_override")) cfg.weak_override = bool_at(*w, "task.weak_override");
    if (auto r = opt_number(*t, "weak_max_ratio", "task")) {
        if (!(*r > 0.0)) fail("task.weak_max_ratio", "must be positive");
        cfg.weak_max_ratio = *r;
    }
}

void parse_numeric(const json* n, RunConfig& cfg)
{
    auto& q = cfg.quadrature;
    if (n) {
        allow_keys(*n, "numeric",
                   {"rel_tol", "abs_tol", "tail_eps", "t_max", "damping_eta", "fallback_eta", "panel_width",
                    "max_subdivisions", "times", "omega_grid", "harmonic_levels", "auto_tail", "dim_cap", "sd_modes",
                    "workers", "oracle_eta", "generic_dim_cap", "balance_ratio_tol", "balance_sum_tol",
                    "population_tol", "energy_rel_tol", "boltzmann_tol"});
        auto positive = [&](const char* key) -> std::optional<double> {
            auto v = opt_number(*n, key, "numeric");
            if (v && !(*v > 0.0)) fail(child("numeric", key), "must be positive");
            return v;
        };
        if (auto v = positive("rel_tol")) q.rel_tol = *v;
        if (auto v = positive("abs_tol")) q.abs_tol = *v;
        if (auto v = positive("tail_eps")) q.tail_eps = *v;
        if (auto v = positive("t_max")) q.t_max_cap = to_internal_time(*v, cfg.time_unit, cfg.energy_unit, "numeric.t_max");
        if (auto v = positive("panel_width"))
            q.panel_width = to_internal_time(*v, cfg.time_unit, cfg.energy_unit, "numeric.panel_width");
        q.damping_eta = positive("damping_eta");
        q.fallback_eta = positive("fallback_eta");
        cfg.oracle_eta = positive("oracle_eta");
        if (const json* v = find(*n, "max_subdivisions")) q.max_subdivisions = count_at(*v, "numeric.max_subdivisions");
        if (const json* v = find(*n, "times")) {
            cfg.times_user = grid(*v, "numeric.times");
            if (cfg.times_user.front() < 0.0) fail("numeric.times", "times must be nonnegative");
        }
        if (const json* v = find(*n, "omega_grid")) {
            cfg.omega_grid = grid(*v, "numeric.omega_grid");
            if (!(cfg.omega_grid.front() > 0.0)) fail("numeric.omega_grid", "frequencies must be positive");
        }
        if (const json* v = find(*n, "harmonic_levels")) cfg.truncation.harmonic_levels = count_at(*v, "numeric.harmonic_levels");
        if (auto v = positive("auto_tail")) cfg.truncation.auto_tail = *v;
        if (const json* v = find(*n, "dim_cap")) cfg.truncation.dim_cap = count_at(*v, "numeric.dim_cap");
        if (const json* v = find(*n, "workers")) cfg.workers = count_at(*v, "numeric.workers");
        if (const json* v = find(*n, "generic_dim_cap")) cfg.generic_dim_cap = count_at(*v, "numeric.generic_dim_cap");
        if (auto v = positive("balance_ratio_tol")) cfg.balance.ratio_rel = *v;
        if (auto v = positive("balance_sum_tol")) cfg.balance.sum_rel = *v;
        if (auto v = positive("population_tol")) cfg.comparison.population_abs = *v;
        if (auto v = positive("energy_rel_tol")) cfg.comparison.energy_rel = *v;
        if (auto v = positive("boltzmann_tol")) cfg.comparison.boltzmann_abs = *v;
    }
    cfg.balance.abs_tol = q.abs_tol;
    for (double t : cfg.times_user) cfg.times.push_back(to_internal_time(t, cfg.time_unit, cfg.energy_unit, "numeric.times"));
}

void parse_output(const json* o, RunConfig& cfg)
{
    if (!o) {
        cfg.output.directory = resolve(cfg, cfg.output.directory);
        return;
    }
    allow_keys(*o, "output", {"directory", "formats"});
    if (find(*o, "directory")) cfg.output.directory = string_at(*o, "directory", "output");
    cfg.output.directory = resolve(cfg, cfg.output.directory);
    if (const json* f = find(*o, "formats")) {
        if (!f->is_array()) fail("output.formats", "expected an array");
        cfg.output.csv = cfg.output.svg = false;
        for (std::size_t i = 0; i < f->size(); ++i) {
            const json& v = (*f)[i];
            const std::string p = index("output.formats", i);
            if (!v.is_string()) fail(p, "expected a string");
            const std::string s = v.get<std::string>();
            if (s == "csv") cfg.output.csv = true;
            else if (s == "svg") cfg.output.svg = true;
            else fail(p, "format must be csv or svg");
        }
    }
}

void check_task_needs(const RunConfig& cfg)
{
    switch (cfg.task) {
    case Task::dynamics:
    case Task::oracle_compare:
        if (cfg.times.empty()) fail("numeric.times", "required by task " + std::string(task_name(cfg.task)));
        if (!cfg.initial_state) fail("task.initial_state", "required by task " + std::string(task_name(cfg.task)));
        break;
    case Task::dsd:
        if (cfg.sd_tables.empty()) fail("bath.kind", "task dsd needs an sd-table bath");
        if (cfg.omega_grid.empty()) fail("numeric.omega_grid", "required by task dsd");
        if (cfg.times.empty()) fail("numeric.times", "required by task dsd");
        if (!cfg.initial_state) fail("task.initial_state", "required by task dsd");
        break;
    case Task::spin:
        if (!std::holds_alternative<SpinBath>(cfg.model.bath)) fail("bath.kind", "task spin needs a spin bath");
        break;
    default: break;
    }
    if (cfg.route != RateRoute::trace_product && !is_harmonic(cfg.model.bath))
        fail("task.route", "line-broadening and local routes need a harmonic bath");
    if (cfg.route == RateRoute::local && !std::holds_alternative<LocalHarmonicBath>(cfg.model.bath))
        fail("task.route", "the local route needs an ho-local or sd-table bath");
}

}  // namespace

std::string_view task_name(Task t)
{
    switch (t) {
    case Task::rates: return "rates";
    case Task::dynamics: return "dynamics";
    case Task::dsd: return "dsd";
    case Task::spin: return "spin";
    case Task::verify: return "verify";
    case Task::oracle_compare: return "oracle-compare";
    }
    return "?";
}

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h)
{
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

RunConfig parse_config_text(const std::string& text, const std::string& base_dir)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error at " + line_col(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
    }
    RunConfig cfg;
    cfg.base_dir = base_dir;
    cfg.hash = fnv1a64(text);
    allow_keys(doc, "", {"units", "subsystem", "bath", "thermal", "task", "numeric", "output"});
    parse_units(find(doc, "units"), cfg);
    parse_subsystem(find(doc, "subsystem"), cfg);
    parse_thermal(find(doc, "thermal"), cfg);
    if (const json* n = find(doc, "numeric"))
        if (const json* sd = n->is_object() ? find(*n, "sd_modes") : nullptr) cfg.sd_modes = count_at(*sd, "numeric.sd_modes");
    parse_bath(find(doc, "bath"), cfg);
    parse_task(find(doc, "task"), cfg);
    parse_numeric(find(doc, "numeric"), cfg);
    parse_output(find(doc, "output"), cfg);

    const ValidationReport rep = validate_model(cfg.model);
    if (!rep.ok()) {
        std::string msg = "model validation failed:";
        for (const auto& v : rep.violations) msg += "\n  - " + v;
        throw ConfigError(msg);
    }
    check_task_needs(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    const fs::path p(path);
    const std::string base = p.has_parent_path() ? p.parent_path().string() : ".";
    RunConfig cfg = parse_config_text(ss.str(), base);
    cfg.path = path;
    return cfg;
}

}  // namespace mqmed::cli
