#include "mqmed/cli/table_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mqmed/cli/config.hpp"
#include "mqmed/errors.hpp"

namespace mqmed::cli {

std::string format_double(double x)
{
    if (x == 0.0) return "0";  // folds -0
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) throw Error("format_double: conversion failed");
    return std::string(buf, p);
}

void write_header(std::ostream& out, const TableHeader& h)
{
    out << "# mqmed " << kToolVersion << "\n";
    out << "# config_hash " << hash_hex(h.config_hash) << "\n";
    if (!h.task.empty()) out << "# task " << h.task << "\n";
    for (const auto& [k, v] : h.extra) out << "# " << k << " " << v << "\n";
}

namespace {

std::string eta_field(double eta)
{
    return eta > 0.0 ? format_double(eta) : std::string();
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_field(const std::string& s, std::size_t line, const char* what)
{
    if (s.empty()) return 0.0;
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw Error("rate table line " + std::to_string(line) + ": bad " + what + " '" + s + "'");
    return v;
}

std::size_t find_label(const std::vector<std::string>& labels, const std::string& s, std::size_t line,
                       const char* what)
{
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == s) return i;
    throw Error("rate table line " + std::to_string(line) + ": unknown " + what + " '" + s + "'");
}

}  // namespace

void write_rate_table(std::ostream& out, const TableHeader& h, const RateSet& rates)
{
    write_header(out, h);
    if (auto eta = rates.damping_eta()) out << "# damping_eta " << format_double(*eta) << "\n";
    out << "from,to,mode,K,Kdiss,err_estimate,damping_eta\n";
    const auto n = static_cast<Eigen::Index>(rates.n_states());
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            if (a == b) continue;
            bool any = rates.K(b, a) != 0.0;
            for (const auto& kd : rates.Kdiss) any = any || kd(b, a) != 0.0;
            if (!any) continue;
            const std::string& from = rates.state_labels[static_cast<std::size_t>(a)];
            const std::string& to = rates.state_labels[static_cast<std::size_t>(b)];
            out << from << ',' << to << ",-," << format_double(rates.K(b, a)) << ",,"
                << format_double(rates.K_error(b, a)) << ',' << eta_field(rates.K_eta(b, a)) << "\n";
            for (std::size_t j = 0; j < rates.n_modes(); ++j) {
                out << from << ',' << to << ',' << rates.mode_labels[j] << ",," << format_double(rates.Kdiss[j](b, a))
                    << ',' << format_double(rates.Kdiss_error[j](b, a)) << ',' << eta_field(rates.Kdiss_eta[j](b, a))
                    << "\n";
            }
        }
    }
}

RateSet read_rate_table(std::istream& in, const std::vector<std::string>& state_labels,
                        const std::vector<std::string>& mode_labels, const Eigen::VectorXd& energies)
{
    RateSet r;
    r.state_labels = state_labels;
    r.mode_labels = mode_labels;
    r.energies = energies;
    const auto n = static_cast<Eigen::Index>(state_labels.size());
    r.K = r.K_error = r.K_eta = Eigen::MatrixXd::Zero(n, n);
    r.Kdiss.assign(mode_labels.size(), Eigen::MatrixXd::Zero(n, n));
    r.Kdiss_error = r.Kdiss_eta = r.Kdiss;

    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto f = split_csv(line);
        if (!header_seen) {
            if (line.rfind("from,to,mode,K,Kdiss", 0) != 0)
                throw Error("rate table line " + std::to_string(lineno) + ": expected column header");
            header_seen = true;
            continue;
        }
        if (f.size() != 7)
            throw Error("rate table line " + std::to_string(lineno) + ": expected 7 fields, got " +
                        std::to_string(f.size()));
        const auto a = static_cast<Eigen::Index>(find_label(state_labels, f[0], lineno, "state"));
        const auto b = static_cast<Eigen::Index>(find_label(state_labels, f[1], lineno, "state"));
        if (a == b) throw Error("rate table line " + std::to_string(lineno) + ": from equals to");
        const double err = parse_field(f[5], lineno, "err_estimate");
        const double eta = parse_field(f[6], lineno, "damping_eta");
        if (f[2] == "-") {
            r.K(b, a) = parse_field(f[3], lineno, "K");
            r.K_error(b, a) = err;
            r.K_eta(b, a) = eta;
        } else {
            const std::size_t j = find_label(mode_labels, f[2], lineno, "mode");
            r.Kdiss[j](b, a) = parse_field(f[4], lineno, "Kdiss");
            r.Kdiss_error[j](b, a) = err;
            r.Kdiss_eta[j](b, a) = eta;
        }
    }
    if (!header_seen) throw Error("rate table: no column header found");
    return r;
}

RateSet read_rate_table_file(const std::string& path, const std::vector<std::string>& state_labels,
                             const std::vector<std::string>& mode_labels, const Eigen::VectorXd& energies)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open rate table '" + path + "'");
    return read_rate_table(in, state_labels, mode_labels, energies);
}

void write_trajectory(std::ostream& out, const TableHeader& h, const Trajectory& traj,
                      const std::vector<double>& times_out)
{
    write_header(out, h);
    out << "t";
    for (const auto& s : traj.state_labels) out << ",P_" << s;
    for (const auto& m : traj.mode_labels) out << ",E_" << m;
    out << ",E_sub,residual\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto r = static_cast<Eigen::Index>(k);
        out << format_double(k < times_out.size() ? times_out[k] : traj.times[k]);
        for (Eigen::Index a = 0; a < traj.P.cols(); ++a) out << ',' << format_double(traj.P(r, a));
        for (Eigen::Index j = 0; j < traj.E.cols(); ++j) out << ',' << format_double(traj.E(r, j));
        out << ',' << format_double(k < traj.E_sub.size() ? traj.E_sub[k] : 0.0) << ','
            << format_double(k < traj.residual.size() ? traj.residual[k] : 0.0) << "\n";
    }
}

void write_comparison_table(std::ostream& out, const TableHeader& h, const ExactResult& exact,
                            const Trajectory& mq, const std::vector<double>& times_out)
{
    write_header(out, h);
    out << "source,t";
    for (const auto& s : mq.state_labels) out << ",P_" << s;
    for (const auto& m : mq.mode_labels) out << ",E_" << m;
    out << "\n";
    auto rows = [&](const char* source, const Eigen::MatrixXd& P, const Eigen::MatrixXd& E, std::size_t nt) {
        for (std::size_t k = 0; k < nt; ++k) {
            const auto r = static_cast<Eigen::Index>(k);
            out << source << ',' << format_double(times_out[k]);
            for (Eigen::Index a = 0; a < P.cols(); ++a) out << ',' << format_double(P(r, a));
            for (Eigen::Index j = 0; j < E.cols(); ++j) out << ',' << format_double(E(r, j));
            out << "\n";
        }
    };
    rows("oracle", exact.P, exact.E, std::min(exact.times.size(), times_out.size()));
    rows("mqmed", mq.P, mq.E, std::min(mq.size(), times_out.size()));
}

}  // namespace mqmed::cli
