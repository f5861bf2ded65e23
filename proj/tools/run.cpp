#include "run.hpp"

#include "confmatch/bifurcation.hpp"
#include "confmatch/inner_solver.hpp"
#include "confmatch/leading_order.hpp"
#include "confmatch/matcher.hpp"
#include "confmatch/outer_solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

namespace confmatch::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
    return buf;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

class Params {
public:
    Params(const std::map<std::string, std::string>& kv, std::set<std::string> allowed) : kv_(kv)
    {
        for (const auto& [k, v] : kv_)
            if (!allowed.count(k)) throw ValidationError("unknown parameter '" + k + "'");
    }

    bool has(const std::string& k) const { return kv_.count(k) > 0; }

    double real(const std::string& k) const
    {
        auto it = kv_.find(k);
        if (it == kv_.end()) throw ValidationError("missing required parameter '" + k + "'");
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(it->second, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != it->second.size() || !std::isfinite(v))
            throw ValidationError("parameter '" + k + "' is not a finite number: '" + it->second + "'");
        return v;
    }
    double real(const std::string& k, double def) const { return has(k) ? real(k) : def; }

    int integer(const std::string& k, int def) const
    {
        if (!has(k)) return def;
        const double v = real(k);
        if (v != std::floor(v) || std::abs(v) > 1e9) throw ValidationError("parameter '" + k + "' must be an integer");
        return static_cast<int>(v);
    }

    std::string text(const std::string& k, const std::string& def) const { return has(k) ? kv_.at(k) : def; }

    std::vector<double> list(const std::string& k) const
    {
        std::vector<double> out;
        std::stringstream ss(kv_.at(k));
        std::string item;
        while (std::getline(ss, item, ',')) {
            Params one({{k, trim(item)}}, {k});
            out.push_back(one.real(k));
        }
        if (out.empty()) throw ValidationError("parameter '" + k + "' is an empty list");
        return out;
    }

private:
    std::map<std::string, std::string> kv_;
};

std::vector<double> stepped(double lo, double hi, double step)
{
    if (!(step > 0.0) || !(hi >= lo)) throw ValidationError("grid needs step > 0 and max >= min");
    std::vector<double> g;
    const long n = std::lround(std::floor((hi - lo) / step + 1e-9));
    for (long k = 0; k <= n; ++k) g.push_back(lo + static_cast<double>(k) * step);
    return g;
}

std::vector<double> logspaced(double lo, double hi, int n)
{
    if (!(lo > 0.0) || !(hi > lo) || n < 2) throw ValidationError("log grid needs 0 < min < max and n >= 2");
    std::vector<double> g;
    for (int k = 0; k < n; ++k) g.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1)));
    return g;
}

std::vector<ProfileRow> rows_of(const std::vector<ProfileSample>& s)
{
    std::vector<ProfileRow> r;
    for (const ProfileSample& p : s) r.push_back({p.theta, p.x, p.h, "single"});
    return r;
}

std::vector<ProfileRow> rows_of(const BoundaryTrace& tr)
{
    std::vector<ProfileRow> r;
    for (std::size_t m = 0; m < tr.size(); ++m) r.push_back({tr.nodes[m], -tr.f[m].imag(), tr.f[m].real(), "single"});
    return r;
}

double eta_param(const Params& p)
{
    if (p.has("eta") && p.has("hout0")) throw ValidationError("give either eta or hout0, not both");
    if (p.has("eta")) return p.real("eta");
    return eta_from_height(p.real("hout0", 1.0));
}

std::string ext(Format f) { return f == Format::csv ? ".csv" : ".json"; }

void write_json(const fs::path& path, const json& j)
{
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    os << j.dump(2) << '\n';
    if (!os) throw std::runtime_error("write failed for " + path.string());
}

json nlsq_summary(bool converged, double res, int iterations)
{
    return json{{"converged", converged}, {"residual_inf_norm", res}, {"iterations", iterations}};
}

struct Job {
    json summary;
    std::vector<fs::path> files;
    bool all_converged = true;
};

Job run_direct(const Params& p, const fs::path& dir, Format fmt)
{
    const double l = p.real("l", 1.0);
    const double h0 = p.real("h0");
    if (!(h0 > 0.0) || !(h0 < l)) throw ValidationError("need 0 < h0 < l");
    const int M = p.integer("M", 256);
    NlsqOptions o = default_direct_options();
    o.residual_tolerance = p.real("tol", o.residual_tolerance);
    const DirectSolution s = solve_direct(l, h0, M, nullptr, o);
    const int n = p.integer("samples", 0);
    Job j;
    j.files.push_back(dir / ("profile" + ext(fmt)));
    emit_profile(j.files.back(), n > 0 ? rows_of(profile(s, n)) : rows_of(coeffs_to_trace(s.coeffs)), fmt);
    j.summary = nlsq_summary(s.converged, s.residual_inf_norm, s.iterations);
    j.summary["q"] = s.params.q;
    j.summary["alpha"] = s.coeffs.alpha;
    j.all_converged = s.converged;
    return j;
}

Job run_outer(const Params& p, const fs::path& dir, Format fmt)
{
    const OuterSolution s = solve_outer(p.real("hout0"), p.integer("Mout", 128), p.real("t", 1.0));
    const int n = p.integer("samples", 0);
    Job j;
    j.files.push_back(dir / ("profile" + ext(fmt)));
    std::vector<ProfileRow> rows = n > 0 ? rows_of(outer_profile(s, n)) : rows_of(outer_trace(s));
    j.summary = nlsq_summary(s.converged, s.residual_inf_norm, s.iterations);
    j.summary["eta"] = s.eta;
    j.summary["alpha"] = s.alpha;
    if (s.converged) j.summary["matching_constant"] = matching_constant(s);
    emit_profile(j.files.back(), rows, fmt);
    j.all_converged = s.converged;
    return j;
}

Job run_inner(const Params& p, const fs::path& dir, Format fmt)
{
    const InnerSolution s = solve_inner(eta_param(p), p.real("T", 0.5), p.integer("Min", 32));
    const int n = p.integer("samples", 0);
    Job j;
    j.files.push_back(dir / ("profile" + ext(fmt)));
    emit_profile(j.files.back(), n > 0 ? rows_of(inner_profile(s, n)) : rows_of(xi_trace(s.eta, s.A, s.C, s.M_in).gamma),
                 fmt);
    j.summary = nlsq_summary(s.converged, s.residual_inf_norm, s.iterations);
    j.summary["eta"] = s.eta;
    j.summary["Q"] = s.Q;
    j.summary["A"] = s.A;
    j.summary["C_asy"] = s.C_asy;
    j.all_converged = s.converged;
    return j;
}

MatchContext context_of(const Params& p)
{
    MatchContext ctx;
    ctx.T = p.real("T", ctx.T);
    ctx.M_in = p.integer("Min", ctx.M_in);
    ctx.M_out = p.integer("Mout", ctx.M_out);
    ctx.t = p.real("t", ctx.t);
    return ctx;
}

Job run_match(const Params& p, const fs::path& dir, Format fmt)
{
    MatchContext ctx = context_of(p);
    double hout = 0.0, eps = 0.0;
    if (p.has("l") || p.has("h0")) {
        if (p.has("hout0") || p.has("eps")) throw ValidationError("give (l, h0) or (hout0, eps), not both");
        const Inversion inv = invert_parameters(p.real("l"), p.real("h0"), ctx);
        hout = inv.h_out0;
        eps = inv.epsilon;
    } else {
        hout = p.real("hout0");
        eps = p.real("eps");
    }
    const MatchedSolution ms = make_matched(ctx.outer_for(hout), ctx.inner_for(hout), eps);
    std::vector<ProfileRow> rows;
    for (const TaggedSample& s : matched_profile(ms, p.integer("n_inner", 32), p.integer("n_outer", 32)))
        rows.push_back({s.theta, s.x, s.h, to_string(s.node_set)});
    Job j;
    j.files.push_back(dir / ("matched_profile" + ext(fmt)));
    emit_profile(j.files.back(), rows, fmt);
    const TailDip dip = tail_dip(ms);
    j.summary = json{{"converged", true},
                     {"h_out0", hout},
                     {"epsilon", eps},
                     {"l", ms.l},
                     {"h0", ms.h0},
                     {"q", ms.q()},
                     {"a", ms.match.a},
                     {"K", ms.match.K},
                     {"c", ms.match.c},
                     {"inner_residual", ms.inner.residual_inf_norm},
                     {"outer_residual", ms.outer.residual_inf_norm},
                     {"tail_dip_min_h", dip.min_h},
                     {"tail_dip_x", dip.x_at}};
    return j;
}

Job branch_job(const Branch& raw, const fs::path& dir, Format fmt)
{
    Branch b = stability_label(raw);
    b.fold = find_fold(b);
    Job j;
    j.files.push_back(dir / ("branch" + ext(fmt)));
    emit_branch(j.files.back(), b, fmt);
    if (b.fold) j.files.push_back(fold_sidecar(j.files.back()));
    int failed = 0;
    for (const BranchPoint& pt : b.points) failed += !pt.converged;
    j.summary = json{{"points", b.points.size()}, {"failed", failed}, {"fold", b.fold.has_value()}};
    if (b.fold) {
        j.summary["q_star"] = b.fold->q_star;
        j.summary["h0_star"] = b.fold->h0_star;
    }
    j.all_converged = failed == 0;
    return j;
}

std::vector<double> h0_grid(const Params& p, double lo, double hi, double step)
{
    if (p.has("grid")) return p.list("grid");
    return stepped(p.real("h0_min", lo), p.real("h0_max", hi), p.real("h0_step", step));
}

Job run_branch(const Params& p, const fs::path& dir, Format fmt)
{
    const std::string method = p.text("method", "direct");
    if (method == "direct") {
        const double l = p.real("l", 1.0);
        ContinuationOptions o;
        o.nlsq.residual_tolerance = p.real("tol", o.nlsq.residual_tolerance);
        return branch_job(continue_branch(l, h0_grid(p, 0.05 * l, 0.95 * l, 0.05 * l), p.integer("M", 256), o), dir, fmt);
    }
    if (method == "matched") {
        MatchContext ctx = context_of(p);
        const std::vector<double> eps =
            p.has("eps") ? p.list("eps") : logspaced(p.real("eps_min", 1e-3), p.real("eps_max", 0.2), p.integer("eps_n", 20));
        if (p.has("hout0") == p.has("l")) throw ValidationError("matched branch needs exactly one of hout0 or l");
        const Branch b = p.has("l") ? matched_branch(MatchedMode::fixed_l, p.real("l"), eps, ctx)
                                    : matched_branch(MatchedMode::fixed_hout0, p.real("hout0"), eps, ctx);
        Job j = branch_job(b, dir, fmt);
        j.summary["requested"] = eps.size();
        j.all_converged = j.all_converged && b.points.size() == eps.size();
        return j;
    }
    if (method == "leading") {
        const double l = p.real("l", 1.0);
        return branch_job(leading_branch(l, h0_grid(p, 0.01 * l, 0.99 * l, 0.01 * l)), dir, fmt);
    }
    throw ValidationError("method must be direct, matched or leading");
}

Job run_leading(const Params& p, const fs::path& dir, Format fmt)
{
    const double l = p.real("l", 1.0);
    if (p.has("h0")) {
        const double h0 = p.real("h0");
        return branch_job(leading_branch(l, {h0}), dir, fmt);
    }
    return branch_job(leading_branch(l, h0_grid(p, 0.01 * l, 0.99 * l, 0.01 * l)), dir, fmt);
}

Job run_scan(const Params& p, const fs::path& dir, Format fmt)
{
    const std::vector<double> T =
        p.has("grid") ? p.list("grid") : logspaced(p.real("T_min", 0.05), p.real("T_max", 4.0), p.integer("T_n", 12));
    const CasyScan sc = casy_scan(eta_param(p), T, p.integer("Min", 32));
    Job j;
    j.files.push_back(dir / ("scan" + ext(fmt)));
    int failed = 0;
    if (fmt == Format::csv) {
        std::ofstream os(j.files.back());
        if (!os) throw std::runtime_error("cannot open " + j.files.back().string());
        os << "T,C_asy,converged,in_window,residual\n";
        for (const CasyPoint& c : sc.points)
            os << num(c.T) << ',' << num(c.C_asy) << ',' << (c.converged ? "true" : "false") << ','
               << (c.in_window ? "true" : "false") << ',' << num(c.residual_inf_norm) << '\n';
        if (!os) throw std::runtime_error("write failed for " + j.files.back().string());
    } else {
        json a = json::array();
        for (const CasyPoint& c : sc.points)
            a.push_back({{"T", c.T}, {"C_asy", c.C_asy}, {"converged", c.converged}, {"in_window", c.in_window},
                         {"residual", c.residual_inf_norm}});
        write_json(j.files.back(), a);
    }
    for (const CasyPoint& c : sc.points) failed += !c.converged;
    j.files.push_back(dir / "fit.json");
    write_json(j.files.back(), json{{"slope", std::isnan(sc.slope) ? json(nullptr) : json(sc.slope)},
                                    {"intercept", std::isnan(sc.slope) ? json(nullptr) : json(sc.intercept)}});
    j.summary = json{{"points", sc.points.size()}, {"failed", failed}};
    j.all_converged = failed == 0;
    return j;
}

const std::map<Command, std::set<std::string>> kAllowed = {
    {Command::direct, {"l", "h0", "M", "tol", "samples"}},
    {Command::outer, {"hout0", "Mout", "t", "samples"}},
    {Command::inner, {"eta", "hout0", "T", "Min", "samples"}},
    {Command::match, {"l", "h0", "hout0", "eps", "Mout", "Min", "t", "T", "n_inner", "n_outer"}},
    {Command::branch,
     {"method", "l", "hout0", "M", "tol", "grid", "h0_min", "h0_max", "h0_step", "eps", "eps_min", "eps_max", "eps_n",
      "Mout", "Min", "t", "T"}},
    {Command::leading, {"l", "h0", "grid", "h0_min", "h0_max", "h0_step"}},
    {Command::scan_T, {"eta", "hout0", "Min", "grid", "T_min", "T_max", "T_n"}},
};

}  // namespace

Command parse_command(const std::string& s)
{
    static const std::map<std::string, Command> m = {
        {"direct", Command::direct}, {"outer", Command::outer},     {"inner", Command::inner},  {"match", Command::match},
        {"branch", Command::branch}, {"leading", Command::leading}, {"scan-T", Command::scan_T}};
    auto it = m.find(s);
    if (it == m.end()) throw ValidationError("unknown command '" + s + "'");
    return it->second;
}

std::string to_string(Command c)
{
    switch (c) {
        case Command::direct: return "direct";
        case Command::outer: return "outer";
        case Command::inner: return "inner";
        case Command::match: return "match";
        case Command::branch: return "branch";
        case Command::leading: return "leading";
        case Command::scan_T: return "scan-T";
    }
    return "unknown";
}

std::map<std::string, std::string> read_config_file(const fs::path& path)
{
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot read config file " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    int n = 0;
    while (std::getline(is, line)) {
        ++n;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(path.string() + ":" + std::to_string(n) + ": expected key=value");
        const std::string k = trim(line.substr(0, eq));
        if (k.empty()) throw ValidationError(path.string() + ":" + std::to_string(n) + ": empty key");
        kv[k] = trim(line.substr(eq + 1));
    }
    return kv;
}

void emit_profile(const fs::path& path, std::vector<ProfileRow> rows, Format fmt)
{
    std::stable_sort(rows.begin(), rows.end(), [](const ProfileRow& a, const ProfileRow& b) { return a.x < b.x; });
    if (fmt == Format::json) {
        json a = json::array();
        for (const ProfileRow& r : rows) a.push_back({{"theta", r.theta}, {"x", r.x}, {"h", r.h}, {"node_set", r.node_set}});
        write_json(path, a);
        return;
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    os << "theta,x,h,node_set\n";
    for (const ProfileRow& r : rows) os << num(r.theta) << ',' << num(r.x) << ',' << num(r.h) << ',' << r.node_set << '\n';
    if (!os) throw std::runtime_error("write failed for " + path.string());
}

fs::path fold_sidecar(const fs::path& branch_path)
{
    fs::path p = branch_path;
    return p.replace_filename(branch_path.stem().string() + "_fold.json");
}

void emit_branch(const fs::path& path, const Branch& b, Format fmt)
{
    if (fmt == Format::json) {
        json a = json::array();
        for (const BranchPoint& p : b.points)
            a.push_back({{"h0", p.h0},
                         {"q", p.q},
                         {"stable", to_string(p.stable)},
                         {"converged", p.converged},
                         {"method", to_string(p.method)}});
        write_json(path, a);
    } else {
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot open " + path.string());
        os << "h0,q,stable,converged,method\n";
        for (const BranchPoint& p : b.points)
            os << num(p.h0) << ',' << num(p.q) << ',' << to_string(p.stable) << ',' << (p.converged ? "true" : "false")
               << ',' << to_string(p.method) << '\n';
        if (!os) throw std::runtime_error("write failed for " + path.string());
    }
    if (b.fold) write_json(fold_sidecar(path), json{{"q_star", b.fold->q_star}, {"h0_star", b.fold->h0_star}});
}

std::string sha256_hex(const fs::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path.string());
    const std::string data((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

RunOutcome run(const RunConfig& cfg)
{
    const auto t0 = std::chrono::steady_clock::now();
    RunOutcome out;
    try {
        const Params p(cfg.params, kAllowed.at(cfg.command));
        fs::create_directories(cfg.output_dir);
        Job job;
        switch (cfg.command) {
            case Command::direct: job = run_direct(p, cfg.output_dir, cfg.format); break;
            case Command::outer: job = run_outer(p, cfg.output_dir, cfg.format); break;
            case Command::inner: job = run_inner(p, cfg.output_dir, cfg.format); break;
            case Command::match: job = run_match(p, cfg.output_dir, cfg.format); break;
            case Command::branch: job = run_branch(p, cfg.output_dir, cfg.format); break;
            case Command::leading: job = run_leading(p, cfg.output_dir, cfg.format); break;
            case Command::scan_T: job = run_scan(p, cfg.output_dir, cfg.format); break;
        }
        out.exit_code = job.all_converged ? 0 : 2;
        out.message = job.all_converged ? "converged" : "some solves did not converge";

        json files = json::array();
        for (const fs::path& f : job.files)
            files.push_back({{"name", f.filename().string()}, {"bytes", fs::file_size(f)}, {"sha256", sha256_hex(f)}});
        json config = json::object();
        for (const auto& [k, v] : cfg.params) config[k] = v;
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const fs::path manifest = cfg.output_dir / "manifest.json";
        write_json(manifest, json{{"command", to_string(cfg.command)},
                                  {"config", config},
                                  {"format", cfg.format == Format::csv ? "csv" : "json"},
                                  {"version", kVersion},
                                  {"wall_time_s", wall},
                                  {"exit_code", out.exit_code},
                                  {"summary", job.summary},
                                  {"files", files}});
        out.files = job.files;
        out.files.push_back(manifest);
    } catch (const ValidationError& e) {
        out.exit_code = 1;
        out.message = e.what();
    } catch (const ConvergenceError& e) {
        out.exit_code = 2;
        out.message = e.what();
    } catch (const std::exception& e) {
        out.exit_code = 3;
        out.message = e.what();
    }
    return out;
}

int main_entry(int argc, char** argv)
{
    CLI::App app{"Conformal-map solvers for a charged capillary interface"};
    app.set_help_all_flag("--help-all");
    std::string command;
    app.add_option("command", command, "direct | outer | inner | match | branch | leading | scan-T")->required();
    std::string config_path, format = "csv", out_dir = ".";
    app.add_option("--config", config_path, "key=value file; flags override it");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("-o,--output-dir", out_dir, "directory for results and manifest");

    const std::vector<std::string> keys = {"l",     "h0",    "M",       "Mout",    "Min",     "t",      "T",
                                           "eps",   "hout0", "eta",     "tol",     "samples", "method", "grid",
                                           "h0_min", "h0_max", "h0_step", "eps_min", "eps_max", "eps_n", "T_min",
                                           "T_max", "T_n",   "n_inner", "n_outer"};
    std::map<std::string, std::string> flag_values;
    for (const std::string& k : keys) app.add_option("--" + k, flag_values[k]);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    RunConfig cfg;
    try {
        cfg.command = parse_command(command);
        if (!config_path.empty()) cfg.params = read_config_file(config_path);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    for (const std::string& k : keys)
        if (app.get_option("--" + k)->count() > 0) cfg.params[k] = flag_values[k];
    cfg.format = format == "json" ? Format::json : Format::csv;
    cfg.output_dir = out_dir;

    const RunOutcome r = run(cfg);
    if (r.exit_code == 0 || r.exit_code == 2) {
        for (const fs::path& f : r.files) std::cout << f.string() << '\n';
        if (r.exit_code == 2) std::cerr << "warning: " << r.message << '\n';
    } else {
        std::cerr << "error: " << r.message << '\n';
    }
    return r.exit_code;
}

}  // namespace confmatch::cli
