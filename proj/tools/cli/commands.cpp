// commands.cpp: psd, bath, criteria, propagate and figdata subcommands

#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "format.hpp"
#include "heom/bath.hpp"
#include "heom/psd.hpp"
#include "heom/units.hpp"

#ifndef HEOM_VERSION
#define HEOM_VERSION "unknown"
#endif

namespace heom::cli {

namespace {

std::string utc_timestamp(std::chrono::system_clock::time_point tp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

// wmin:wmax:steps, steps >= 2
struct Range {
    double lo{0.0};
    double hi{0.0};
    int steps{0};
};

Range parse_range(const std::string& text, const std::string& option) {
    const auto a = text.find(':');
    const auto b = a == std::string::npos ? a : text.find(':', a + 1);
    if (b == std::string::npos) throw ArgumentError(option + ": expected lo:hi:steps, got '" + text + "'");
    const auto lo = parse_double(std::string_view(text).substr(0, a));
    const auto hi = parse_double(std::string_view(text).substr(a + 1, b - a - 1));
    const auto steps = parse_integer(std::string_view(text).substr(b + 1));
    if (!lo || !hi || !steps || !std::isfinite(*lo) || !std::isfinite(*hi))
        throw ArgumentError(option + ": expected lo:hi:steps, got '" + text + "'");
    if (*steps < 2 || !(*hi > *lo)) throw ArgumentError(option + ": need hi > lo and steps >= 2");
    return Range{*lo, *hi, static_cast<int>(*steps)};
}

void emit(const std::string& text, const std::string& out_file, std::ostream& out) {
    if (out_file.empty())
        out << text;
    else
        write_file_atomic(out_file, text);
}

std::string report_text(const AccuracyReport& r) {
    std::ostringstream s;
    char summary[96];
    std::snprintf(summary, sizeof summary, "{%.1f, %.1f} %s", r.ratio, r.kappa_n, std::string(to_string(r.tier)).c_str());
    s << "order = " << r.order << '\n'
      << "gamma_n = " << format_double(r.gamma_n) << '\n'
      << "omega_s = " << format_double(r.omega_s) << '\n'
      << "ratio = " << format_double(r.ratio) << '\n'
      << "kappa = " << format_double(r.kappa_n) << '\n'
      << "tier = " << to_string(r.tier) << '\n'
      << "summary = " << summary << '\n';
    return s.str();
}

nlohmann::ordered_json report_json(const AccuracyReport& r) {
    return {{"order", r.order},   {"gamma_n", r.gamma_n},
            {"kappa_n", r.kappa_n}, {"omega_s", r.omega_s},
            {"ratio", r.ratio},   {"tier", std::string(to_string(r.tier))},
            {"accurate_threshold", kAccurateThreshold},
            {"semiquantitative_threshold", kSemiQuantitativeThreshold}};
}

std::string psd_text(int order, bool table) {
    const PadeDecomposition psd = compute_psd(order);
    std::string s;
    if (!table) {
        s += "order = " + std::to_string(order) + "\n";
        s += "remainder = " + format_double(psd.remainder) + "\n";
        const auto res = moment_residuals(psd);
        const double worst = res.empty() ? 0.0 : *std::max_element(res.begin(), res.end());
        s += "max_moment_residual = " + format_double(worst) + "\n";
    }
    s += "k,xi,eta\n";
    for (std::size_t k = 0; k < psd.poles.size(); ++k)
        s += std::to_string(k + 1) + "," + format_double(psd.poles[k]) + "," + format_double(psd.residues[k]) + "\n";
    return s;
}

std::string bath_table(const DrudeBath& bath, const BathExpansion& ex) {
    std::string s = "mode,c_re,c_im,rate\n";
    const auto modes = ex.all_modes();
    for (std::size_t k = 0; k < modes.size(); ++k) {
        s += (k == 0 ? std::string("D") : std::to_string(k)) + "," + format_double(modes[k].coefficient.real()) + "," +
             format_double(modes[k].coefficient.imag()) + "," + format_double(modes[k].rate) + "\n";
    }
    s += "wnr_strength = " + format_double(ex.wnr_strength) + "\n";
    s += "gamma_n = " + format_double(gamma_approx(ex.n_pade, bath)) + "\n";
    return s;
}

std::string spectrum_csv(const DrudeBath& bath, const BathExpansion& ex, const Range& range) {
    const double gn = gamma_approx(ex.n_pade, bath);
    std::string s = "omega,dc_over_delta,omega_over_gamma_n\n";
    for (int i = 0; i < range.steps; ++i) {
        const double w = range.lo + (range.hi - range.lo) * i / (range.steps - 1);
        s += format_double(w) + "," + format_double(residue_spectrum(bath, ex, w) / ex.wnr_strength) + "," +
             format_double(w / gn) + "\n";
    }
    return s;
}

std::string fig1_csv(int order, double beta_gamma, int points, double span) {
    const DrudeBath bath(1.0, 1.0, beta_gamma);
    const BathExpansion ex = expand(bath, compute_psd(order));
    const double gn = gamma_approx(order, bath);
    std::string s = "omega_over_gamma_n,dc_over_delta\n";
    for (int i = 0; i < points; ++i) {
        const double x = span * i / (points - 1);
        s += format_double(x) + "," + format_double(residue_spectrum(bath, ex, x * gn) / ex.wnr_strength) + "\n";
    }
    return s;
}

std::string fig2_csv(const std::vector<int>& orders, const Range& range) {
    if (!(range.lo > 0)) throw ArgumentError("--beta-gamma-range: lo must be > 0 for a log grid");
    std::vector<double> grid(static_cast<std::size_t>(range.steps));
    const double a = std::log(range.lo);
    const double b = std::log(range.hi);
    for (int i = 0; i < range.steps; ++i) grid[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (range.steps - 1));
    std::string s = "order,beta_gamma,beta_gamma_n,kappa_bar\n";
    for (int n : orders)
        for (const auto& p : criteria_curves(n, grid))
            s += std::to_string(n) + "," + format_double(p.beta_gamma) + "," + format_double(p.beta_gamma_n) + "," +
                 format_double(p.kappa_bar) + "\n";
    return s;
}

// Spin-boson benchmark: eps/V = 1, lambda/V = 0.25, gamma/V = 5, beta V = 50.
std::string fig3_config(int order, double t_final, int stride) {
    return "[system]\ntype = spin_boson\nepsilon = 1\nv = 1\ninitial = up\n"
           "[bath]\nlambda = 0.25\ngamma = 5\nbeta = 50\n"
           "[psd]\norder = " + std::to_string(order) + "\n"
           "[run]\ndt = 0.001\nt_final = " + format_double(t_final) + "\nfilter_tol = 5e-7\nrecord_stride = " +
           std::to_string(stride) + "\n"
           "[observables]\nrho00 = P 0\nre_rho01 = X 0 1\nim_rho01 = Y 0 1\n";
}

}  // namespace

ExitCode exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const CriteriaRefusal*>(&e)) return kExitRefused;
    if (dynamic_cast<const DivergenceError*>(&e)) return kExitDivergence;
    if (dynamic_cast<const ResourceError*>(&e)) return kExitResource;
    if (dynamic_cast<const ArgumentError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
        dynamic_cast<const CapabilityError*>(&e) || dynamic_cast<const DegeneracyError*>(&e))
        return kExitArgument;
    return kExitInternal;
}

std::string_view error_kind(const std::exception& e) noexcept {
    if (dynamic_cast<const CriteriaRefusal*>(&e)) return "criteria";
    if (dynamic_cast<const ConfigError*>(&e)) return "config";
    if (dynamic_cast<const ArgumentError*>(&e)) return "argument";
    if (dynamic_cast<const DomainError*>(&e)) return "domain";
    if (dynamic_cast<const CapabilityError*>(&e)) return "capability";
    if (dynamic_cast<const DegeneracyError*>(&e)) return "degeneracy";
    if (dynamic_cast<const DivergenceError*>(&e)) return "divergence";
    if (dynamic_cast<const ResourceError*>(&e)) return "resource";
    return "internal";
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw ArgumentError("cannot write '" + tmp.string() + "'");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) throw ResourceError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw ArgumentError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
    }
}

std::string trajectory_csv(const PropagationResult& result, double time_scale) {
    const int dim = result.rho.empty() ? 0 : static_cast<int>(result.rho.front().rows());
    std::string s = "t";
    for (const auto& name : result.observable_names) s += "," + name;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) s += ",re_rho_" + std::to_string(i) + "_" + std::to_string(j);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) s += ",im_rho_" + std::to_string(i) + "_" + std::to_string(j);
    s += '\n';
    for (std::size_t r = 0; r < result.times.size(); ++r) {
        s += format_double(result.times[r] / time_scale);
        for (const auto& trace : result.traces) s += "," + format_double(trace[r]);
        const Matrix& rho = result.rho[r];
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) s += "," + format_double(rho(i, j).real());
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) s += "," + format_double(rho(i, j).imag());
        s += '\n';
    }
    return s;
}

AccuracyReport run_propagation(const RunConfig& config, const PropagateOptions& options, std::ostream& log) {
    const auto started = std::chrono::system_clock::now();
    PreparedRun run = prepare(config);
    const DrudeBath bath(config.lambda, config.gamma, config.beta);
    const AccuracyReport report = accuracy_report(config.order, bath, run.model.omega_s);
    if (report.tier == AccuracyTier::Unreliable && !options.force) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "order %d is unreliable (ratio %.3g, kappa %.3g, both must be >= %.1f)",
                      report.order, report.ratio, report.kappa_n, kSemiQuantitativeThreshold);
        std::string msg = buf;
        try {
            const int n = minimum_order(bath, run.model.omega_s, AccuracyTier::SemiQuantitative);
            msg += "; order " + std::to_string(n) + " is the smallest semiquantitative choice";
        } catch (const CapabilityError&) {
            msg += "; no supported order reaches semiquantitative";
        }
        throw CriteriaRefusal(msg + "; pass --force to run anyway");
    }

    const PropagationResult result = propagate(run.spec, run.initial, run.config, run.hamiltonian);

    std::filesystem::create_directories(options.out_dir);
    const std::string csv = trajectory_csv(result, run.time_scale);
    write_file_atomic(options.out_dir / "trajectory.csv", csv);

    const BathExpansion& ex = run.spec.baths.front().expansion;
    nlohmann::ordered_json modes = nlohmann::ordered_json::array();
    for (const auto& m : ex.all_modes()) modes.push_back({m.coefficient.real(), m.coefficient.imag(), m.rate});

    const auto& st = result.stats;
    nlohmann::ordered_json manifest = {
        {"software", {{"name", "heom"}, {"version", HEOM_VERSION}}},
        {"started_utc", utc_timestamp(started)},
        {"finished_utc", utc_timestamp(std::chrono::system_clock::now())},
        {"config", snapshot_json(config)},
        {"criteria", report_json(report)},
        {"forced", options.force && report.tier == AccuracyTier::Unreliable},
        {"time_unit", config.time_unit == TimeUnit::Femtoseconds ? "fs" : "reduced"},
        {"expansion", {{"modes", modes}, {"wnr_strength", ex.wnr_strength}, {"baths", run.spec.baths.size()}}},
        {"fwhm_convention", config.pulse ? nlohmann::ordered_json(std::string(to_string(config.pulse->convention)))
                                         : nlohmann::ordered_json(nullptr)},
        {"stats",
         {{"steps", st.steps},
          {"peak_active", st.peak_active},
          {"final_active", st.active_counts.empty() ? 0 : st.active_counts.back()},
          {"peak_tier", st.peak_tier},
          {"peak_memory_bytes", st.peak_memory_bytes},
          {"created", st.created},
          {"dropped", st.dropped},
          {"wall_seconds", st.wall_seconds},
          {"workers", st.workers},
          {"activation_factor", config.activation_factor},
          {"warnings", st.warnings}}},
        {"files", {{{"name", "trajectory.csv"}, {"bytes", csv.size()}, {"rows", result.times.size()}}}},
    };
    write_file_atomic(options.out_dir / "run.json", manifest.dump(2) + "\n");

    for (const auto& w : st.warnings) log << "warning: " << w << '\n';
    log << "wrote " << (options.out_dir / "trajectory.csv").string() << " (" << result.times.size() << " rows), peak "
        << st.peak_active << " ADOs, " << format_double(std::round(st.wall_seconds * 100) / 100) << " s\n";
    return report;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Drude-bath HEOM solver with a priori accuracy control", "heom"};
    app.require_subcommand(1);
    app.set_version_flag("--version", HEOM_VERSION);

    int psd_order = 0;
    bool psd_table = false;
    auto* psd = app.add_subcommand("psd", "Pade spectrum decomposition of the Bose function");
    psd->add_option("--order", psd_order, "decomposition order N")->required()->check(CLI::Range(0, kMaxPsdOrder));
    psd->add_flag("--table", psd_table, "emit only the pole/residue CSV");

    double lambda = 0, gamma = 0, beta = 0, omega_s = 0;
    int order = 0;
    std::string spectrum, out_file;
    auto* bath = app.add_subcommand("bath", "exponential expansion of a Drude bath");
    bath->add_option("--lambda", lambda, "reorganization energy")->required();
    bath->add_option("--gamma", gamma, "Drude cutoff rate")->required();
    bath->add_option("--beta", beta, "inverse temperature")->required();
    bath->add_option("--order", order, "PSD order N")->required()->check(CLI::Range(0, kMaxPsdOrder));
    bath->add_option("--spectrum", spectrum, "residue spectrum on wmin:wmax:steps");
    bath->add_option("--out", out_file, "write the CSV here instead of stdout");

    std::string target;
    auto* crit = app.add_subcommand("criteria", "accuracy report for a bath and system frequency");
    crit->add_option("--lambda", lambda, "reorganization energy")->required();
    crit->add_option("--gamma", gamma, "Drude cutoff rate")->required();
    crit->add_option("--beta", beta, "inverse temperature")->required();
    crit->add_option("--omega-s", omega_s, "characteristic system frequency")->required();
    auto* crit_order = crit->add_option("--order", order, "report a single order")->check(CLI::Range(0, kMaxPsdOrder));
    auto* crit_target = crit->add_option("--target", target, "smallest order meeting accurate|semi")
                            ->check(CLI::IsMember({"accurate", "semi"}));
    crit_order->excludes(crit_target);

    std::string config_path, out_dir = "heom_run";
    bool force = false;
    auto* prop = app.add_subcommand("propagate", "run a HEOM propagation from a config file");
    prop->add_option("--config", config_path, "INI config or a run.json manifest")->required();
    prop->add_option("--out", out_dir, "output directory");
    prop->add_flag("--force", force, "run even when the criteria rate the order unreliable");

    std::string figure;
    double beta_gamma = 1.0, span = 3.0, t_final = 25.0;
    int points = 301, stride = 10;
    std::vector<int> orders;
    std::string bg_range = "0.1:1000:121";
    auto* fig = app.add_subcommand("figdata", "data behind the residue, criteria and spin-boson plots");
    fig->add_option("figure", figure, "fig1 | fig2 | fig3")->required()->check(CLI::IsMember({"fig1", "fig2", "fig3"}));
    fig->add_option("--order", orders, "PSD order(s); fig2 accepts several")->delimiter(',');
    fig->add_option("--beta-gamma", beta_gamma, "fig1: beta gamma");
    fig->add_option("--points", points, "fig1: samples")->check(CLI::Range(2, 1000000));
    fig->add_option("--span", span, "fig1: largest omega / Gamma_N");
    fig->add_option("--beta-gamma-range", bg_range, "fig2: lo:hi:steps, log spaced");
    fig->add_option("--t-final", t_final, "fig3: final time in units of 1/V");
    fig->add_option("--stride", stride, "fig3: record every n steps")->check(CLI::Range(1, 1000000000));
    fig->add_option("--out", out_file, "fig1/fig2: CSV file; fig3: output directory");
    fig->add_flag("--force", force, "fig3: run even when unreliable");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << HEOM_VERSION << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: argument: " << one_line(e.what()) << '\n';
        return kExitArgument;
    }

    try {
        if (psd->parsed()) {
            out << psd_text(psd_order, psd_table);
        } else if (bath->parsed()) {
            const DrudeBath b(lambda, gamma, beta);
            const BathExpansion ex = expand(b, compute_psd(order));
            emit(spectrum.empty() ? bath_table(b, ex) : spectrum_csv(b, ex, parse_range(spectrum, "--spectrum")),
                 out_file, out);
        } else if (crit->parsed()) {
            if (!(omega_s > 0)) throw ArgumentError("--omega-s must be > 0");
            const DrudeBath b(lambda, gamma, beta);
            if (*crit_target) {
                const auto tier = target == "accurate" ? AccuracyTier::Accurate : AccuracyTier::SemiQuantitative;
                const int n = minimum_order(b, omega_s, tier);
                out << "minimum_order = " << n << '\n' << report_text(accuracy_report(n, b, omega_s));
            } else if (*crit_order) {
                out << report_text(accuracy_report(order, b, omega_s));
            } else {
                for (int n = 0; n <= kMaxPsdOrder; ++n) {
                    const auto r = accuracy_report(n, b, omega_s);
                    char line[128];
                    std::snprintf(line, sizeof line, "N=%d ratio=%.4g kappa=%.4g tier=%s\n", n, r.ratio, r.kappa_n,
                                  std::string(to_string(r.tier)).c_str());
                    out << line;
                }
            }
        } else if (prop->parsed()) {
            const RunConfig cfg = resolve(load_config_file(config_path));
            const auto report = run_propagation(cfg, PropagateOptions{out_dir, force}, out);
            out << report_text(report);
        } else if (fig->parsed()) {
            if (figure == "fig1") {
                if (orders.size() > 1) throw ArgumentError("fig1 takes a single --order");
                if (!(beta_gamma > 0) || !(span > 0)) throw ArgumentError("--beta-gamma and --span must be > 0");
                emit(fig1_csv(orders.empty() ? 2 : orders.front(), beta_gamma, points, span), out_file, out);
            } else if (figure == "fig2") {
                if (orders.empty()) orders = {1, 2, 4, 8, 16};
                emit(fig2_csv(orders, parse_range(bg_range, "--beta-gamma-range")), out_file, out);
            } else {
                if (orders.size() > 1) throw ArgumentError("fig3 takes a single --order");
                if (!(t_final > 0)) throw ArgumentError("--t-final must be > 0");
                const int n = orders.empty() ? 10 : orders.front();
                const RunConfig cfg = resolve(parse_ini(fig3_config(n, t_final, stride), "fig3 preset"));
                const std::string dir = out_file.empty() ? "fig3_N" + std::to_string(n) : out_file;
                run_propagation(cfg, PropagateOptions{dir, force}, out);
            }
        }
    } catch (const std::exception& e) {
        err << "error: " << error_kind(e) << ": " << one_line(e.what()) << '\n';
        return exit_code_for(e);
    }
    return kExitOk;
}

}  // namespace heom::cli
