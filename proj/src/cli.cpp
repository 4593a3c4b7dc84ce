#include "cfmoll/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cfmoll/charfn.hpp"
#include "cfmoll/converge.hpp"
#include "cfmoll/distribution.hpp"
#include "cfmoll/errors.hpp"
#include "cfmoll/field_io.hpp"

namespace cfmoll {

using nlohmann::json;

namespace {

const char* command_name(Command c)
{
    switch (c) {
    case Command::invert: return "invert";
    case Command::mollify: return "mollify";
    case Command::converge: return "converge";
    case Command::clt_demo: return "clt-demo";
    case Command::selfcheck: break;
    }
    return "selfcheck";
}

std::string resolve(const std::filesystem::path& base, const std::string& p)
{
    const std::filesystem::path path(p);
    return path.is_absolute() ? p : (base / path).string();
}

template <class T>
T read(const json& j, const char* key)
{
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: bad value for \"") + key + "\": " + e.what());
    }
}

/// Loads one spec file; a file holding a JSON array yields several specs.
std::vector<DistributionSpec> load_specs(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open spec file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("spec file " + path + " is not valid JSON: " + e.what());
    }
    std::vector<DistributionSpec> specs;
    if (j.is_array()) {
        for (const auto& item : j)
            specs.push_back(spec_from_json(item));
    } else {
        specs.push_back(spec_from_json(j));
    }
    return specs;
}

DistributionSpec single_spec(const RunConfig& c)
{
    if (c.spec_paths.size() != 1)
        throw ValidationError(std::string(command_name(c.command)) + " needs exactly one --spec");
    auto specs = load_specs(c.spec_paths.front());
    if (specs.size() != 1)
        throw ValidationError("spec file " + c.spec_paths.front() + " must hold a single spec");
    return std::move(specs.front());
}

Grid required_grid(const RunConfig& c)
{
    if (c.grid.empty())
        throw ValidationError(std::string(command_name(c.command)) + " needs --grid min:max:count[,...]");
    return parse_grid(c.grid);
}

void emit_field(const DensityField& field, const json& extra, const RunConfig& c, std::ostream& out)
{
    if (c.out.empty()) {
        write_density_csv(out, field);
    } else {
        write_density_field(field, c.out, extra);
    }
}

void emit_report(const ConvergenceReport& report, const json& extra, const RunConfig& c, std::ostream& out)
{
    json doc = to_json(report);
    for (const auto& [key, value] : extra.items())
        doc[key] = value;
    if (c.out.empty()) {
        out << doc.dump(2) << '\n';
        return;
    }
    std::ofstream main(c.out);
    if (!main)
        throw ValidationError("cannot write " + c.out);
    main << doc.dump(2) << '\n';
    const auto csv_path = with_extension(c.out, ".csv");
    std::ofstream csv(csv_path);
    if (!csv)
        throw ValidationError("cannot write " + csv_path);
    write_report_csv(csv, report);
}

int run_invert(const RunConfig& c, std::ostream& out)
{
    const auto spec = single_spec(c);
    const auto grid = required_grid(c);
    const auto cf = make_cf(spec);
    const auto field = invert_density_grid(cf, grid, c.params);
    json extra = {{"command", "invert"}, {"spec", spec_to_json(spec)}, {"params", to_json(c.params)}};
    if (c.params.truncation_radius > 0) {
        extra["frequency_radius"] = c.params.truncation_radius;
        extra["radius_capped"] = false;
    } else {
        const auto radius = inversion_radius(cf, c.params);
        extra["frequency_radius"] = radius.radius;
        extra["radius_capped"] = radius.capped;
    }
    extra["cf_l1_bound"] = cf_l1_bound(cf, c.params);
    emit_field(field, extra, c, out);
    return exit_ok;
}

int run_mollify(const RunConfig& c, std::ostream& out)
{
    if (!c.sigma)
        throw ValidationError("mollify needs --sigma");
    const auto spec = single_spec(c);
    const auto grid = required_grid(c);
    const auto field = mollified_density_grid(make_cf(spec), *c.sigma, grid, c.params);
    const double radius = c.params.truncation_radius > 0
                              ? c.params.truncation_radius
                              : truncation_radius(*c.sigma, c.params.tail_tol, spec.dimension());
    emit_field(field,
               {{"command", "mollify"},
                {"spec", spec_to_json(spec)},
                {"sigma", *c.sigma},
                {"frequency_radius", radius},
                {"params", to_json(c.params)}},
               c, out);
    return exit_ok;
}

int run_converge(const RunConfig& c, std::ostream& out)
{
    if (c.spec_paths.empty())
        throw ValidationError("converge needs at least one --spec (the sequence, in order)");
    if (c.target_path.empty())
        throw ValidationError("converge needs --target");
    std::vector<DistributionSpec> sequence;
    for (const auto& p : c.spec_paths)
        for (auto& s : load_specs(p))
            sequence.push_back(std::move(s));
    const auto target = load_spec(c.target_path);
    const auto grid = required_grid(c);
    const std::vector<int> ks = c.k_schedule.empty() ? std::vector<int>{2} : c.k_schedule;

    std::vector<CharFn> cfs;
    json seq_json = json::array();
    for (const auto& s : sequence) {
        cfs.push_back(make_cf(s));
        seq_json.push_back(spec_to_json(s));
    }
    const auto report = convergence_certificate(cfs, make_cf(target), ks, grid, c.epsilon, c.params);
    emit_report(report,
                {{"command", "converge"},
                 {"grid", format_grid(grid)},
                 {"sequence", seq_json},
                 {"target", spec_to_json(target)},
                 {"params", to_json(c.params)}},
                c, out);
    return exit_ok;
}

int run_clt_demo(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    const std::vector<long> ns{4, 16, 64};
    const auto grid = parse_grid(c.grid.empty() ? "-8:8:513" : c.grid);
    if (grid.dimension() != 1)
        throw ValidationError("clt-demo runs in one dimension; give a 1-d --grid");
    const std::vector<int> ks = c.k_schedule.empty() ? std::vector<int>{2} : c.k_schedule;

    // Centered Bernoulli(1/2) steps, standardized by the declared mean 1/2 and variance 1/4.
    const auto step = bernoulli(0.5);
    std::vector<CharFn> cfs;
    json seq_json = json::array();
    for (long n : ns) {
        const auto s = standardized_iid_sum(step, int(n), 0.5, 0.25);
        cfs.push_back(make_cf(s));
        seq_json.push_back(spec_to_json(s));
    }
    const auto target = normal(0.0, 1.0);
    CertificateOptions options;
    options.labels = ns;
    const auto report = convergence_certificate(cfs, make_cf(target), ks, grid, c.epsilon, c.params, options);
    emit_report(report,
                {{"command", "clt-demo"},
                 {"grid", format_grid(grid)},
                 {"sequence", seq_json},
                 {"target", spec_to_json(target)},
                 {"params", to_json(c.params)}},
                c, out);
    if (!c.out.empty()) {
        err << "clt-demo: Bernoulli(1/2) standardized sums vs N(0,1)\n";
        for (std::size_t k = 0; k < ks.size(); ++k) {
            err << "  k=" << ks[k] << " (sigma=" << report.sigma_schedule[k] << ")";
            for (std::size_t n = 0; n < ns.size(); ++n)
                err << "  n=" << ns[n] << ": " << format_number(report.l1_mollified[n][k]);
            err << (report.monotone_flags[k] ? "  [nonincreasing]" : "  [not monotone]") << '\n';
        }
    }
    return exit_ok;
}

int run_selfcheck_command(const RunConfig& c, std::ostream& out)
{
    bool all = true;
    for (const auto& r : run_selfcheck(c.seed, c.params.threads)) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.detail << '\n';
        all = all && r.passed;
    }
    return all ? exit_ok : exit_numeric;
}

} // namespace

void apply_config_file(RunConfig& c, const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("config file " + path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object())
        throw ValidationError("config file must hold a JSON object");
    const auto base = std::filesystem::path(path).parent_path();

    static const std::vector<std::string> known{
        "spec", "target", "grid", "sigma", "k_schedule", "epsilon", "out", "seed", "threads",
        "tail_tol", "allow_unknown_integrability", "nodes_per_axis", "truncation_radius"};
    for (const auto& [key, value] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ValidationError("config: unknown key \"" + key + "\"");

    if (j.contains("spec")) {
        c.spec_paths.clear();
        if (j["spec"].is_array()) {
            for (const auto& p : read<std::vector<std::string>>(j, "spec"))
                c.spec_paths.push_back(resolve(base, p));
        } else {
            c.spec_paths.push_back(resolve(base, read<std::string>(j, "spec")));
        }
    }
    if (j.contains("target"))
        c.target_path = resolve(base, read<std::string>(j, "target"));
    if (j.contains("grid"))
        c.grid = read<std::string>(j, "grid");
    if (j.contains("sigma"))
        c.sigma = read<double>(j, "sigma");
    if (j.contains("k_schedule"))
        c.k_schedule = read<std::vector<int>>(j, "k_schedule");
    if (j.contains("epsilon"))
        c.epsilon = read<double>(j, "epsilon");
    if (j.contains("out"))
        c.out = resolve(base, read<std::string>(j, "out"));
    if (j.contains("seed"))
        c.seed = read<std::uint64_t>(j, "seed");
    if (j.contains("threads"))
        c.params.threads = read<int>(j, "threads");
    if (j.contains("tail_tol"))
        c.params.tail_tol = read<double>(j, "tail_tol");
    if (j.contains("allow_unknown_integrability"))
        c.params.allow_unknown_integrability = read<bool>(j, "allow_unknown_integrability");
    if (j.contains("nodes_per_axis"))
        c.params.nodes_per_axis = read<int>(j, "nodes_per_axis");
    if (j.contains("truncation_radius"))
        c.params.truncation_radius = read<double>(j, "truncation_radius");
}

RunConfig parse_args(int argc, const char* const* argv)
{
    CLI::App app{"Characteristic-function toolkit: Fourier inversion, Gaussian mollification and "
                 "weak-convergence diagnostics",
                 "cfmoll"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    std::string config_path;
    std::vector<std::string> specs;
    std::string target, grid, out;
    double sigma = 0, epsilon = 0, tail_tol = 0, radius = 0;
    std::vector<int> ks;
    std::uint64_t seed = 0;
    int threads = 0, nodes = 0;
    bool allow_unknown = false;

    struct Sub {
        Command command;
        CLI::App* app;
    };
    std::vector<Sub> subs{
        {Command::invert, app.add_subcommand("invert", "Fourier-invert an integrable CF on a grid")},
        {Command::mollify, app.add_subcommand("mollify", "Density of X + sigma Z on a grid")},
        {Command::converge, app.add_subcommand("converge", "Convergence certificate for a sequence of laws")},
        {Command::clt_demo, app.add_subcommand("clt-demo", "Certificate for Bernoulli(1/2) standardized sums")},
        {Command::selfcheck, app.add_subcommand("selfcheck", "Run the closed-form invariant suite")},
    };
    for (auto& s : subs) {
        CLI::App* a = s.app;
        a->add_option("--config", config_path, "JSON config file; explicit flags override it");
        a->add_option("--spec", specs, "Distribution spec JSON file (repeat for a sequence)");
        a->add_option("--target", target, "Target distribution spec JSON file");
        a->add_option("--grid", grid, "Evaluation grid min:max:count[,min:max:count...]");
        a->add_option("--sigma", sigma, "Mollification scale");
        a->add_option("--k-schedule", ks, "Smoothing indices k (sigma_k = 1/k), e.g. 1,2,4")->delimiter(',');
        a->add_option("--epsilon", epsilon, "Distance in the smoothing remainder P(||Z||_inf > k eps)");
        a->add_option("--out", out, "Output path (companion file written next to it)");
        a->add_option("--seed", seed, "Seed for Monte Carlo checks");
        a->add_option("--threads", threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
        a->add_option("--tail-tol", tail_tol, "Frequency truncation tolerance");
        a->add_option("--nodes", nodes, "Minimum trapezoid nodes per axis (even, >= 16)");
        a->add_option("--radius", radius, "Explicit frequency truncation radius");
        a->add_flag("--allow-unknown-integrability", allow_unknown,
                    "Invert characteristic functions whose integrability is not declared");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            std::ostringstream help, ignored;
            app.exit(e, help, ignored);
            throw HelpRequested(help.str());
        }
        throw ValidationError(e.what());
    }

    RunConfig c;
    CLI::App* chosen = nullptr;
    for (auto& s : subs)
        if (s.app->parsed()) {
            c.command = s.command;
            chosen = s.app;
        }

    auto given = [&](const char* flag) { return chosen->count(flag) > 0; };
    if (given("--config"))
        apply_config_file(c, config_path);
    if (given("--spec"))
        c.spec_paths = specs;
    if (given("--target"))
        c.target_path = target;
    if (given("--grid"))
        c.grid = grid;
    if (given("--sigma"))
        c.sigma = sigma;
    if (given("--k-schedule"))
        c.k_schedule = ks;
    if (given("--epsilon"))
        c.epsilon = epsilon;
    if (given("--out"))
        c.out = out;
    if (given("--seed"))
        c.seed = seed;
    if (given("--threads"))
        c.params.threads = threads;
    if (given("--tail-tol"))
        c.params.tail_tol = tail_tol;
    if (given("--nodes"))
        c.params.nodes_per_axis = nodes;
    if (given("--radius"))
        c.params.truncation_radius = radius;
    if (given("--allow-unknown-integrability"))
        c.params.allow_unknown_integrability = allow_unknown;
    return c;
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    try {
        validate(c.params);
        if (c.sigma && !(*c.sigma > 0))
            throw ValidationError("--sigma must be positive");
        if (!(c.epsilon > 0))
            throw ValidationError("--epsilon must be positive");
        switch (c.command) {
        case Command::invert: return run_invert(c, out);
        case Command::mollify: return run_mollify(c, out);
        case Command::converge: return run_converge(c, out);
        case Command::clt_demo: return run_clt_demo(c, out, err);
        case Command::selfcheck: return run_selfcheck_command(c, out);
        }
    } catch (const ValidationError& e) {
        err << "cfmoll " << command_name(c.command) << ": invalid input: " << e.what() << '\n';
        return exit_validation;
    } catch (const NumericFailure& e) {
        err << "cfmoll " << command_name(c.command) << ": numeric failure: " << e.what() << '\n';
        return exit_numeric;
    }
    return exit_validation;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    RunConfig config;
    try {
        config = parse_args(argc, argv);
    } catch (const HelpRequested& e) {
        out << e.what();
        return exit_ok;
    } catch (const ValidationError& e) {
        err << "cfmoll: " << e.what() << "\n(run cfmoll --help for usage)\n";
        return exit_validation;
    }
    return run(config, out, err);
}

} // namespace cfmoll
