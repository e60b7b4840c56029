// Command-line front end: protocol search, evaluation sweeps, Monte Carlo
// timing and baseline construction, with reproducible CSV/JSON outputs.

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include <ghzforge/baselines.hpp>
#include <ghzforge/monte_carlo.hpp>
#include <ghzforge/optimizer.hpp>
#include <ghzforge/serialize.hpp>
#include <ghzforge/version.hpp>

namespace {

using nlohmann::json;
using namespace ghzforge;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInputFile = 3;
constexpr int kExitInternal = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InputFileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shortest decimal digits that round-trip to the same double.
std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string output_stem(const std::string& path) {
    static const std::string kExt = ".ghzp.json";
    if (path.size() > kExt.size() && path.compare(path.size() - kExt.size(), kExt.size(), kExt) == 0)
        return path.substr(0, path.size() - kExt.size());
    size_t dot = path.find_last_of('.');
    size_t slash = path.find_last_of('/');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) return path.substr(0, dot);
    return path;
}

std::string basename_of(const std::string& path) {
    size_t slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputFileError("cannot open output file: " + path);
    out << contents;
    if (!out) throw InputFileError("cannot write output file: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputFileError("cannot open input file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Protocol load_protocol(const std::string& path) {
    try {
        return deserialize(read_file(path));
    } catch (const ProtocolParseError& e) {
        throw InputFileError(std::string(e.what()) + " [" + path + "]");
    }
}

int resolve_threads(int flag_value, bool flag_given) {
    if (flag_given) return flag_value;
    if (const char* env = std::getenv("GHZ_FORGE_THREADS")) {
        int v = 0;
        auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), v);
        if (ec == std::errc() && *ptr == '\0' && v >= 0) return v;
        throw UsageError("GHZ_FORGE_THREADS must be a nonnegative integer");
    }
    return 0; // auto
}

/// Collects everything needed to rerun a command and writes the manifest
/// next to the outputs. Output files carry the manifest's file name.
class Manifest {
public:
    Manifest(std::string command, std::string stem)
        : command_(std::move(command)), path_(stem + ".manifest.json"),
          start_(std::chrono::steady_clock::now()) {
        doc_["command"] = command_;
        doc_["code_version"] = kVersion;
        doc_["generator"] = SplitMix64::kName;
        doc_["parameters"] = json::object();
    }

    template <typename T>
    void param(const std::string& name, const T& value) {
        doc_["parameters"][name] = value;
    }

    const std::string& file_name() const { return name_; }
    const std::string& path() const { return path_; }

    void add_output(const std::string& path) { outputs_.push_back(path); }

    void write() {
        doc_["outputs"] = outputs_;
        doc_["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        write_file(path_, doc_.dump(2) + "\n");
    }

private:
    std::string command_;
    std::string path_;
    std::string name_ = basename_of(path_);
    json doc_;
    std::vector<std::string> outputs_;
    std::chrono::steady_clock::time_point start_;
};

std::string csv_header_line(const Manifest& manifest) {
    return "# manifest=" + manifest.file_name() + "\n";
}

// ---------------------------------------------------------------- optimize

struct OptimizeArgs {
    int n = 0;
    int k = 0;
    double fidelity = 0.0;
    std::string algorithm = "base";
    size_t buffer = 1;
    std::vector<double> temperatures;
    int runs = 1;
    uint64_t seed = 0;
    std::string out;
    int threads = 0;
    bool threads_given = false;
    bool runs_given = false;
};

int cmd_optimize(const OptimizeArgs& args) {
    if (args.algorithm == "base") {
        if (!args.temperatures.empty())
            throw UsageError("--temperature is only meaningful with --algorithm random");
        if (args.runs_given && args.runs != 1)
            throw UsageError("--runs is only meaningful with --algorithm random");
    }
    if (args.k < args.n - 1) throw UsageError("--k must be at least n - 1");

    const std::string stem = output_stem(args.out);
    Manifest manifest("optimize", stem);
    manifest.param("n", args.n);
    manifest.param("k", args.k);
    manifest.param("fidelity", args.fidelity);
    manifest.param("algorithm", args.algorithm);
    manifest.param("buffer", args.buffer);
    manifest.param("runs", args.runs);
    manifest.param("temperatures", args.temperatures);
    manifest.param("seed", args.seed);
    manifest.param("out", args.out);

    Protocol best;
    std::vector<GridPoint> grid;
    std::vector<RunLogEntry> run_log;
    double predicted = 0.0;

    if (args.algorithm == "base") {
        DpTable table = base_dp(args.n, args.k, args.fidelity, args.buffer);
        const DpEntry& entry = table.best_final();
        best.root = entry.protocol;
        predicted = entry.fidelity;
        grid = grid_summary(table);
    } else {
        RandomSearchConfig cfg;
        cfg.buffer = args.buffer;
        cfg.runs = args.runs;
        cfg.seed = args.seed;
        if (!args.temperatures.empty()) cfg.temperatures = args.temperatures;
        MultiRunResult result = multi_run(args.n, args.k, args.fidelity, cfg,
                                          resolve_threads(args.threads, args.threads_given));
        best.root = result.best.protocol;
        predicted = result.best.fidelity;
        grid = std::move(result.grid);
        run_log = std::move(result.log);
    }

    best.meta.search_fidelity = args.fidelity;
    best.meta.predicted_fidelity = predicted;
    best.meta.algorithm = args.algorithm;
    best.meta.generator = SplitMix64::kName;
    best.meta.seed = args.seed;

    json extra;
    extra["manifest"] = manifest.file_name();
    write_file(args.out, serialize(best, extra));
    manifest.add_output(args.out);

    std::string grid_csv = csv_header_line(manifest) + "n,k,best_fidelity,success_prob_product\n";
    for (const GridPoint& p : grid)
        grid_csv += std::to_string(p.n) + "," + std::to_string(p.k) + "," + fmt_double(p.best_fidelity) +
                    "," + fmt_double(p.success_product) + "\n";
    write_file(stem + ".grid.csv", grid_csv);
    manifest.add_output(stem + ".grid.csv");

    if (args.algorithm == "random") {
        std::string runs_csv = csv_header_line(manifest) + "run,temp_index,temperature,seed,best_fidelity\n";
        for (const RunLogEntry& row : run_log)
            runs_csv += std::to_string(row.run) + "," + std::to_string(row.temp_index) + "," +
                        fmt_double(row.temperature) + "," + std::to_string(row.seed) + "," +
                        fmt_double(row.best_fidelity) + "\n";
        write_file(stem + ".runs.csv", runs_csv);
        manifest.add_output(stem + ".runs.csv");
    }

    manifest.write();
    std::cout << "best fidelity " << fmt_double(predicted) << " for (n=" << args.n << ", k=" << args.k
              << ") at F_bell=" << fmt_double(args.fidelity) << "; wrote " << args.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::string protocol_path;
    double fmin = 0.8;
    double fmax = 1.0;
    int steps = 21;
    std::string out;
};

int cmd_evaluate(const EvaluateArgs& args) {
    if (args.steps < 1) throw UsageError("--steps must be >= 1");
    if (args.fmin < 0.0 || args.fmax > 1.0 || args.fmin > args.fmax)
        throw UsageError("fidelity sweep range must satisfy 0 <= fmin <= fmax <= 1");
    Protocol p = load_protocol(args.protocol_path);

    const std::string stem = output_stem(args.out);
    Manifest manifest("evaluate", stem);
    manifest.param("protocol", args.protocol_path);
    manifest.param("protocol_id", protocol_id(p));
    manifest.param("fmin", args.fmin);
    manifest.param("fmax", args.fmax);
    manifest.param("steps", args.steps);
    manifest.param("out", args.out);

    std::string csv = csv_header_line(manifest) + "F_bell,F_ghz,min_node_success_prob\n";
    for (int step = 0; step < args.steps; ++step) {
        const double f = args.steps == 1
                             ? args.fmin
                             : args.fmin + (args.fmax - args.fmin) * step / (args.steps - 1);
        EvaluationResult r = evaluate(p, f);
        double min_sp = 1.0;
        for (double sp : r.node_success_probs) min_sp = std::min(min_sp, sp);
        csv += fmt_double(f) + "," + fmt_double(r.state.fidelity()) + "," + fmt_double(min_sp) + "\n";
    }
    write_file(args.out, csv);
    manifest.add_output(args.out);
    manifest.write();
    std::cout << "wrote " << args.out << " (" << args.steps << " rows)\n";
    return kExitOk;
}

// -------------------------------------------------------------- montecarlo

struct MonteCarloArgs {
    std::string protocol_path;
    uint64_t shots = 100000;
    double fidelity = 0.9;
    uint64_t seed = 0;
    std::string out;
    int threads = 0;
    bool threads_given = false;
};

int cmd_montecarlo(const MonteCarloArgs& args) {
    if (args.shots < 1) throw UsageError("--shots must be >= 1");
    Protocol p = load_protocol(args.protocol_path);

    const std::string stem = output_stem(args.out);
    Manifest manifest("montecarlo", stem);
    manifest.param("protocol", args.protocol_path);
    manifest.param("protocol_id", protocol_id(p));
    manifest.param("shots", args.shots);
    manifest.param("fidelity", args.fidelity);
    manifest.param("seed", args.seed);
    manifest.param("out", args.out);

    McReport report = monte_carlo(p, args.fidelity, args.shots, args.seed,
                                  resolve_threads(args.threads, args.threads_given));

    std::string csv = csv_header_line(manifest) + "protocol_id,F_bell,shots,mean_steps,stderr,p50,p90,p99\n";
    csv += protocol_id(p) + "," + fmt_double(args.fidelity) + "," + std::to_string(args.shots) + "," +
           fmt_double(report.mean_steps) + "," + fmt_double(report.stderr_steps) + "," +
           std::to_string(report.p50) + "," + std::to_string(report.p90) + "," +
           std::to_string(report.p99) + "\n";
    write_file(args.out, csv);
    manifest.add_output(args.out);
    manifest.write();
    std::cout << "mean " << fmt_double(report.mean_steps) << " generation steps over " << args.shots
              << " shots (schedule length " << report.schedule_length << ")\n";
    return kExitOk;
}

// ---------------------------------------------------------------- baseline

struct BaselineArgs {
    std::string name;
    std::string out;
};

int cmd_baseline(const BaselineArgs& args) {
    Protocol p;
    if (args.name == "expedient")
        p = expedient();
    else if (args.name == "stringent")
        p = stringent();
    else
        throw UsageError("unknown baseline name: " + args.name);

    const std::string stem = output_stem(args.out);
    Manifest manifest("baseline", stem);
    manifest.param("name", args.name);
    manifest.param("out", args.out);

    json extra;
    extra["manifest"] = manifest.file_name();
    write_file(args.out, serialize(p, extra));
    manifest.add_output(args.out);
    manifest.write();
    std::cout << "wrote " << args.out << " (n=" << p.n() << ", k=" << p.k() << ")\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"GHZ distillation protocol toolkit"};
    app.require_subcommand(1);

    OptimizeArgs opt;
    CLI::App* optimize = app.add_subcommand("optimize", "search for a protocol with the dynamic programs");
    optimize->add_option("--n", opt.n, "qubit count of the target GHZ state")->required();
    optimize->add_option("--k", opt.k, "number of isotropic Bell pairs")->required();
    optimize->add_option("--fidelity", opt.fidelity, "Bell pair fidelity")->required()
        ->check(CLI::Range(0.0, 1.0));
    optimize->add_option("--algorithm", opt.algorithm, "base | random")
        ->check(CLI::IsMember({"base", "random"}));
    optimize->add_option("--buffer", opt.buffer, "protocols stored per grid cell");
    optimize->add_option("--temperature", opt.temperatures,
                         "acceptance temperature, repeatable (random only)");
    optimize->add_option("--runs", opt.runs, "independent repetitions (random only)")
        ->check(CLI::PositiveNumber);
    optimize->add_option("--seed", opt.seed, "PRNG seed");
    optimize->add_option("--out", opt.out, "output protocol file (.ghzp.json)")->required();
    auto* opt_threads = optimize->add_option("--threads", opt.threads, "worker threads, 0 = auto");

    EvaluateArgs ev;
    CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "sweep a protocol over input fidelities");
    evaluate_cmd->add_option("protocol", ev.protocol_path, "protocol file")->required();
    evaluate_cmd->add_option("--fmin", ev.fmin, "sweep start");
    evaluate_cmd->add_option("--fmax", ev.fmax, "sweep end");
    evaluate_cmd->add_option("--steps", ev.steps, "number of sweep points");
    evaluate_cmd->add_option("--out", ev.out, "output CSV")->required();

    MonteCarloArgs mc;
    CLI::App* montecarlo_cmd = app.add_subcommand("montecarlo", "timing statistics by simulation");
    montecarlo_cmd->add_option("protocol", mc.protocol_path, "protocol file")->required();
    montecarlo_cmd->add_option("--shots", mc.shots, "number of simulated executions");
    montecarlo_cmd->add_option("--fidelity", mc.fidelity, "Bell pair fidelity")
        ->check(CLI::Range(0.0, 1.0));
    montecarlo_cmd->add_option("--seed", mc.seed, "PRNG seed");
    montecarlo_cmd->add_option("--out", mc.out, "output CSV")->required();
    auto* mc_threads = montecarlo_cmd->add_option("--threads", mc.threads, "worker threads, 0 = auto");

    BaselineArgs bl;
    CLI::App* baseline_cmd = app.add_subcommand("baseline", "write a reference protocol");
    baseline_cmd->add_option("--name", bl.name, "expedient | stringent")->required();
    baseline_cmd->add_option("--out", bl.out, "output protocol file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*optimize) {
            opt.threads_given = opt_threads->count() > 0;
            opt.runs_given = optimize->count("--runs") > 0;
            return cmd_optimize(opt);
        }
        if (*evaluate_cmd) return cmd_evaluate(ev);
        if (*montecarlo_cmd) {
            mc.threads_given = mc_threads->count() > 0;
            return cmd_montecarlo(mc);
        }
        if (*baseline_cmd) return cmd_baseline(bl);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InputFileError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputFile;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
