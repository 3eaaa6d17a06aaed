#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "shardecon/cli_io.hpp"
#include "shardecon/security.hpp"

namespace shardecon {

namespace {

constexpr int exit_usage = 2;
constexpr int exit_io = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SecurityArgs {
    std::uint64_t nodes = 0;
    std::uint64_t adversaries = 0;
    std::string s_range;
    std::string threshold = "0.7";
    std::string model = "jury";
    bool exact = false;
};

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& text, std::uint64_t nodes)
{
    if (text.empty())
        return {1, nodes};
    auto number = [&](const std::string& part) {
        try {
            return Amount::parse(part).to_u64();
        } catch (const std::exception&) {
            throw UsageError("--s-range: '" + text + "' is not N or A:B");
        }
    };
    std::pair<std::uint64_t, std::uint64_t> r;
    if (auto sep = text.find_first_of(":-"); sep != std::string::npos)
        r = {number(text.substr(0, sep)), number(text.substr(sep + 1))};
    else
        r = {number(text), number(text)};
    if (r.first == 0 || r.first > r.second || r.second > nodes)
        throw UsageError("--s-range: " + text + " must lie within 1.." + std::to_string(nodes));
    return r;
}

void security_table(const SecurityArgs& a, std::ostream& out)
{
    if (a.nodes == 0)
        throw UsageError("--n: must be positive");
    if (a.adversaries > a.nodes)
        throw UsageError("--t: adversary count exceeds --n");
    Fraction frac;
    try {
        frac = parse_fraction(a.threshold);
    } catch (const std::exception&) {
        throw UsageError("--threshold-frac: '" + a.threshold + "' is not a number");
    }
    if (cmp(frac, mpq_class(1, 2)) <= 0 || cmp(frac, 1) > 0)
        throw UsageError("--threshold-frac: must lie in (0.5, 1]");
    const auto [lo, hi] = parse_range(a.s_range, a.nodes);

    out << "s\tm\tT\tlog10_failure";
    if (a.exact)
        out << "\texact";
    out << '\n';
    for (std::uint64_t s = lo; s <= hi; ++s) {
        const std::uint64_t m = a.nodes / s;
        std::uint64_t threshold = 0;
        security::Probability p;
        if (a.model == "classic") {
            threshold = security::majority_threshold(m);
            p = security::hypergeom_tail(a.nodes, a.adversaries, m, threshold);
        } else {
            threshold = security::threshold_for(m, frac);
            p = security::jury_failure(security::ShardConfig::make(a.nodes, s, threshold, a.adversaries));
        }
        out << s << '\t' << m << '\t' << threshold << '\t' << format_real(p.log10);
        if (a.exact)
            out << '\t' << p.exact.get_str();
        out << '\n';
    }
}

struct RunArgs {
    std::string config;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    bool oplog = false;
};

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << text) || !f.flush())
        throw IoError("cannot write " + path.string());
}

int simulate(const RunArgs& a, std::ostream& out)
{
    SimConfig config;
    try {
        config = load_config(a.config);
        if (a.seed)
            config.seed = a.seed;
        if (a.threads)
            config.threads = *a.threads;
        config.validate();
    } catch (const ConfigError& e) {
        throw UsageError(std::string("config: ") + e.what());
    }

    const std::filesystem::path dir(a.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("cannot create output directory " + dir.string());

    RunPaths paths{dir / "intervals.csv", dir / "manifest", a.oplog ? dir / "oplog.tsv" : std::filesystem::path()};
    write_file(paths.manifest, render_manifest(config, paths));

    std::ofstream oplog;
    Simulator sim(config);
    if (a.oplog) {
        oplog.open(paths.oplog, std::ios::binary);
        if (!oplog)
            throw IoError("cannot write " + paths.oplog.string());
        sim.set_oplog(&oplog);
    }
    const std::vector<IntervalRecord> records = sim.run();
    if (a.oplog && !oplog.flush())
        throw IoError("cannot write " + paths.oplog.string());

    std::ostringstream csv;
    write_csv(csv, records);
    write_file(paths.csv, csv.str());
    out << "wrote " << records.size() << " intervals to " << paths.csv.string() << '\n';
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Sharded-blockchain economy simulator and committee security calculator", "shardecon"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(artifact_version));

    SecurityArgs sec;
    auto* security_cmd = app.add_subcommand("security", "Failure probability per shard count");
    security_cmd->add_option("--n", sec.nodes, "Total node count")->required();
    security_cmd->add_option("--t", sec.adversaries, "Adversary node count")->required();
    security_cmd->add_option("--s-range", sec.s_range, "Shard counts: N or A:B (default 1:n)");
    security_cmd->add_option("--threshold-frac", sec.threshold, "Jury threshold fraction T/m")->capture_default_str();
    security_cmd->add_option("--model", sec.model, "classic or jury")
        ->check(CLI::IsMember({"classic", "jury"}))
        ->capture_default_str();
    security_cmd->add_flag("--exact", sec.exact, "Also print the exact rational");

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run the economy simulation");
    run_cmd->add_option("--config", run.config, "Config file (key = value)")->required();
    run_cmd->add_option("--out", run.out_dir, "Output directory")->required();
    run_cmd->add_option("--seed", run.seed, "Overrides the config seed");
    run_cmd->add_option("--threads", run.threads, "Worker threads for agent stepping");
    run_cmd->add_flag("--oplog", run.oplog, "Also write oplog.tsv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << artifact_version << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return exit_usage;
    }

    try {
        if (*security_cmd) {
            security_table(sec, out);
            return 0;
        }
        return simulate(run, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return exit_usage;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return exit_io;
    } catch (const security::InvalidConfiguration& e) {
        err << "usage error: " << e.what() << '\n';
        return exit_usage;
    } catch (const Simulator::InvariantViolation& e) {
        err << "invariant violated: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace shardecon
