#include "shardecon/cli_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

namespace shardecon {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::uint64_t parse_u64(const std::string& v)
{
    const Amount a = Amount::parse(v);
    return a.to_u64();
}

double parse_double(const std::string& v)
{
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size())
        throw std::invalid_argument("trailing characters in '" + v + "'");
    return d;
}

std::string render_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Exact decimal when the denominator is 2^a 5^b, otherwise num/den.
std::string render_fraction(const Fraction& q)
{
    if (q.get_den() == 1)
        return q.get_num().get_str();
    mpz_class den = q.get_den();
    unsigned long twos = mpz_remove(den.get_mpz_t(), den.get_mpz_t(), mpz_class(2).get_mpz_t());
    unsigned long fives = mpz_remove(den.get_mpz_t(), den.get_mpz_t(), mpz_class(5).get_mpz_t());
    if (den != 1)
        return q.get_str();
    const unsigned long digits = std::max(twos, fives);
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, digits);
    mpz_class scaled = q.get_num() * scale / q.get_den();
    const bool negative = sgn(scaled) < 0;
    std::string s = mpz_class(abs(scaled)).get_str();
    if (s.size() <= digits)
        s.insert(0, digits - s.size() + 1, '0');
    s.insert(s.size() - digits, ".");
    return negative ? "-" + s : s;
}

struct Field {
    const char* key;
    std::function<void(SimConfig&, const std::string&)> set;
    std::function<std::string(const SimConfig&)> get;
};

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = {
        {"population", [](SimConfig& c, const std::string& v) { c.population = parse_u64(v); },
         [](const SimConfig& c) { return std::to_string(c.population); }},
        {"intervals", [](SimConfig& c, const std::string& v) { c.intervals = parse_u64(v); },
         [](const SimConfig& c) { return std::to_string(c.intervals); }},
        {"seed", [](SimConfig& c, const std::string& v) { c.seed = parse_u64(v); },
         [](const SimConfig& c) { return c.seed ? std::to_string(*c.seed) : std::string(); }},
        {"threads", [](SimConfig& c, const std::string& v) { c.threads = static_cast<unsigned>(parse_u64(v)); },
         [](const SimConfig& c) { return std::to_string(c.threads); }},

        {"policy.target_ratio", [](SimConfig& c, const std::string& v) { c.policy.target_ratio = parse_double(v); },
         [](const SimConfig& c) { return render_double(c.policy.target_ratio); }},
        {"policy.usage", [](SimConfig& c, const std::string& v) { c.policy.usage = parse_fraction(v); },
         [](const SimConfig& c) { return render_fraction(c.policy.usage); }},
        {"policy.avgq_window", [](SimConfig& c, const std::string& v) { c.policy.avgq_window = parse_u64(v); },
         [](const SimConfig& c) { return std::to_string(c.policy.avgq_window); }},
        {"policy.window", [](SimConfig& c, const std::string& v) { c.policy.history_window = parse_u64(v); },
         [](const SimConfig& c) { return std::to_string(c.policy.history_window); }},
        {"policy.warmup", [](SimConfig& c, const std::string& v) { c.policy.warmup = parse_u64(v); },
         [](const SimConfig& c) { return std::to_string(c.policy.warmup); }},
        {"policy.initial_gpl", [](SimConfig& c, const std::string& v) { c.policy.initial_gpl = parse_u64(v); },
         [](const SimConfig& c) { return std::to_string(c.policy.initial_gpl); }},
        {"policy.initial_i", [](SimConfig& c, const std::string& v) { c.policy.initial_i = parse_fraction(v); },
         [](const SimConfig& c) { return render_fraction(c.policy.initial_i); }},
        {"policy.initial_avq", [](SimConfig& c, const std::string& v) { c.policy.initial_avq = parse_fraction(v); },
         [](const SimConfig& c) { return render_fraction(c.policy.initial_avq); }},
        {"policy.gpl_min", [](SimConfig& c, const std::string& v) { c.policy.bounds.gpl_min = parse_u64(v); },
         [](const SimConfig& c) { return std::to_string(c.policy.bounds.gpl_min); }},
        {"policy.gpl_max", [](SimConfig& c, const std::string& v) { c.policy.bounds.gpl_max = parse_u64(v); },
         [](const SimConfig& c) { return std::to_string(c.policy.bounds.gpl_max); }},
        {"policy.i_min", [](SimConfig& c, const std::string& v) { c.policy.bounds.i_min = parse_fraction(v); },
         [](const SimConfig& c) { return render_fraction(c.policy.bounds.i_min); }},
        {"policy.i_max", [](SimConfig& c, const std::string& v) { c.policy.bounds.i_max = parse_fraction(v); },
         [](const SimConfig& c) { return render_fraction(c.policy.bounds.i_max); }},
        {"policy.ridge", [](SimConfig& c, const std::string& v) { c.policy.ridge = parse_double(v); },
         [](const SimConfig& c) { return render_double(c.policy.ridge); }},

        {"mint.initial", [](SimConfig& c, const std::string& v) { c.mint_initial = Amount::parse(v); },
         [](const SimConfig& c) { return c.mint_initial.str(); }},
        {"mint.period", [](SimConfig& c, const std::string& v) { c.mint_period = parse_u64(v); },
         [](const SimConfig& c) { return std::to_string(c.mint_period); }},
        {"mint.decay",
         [](SimConfig& c, const std::string& v) {
             if (v == "halving")
                 c.mint_decay = MintDecay::halving;
             else if (v == "subtract")
                 c.mint_decay = MintDecay::subtract;
             else
                 throw std::invalid_argument("expected halving or subtract, got '" + v + "'");
         },
         [](const SimConfig& c) { return std::string(c.mint_decay == MintDecay::halving ? "halving" : "subtract"); }},
        {"mint.step", [](SimConfig& c, const std::string& v) { c.mint_step = Amount::parse(v); },
         [](const SimConfig& c) { return c.mint_step.str(); }},

        {"ledger.fee", [](SimConfig& c, const std::string& v) { c.transaction_fee = Amount::parse(v); },
         [](const SimConfig& c) { return c.transaction_fee.str(); }},

        {"shards.capacity", [](SimConfig& c, const std::string& v) { c.shard_capacity = parse_u64(v); },
         [](const SimConfig& c) { return std::to_string(c.shard_capacity); }},
        {"shards.min_size", [](SimConfig& c, const std::string& v) { c.min_shard_size = parse_u64(v); },
         [](const SimConfig& c) { return std::to_string(c.min_shard_size); }},
        {"shards.threshold_frac", [](SimConfig& c, const std::string& v) { c.threshold_fraction = parse_fraction(v); },
         [](const SimConfig& c) { return render_fraction(c.threshold_fraction); }},
        {"shards.failure_budget", [](SimConfig& c, const std::string& v) { c.failure_budget = parse_fraction(v); },
         [](const SimConfig& c) { return render_fraction(c.failure_budget); }},
        {"shards.adversary_frac", [](SimConfig& c, const std::string& v) { c.adversary_fraction = parse_fraction(v); },
         [](const SimConfig& c) { return render_fraction(c.adversary_fraction); }},

        {"agents.demand", [](SimConfig& c, const std::string& v) { c.demand = UniformRange::parse(v); },
         [](const SimConfig& c) { return c.demand.str(); }},
        {"agents.fear_line", [](SimConfig& c, const std::string& v) { c.fear_line = UniformRange::parse(v); },
         [](const SimConfig& c) { return c.fear_line.str(); }},
        {"agents.balance", [](SimConfig& c, const std::string& v) { c.initial_balance = UniformRange::parse(v); },
         [](const SimConfig& c) { return c.initial_balance.str(); }},
        {"agents.duty", [](SimConfig& c, const std::string& v) { c.duty_reliability = parse_double(v); },
         [](const SimConfig& c) { return render_double(c.duty_reliability); }},

        {"shock.height", [](SimConfig& c, const std::string& v) { c.shock_height = parse_u64(v); },
         [](const SimConfig& c) { return std::to_string(c.shock_height); }},
        {"shock.demand_factor", [](SimConfig& c, const std::string& v) { c.shock_factor = parse_fraction(v); },
         [](const SimConfig& c) { return render_fraction(c.shock_factor); }},

        {"audit.every", [](SimConfig& c, const std::string& v) { c.audit_every = parse_u64(v); },
         [](const SimConfig& c) { return std::to_string(c.audit_every); }},
    };
    return table;
}

}  // namespace

SimConfig parse_config(std::istream& in, const std::string& source)
{
    SimConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty())
            continue;
        const auto where = source + ":" + std::to_string(line_no) + ": ";
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + "expected 'key = value'");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        const auto& table = fields();
        const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return key == f.key; });
        if (it == table.end())
            throw ConfigError(where + "unknown key '" + key + "'");
        if (value.empty())
            throw ConfigError(where + "missing value for '" + key + "'");
        try {
            it->set(config, value);
        } catch (const std::exception& e) {
            throw ConfigError(where + "bad value for '" + key + "': " + e.what());
        }
    }
    return config;
}

SimConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config " + path.string());
    return parse_config(in, path.string());
}

std::string render_config(const SimConfig& config)
{
    std::ostringstream out;
    for (const auto& f : fields()) {
        const std::string v = f.get(config);
        if (v.empty())
            continue;
        out << f.key << " = " << v << '\n';
    }
    return out.str();
}

const std::vector<std::string>& csv_columns()
{
    static const std::vector<std::string> columns = {
        "height", "M0",       "M1",      "M2",            "ratio",       "Q",
        "P",      "R",        "GPL",     "GN",            "I",           "s",
        "capacity", "pending", "registrations", "maturations", "confiscations", "maintainers"};
    return columns;
}

std::string csv_header()
{
    std::string out;
    for (const auto& c : csv_columns()) {
        if (!out.empty())
            out += ',';
        out += c;
    }
    return out;
}

std::string csv_row(const IntervalRecord& r)
{
    std::ostringstream out;
    out << r.height << ',' << r.money.m0.str() << ',' << r.money.m1.str() << ',' << r.money.m2.str() << ','
        << format_real(r.money.ratio) << ',' << r.money.lines_executed << ',' << r.money.price.str() << ','
        << r.money.inflow.str() << ',' << r.gpl << ',' << r.gn << ',' << format_real(r.i) << ',' << r.shards << ','
        << r.capacity << ',' << r.pending << ',' << r.registrations << ',' << r.maturations << ','
        << r.confiscations << ',' << r.maintainers;
    return out.str();
}

void write_csv(std::ostream& out, std::span<const IntervalRecord> records)
{
    out << csv_header() << '\n';
    for (const auto& r : records)
        out << csv_row(r) << '\n';
}

std::vector<IntervalRecord> read_csv(std::istream& in)
{
    std::vector<IntervalRecord> out;
    std::string line;
    if (!std::getline(in, line) || trim(line) != csv_header())
        throw std::runtime_error("CSV header does not match the interval layout");
    while (std::getline(in, line)) {
        if (trim(line).empty())
            continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(trim(cell));
        if (cells.size() != csv_columns().size())
            throw std::runtime_error("CSV row has " + std::to_string(cells.size()) + " fields: " + line);
        IntervalRecord r;
        r.height = parse_u64(cells[0]);
        r.money.height = r.height;
        r.money.m0 = Amount::parse(cells[1]);
        r.money.m1 = Amount::parse(cells[2]);
        r.money.m2 = Amount::parse(cells[3]);
        r.money.ratio = parse_double(cells[4]);
        r.money.lines_executed = parse_u64(cells[5]);
        r.money.price = Amount::parse(cells[6]);
        r.money.inflow = Amount::parse(cells[7]);
        r.gpl = parse_u64(cells[8]);
        r.gn = parse_u64(cells[9]);
        r.i = parse_fraction(cells[10]);
        r.shards = parse_u64(cells[11]);
        r.capacity = parse_u64(cells[12]);
        r.pending = parse_u64(cells[13]);
        r.registrations = parse_u64(cells[14]);
        r.maturations = parse_u64(cells[15]);
        r.confiscations = parse_u64(cells[16]);
        r.maintainers = parse_u64(cells[17]);
        out.push_back(std::move(r));
    }
    return out;
}

std::string render_manifest(const SimConfig& config, const RunPaths& paths)
{
    std::ostringstream out;
    out << "# shardecon run manifest\n"
        << "# version: " << artifact_version << '\n'
        << "# intervals csv: " << paths.csv.string() << '\n';
    if (!paths.oplog.empty())
        out << "# operation log: " << paths.oplog.string() << '\n';
    out << "# replay: shardecon run --config " << paths.manifest.string() << " --out <dir>\n"
        << render_config(config);
    return out.str();
}

}  // namespace shardecon
