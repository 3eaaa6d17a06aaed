#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "shardecon/cli_io.hpp"

using namespace shardecon;

namespace {

struct Cli {
    int code = 0;
    std::string out;
    std::string err;
};

Cli cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "shardecon");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    Cli r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::filesystem::path scratch(const std::string& name)
{
    const auto p = std::filesystem::temp_directory_path() / ("shardecon_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

std::vector<std::string> rows(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        out.push_back(line);
    return out;
}

}  // namespace

TEST_CASE("config parsing")
{
    std::istringstream in("# comment\npopulation = 12\nintervals=3 # trailing\nseed = 9\n"
                          "policy.usage = 0.013\nagents.demand = uniform(5, 9)\nmint.decay = subtract\n");
    const SimConfig c = parse_config(in);
    CHECK(c.population == 12);
    CHECK(c.intervals == 3);
    CHECK(*c.seed == 9);
    CHECK(c.policy.usage == Fraction(13, 1000));
    CHECK(c.demand.lo == Amount(5));
    CHECK(c.demand.hi == Amount(9));
    CHECK(c.mint_decay == MintDecay::subtract);

    std::istringstream unknown("population = 1\nbogus = 2\n");
    CHECK_THROWS_AS(parse_config(unknown), ConfigError);
    std::istringstream bad("population = -1\n");
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    std::istringstream inverted("agents.demand = uniform(9, 5)\n");
    CHECK_THROWS_AS(parse_config(inverted), ConfigError);
}

TEST_CASE("rendered config reads back unchanged")
{
    SimConfig c;
    c.population = 77;
    c.seed = 5;
    c.policy.initial_i = Fraction(3, 7);
    c.policy.bounds.i_max = Fraction(4, 5);
    c.shock_height = 12;
    c.shock_factor = Fraction(5, 2);
    c.fear_line = {Amount(3), Amount(30)};
    const std::string text = render_config(c);
    std::istringstream in(text);
    CHECK(render_config(parse_config(in)) == text);
}

TEST_CASE("csv round trip")
{
    SimConfig c;
    c.population = 40;
    c.intervals = 30;
    c.seed = 8;
    c.demand = {Amount(100), Amount(200)};
    c.initial_balance = {Amount(5000), Amount(9000)};
    c.mint_initial = Amount(10'000);
    const auto records = run(c);
    std::ostringstream out;
    write_csv(out, records);
    CHECK(rows(out.str()).front() == csv_header());
    std::istringstream in(out.str());
    const auto back = read_csv(in);
    REQUIRE(back.size() == records.size());
    std::ostringstream again;
    write_csv(again, back);
    CHECK(again.str() == out.str());
    CHECK(back[5].money.m2 == records[5].money.m2);
}

TEST_CASE("security subcommand")
{
    SUBCASE("jury claim row")
    {
        const Cli r = cli({"security", "--n", "2000", "--t", "1000", "--s-range", "10", "--threshold-frac", "0.7",
                           "--model", "jury"});
        CHECK(r.code == 0);
        const auto lines = rows(r.out);
        REQUIRE(lines.size() == 2);
        double log10p = 0;
        unsigned s = 0, m = 0, t = 0;
        std::istringstream(lines[1]) >> s >> m >> t >> log10p;
        CHECK(s == 10);
        CHECK(m == 200);
        CHECK(t == 140);
        CHECK(log10p <= -20);
    }
    SUBCASE("no adversaries")
    {
        const Cli r = cli({"security", "--n", "2000", "--t", "0", "--s-range", "5:8", "--exact"});
        CHECK(r.code == 0);
        const auto lines = rows(r.out);
        REQUIRE(lines.size() == 5);
        for (std::size_t i = 1; i < lines.size(); ++i)
            CHECK(lines[i].ends_with("\t-inf\t0"));
    }
    SUBCASE("classic rows match enumeration")
    {
        const Cli r = cli({"security", "--n", "10", "--t", "5", "--s-range", "2", "--model", "classic", "--exact"});
        CHECK(r.code == 0);
        const auto lines = rows(r.out);
        REQUIRE(lines.size() == 2);
        const std::string exact = lines[1].substr(lines[1].rfind('\t') + 1);
        CHECK(mpq_class(exact) == oracle::subset_tail(10, 5, 5, 3));
    }
    CHECK(cli({"security", "--n", "10"}).code == 2);
    CHECK(cli({"security", "--n", "10", "--t", "11"}).code == 2);
    CHECK(cli({"security", "--n", "10", "--t", "1", "--model", "other"}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
}

TEST_CASE("run subcommand")
{
    const auto dir = scratch("run");
    write(dir / "zero.conf", "population = 0\nintervals = 4\nseed = 1\n");
    write(dir / "small.conf",
          "population = 30\nintervals = 25\nseed = 1\nmint.initial = 10000\n"
          "agents.demand = uniform(100, 200)\nagents.balance = uniform(5000, 9000)\n");

    SUBCASE("zero population")
    {
        const Cli r = cli({"run", "--config", (dir / "zero.conf").string(), "--out", (dir / "z").string()});
        CHECK(r.code == 0);
        const auto lines = rows(slurp(dir / "z" / "intervals.csv"));
        REQUIRE(lines.size() == 5);
        CHECK(lines[1].starts_with("1,0,0,0,"));
        CHECK(std::filesystem::exists(dir / "z" / "manifest"));
    }
    SUBCASE("seed override and replay from the manifest")
    {
        CHECK(cli({"run", "--config", (dir / "small.conf").string(), "--out", (dir / "a").string()}).code == 0);
        CHECK(cli({"run", "--config", (dir / "small.conf").string(), "--out", (dir / "b").string(), "--seed", "2",
                   "--oplog"})
                  .code == 0);
        CHECK(cli({"run", "--config", (dir / "a" / "manifest").string(), "--out", (dir / "c").string(), "--threads",
                   "2"})
                  .code == 0);
        const std::string a = slurp(dir / "a" / "intervals.csv");
        CHECK(a != slurp(dir / "b" / "intervals.csv"));
        CHECK(a == slurp(dir / "c" / "intervals.csv"));
        CHECK(!slurp(dir / "b" / "oplog.tsv").empty());
        CHECK_FALSE(std::filesystem::exists(dir / "a" / "oplog.tsv"));
    }
    SUBCASE("errors")
    {
        CHECK(cli({"run", "--config", (dir / "missing.conf").string(), "--out", (dir / "m").string()}).code == 2);
        write(dir / "bad.conf", "population = lots\n");
        CHECK(cli({"run", "--config", (dir / "bad.conf").string(), "--out", (dir / "m").string()}).code == 2);
        write(dir / "blocker", "x");
        CHECK(cli({"run", "--config", (dir / "zero.conf").string(), "--out", (dir / "blocker" / "sub").string()})
                  .code == 3);
        CHECK(cli({"run", "--config", (dir / "zero.conf").string()}).code == 2);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("version and help")
{
    const Cli v = cli({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out.find("1.0.0") != std::string::npos);
    CHECK(cli({"--help"}).code == 0);
}
