#include <doctest.h>

#include <random>
#include <sstream>

#include "shardecon/ledger.hpp"

using namespace shardecon;

namespace {

struct Funded {
    Ledger ledger{Amount(0)};
    AccountId a;
    AccountId b;

    explicit Funded(std::uint64_t balance)
    {
        a = ledger.open_account();
        b = ledger.open_account();
        ledger.mint(balance);
        ledger.pay_from_pool(a, balance);
    }
};

LedgerErrorKind kind_of(auto&& fn)
{
    try {
        fn();
    } catch (const LedgerError& e) {
        return e.kind();
    }
    FAIL("no LedgerError thrown");
    return LedgerErrorKind::invalid_argument;
}

}  // namespace

TEST_CASE("amounts never go negative")
{
    Amount a(5);
    CHECK_THROWS_AS(a -= Amount(6), std::domain_error);
    CHECK(a == Amount(5));
    CHECK(Amount::parse("010") == Amount(10));
    CHECK_THROWS(Amount::parse("-1"));
    CHECK_THROWS(Amount::parse("1.5"));
    CHECK(Amount::parse("123456789012345678901234567890").str() == "123456789012345678901234567890");
    CHECK(floor_mul(parse_fraction("0.013"), Amount(1'000'000'000)) == Amount(13'000'000));
    CHECK(floor_ratio(Amount(500), Amount(100), Amount(1000)) == Amount(50));
}

TEST_CASE("fractions parse without rounding")
{
    CHECK(parse_fraction("0.7") == Fraction(7, 10));
    CHECK(parse_fraction("0.08") == Fraction(2, 25));
    CHECK(parse_fraction("1e-6") == Fraction(1, 1'000'000));
    CHECK(parse_fraction("2.5E2") == Fraction(250));
    CHECK(parse_fraction("3/7") == Fraction(3, 7));
    CHECK(parse_fraction("-.5") == Fraction(-1, 2));
    CHECK_THROWS(parse_fraction("abc"));
    CHECK_THROWS(parse_fraction("1/0"));
    CHECK_THROWS(parse_fraction(""));
}

TEST_CASE("transfer")
{
    SUBCASE("fee goes to the pool")
    {
        Funded f(100);
        f.ledger.transfer(f.a, f.b, Amount(90), Amount(10));
        CHECK(f.ledger.balance(f.a).is_zero());
        CHECK(f.ledger.balance(f.b) == Amount(90));
        CHECK(f.ledger.pool().balance == Amount(10));
        CHECK(f.ledger.audit().empty());
    }
    SUBCASE("amount plus fee must be covered")
    {
        Funded f(100);
        CHECK(kind_of([&] { f.ledger.transfer(f.a, f.b, Amount(100), Amount(10)); }) ==
              LedgerErrorKind::insufficient_funds);
        CHECK(f.ledger.balance(f.a) == Amount(100));
        CHECK(f.ledger.pool().balance.is_zero());
    }
    SUBCASE("zero transfer is the identity")
    {
        Funded f(100);
        f.ledger.transfer(f.a, f.b, Amount(0), Amount(0));
        CHECK(f.ledger.balance(f.a) == Amount(100));
        CHECK(f.ledger.balance(f.b).is_zero());
        CHECK(f.ledger.audit().empty());
    }
    SUBCASE("unknown account")
    {
        Funded f(100);
        CHECK(kind_of([&] { f.ledger.transfer(f.a, AccountId{7}, Amount(1), Amount(0)); }) ==
              LedgerErrorKind::unknown_account);
    }
}

TEST_CASE("contract funding and withdrawal")
{
    Funded f(100);
    const ContractId c = f.ledger.open_contract(f.a);
    f.ledger.fund_contract(f.a, c, Amount(50), Amount(1));
    f.ledger.withdraw_contract(c, f.a, Amount(50));
    CHECK(f.ledger.balance(f.a) == Amount(99));
    CHECK(f.ledger.pool().balance == Amount(1));

    f.ledger.fund_contract(f.a, c, Amount(10), Amount(0));
    CHECK(kind_of([&] { f.ledger.withdraw_contract(c, f.b, Amount(5)); }) == LedgerErrorKind::ownership_violation);
    CHECK(kind_of([&] { f.ledger.withdraw_contract(c, f.a, Amount(11)); }) == LedgerErrorKind::insufficient_funds);
    CHECK(kind_of([&] { f.ledger.fund_contract(f.b, c, Amount(1), Amount(0)); }) ==
          LedgerErrorKind::ownership_violation);

    const Amount before = f.ledger.balance(f.a);
    f.ledger.fund_contract(f.a, c, Amount(0), Amount(0));
    CHECK(f.ledger.balance(f.a) == before);
    CHECK(f.ledger.audit().empty());
}

TEST_CASE("contract execution")
{
    Funded f(2000);
    const ContractId c = f.ledger.open_contract(f.a);

    SUBCASE("fully funded")
    {
        f.ledger.fund_contract(f.a, c, Amount(1000), Amount(0));
        const ExecutionResult r = f.ledger.execute_contract(c, 10, Amount(100));
        CHECK(r.paid == Amount(1000));
        CHECK(r.executed_lines == 10);
    }
    SUBCASE("whole-line prefix")
    {
        f.ledger.fund_contract(f.a, c, Amount(999), Amount(0));
        const ExecutionResult r = f.ledger.execute_contract(c, 10, Amount(100));
        CHECK(r.paid == Amount(900));
        CHECK(r.executed_lines == 9);
        CHECK(f.ledger.contract_balance(c) == Amount(99));
    }
    SUBCASE("free at price zero")
    {
        f.ledger.fund_contract(f.a, c, Amount(5), Amount(0));
        const ExecutionResult r = f.ledger.execute_contract(c, 1234, Amount(0));
        CHECK(r.paid.is_zero());
        CHECK(r.executed_lines == 1234);
        CHECK(f.ledger.contract_balance(c) == Amount(5));
    }
    CHECK(kind_of([&] { f.ledger.execute_contract(ContractId{9}, 1, Amount(1)); }) ==
          LedgerErrorKind::unknown_account);
    CHECK(f.ledger.audit().empty());
}

TEST_CASE("reliable registration")
{
    Funded f(100);
    const DepositId d = f.ledger.register_reliable(f.a, Amount(90), 20, 3);
    CHECK(f.ledger.balance(f.a) == Amount(10));
    CHECK(f.ledger.deposit(d).principal == Amount(90));
    CHECK(f.ledger.deposit(d).end() == 23);
    CHECK(f.ledger.margin_total() == Amount(90));

    Ledger paid_fee(Amount(10));
    const AccountId owner = paid_fee.open_account();
    paid_fee.mint(Amount(100));
    paid_fee.pay_from_pool(owner, Amount(100));
    paid_fee.register_reliable(owner, Amount(90), 5, 0);
    CHECK(paid_fee.balance(owner).is_zero());
    CHECK(paid_fee.pool().balance == Amount(10));

    CHECK(kind_of([&] { f.ledger.register_reliable(f.b, Amount(0), 5, 0); }) == LedgerErrorKind::invalid_argument);
    CHECK(kind_of([&] { f.ledger.register_reliable(f.b, Amount(1), 5, 0); }) == LedgerErrorKind::insufficient_funds);
}

TEST_CASE("one owner may hold several deposits")
{
    Funded f(1000);
    const DepositId d1 = f.ledger.register_reliable(f.a, Amount(100), 10, 1);
    const DepositId d2 = f.ledger.register_reliable(f.a, Amount(200), 10, 2);
    CHECK(d1 != d2);
    CHECK(f.ledger.serving().size() == 2);
    f.ledger.set_height(1);
    f.ledger.confiscate_deposit(d1);
    CHECK(f.ledger.deposit(d2).status == DepositStatus::serving);
}

TEST_CASE("maturity pays principal plus compensation from the cohort reserve")
{
    Funded f(100);
    f.ledger.mint(Amount(500));
    const DepositId d = f.ledger.register_reliable(f.a, Amount(100), 10, 4);
    f.ledger.reserve_earmark(4, Amount(50));

    f.ledger.set_height(13);
    CHECK(kind_of([&] { f.ledger.mature_deposit(d, Amount(50)); }) == LedgerErrorKind::wrong_state);
    f.ledger.set_height(14);
    CHECK(kind_of([&] { f.ledger.mature_deposit(d, Amount(51)); }) == LedgerErrorKind::earmark_exhausted);
    f.ledger.mature_deposit(d, Amount(50));
    CHECK(f.ledger.balance(f.a) == Amount(150));
    CHECK(f.ledger.deposit(d).status == DepositStatus::matured);
    CHECK(f.ledger.pool().reserved.is_zero());
    CHECK(kind_of([&] { f.ledger.mature_deposit(d, Amount(0)); }) == LedgerErrorKind::wrong_state);
    CHECK(kind_of([&] { f.ledger.confiscate_deposit(d); }) == LedgerErrorKind::wrong_state);
    CHECK(f.ledger.audit().empty());
}

TEST_CASE("maturity without compensation returns the principal")
{
    Funded f(100);
    const DepositId d = f.ledger.register_reliable(f.a, Amount(100), 1, 0);
    f.ledger.set_height(1);
    f.ledger.mature_deposit(d, Amount(0));
    CHECK(f.ledger.balance(f.a) == Amount(100));
}

TEST_CASE("confiscation")
{
    Funded f(100);
    const DepositId d = f.ledger.register_reliable(f.a, Amount(100), 10, 0);
    f.ledger.confiscate_deposit(d);
    CHECK(f.ledger.pool().balance == Amount(100));
    CHECK(f.ledger.pool().free() == Amount(100));
    CHECK(f.ledger.balance(f.a).is_zero());
    CHECK(f.ledger.deposit(d).status == DepositStatus::confiscated);
    CHECK(kind_of([&] { f.ledger.confiscate_deposit(d); }) == LedgerErrorKind::wrong_state);
    CHECK(kind_of([&] { f.ledger.mature_deposit(d, Amount(0)); }) == LedgerErrorKind::wrong_state);
}

TEST_CASE("earmarks are bounded by the free pool and released on demand")
{
    Ledger l;
    l.mint(Amount(100));
    l.reserve_earmark(1, Amount(60));
    CHECK(kind_of([&] { l.reserve_earmark(2, Amount(41)); }) == LedgerErrorKind::insufficient_funds);
    CHECK(l.pool().free() == Amount(40));
    const AccountId a = l.open_account();
    CHECK(kind_of([&] { l.pay_from_pool(a, Amount(41)); }) == LedgerErrorKind::insufficient_funds);
    l.release_earmark(1);
    CHECK(l.pool().free() == Amount(100));
    CHECK(l.pool().earmarks.empty());
}

TEST_CASE("mint is additive")
{
    Ledger one;
    Ledger two;
    one.mint(Amount(30));
    one.mint(Amount(12));
    two.mint(Amount(42));
    CHECK(one.pool().balance == two.pool().balance);
    CHECK(one.minted() == two.minted());
    one.mint(Amount(0));
    CHECK(one.minted() == Amount(42));
    Ledger big;
    big.mint(Amount(50'000'000'000ULL));
    CHECK(big.pool().balance == Amount(50'000'000'000ULL));
    CHECK(big.inflow() == Amount(50'000'000'000ULL));
}

TEST_CASE("operation log lines carry height, op and pool balance")
{
    std::ostringstream log;
    Ledger l;
    l.set_oplog(&log);
    l.set_height(3);
    l.mint(Amount(7));
    CHECK(log.str() == "3\tmint\t7\t7\n");
}

namespace {

// Applies a random operation; failures must leave the state untouched.
struct Driver {
    Ledger ledger{Amount(2)};
    std::vector<AccountId> accounts;
    std::vector<ContractId> contracts;
    std::mt19937_64 rng;
    Height now = 0;

    explicit Driver(std::uint64_t seed) : rng(seed)
    {
        for (int i = 0; i < 5; ++i) {
            accounts.push_back(ledger.open_account());
            contracts.push_back(ledger.open_contract(accounts.back()));
        }
    }

    std::uint64_t pick(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng); }
    Amount amount() { return Amount(pick(400)); }

    void step()
    {
        ledger.set_height(now);
        const AccountId a = accounts[pick(accounts.size())];
        const AccountId b = accounts[pick(accounts.size())];
        const ContractId c = contracts[pick(contracts.size())];
        const auto& deposits = ledger.deposits();
        try {
            switch (pick(11)) {
            case 0: ledger.mint(amount()); break;
            case 1: ledger.pay_from_pool(a, amount()); break;
            case 2: ledger.transfer(a, b, amount(), Amount(pick(3))); break;
            case 3: ledger.fund_contract(a, c, amount(), Amount(pick(3))); break;
            case 4: ledger.withdraw_contract(c, a, amount()); break;
            case 5: ledger.execute_contract(c, pick(20), Amount(pick(30))); break;
            case 6: ledger.register_reliable(a, Amount(1 + pick(200)), 1 + pick(5), now); break;
            case 7: ledger.reserve_earmark(pick(now + 1), amount()); break;
            case 8:
                if (!deposits.empty()) {
                    const auto& d = deposits[pick(deposits.size())];
                    ledger.set_height(d.end());
                    ledger.mature_deposit(d.id, Amount(pick(50)));
                }
                break;
            case 9:
                if (!deposits.empty())
                    ledger.confiscate_deposit(deposits[pick(deposits.size())].id);
                break;
            case 10: ledger.release_earmark(pick(now + 1)); break;
            }
        } catch (const LedgerError&) {
        }
        ++now;
    }
};

std::string snapshot(const Ledger& l)
{
    std::ostringstream out;
    for (const auto& a : l.accounts())
        out << a.balance.str() << ' ';
    for (const auto& c : l.contracts())
        out << c.balance.str() << ' ';
    for (const auto& d : l.deposits())
        out << d.principal.str() << ':' << to_string(d.status) << ' ';
    out << l.pool().balance.str() << ' ' << l.pool().reserved.str() << ' ' << l.minted().str();
    return out.str();
}

}  // namespace

TEST_CASE("random operation sequences conserve money")
{
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        Driver d(seed);
        for (int i = 0; i < 400; ++i) {
            d.step();
            const std::string problem = d.ledger.audit();
            CAPTURE(seed);
            CAPTURE(i);
            REQUIRE(problem.empty());
            REQUIRE(d.ledger.pool().balance >= d.ledger.pool().reserved);
        }
    }
}

TEST_CASE("failed operations leave the ledger untouched")
{
    Driver d(99);
    for (int i = 0; i < 300; ++i)
        d.step();
    const std::string before = snapshot(d.ledger);
    const AccountId a = d.accounts[0];
    CHECK_THROWS_AS(d.ledger.transfer(a, d.accounts[1], Amount(1'000'000'000), Amount(1)), LedgerError);
    CHECK_THROWS_AS(d.ledger.pay_from_pool(a, Amount(1'000'000'000)), LedgerError);
    CHECK_THROWS_AS(d.ledger.register_reliable(a, Amount(1'000'000'000), 3, 0), LedgerError);
    CHECK_THROWS_AS(d.ledger.withdraw_contract(d.contracts[0], d.accounts[1], Amount(0)), LedgerError);
    CHECK(snapshot(d.ledger) == before);
}

TEST_CASE("terminal deposit states never change")
{
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        Driver d(seed);
        std::map<std::uint64_t, std::string> terminal;
        for (int i = 0; i < 400; ++i) {
            d.step();
            for (const auto& dep : d.ledger.deposits()) {
                const std::string state = std::string(to_string(dep.status)) + dep.principal.str();
                auto it = terminal.find(index_of(dep.id));
                if (it != terminal.end())
                    REQUIRE(it->second == state);
                else if (dep.status != DepositStatus::serving)
                    terminal.emplace(index_of(dep.id), state);
            }
        }
    }
}

TEST_CASE("replaying the same operations yields the same state and log")
{
    std::ostringstream log1;
    std::ostringstream log2;
    Driver d1(7);
    Driver d2(7);
    d1.ledger.set_oplog(&log1);
    d2.ledger.set_oplog(&log2);
    for (int i = 0; i < 500; ++i) {
        d1.step();
        d2.step();
    }
    CHECK(snapshot(d1.ledger) == snapshot(d2.ledger));
    CHECK(log1.str() == log2.str());
    CHECK(!log1.str().empty());
}
