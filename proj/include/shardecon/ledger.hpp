#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "shardecon/amount.hpp"

namespace shardecon {

using Height = std::uint64_t;

enum class AccountId : std::uint32_t {};
enum class ContractId : std::uint32_t {};
enum class DepositId : std::uint64_t {};

inline std::uint32_t index_of(AccountId id) { return static_cast<std::uint32_t>(id); }
inline std::uint32_t index_of(ContractId id) { return static_cast<std::uint32_t>(id); }
inline std::uint64_t index_of(DepositId id) { return static_cast<std::uint64_t>(id); }

enum class LedgerErrorKind {
    insufficient_funds,
    unknown_account,
    ownership_violation,
    wrong_state,
    earmark_exhausted,
    invalid_argument,
};

const char* to_string(LedgerErrorKind kind);

class LedgerError : public std::runtime_error {
public:
    LedgerError(LedgerErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    LedgerErrorKind kind() const { return kind_; }

private:
    LedgerErrorKind kind_;
};

struct TransactionAccount {
    AccountId id{};
    Amount balance;
};

/// Execution funding that can only flow to the pool (when lines run) or back
/// to its owner.
struct SmartContractAccount {
    ContractId id{};
    AccountId owner{};
    Amount balance;
};

enum class DepositStatus { serving, matured, confiscated };

const char* to_string(DepositStatus status);

struct MarginDeposit {
    DepositId id{};
    AccountId owner{};
    Amount principal;
    Height start = 0;
    Height term = 0;
    DepositStatus status = DepositStatus::serving;

    Height end() const { return start + term; }
};

/// System treasury. `earmarks` are the compensation reserves per
/// registration cohort; the rest of the balance is free.
struct FundingPool {
    Amount balance;
    std::map<Height, Amount> earmarks;
    Amount reserved;  // sum of earmarks

    Amount free() const { return balance - reserved; }
};

struct ExecutionResult {
    Amount paid;
    std::uint64_t executed_lines = 0;
};

/// The single source of money truth: transaction, contract and margin
/// accounts plus the funding pool.
///
/// Every mutating call validates all of its preconditions before touching any
/// balance, so it either applies completely or throws LedgerError and leaves
/// the state unchanged. After every call
///
///     sum(transaction) + sum(contract) + sum(serving margin) + pool == minted
///
/// holds exactly.
class Ledger {
public:
    explicit Ledger(Amount transaction_fee = Amount(1));

    const Amount& transaction_fee() const { return fee_; }

    /// Height stamped on operation-log lines.
    void set_height(Height height) { height_ = height; }
    Height height() const { return height_; }

    /// Streams one tab-separated line per operation to `out` (nullptr stops).
    void set_oplog(std::ostream* out) { oplog_ = out; }

    AccountId open_account();
    ContractId open_contract(AccountId owner);

    void mint(const Amount& amount);

    /// Pays from the free (unreserved) part of the pool to an account.
    void pay_from_pool(AccountId to, const Amount& amount);

    void transfer(AccountId from, AccountId to, const Amount& amount, const Amount& fee);

    void fund_contract(AccountId owner, ContractId contract, const Amount& amount, const Amount& fee);
    void withdraw_contract(ContractId contract, AccountId to, const Amount& amount);

    /// Pays min(balance, lines * price) to the pool. Only whole lines run; the
    /// unspent remainder stays pending in the contract. A zero price runs all
    /// requested lines for free.
    ExecutionResult execute_contract(ContractId contract, std::uint64_t lines, const Amount& price);

    /// Freezes `margin` from the owner (plus the fixed fee) as a new serving
    /// deposit. An owner may hold any number of deposits at once.
    DepositId register_reliable(AccountId owner, const Amount& margin, Height term, Height now);

    /// Moves free pool funds into the cohort's compensation reserve.
    void reserve_earmark(Height cohort, const Amount& amount);

    /// Returns whatever is left of a cohort's reserve to the free pool.
    void release_earmark(Height cohort);

    /// Returns principal plus `compensation` (drawn from the deposit's cohort
    /// reserve) to the owner. The deposit must be serving and at its end height.
    void mature_deposit(DepositId deposit, const Amount& compensation);

    /// Moves the principal to the free pool.
    void confiscate_deposit(DepositId deposit);

    const Amount& balance(AccountId id) const { return account(id).balance; }
    const Amount& contract_balance(ContractId id) const { return contract(id).balance; }
    const TransactionAccount& account(AccountId id) const;
    const SmartContractAccount& contract(ContractId id) const;
    const MarginDeposit& deposit(DepositId id) const;
    const FundingPool& pool() const { return pool_; }
    const Amount& minted() const { return minted_; }

    std::span<const TransactionAccount> accounts() const { return accounts_; }
    std::span<const SmartContractAccount> contracts() const { return contracts_; }
    std::span<const MarginDeposit> deposits() const { return deposits_; }
    const std::set<DepositId>& serving() const { return serving_; }

    /// Sum of serving principals (maintained incrementally).
    const Amount& margin_total() const { return margin_total_; }

    /// Money that entered the pool from mint, fees and execution since the
    /// last reset. Confiscations and releases are not inflow.
    const Amount& inflow() const { return inflow_; }
    void reset_inflow() { inflow_ = Amount(); }

    /// Recomputes every holding from scratch; empty when conservation holds,
    /// otherwise a diagnostic.
    std::string audit() const;

private:
    TransactionAccount& account_mut(AccountId id);
    SmartContractAccount& contract_mut(ContractId id);
    MarginDeposit& deposit_mut(DepositId id);
    void require_funds(const Amount& have, const Amount& need, const char* what) const;
    void log(const std::string& op, std::initializer_list<std::string> params);

    Amount fee_;
    Height height_ = 0;
    std::ostream* oplog_ = nullptr;

    std::vector<TransactionAccount> accounts_;
    std::vector<SmartContractAccount> contracts_;
    std::vector<MarginDeposit> deposits_;
    std::set<DepositId> serving_;
    FundingPool pool_;
    Amount minted_;
    Amount margin_total_;
    Amount inflow_;
};

}  // namespace shardecon
