#include "shardecon/ledger.hpp"

#include <sstream>

namespace shardecon {

const char* to_string(LedgerErrorKind kind)
{
    switch (kind) {
    case LedgerErrorKind::insufficient_funds: return "insufficient funds";
    case LedgerErrorKind::unknown_account: return "unknown account";
    case LedgerErrorKind::ownership_violation: return "ownership violation";
    case LedgerErrorKind::wrong_state: return "wrong state";
    case LedgerErrorKind::earmark_exhausted: return "earmark exhausted";
    case LedgerErrorKind::invalid_argument: return "invalid argument";
    }
    return "ledger error";
}

const char* to_string(DepositStatus status)
{
    switch (status) {
    case DepositStatus::serving: return "serving";
    case DepositStatus::matured: return "matured";
    case DepositStatus::confiscated: return "confiscated";
    }
    return "?";
}

Ledger::Ledger(Amount transaction_fee) : fee_(std::move(transaction_fee)) {}

AccountId Ledger::open_account()
{
    const auto id = static_cast<AccountId>(accounts_.size());
    accounts_.push_back({id, Amount()});
    return id;
}

ContractId Ledger::open_contract(AccountId owner)
{
    account(owner);
    const auto id = static_cast<ContractId>(contracts_.size());
    contracts_.push_back({id, owner, Amount()});
    return id;
}

const TransactionAccount& Ledger::account(AccountId id) const
{
    if (index_of(id) >= accounts_.size())
        throw LedgerError(LedgerErrorKind::unknown_account, "transaction account " + std::to_string(index_of(id)));
    return accounts_[index_of(id)];
}

const SmartContractAccount& Ledger::contract(ContractId id) const
{
    if (index_of(id) >= contracts_.size())
        throw LedgerError(LedgerErrorKind::unknown_account, "contract account " + std::to_string(index_of(id)));
    return contracts_[index_of(id)];
}

const MarginDeposit& Ledger::deposit(DepositId id) const
{
    if (index_of(id) >= deposits_.size())
        throw LedgerError(LedgerErrorKind::unknown_account, "deposit " + std::to_string(index_of(id)));
    return deposits_[index_of(id)];
}

TransactionAccount& Ledger::account_mut(AccountId id) { return const_cast<TransactionAccount&>(account(id)); }
SmartContractAccount& Ledger::contract_mut(ContractId id) { return const_cast<SmartContractAccount&>(contract(id)); }
MarginDeposit& Ledger::deposit_mut(DepositId id) { return const_cast<MarginDeposit&>(deposit(id)); }

void Ledger::require_funds(const Amount& have, const Amount& need, const char* what) const
{
    if (have < need)
        throw LedgerError(LedgerErrorKind::insufficient_funds,
                          std::string(what) + " holds " + have.str() + ", needs " + need.str());
}

void Ledger::log(const std::string& op, std::initializer_list<std::string> params)
{
    *oplog_ << height_ << '\t' << op;
    for (const auto& p : params)
        *oplog_ << '\t' << p;
    *oplog_ << '\t' << pool_.balance.str() << '\n';
}

void Ledger::mint(const Amount& amount)
{
    pool_.balance += amount;
    minted_ += amount;
    inflow_ += amount;
    if (oplog_)
        log("mint", {amount.str()});
}

void Ledger::pay_from_pool(AccountId to, const Amount& amount)
{
    auto& dst = account_mut(to);
    require_funds(pool_.free(), amount, "free pool");
    pool_.balance -= amount;
    dst.balance += amount;
    if (oplog_)
        log("pay", {std::to_string(index_of(to)), amount.str()});
}

void Ledger::transfer(AccountId from, AccountId to, const Amount& amount, const Amount& fee)
{
    auto& src = account_mut(from);
    auto& dst = account_mut(to);
    require_funds(src.balance, amount + fee, "sender");
    src.balance -= amount + fee;
    dst.balance += amount;
    pool_.balance += fee;
    inflow_ += fee;
    if (oplog_)
        log("transfer", {std::to_string(index_of(from)), std::to_string(index_of(to)), amount.str(), fee.str()});
}

void Ledger::fund_contract(AccountId owner, ContractId contract_id, const Amount& amount, const Amount& fee)
{
    auto& src = account_mut(owner);
    auto& dst = contract_mut(contract_id);
    if (dst.owner != owner)
        throw LedgerError(LedgerErrorKind::ownership_violation,
                          "contract " + std::to_string(index_of(contract_id)) + " is not owned by account " +
                              std::to_string(index_of(owner)));
    require_funds(src.balance, amount + fee, "owner");
    src.balance -= amount + fee;
    dst.balance += amount;
    pool_.balance += fee;
    inflow_ += fee;
    if (oplog_)
        log("fund", {std::to_string(index_of(owner)), std::to_string(index_of(contract_id)), amount.str(), fee.str()});
}

void Ledger::withdraw_contract(ContractId contract_id, AccountId to, const Amount& amount)
{
    auto& src = contract_mut(contract_id);
    auto& dst = account_mut(to);
    if (src.owner != to)
        throw LedgerError(LedgerErrorKind::ownership_violation,
                          "contract " + std::to_string(index_of(contract_id)) + " can only pay back account " +
                              std::to_string(index_of(src.owner)));
    require_funds(src.balance, amount, "contract");
    src.balance -= amount;
    dst.balance += amount;
    if (oplog_)
        log("withdraw", {std::to_string(index_of(contract_id)), std::to_string(index_of(to)), amount.str()});
}

ExecutionResult Ledger::execute_contract(ContractId contract_id, std::uint64_t lines, const Amount& price)
{
    auto& c = contract_mut(contract_id);
    ExecutionResult result;
    if (price.is_zero()) {
        result.executed_lines = lines;
    } else {
        const Amount cost = price * lines;
        if (c.balance >= cost) {
            result.paid = cost;
            result.executed_lines = lines;
        } else {
            mpz_class whole;
            mpz_fdiv_q(whole.get_mpz_t(), c.balance.value().get_mpz_t(), price.value().get_mpz_t());
            result.executed_lines = Amount(whole).to_u64();
            result.paid = price * result.executed_lines;
        }
    }
    c.balance -= result.paid;
    pool_.balance += result.paid;
    inflow_ += result.paid;
    if (oplog_)
        log("execute", {std::to_string(index_of(contract_id)), std::to_string(lines), price.str(), result.paid.str(),
                    std::to_string(result.executed_lines)});
    return result;
}

DepositId Ledger::register_reliable(AccountId owner, const Amount& margin, Height term, Height now)
{
    auto& src = account_mut(owner);
    if (margin.is_zero())
        throw LedgerError(LedgerErrorKind::invalid_argument, "margin must be positive");
    require_funds(src.balance, margin + fee_, "registrant");
    src.balance -= margin + fee_;
    pool_.balance += fee_;
    inflow_ += fee_;
    const auto id = static_cast<DepositId>(deposits_.size());
    deposits_.push_back({id, owner, margin, now, term, DepositStatus::serving});
    serving_.insert(id);
    margin_total_ += margin;
    if (oplog_)
        log("register", {std::to_string(index_of(owner)), margin.str(), std::to_string(term), std::to_string(now),
                     std::to_string(index_of(id))});
    return id;
}

void Ledger::reserve_earmark(Height cohort, const Amount& amount)
{
    require_funds(pool_.free(), amount, "free pool");
    pool_.earmarks[cohort] += amount;
    pool_.reserved += amount;
    if (oplog_)
        log("earmark", {std::to_string(cohort), amount.str()});
}

void Ledger::release_earmark(Height cohort)
{
    auto it = pool_.earmarks.find(cohort);
    if (it == pool_.earmarks.end())
        return;
    const Amount released = it->second;
    pool_.earmarks.erase(it);
    pool_.reserved -= released;
    if (oplog_)
        log("release", {std::to_string(cohort), released.str()});
}

void Ledger::mature_deposit(DepositId id, const Amount& compensation)
{
    auto& d = deposit_mut(id);
    if (d.status != DepositStatus::serving)
        throw LedgerError(LedgerErrorKind::wrong_state,
                          "deposit " + std::to_string(index_of(id)) + " is " + to_string(d.status));
    if (height_ != d.end())
        throw LedgerError(LedgerErrorKind::wrong_state, "deposit " + std::to_string(index_of(id)) + " ends at " +
                                                            std::to_string(d.end()) + ", now " +
                                                            std::to_string(height_));
    auto& dst = account_mut(d.owner);
    if (!compensation.is_zero()) {
        auto it = pool_.earmarks.find(d.start);
        if (it == pool_.earmarks.end() || it->second < compensation)
            throw LedgerError(LedgerErrorKind::earmark_exhausted,
                              "cohort " + std::to_string(d.start) + " cannot pay " + compensation.str());
        it->second -= compensation;
        if (it->second.is_zero())
            pool_.earmarks.erase(it);
        pool_.reserved -= compensation;
        pool_.balance -= compensation;
    }
    dst.balance += d.principal + compensation;
    margin_total_ -= d.principal;
    d.status = DepositStatus::matured;
    serving_.erase(id);
    if (oplog_)
        log("mature", {std::to_string(index_of(id)), d.principal.str(), compensation.str()});
}

void Ledger::confiscate_deposit(DepositId id)
{
    auto& d = deposit_mut(id);
    if (d.status != DepositStatus::serving)
        throw LedgerError(LedgerErrorKind::wrong_state,
                          "deposit " + std::to_string(index_of(id)) + " is " + to_string(d.status));
    pool_.balance += d.principal;
    margin_total_ -= d.principal;
    d.status = DepositStatus::confiscated;
    serving_.erase(id);
    if (oplog_)
        log("confiscate", {std::to_string(index_of(id)), d.principal.str()});
}

std::string Ledger::audit() const
{
    Amount transactions;
    for (const auto& a : accounts_)
        transactions += a.balance;
    Amount contracts;
    for (const auto& c : contracts_)
        contracts += c.balance;
    Amount margins;
    for (const auto id : serving_)
        margins += deposits_[index_of(id)].principal;

    std::ostringstream out;
    const Amount held = transactions + contracts + margins + pool_.balance;
    if (held != minted_)
        out << "conservation broken: transactions " << transactions.str() << " + contracts " << contracts.str()
            << " + margins " << margins.str() << " + pool " << pool_.balance.str() << " = " << held.str()
            << " != minted " << minted_.str() << "; ";
    if (margins != margin_total_)
        out << "margin total drifted: tracked " << margin_total_.str() << ", actual " << margins.str() << "; ";
    Amount earmarked;
    for (const auto& [cohort, amount] : pool_.earmarks)
        earmarked += amount;
    if (earmarked != pool_.reserved)
        out << "reserve total drifted: tracked " << pool_.reserved.str() << ", actual " << earmarked.str() << "; ";
    if (pool_.balance < earmarked)
        out << "pool " << pool_.balance.str() << " below earmarks " << earmarked.str() << "; ";
    return out.str();
}

}  // namespace shardecon
