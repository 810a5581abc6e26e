// ape: transaction imitation engine for EVM-style bytecode
// Copyright 2026 The ape authors.
// Licensed under the Apache License, Version 2.0.

#include "ape/profit.hpp"

#include <json.hpp>

#include "ape/contracts.hpp"
#include "ape/interpreter.hpp"

namespace ape
{
namespace
{
Word storage_value(const WorldState& s, const Address& account, const Word& slot)
{
    const Account* acc = s.find(account);
    if (!acc)
        return 0;
    auto it = acc->storage.find(slot);
    return it == acc->storage.end() ? Word{0} : it->second;
}

Word token_balance(const WorldState& s, const StateFixture& f, const Address& token,
                   const Address& account)
{
    auto layout = f.token_layouts.find(token);
    if (layout == f.token_layouts.end())
        throw UnknownAssetLayout("no declared storage layout for token " + to_hex(token));
    Word slot = canned::map_slot(word_from_address(account), layout->second.balance_slot);
    return storage_value(s, token, slot);
}

SignedWei signed_diff(const Word& after, const Word& before)
{
    if (after >= before)
        return SignedWei(after - before);
    return -SignedWei(before - after);
}
}  // namespace

Word token_balance_of(const WorldState& state, const StateFixture& fixture, const Address& token,
                      const Address& account)
{
    return token_balance(state, fixture, token, account);
}

SignedWei balance_delta(const StateFixture& fixture, const Transaction& tx,
                        const Address& account, const std::optional<Address>& token,
                        const GasTable& gas)
{
    WorldState scratch = fixture.state;
    Word before = token ? token_balance(scratch, fixture, *token, account)
                        : scratch.balance_of(account);
    execute_transaction(scratch, tx, gas);
    Word after = token ? token_balance(scratch, fixture, *token, account)
                       : scratch.balance_of(account);
    return signed_diff(after, before);
}

std::vector<AssetTransfer> extract_transfers(const DCFG& dcfg, const ExecutionResult& exec,
                                             const Transaction& tx_v)
{
    std::vector<AssetTransfer> out;

    if (tx_v.value != 0 && tx_v.to)
        out.push_back(AssetTransfer{std::nullopt, tx_v.sender, *tx_v.to, tx_v.value});

    for (const CallEdge& e : dcfg.call_edges)
    {
        if (e.value == 0)
            continue;
        if (e.kind == CallKind::CallCode)
            continue;  // self-to-self, no net flow
        if (e.callee_frame == UINT64_MAX || !dcfg.frame_committed(e.callee_frame))
            continue;
        out.push_back(
            AssetTransfer{std::nullopt, e.caller_block.contract, e.callee, e.value});
    }

    const Word transfer_topic = canned::erc20_transfer_topic();
    for (const LogEntry& log : exec.logs)
    {
        if (log.topics.size() != 3 || log.topics[0] != transfer_topic)
            continue;
        auto from = address_from_word(log.topics[1]);
        auto to = address_from_word(log.topics[2]);
        if (!from || !to)
            continue;
        out.push_back(AssetTransfer{log.emitter, *from, *to,
                                    word_from_bytes(BytesView{log.data.data(), log.data.size()})});
    }
    return out;
}

ProfitReport analyze_profitability(const DCFG& dcfg, const ExecutionResult& exec,
                                   const StateFixture& fixture, const Transaction& tx_v,
                                   const WorldState* post_state)
{
    ProfitReport rep;
    rep.transfers = extract_transfers(dcfg, exec, tx_v);

    const Word transfer_topic = canned::erc20_transfer_topic();
    const Word approval_topic = canned::erc20_approval_topic();
    for (const LogEntry& log : exec.logs)
    {
        if (!log.topics.empty() &&
            (log.topics[0] == transfer_topic || log.topics[0] == approval_topic))
            rep.event_emitting_assets.insert(log.emitter);
    }

    for (const AssetTransfer& t : rep.transfers)
    {
        SignedWei value;
        if (!t.token)
        {
            value = SignedWei(t.amount);
        }
        else if (auto q = try_quote_to_native(*t.token, t.amount, fixture))
        {
            value = SignedWei(*q);
        }
        else
        {
            rep.unpriced_assets.insert(*t.token);
            value = 0;
        }
        rep.per_account_net[t.from] -= value;
        rep.per_account_net[t.to] += value;
    }

    for (const auto& [account, net] : rep.per_account_net)
        if (net > 0)
            rep.beneficiaries.insert(account);

    if (auto it = rep.per_account_net.find(tx_v.sender); it != rep.per_account_net.end())
        rep.sender_net = it->second;

    if (rep.beneficiaries.count(tx_v.sender))
    {
        rep.proceed = true;
    }
    else
    {
        SignedWei collective = 0;
        for (const Address& b : rep.beneficiaries)
            collective += rep.per_account_net[b];
        rep.proceed = (collective + rep.sender_net) > 0;
    }

    // log-derived deltas vs storage diffs; disagreement usually means a
    // token that emits events it does not honor (or vice versa)
    if (post_state)
    {
        std::map<std::pair<Address, Address>, SignedWei> log_delta;
        for (const AssetTransfer& t : rep.transfers)
        {
            if (!t.token || !fixture.token_layouts.count(*t.token))
                continue;
            log_delta[{*t.token, t.from}] -= SignedWei(t.amount);
            log_delta[{*t.token, t.to}] += SignedWei(t.amount);
        }
        for (const auto& [key, dlog] : log_delta)
        {
            const auto& [token, account] = key;
            if (account.is_zero())
                continue;  // mint/burn counterparty has no balance slot
            SignedWei dstore =
                signed_diff(token_balance(*post_state, fixture, token, account),
                            token_balance(fixture.state, fixture, token, account));
            if (dstore != dlog)
                rep.warnings.push_back("storage-diff cross-check failed for token " +
                                       to_hex(token) + " account " + to_hex(account));
        }
    }

    return rep;
}

std::string ProfitReport::to_json_text() const
{
    using nlohmann::json;
    json j;
    json nets = json::object();
    for (const auto& [a, v] : per_account_net)
        nets[to_hex(a)] = v.str();
    j["perAccountNet"] = nets;
    json bens = json::array();
    for (const auto& b : beneficiaries)
        bens.push_back(to_hex(b));
    j["beneficiaries"] = bens;
    j["senderNet"] = sender_net.str();
    j["decision"] = proceed ? "proceed" : "abort";
    json unpriced = json::array();
    for (const auto& a : unpriced_assets)
        unpriced.push_back(to_hex(a));
    j["unpricedAssets"] = unpriced;
    json xfers = json::array();
    for (const auto& t : transfers)
        xfers.push_back(json{{"asset", t.token ? to_hex(*t.token) : "native"},
                             {"from", to_hex(t.from)},
                             {"to", to_hex(t.to)},
                             {"amount", to_hex(t.amount)}});
    j["transfers"] = xfers;
    j["warnings"] = warnings;
    return j.dump(2) + "\n";
}

}  // namespace ape
